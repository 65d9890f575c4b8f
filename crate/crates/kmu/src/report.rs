//! Run reports and jump traces on disk.
//!
//! Reports are CSV with one record per run and the header
//! `dataset,algorithm,k,run,seed,sse,iterations_lloyd,jumps_attempted,jumps_accepted,retries_used,wall_time_ms`.
//! Floats are written in shortest round-trip form, so reading a report back
//! yields identical values. Traces are JSON lines, one attempted jump per
//! line.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use kmu_core::JumpTrace;
use serde::{Deserialize, Serialize};

use crate::io::IoError;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Random seeding followed by Lloyd.
    Km,
    /// k-means++.
    Kmpp,
    /// k-means++ refined by jumps until the first failure.
    Kmu,
    /// k-means++ refined by jumps with retries.
    Kms,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Km => "km",
            Self::Kmpp => "kmpp",
            Self::Kmu => "kmu",
            Self::Kms => "kms",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub k: usize,
    /// Run index within its k value.
    pub run: usize,
    pub seed: u64,
    pub sse: f64,
    /// Lloyd iterations spent by this phase alone (summed over restarts).
    pub iterations_lloyd: usize,
    pub jumps_attempted: usize,
    pub jumps_accepted: usize,
    pub retries_used: usize,
    pub wall_time_ms: f64,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_owned(),
        source,
    }
}

pub fn write_reports_to(out: impl Write, reports: &[RunReport]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in reports {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_reports(path: impl AsRef<Path>, reports: &[RunReport]) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })?;
    write_reports_to(BufWriter::new(file), reports).map_err(csv_err(path))
}

pub fn read_reports_from(input: impl Read, path: &Path) -> Result<Vec<RunReport>, IoError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<Vec<RunReport>, _>>()
        .map_err(csv_err(path))
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<RunReport>, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_reports_from(file, path)
}

/// One JSON object per attempted jump.
pub fn write_trace(out: &mut impl Write, trace: &JumpTrace) -> std::io::Result<()> {
    for rec in &trace.records {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> Vec<RunReport> {
        vec![
            RunReport {
                dataset: "grid-6x6".into(),
                algorithm: Algorithm::Kmpp,
                k: 36,
                run: 0,
                seed: u64::MAX - 3,
                sse: 1.458_333_333_333_333_5,
                iterations_lloyd: 120,
                jumps_attempted: 0,
                jumps_accepted: 0,
                retries_used: 0,
                wall_time_ms: 3.25,
            },
            RunReport {
                dataset: "grid-6x6".into(),
                algorithm: Algorithm::Kms,
                k: 36,
                run: 0,
                seed: 17,
                sse: 0.1 + 0.2,
                iterations_lloyd: 9,
                jumps_attempted: 4,
                jumps_accepted: 1,
                retries_used: 2,
                wall_time_ms: 0.0,
            },
        ]
    }

    #[test]
    fn reports_round_trip() {
        let mut buf = Vec::new();
        write_reports_to(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "dataset,algorithm,k,run,seed,sse,iterations_lloyd,jumps_attempted,jumps_accepted,retries_used,wall_time_ms\n"
        ));
        let back = read_reports_from(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn truncated_report_is_a_parse_error() {
        let mut buf = Vec::new();
        write_reports_to(&mut buf, &sample()).unwrap();
        buf.truncate(buf.len() - 20);
        let err = read_reports_from(buf.as_slice(), Path::new("cut.csv")).unwrap_err();
        assert!(matches!(err, IoError::Csv { .. }), "{err}");
    }

    #[test]
    fn trace_lines() {
        let trace = JumpTrace {
            records: vec![kmu_core::JumpRecord {
                jump: 0,
                lambda: 3,
                mu: 1,
                offset: vec![0.5, -0.5],
                sse_before: 2.0,
                sse_after: 1.5,
                accepted: true,
                retry: 0,
                lloyd_iterations: 4,
            }],
            best_sse: 1.5,
            stop: kmu_core::jumps::StopReason::NoImprovement,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        let back: kmu_core::JumpRecord = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(back, trace.records[0]);
    }
}
