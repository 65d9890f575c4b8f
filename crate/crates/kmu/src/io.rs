//! CSV ingestion, per-dimension standardization and dataset persistence.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use kmu_core::Dataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: line {line}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        value: String,
    },

    #[error("{path}: line {line} has {found} fields, expected {expected}")]
    Ragged {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}: column {column} does not exist (rows have {width} fields)")]
    MissingColumn {
        path: PathBuf,
        column: usize,
        width: usize,
    },

    #[error("{path}: no data rows")]
    Empty { path: PathBuf },

    #[error("dimension {0} has zero variance")]
    ZeroVariance(usize),

    #[error(transparent)]
    Core(#[from] kmu_core::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Skip the first row.
    pub header: bool,
    /// Zero-based columns to keep, in this order. `None` keeps all.
    pub columns: Option<Vec<usize>>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
            columns: None,
        }
    }
}

/// Loads a numeric CSV file; rows become points.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, opts, path, name)
}

/// Like [`load_csv`] for any reader; `path` is only used in error messages.
pub fn read_csv(
    reader: impl Read,
    opts: &CsvOptions,
    path: &Path,
    name: impl Into<String>,
) -> Result<Dataset, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut coords = Vec::new();
    let mut width = None;
    let mut d = 0;
    for record in rdr.records() {
        let record = record.map_err(|source| IoError::Csv {
            path: path.to_owned(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(IoError::Ragged {
                path: path.to_owned(),
                line,
                expected,
                found: record.len(),
            });
        }
        let parse = |column: usize| -> Result<f64, IoError> {
            let field = record.get(column).ok_or_else(|| IoError::MissingColumn {
                path: path.to_owned(),
                column,
                width: expected,
            })?;
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IoError::Parse {
                    path: path.to_owned(),
                    line,
                    column,
                    value: field.to_owned(),
                })
        };
        match &opts.columns {
            Some(cols) => {
                for &c in cols {
                    coords.push(parse(c)?);
                }
                d = cols.len();
            }
            None => {
                for c in 0..expected {
                    coords.push(parse(c)?);
                }
                d = expected;
            }
        }
    }
    if coords.is_empty() {
        return Err(IoError::Empty {
            path: path.to_owned(),
        });
    }
    Ok(Dataset::new(name, d, coords)?)
}

/// Writes one point per line, comma separated, 17 significant digits.
pub fn save_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<(), IoError> {
    let path = path.as_ref();
    let io_err = |source| IoError::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write_dataset(&mut out, data).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn write_dataset(out: &mut impl Write, data: &Dataset) -> std::io::Result<()> {
    for p in data.points() {
        let mut first = true;
        for v in p {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            write!(out, "{v:.16e}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Per-dimension mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Input dimensions present in the output, in order.
    pub kept: Vec<usize>,
}

impl ScalerParams {
    /// Maps a point from input space into standardized space.
    pub fn transform(&self, point: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .enumerate()
            .map(|(j, &c)| (point[c] - self.mean[j]) / self.std[j])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroVariance {
    #[default]
    Reject,
    Drop,
}

/// Shifts every dimension to mean 0 and scales it to unit population
/// variance. Fails on a constant dimension.
pub fn standardize(data: &Dataset) -> Result<(Dataset, ScalerParams), IoError> {
    standardize_with(data, ZeroVariance::Reject)
}

pub fn standardize_with(
    data: &Dataset,
    policy: ZeroVariance,
) -> Result<(Dataset, ScalerParams), IoError> {
    let n = data.len() as f64;
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for p in data.points() {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for p in data.points() {
        for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }

    let mut params = ScalerParams {
        mean: Vec::with_capacity(d),
        std: Vec::with_capacity(d),
        kept: Vec::with_capacity(d),
    };
    for (j, s) in var.iter().enumerate() {
        let std = (s / n).sqrt();
        if std > 0.0 {
            params.kept.push(j);
            params.mean.push(mean[j]);
            params.std.push(std);
        } else if policy == ZeroVariance::Reject {
            return Err(IoError::ZeroVariance(j));
        }
    }
    if params.kept.is_empty() {
        return Err(IoError::ZeroVariance(0));
    }
    let coords: Vec<f64> = data.points().flat_map(|p| params.transform(p)).collect();
    let out = Dataset::new(data.name(), params.kept.len(), coords)?;
    Ok((out, params))
}
