//! Experiment harness.
//!
//! Every `(k, run)` cell executes three chained phases on its own RNG
//! stream: k-means++ (best of `restarts`), k-means-u starting from that
//! result, and k-means-u* starting from the k-means-u result. Each phase
//! yields one [`RunReport`]. Per-k aggregates ([`KSummary`]) are computed
//! from the reports alone, so they can be rebuilt from a saved report file.
//!
//! Cell seeds are derived as
//! `splitmix64(splitmix64(splitmix64(master) ^ k) ^ run)`, which makes any
//! single cell reproducible in isolation.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use kmu_core::datagen::{self, GridSpec, MixtureSpec, OneDSpec};
use kmu_core::{
    jumps, lloyd, seeding, Dataset, JumpConfig, JumpTrace, LloydConfig, LloydResult, SeedingConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{self, CsvOptions, IoError};
use crate::report::{Algorithm, RunReport};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Io(#[from] IoError),

    #[error(transparent)]
    Core(#[from] kmu_core::Error),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("metric error: {0}")]
    Metric(String),
}

/// Percentage by which `phi_new` undercuts `phi_base`.
pub fn improvement_pct(phi_base: f64, phi_new: f64) -> Result<f64, BenchError> {
    if phi_new > phi_base {
        return Err(BenchError::Metric(format!(
            "refined SSE {phi_new} exceeds baseline {phi_base}"
        )));
    }
    if phi_base <= 0.0 {
        // both zero: nothing to improve
        return if phi_base == 0.0 {
            Ok(0.0)
        } else {
            Err(BenchError::Metric(format!(
                "baseline SSE {phi_base} is negative"
            )))
        };
    }
    Ok(100.0 * (phi_base - phi_new) / phi_base)
}

/// Extra Lloyd iterations as a percentage of the baseline's iterations.
pub fn overhead_pct(
    extra_iterations: usize,
    baseline_iterations: usize,
) -> Result<f64, BenchError> {
    if baseline_iterations == 0 {
        return Err(BenchError::Metric(
            "baseline ran no Lloyd iterations".into(),
        ));
    }
    Ok(100.0 * extra_iterations as f64 / baseline_iterations as f64)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// RNG seed of cell `(k, run)` under `master`.
pub fn cell_seed(master: u64, k: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ k as u64) ^ run as u64)
}

/// Algorithm tunables shared by single runs and experiment cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    pub restarts: usize,
    /// Greedy seeding candidates; `None` means `2 + ⌊ln k⌋`.
    pub candidates: Option<usize>,
    pub epsilon: f64,
    pub retry_max: usize,
    /// Jump cap; `None` means `10·k`.
    pub max_jumps: Option<usize>,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            restarts: 10,
            candidates: None,
            epsilon: 0.01,
            retry_max: 2,
            max_jumps: None,
            max_iterations: 300,
            tolerance: 0.0,
        }
    }
}

impl RunParams {
    pub fn lloyd(&self) -> LloydConfig {
        LloydConfig {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
        }
    }

    pub fn seeding(&self, k: usize) -> SeedingConfig {
        let cfg = SeedingConfig::new(k).with_restarts(self.restarts);
        match self.candidates {
            Some(c) => cfg.with_candidates(c),
            None => cfg,
        }
    }

    pub fn jumps(&self, k: usize) -> JumpConfig {
        let cfg = JumpConfig::new(k)
            .with_epsilon(self.epsilon)
            .with_retries(self.retry_max);
        match self.max_jumps {
            Some(max_jumps) => JumpConfig { max_jumps, ..cfg },
            None => cfg,
        }
    }
}

/// Identifies the cell a report belongs to.
struct Cell<'a> {
    data: &'a Dataset,
    k: usize,
    run: usize,
    seed: u64,
}

impl Cell<'_> {
    fn report(
        &self,
        algorithm: Algorithm,
        sse: f64,
        iterations: usize,
        trace: Option<&JumpTrace>,
        started: Instant,
    ) -> RunReport {
        RunReport {
            dataset: self.data.name().to_owned(),
            algorithm,
            k: self.k,
            run: self.run,
            seed: self.seed,
            sse,
            iterations_lloyd: iterations,
            jumps_attempted: trace.map_or(0, JumpTrace::attempted),
            jumps_accepted: trace.map_or(0, JumpTrace::accepted),
            retries_used: trace.map_or(0, JumpTrace::retries_used),
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// Outcome of a single algorithm run.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub report: RunReport,
    pub result: LloydResult,
    pub trace: Option<JumpTrace>,
}

/// Runs one algorithm. `kmu` and `kms` first run k-means++ and refine its
/// result; the report counts only the refinement's Lloyd iterations.
pub fn run_single(
    data: &Dataset,
    algorithm: Algorithm,
    k: usize,
    seed: u64,
    params: &RunParams,
) -> Result<SingleRun, BenchError> {
    let cell = Cell {
        data,
        k,
        run: 0,
        seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lloyd_cfg = params.lloyd();
    let started = Instant::now();
    let (result, iterations, trace) = match algorithm {
        Algorithm::Km => {
            if params.restarts == 0 {
                return Err(BenchError::Plan("restarts must be at least 1".into()));
            }
            let mut best: Option<LloydResult> = None;
            let mut total = 0;
            for _ in 0..params.restarts {
                let init = lloyd::seed_random(data, k, &mut rng)?;
                let res = lloyd::run_lloyd(data, init, &lloyd_cfg)?;
                total += res.iterations;
                if best.as_ref().is_none_or(|b| res.sse < b.sse) {
                    best = Some(res);
                }
            }
            (best.expect("restarts >= 1"), total, None)
        }
        Algorithm::Kmpp => {
            let out = seeding::kmpp(data, &params.seeding(k), &lloyd_cfg, &mut rng)?;
            (out.best, out.total_iterations, None)
        }
        Algorithm::Kmu | Algorithm::Kms => {
            let base = seeding::kmpp(data, &params.seeding(k), &lloyd_cfg, &mut rng)?;
            let started = Instant::now();
            let jump_cfg = params.jumps(k);
            let (res, trace) = if algorithm == Algorithm::Kmu {
                jumps::run_kmu(data, &base.best, &lloyd_cfg, &jump_cfg, &mut rng)?
            } else {
                jumps::run_kms(data, &base.best, &lloyd_cfg, &jump_cfg, &mut rng)?
            };
            let iterations = res.iterations;
            let report = cell.report(algorithm, res.sse, iterations, Some(&trace), started);
            return Ok(SingleRun {
                report,
                result: res,
                trace: Some(trace),
            });
        }
    };
    let report = cell.report(algorithm, result.sse, iterations, trace, started);
    Ok(SingleRun {
        report,
        result,
        trace: None,
    })
}

/// The three chained phases of one experiment cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub reports: [RunReport; 3],
    pub kmu_trace: JumpTrace,
    pub kms_trace: JumpTrace,
}

pub fn run_cell(
    data: &Dataset,
    k: usize,
    run: usize,
    seed: u64,
    params: &RunParams,
) -> Result<CellOutcome, BenchError> {
    let cell = Cell { data, k, run, seed };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lloyd_cfg = params.lloyd();
    let jump_cfg = params.jumps(k);

    let t = Instant::now();
    let base = seeding::kmpp(data, &params.seeding(k), &lloyd_cfg, &mut rng)?;
    let r_pp = cell.report(
        Algorithm::Kmpp,
        base.best.sse,
        base.total_iterations,
        None,
        t,
    );

    let t = Instant::now();
    let (kmu, kmu_trace) = jumps::run_kmu(data, &base.best, &lloyd_cfg, &jump_cfg, &mut rng)?;
    let r_u = cell.report(Algorithm::Kmu, kmu.sse, kmu.iterations, Some(&kmu_trace), t);

    let t = Instant::now();
    let (kms, kms_trace) = jumps::run_kms(data, &kmu, &lloyd_cfg, &jump_cfg, &mut rng)?;
    let r_s = cell.report(Algorithm::Kms, kms.sse, kms.iterations, Some(&kms_trace), t);

    Ok(CellOutcome {
        reports: [r_pp, r_u, r_s],
        kmu_trace,
        kms_trace,
    })
}

fn default_n_side() -> usize {
    36
}

fn default_delimiter() -> char {
    ','
}

/// Where an experiment's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSource {
    GridA {
        #[serde(flatten)]
        spec: GridSpec,
    },
    FlatB {
        #[serde(default = "default_n_side")]
        n_side: usize,
    },
    Oned {
        #[serde(flatten)]
        spec: OneDSpec,
    },
    Gmm {
        #[serde(flatten)]
        spec: MixtureSpec,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default)]
        header: bool,
        #[serde(default)]
        columns: Option<Vec<usize>>,
        /// Standardize every dimension after loading.
        #[serde(default)]
        scale: bool,
    },
}

impl DatasetSource {
    /// `base` resolves relative CSV paths.
    pub fn load(&self, base: Option<&Path>) -> Result<Dataset, BenchError> {
        Ok(match self {
            Self::GridA { spec } => datagen::gen_grid(spec)?,
            Self::FlatB { n_side } => datagen::gen_uniform_grid(*n_side)?,
            Self::Oned { spec } => datagen::gen_1d(spec)?,
            Self::Gmm { spec, seed } => {
                datagen::gen_mixture(spec, &mut ChaCha8Rng::seed_from_u64(*seed))?.data
            }
            Self::Csv {
                path,
                delimiter,
                header,
                columns,
                scale,
            } => {
                let delimiter = u8::try_from(*delimiter).map_err(|_| {
                    BenchError::Plan(format!("delimiter {delimiter:?} is not a single byte"))
                })?;
                let opts = CsvOptions {
                    delimiter,
                    header: *header,
                    columns: columns.clone(),
                };
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let data = io::load_csv(path, &opts)?;
                if *scale {
                    io::standardize(&data)?.0
                } else {
                    data
                }
            }
        })
    }
}

/// `k` values as an explicit list or an inclusive stepped range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KValues {
    List(Vec<usize>),
    Range {
        start: usize,
        stop: usize,
        step: usize,
    },
}

impl KValues {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { start, stop, step } => (*start..=*stop).step_by((*step).max(1)).collect(),
        }
    }
}

fn default_runs() -> usize {
    10
}

/// Experiment description, usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub dataset: DatasetSource,
    pub k: KValues,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: RunParams,
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Plan(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.runs == 0 {
            return Err(BenchError::Plan("runs must be at least 1".into()));
        }
        if self.k.values().is_empty() {
            return Err(BenchError::Plan("no k values".into()));
        }
        if self.params.restarts == 0 {
            return Err(BenchError::Plan("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// A cell that could not be executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub k: usize,
    pub run: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub dataset: Dataset,
    /// Sorted by `(k, run)`, phases in order kmpp, kmu, kms.
    pub reports: Vec<RunReport>,
    pub summaries: Vec<KSummary>,
    pub failures: Vec<CellFailure>,
    /// Jumps traces of the kms phase, keyed like `reports`.
    pub kms_traces: Vec<((usize, usize), JumpTrace)>,
}

/// Runs every `(k, run)` cell of the plan in parallel.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome, BenchError> {
    run_experiment_in(plan, None)
}

pub fn run_experiment_in(
    plan: &ExperimentPlan,
    base: Option<&Path>,
) -> Result<ExperimentOutcome, BenchError> {
    plan.validate()?;
    let data = plan.dataset.load(base)?;
    let cells: Vec<(usize, usize)> = plan
        .k
        .values()
        .into_iter()
        .flat_map(|k| (0..plan.runs).map(move |run| (k, run)))
        .collect();

    let mut outcomes: Vec<((usize, usize), Result<CellOutcome, String>)> = cells
        .par_iter()
        .map(|&(k, run)| {
            let res = if k == 0 || k > data.len() {
                Err(format!("k={k} must lie in 1..={}", data.len()))
            } else {
                run_cell(&data, k, run, cell_seed(plan.seed, k, run), &plan.params)
                    .map_err(|e| e.to_string())
            };
            ((k, run), res)
        })
        .collect();
    outcomes.sort_by_key(|(cell, _)| *cell);

    let mut reports = Vec::with_capacity(outcomes.len() * 3);
    let mut failures = Vec::new();
    let mut kms_traces = Vec::new();
    for ((k, run), res) in outcomes {
        match res {
            Ok(cell) => {
                reports.extend(cell.reports);
                kms_traces.push(((k, run), cell.kms_trace));
            }
            Err(message) => failures.push(CellFailure { k, run, message }),
        }
    }
    let summaries = summarize(&reports)?;
    Ok(ExperimentOutcome {
        dataset: data,
        reports,
        summaries,
        failures,
        kms_traces,
    })
}

/// Aggregates of one refinement algorithm over the runs of one k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algo: Algorithm,
    /// SSE reduction relative to k-means++, in percent.
    pub mean_impr: f64,
    pub min_impr: f64,
    pub max_impr: f64,
    /// Mean extra Lloyd iterations relative to the k-means++ baseline (all
    /// restarts), in percent.
    pub overhead_pct: f64,
    /// Fraction of runs where the SSE ended strictly below k-means++.
    pub frac_improved: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSummary {
    pub k: usize,
    pub runs: usize,
    pub kmu: AlgoSummary,
    pub kms: AlgoSummary,
}

struct PerRun {
    impr: f64,
    overhead: f64,
    improved: bool,
}

fn aggregate(algo: Algorithm, rows: &[PerRun]) -> AlgoSummary {
    let n = rows.len() as f64;
    AlgoSummary {
        algo,
        mean_impr: rows.iter().map(|r| r.impr).sum::<f64>() / n,
        min_impr: rows.iter().map(|r| r.impr).fold(f64::INFINITY, f64::min),
        max_impr: rows
            .iter()
            .map(|r| r.impr)
            .fold(f64::NEG_INFINITY, f64::max),
        overhead_pct: rows.iter().map(|r| r.overhead).sum::<f64>() / n,
        frac_improved: rows.iter().filter(|r| r.improved).count() as f64 / n,
    }
}

/// Per-k aggregates from chained `kmpp`/`kmu`/`kms` reports.
pub fn summarize(reports: &[RunReport]) -> Result<Vec<KSummary>, BenchError> {
    let mut cells: BTreeMap<(usize, usize), [Option<&RunReport>; 3]> = BTreeMap::new();
    for r in reports {
        let slot = match r.algorithm {
            Algorithm::Kmpp => 0,
            Algorithm::Kmu => 1,
            Algorithm::Kms => 2,
            Algorithm::Km => continue,
        };
        cells.entry((r.k, r.run)).or_default()[slot] = Some(r);
    }

    let mut by_k: BTreeMap<usize, (Vec<PerRun>, Vec<PerRun>)> = BTreeMap::new();
    for ((k, run), phases) in cells {
        let [Some(pp), Some(u), Some(s)] = phases else {
            return Err(BenchError::Metric(format!(
                "cell k={k} run={run} lacks a phase"
            )));
        };
        let entry = by_k.entry(k).or_default();
        entry.0.push(PerRun {
            impr: improvement_pct(pp.sse, u.sse)?,
            overhead: overhead_pct(u.iterations_lloyd, pp.iterations_lloyd)?,
            improved: u.sse < pp.sse,
        });
        entry.1.push(PerRun {
            impr: improvement_pct(pp.sse, s.sse)?,
            overhead: overhead_pct(u.iterations_lloyd + s.iterations_lloyd, pp.iterations_lloyd)?,
            improved: s.sse < pp.sse,
        });
    }

    Ok(by_k
        .into_iter()
        .map(|(k, (u, s))| KSummary {
            k,
            runs: u.len(),
            kmu: aggregate(Algorithm::Kmu, &u),
            kms: aggregate(Algorithm::Kms, &s),
        })
        .collect())
}

/// One line of the plot-ready summary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub k: usize,
    pub algo: Algorithm,
    pub mean_impr: f64,
    pub min_impr: f64,
    pub max_impr: f64,
    pub overhead_pct: f64,
    pub frac_improved: f64,
}

pub fn summary_rows(summaries: &[KSummary]) -> Vec<SummaryRow> {
    summaries
        .iter()
        .flat_map(|s| {
            [&s.kmu, &s.kms].map(|a| SummaryRow {
                k: s.k,
                algo: a.algo,
                mean_impr: a.mean_impr,
                min_impr: a.min_impr,
                max_impr: a.max_impr,
                overhead_pct: a.overhead_pct,
                frac_improved: a.frac_improved,
            })
        })
        .collect()
}

/// Writes `k,algo,mean_impr,min_impr,max_impr,overhead_pct,frac_improved`.
pub fn write_summary(out: impl Write, summaries: &[KSummary]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in summary_rows(summaries) {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_summary(input: impl Read) -> Result<Vec<SummaryRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}
