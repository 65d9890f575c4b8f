//! Utility-driven jumps on top of a converged k-means solution.
//!
//! A jump takes the least useful center `λ` (the one whose removal raises
//! the SSE the least) and moves it next to the center `μ` with the largest
//! Voronoi SSE. Both are displaced by a small random offset `o` in opposite
//! directions, `λ ← μ + o` and `μ ← μ − o`, so the hyperplane normal to `o`
//! through the old `μ` splits `μ`'s Voronoi set between them. Lloyd
//! iterations then settle the configuration and the jump is kept only if the
//! SSE strictly decreased.
//!
//! [`run_kmu`] stops at the first jump that does not improve. [`run_kms`]
//! rewinds to the best configuration and retries with a fresh random offset
//! up to `retry_max` times; any improvement resets the retry counter.
//!
//! The utility of center `i` is `φ(C ∖ {cᵢ}) − φ(C)`, evaluated in one pass
//! as `Σ_{x ∈ Cᵢ} (b² − a²)` from the runner-up distances cached in the
//! [`Partition`].

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{assign, CenterSet, Dataset, Partition};
use crate::lloyd::{run_lloyd_partitioned, LloydConfig, LloydResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpConfig {
    /// Offset length as a fraction of `d_μ`.
    pub epsilon: f64,
    /// Consecutive failed retries allowed per error level. `0` behaves like
    /// [`run_kmu`].
    pub retry_max: usize,
    /// Hard cap on attempted jumps.
    pub max_jumps: usize,
}

impl JumpConfig {
    /// `ε = 0.01`, two retries, at most `10·k` jumps.
    pub fn new(k: usize) -> Self {
        Self {
            epsilon: 0.01,
            retry_max: 2,
            max_jumps: 10 * k.max(1),
        }
    }

    pub fn with_retries(self, retry_max: usize) -> Self {
        Self { retry_max, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be a finite positive number",
            });
        }
        Ok(())
    }
}

/// One attempted jump.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpRecord {
    /// Attempt number, starting at 0.
    pub jump: usize,
    pub lambda: usize,
    pub mu: usize,
    pub offset: Vec<f64>,
    /// Best SSE before the attempt.
    pub sse_before: f64,
    /// SSE after the Lloyd run that followed the jump.
    pub sse_after: f64,
    pub accepted: bool,
    /// Value of the retry counter when the attempt was made.
    pub retry: usize,
    pub lloyd_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopReason {
    /// The allowed number of consecutive failures was used up.
    NoImprovement,
    /// `max_jumps` attempts were made.
    JumpCap,
    /// No meaningful jump exists (`k < 2`, `k ≥ n`, or zero error).
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpTrace {
    pub records: Vec<JumpRecord>,
    /// `φ_best` at termination.
    pub best_sse: f64,
    pub stop: StopReason,
}

impl JumpTrace {
    pub fn attempted(&self) -> usize {
        self.records.len()
    }

    pub fn accepted(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }

    /// Attempts made with a non-zero retry counter.
    pub fn retries_used(&self) -> usize {
        self.records.iter().filter(|r| r.retry > 0).count()
    }

    pub fn lloyd_iterations(&self) -> usize {
        self.records.iter().map(|r| r.lloyd_iterations).sum()
    }

    /// SSE values of the accepted jumps, in order.
    pub fn accepted_sse(&self) -> impl Iterator<Item = f64> + '_ {
        self.records
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.sse_after)
    }

    /// Rejected attempts at the end of the trace.
    pub fn trailing_rejections(&self) -> usize {
        self.records
            .iter()
            .rev()
            .take_while(|r| !r.accepted)
            .count()
    }
}

/// Per-center utility `Σ_{x ∈ Cᵢ} (b² − a²)`.
pub fn utilities(part: &Partition) -> Result<Vec<f64>> {
    let k = part.num_centers();
    if !part.has_second() {
        return Err(Error::TooFewCenters { k, needed: 2 });
    }
    let mut u = alloc::vec![0.0; k];
    for ((&c, &a2), &b2) in part
        .nearest_idx
        .iter()
        .zip(&part.nearest_sqdist)
        .zip(&part.second_sqdist)
    {
        u[c] += b2 - a2;
    }
    Ok(u)
}

fn argmin_excluding(values: &[f64], skip: Option<usize>) -> usize {
    let mut best = usize::MAX;
    for (i, &v) in values.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if best == usize::MAX || v < values[best] {
            best = i;
        }
    }
    best
}

/// Least useful center; lowest index on ties.
pub fn select_lambda(utilities: &[f64]) -> usize {
    argmin_excluding(utilities, None)
}

/// Center with the largest Voronoi SSE; lowest index on ties.
pub fn select_mu(part: &Partition) -> usize {
    let mut best = 0;
    for (i, &v) in part.voronoi_sse.iter().enumerate() {
        if v > part.voronoi_sse[best] {
            best = i;
        }
    }
    best
}

/// `(λ, μ)` for a jump. When the least useful center is also `μ`, the
/// second least useful one is used as `λ` instead.
pub fn select_pair(utilities: &[f64], part: &Partition) -> (usize, usize) {
    let mu = select_mu(part);
    let mut lambda = select_lambda(utilities);
    if lambda == mu && utilities.len() > 1 {
        lambda = argmin_excluding(utilities, Some(mu));
    }
    (lambda, mu)
}

/// Uniformly distributed direction in `d` dimensions: a vector of standard
/// normal draws scaled to unit length.
pub fn unit_random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    assert!(d >= 1, "dimension must be at least 1");
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm >= 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Centers after a jump, before any Lloyd iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub centers: CenterSet,
    pub lambda: usize,
    pub mu: usize,
    pub offset: Vec<f64>,
}

/// Root mean squared distance of `μ`'s Voronoi members to `μ`.
pub fn voronoi_rms(part: &Partition, mu: usize) -> Result<f64> {
    let count = part.voronoi_count[mu];
    if count == 0 {
        return Err(Error::EmptyVoronoiSet(mu));
    }
    Ok(libm::sqrt(part.voronoi_sse[mu] / count as f64))
}

fn jump_between<R: Rng + ?Sized>(
    centers: &CenterSet,
    part: &Partition,
    lambda: usize,
    mu: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<Jump> {
    let scale = epsilon * voronoi_rms(part, mu)?;
    let offset: Vec<f64> = unit_random_vector(centers.dim(), rng)
        .into_iter()
        .map(|u| scale * u)
        .collect();
    let anchor: Vec<f64> = centers.center(mu).to_vec();
    let mut next = centers.clone();
    for ((l, a), o) in next.center_mut(lambda).iter_mut().zip(&anchor).zip(&offset) {
        *l = a + o;
    }
    for ((m, a), o) in next.center_mut(mu).iter_mut().zip(&anchor).zip(&offset) {
        *m = a - o;
    }
    Ok(Jump {
        centers: next,
        lambda,
        mu,
        offset,
    })
}

/// Moves `λ` next to `μ` for the given configuration and its partition.
pub fn perform_jump<R: Rng + ?Sized>(
    centers: &CenterSet,
    part: &Partition,
    cfg: &JumpConfig,
    rng: &mut R,
) -> Result<Jump> {
    cfg.validate()?;
    let u = utilities(part)?;
    let (lambda, mu) = select_pair(&u, part);
    jump_between(centers, part, lambda, mu, cfg.epsilon, rng)
}

/// The best configuration found so far together with what the next jump
/// needs from it.
struct Best {
    result: LloydResult,
    part: Partition,
    lambda: usize,
    mu: usize,
}

impl Best {
    fn new(result: LloydResult, part: Partition) -> Result<Self> {
        let u = utilities(&part)?;
        let (lambda, mu) = select_pair(&u, &part);
        Ok(Self {
            result,
            part,
            lambda,
            mu,
        })
    }

    /// Whether a jump can still lower the error.
    fn jumpable(&self) -> bool {
        self.part.voronoi_sse.iter().any(|&e| e > 0.0)
    }
}

enum Start {
    Ready(Best),
    Done(LloydResult, JumpTrace),
}

fn start(data: &Dataset, init: &LloydResult, cfg: &JumpConfig) -> Result<Start> {
    cfg.validate()?;
    let k = init.centers.len();
    let degenerate = |init: &LloydResult| {
        let result = LloydResult {
            iterations: 0,
            ..init.clone()
        };
        let trace = JumpTrace {
            records: Vec::new(),
            best_sse: init.sse,
            stop: StopReason::Degenerate,
        };
        Start::Done(result, trace)
    };
    let part = assign(data, &init.centers)?;
    if k < 2 || k >= data.len() {
        return Ok(degenerate(init));
    }
    let best = Best::new(init.clone(), part)?;
    if !best.jumpable() {
        return Ok(degenerate(init));
    }
    Ok(Start::Ready(best))
}

struct Attempt {
    result: LloydResult,
    part: Partition,
    record: JumpRecord,
}

fn attempt<R: Rng + ?Sized>(
    data: &Dataset,
    best: &Best,
    lloyd_cfg: &LloydConfig,
    cfg: &JumpConfig,
    jump_no: usize,
    retry: usize,
    rng: &mut R,
) -> Result<Attempt> {
    let jump = jump_between(
        &best.result.centers,
        &best.part,
        best.lambda,
        best.mu,
        cfg.epsilon,
        rng,
    )?;
    let (result, part) = run_lloyd_partitioned(data, jump.centers, lloyd_cfg, |_, _| {})?;
    let record = JumpRecord {
        jump: jump_no,
        lambda: jump.lambda,
        mu: jump.mu,
        offset: jump.offset,
        sse_before: best.result.sse,
        sse_after: result.sse,
        accepted: result.sse < best.result.sse,
        retry,
        lloyd_iterations: result.iterations,
    };
    Ok(Attempt {
        result,
        part,
        record,
    })
}

fn finish(best: Best, records: Vec<JumpRecord>, stop: StopReason) -> (LloydResult, JumpTrace) {
    let iterations = records.iter().map(|r| r.lloyd_iterations).sum();
    let trace = JumpTrace {
        records,
        best_sse: best.result.sse,
        stop,
    };
    let result = LloydResult {
        iterations,
        ..best.result
    };
    (result, trace)
}

/// k-means-u: jump until the first jump that fails to lower the SSE, then
/// return the best configuration.
///
/// The returned `iterations` counts the Lloyd iterations spent on jumps
/// only. `cfg.retry_max` is ignored.
pub fn run_kmu<R: Rng + ?Sized>(
    data: &Dataset,
    init: &LloydResult,
    lloyd_cfg: &LloydConfig,
    cfg: &JumpConfig,
    rng: &mut R,
) -> Result<(LloydResult, JumpTrace)> {
    let mut best = match start(data, init, cfg)? {
        Start::Ready(best) => best,
        Start::Done(result, trace) => return Ok((result, trace)),
    };
    let mut records = Vec::new();
    loop {
        if records.len() >= cfg.max_jumps {
            return Ok(finish(best, records, StopReason::JumpCap));
        }
        let Attempt {
            result,
            part,
            record,
        } = attempt(data, &best, lloyd_cfg, cfg, records.len(), 0, rng)?;
        let accepted = record.accepted;
        records.push(record);
        if !accepted {
            return Ok(finish(best, records, StopReason::NoImprovement));
        }
        best = Best::new(result, part)?;
        if !best.jumpable() {
            return Ok(finish(best, records, StopReason::Degenerate));
        }
    }
}

/// k-means-u*: like [`run_kmu`], but a failed jump is retried from the best
/// configuration with a new random offset. The run ends after
/// `retry_max + 1` consecutive failures.
pub fn run_kms<R: Rng + ?Sized>(
    data: &Dataset,
    init: &LloydResult,
    lloyd_cfg: &LloydConfig,
    cfg: &JumpConfig,
    rng: &mut R,
) -> Result<(LloydResult, JumpTrace)> {
    let mut best = match start(data, init, cfg)? {
        Start::Ready(best) => best,
        Start::Done(result, trace) => return Ok((result, trace)),
    };
    let mut records = Vec::new();
    let mut retry = 0;
    loop {
        loop {
            if records.len() >= cfg.max_jumps {
                return Ok(finish(best, records, StopReason::JumpCap));
            }
            let Attempt {
                result,
                part,
                record,
            } = attempt(data, &best, lloyd_cfg, cfg, records.len(), retry, rng)?;
            let accepted = record.accepted;
            records.push(record);
            if !accepted {
                break;
            }
            best = Best::new(result, part)?;
            retry = 0;
            if !best.jumpable() {
                return Ok(finish(best, records, StopReason::Degenerate));
            }
        }
        // the rejected configuration is dropped, so `best` is already the rewind target
        retry += 1;
        if retry > cfg.retry_max {
            return Ok(finish(best, records, StopReason::NoImprovement));
        }
    }
}
