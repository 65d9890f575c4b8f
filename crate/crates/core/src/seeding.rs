//! k-means++ seeding.
//!
//! The first center is a uniformly chosen data point. Every further center is
//! picked among `n_candidates` points drawn with probability proportional to
//! `D(x)²`, the squared distance to the nearest center placed so far; the
//! candidate giving the lowest resulting SSE wins. With one candidate this is
//! plain D² sampling.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::geometry::{squared_distance, CenterSet, Dataset};
use crate::lloyd::{run_lloyd, LloydConfig, LloydResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedingConfig {
    pub k: usize,
    /// Greedy candidates per inserted center.
    pub n_candidates: usize,
    /// Independent seed + Lloyd runs; the lowest SSE is kept.
    pub restarts: usize,
}

impl SeedingConfig {
    /// `2 + ⌊ln k⌋` candidates and 10 restarts.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            n_candidates: default_candidates(k),
            restarts: 10,
        }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }

    pub fn with_candidates(self, n_candidates: usize) -> Self {
        Self {
            n_candidates,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::TooFewCenters { k: 0, needed: 1 });
        }
        if self.n_candidates == 0 {
            return Err(Error::InvalidParameter {
                name: "n_candidates",
                reason: "must be at least 1",
            });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter {
                name: "restarts",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

pub fn default_candidates(k: usize) -> usize {
    2 + libm::floor(libm::log(k.max(1) as f64)) as usize
}

fn min_sqdist(data: &Dataset, centers: &CenterSet) -> Vec<f64> {
    data.points()
        .map(|x| {
            centers
                .centers()
                .map(|c| squared_distance(x, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// D² sampling probabilities for every point given the centers placed so far.
///
/// Fails with [`Error::DegenerateDistribution`] when every point coincides
/// with a center; callers then fall back to uniform sampling.
pub fn d2_weights(data: &Dataset, centers: &CenterSet) -> Result<Vec<f64>> {
    if data.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            data: data.dim(),
            centers: centers.dim(),
        });
    }
    let mut weights = min_sqdist(data, centers);
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// Places `cfg.k` centers on data points by greedy D² sampling.
pub fn seed_kmpp<R: Rng + ?Sized>(
    data: &Dataset,
    cfg: &SeedingConfig,
    rng: &mut R,
) -> Result<CenterSet> {
    cfg.validate()?;
    let n = data.len();
    if cfg.k > n {
        return Err(Error::TooManyCenters { k: cfg.k, n });
    }

    let first = rng.random_range(0..n);
    let mut chosen = Vec::with_capacity(cfg.k);
    chosen.push(first);
    let mut dist: Vec<f64> = data
        .points()
        .map(|x| squared_distance(x, data.point(first)))
        .collect();

    let mut trial = alloc::vec![0.0; n];
    let mut best_dist = alloc::vec![0.0; n];
    while chosen.len() < cfg.k {
        // `None` once every point sits on a center
        let sampler = WeightedIndex::new(&dist).ok();
        let mut best_cost = f64::INFINITY;
        let mut best_idx = usize::MAX;
        let mut first_cost = f64::NAN;
        for t in 0..cfg.n_candidates {
            let cand = match &sampler {
                Some(s) => s.sample(rng),
                None => rng.random_range(0..n),
            };
            let c = data.point(cand);
            let mut cost = 0.0;
            for ((x, &old), slot) in data.points().zip(&dist).zip(trial.iter_mut()) {
                *slot = old.min(squared_distance(x, c));
                cost += *slot;
            }
            if t == 0 {
                first_cost = cost;
            }
            if cost < best_cost {
                best_cost = cost;
                best_idx = cand;
                core::mem::swap(&mut best_dist, &mut trial);
            }
        }
        debug_assert!(best_cost <= first_cost);
        chosen.push(best_idx);
        core::mem::swap(&mut dist, &mut best_dist);
    }
    CenterSet::from_points(data, &chosen)
}

/// Outcome of [`kmpp`]: the best restart plus iteration accounting over all
/// restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct BestOfRestarts {
    pub best: LloydResult,
    /// Lloyd iterations summed over every restart.
    pub total_iterations: usize,
    /// Final SSE of each restart, in order.
    pub restart_sse: Vec<f64>,
}

/// k-means++: `cfg.restarts` rounds of seeding followed by Lloyd, keeping the
/// lowest SSE (earliest restart on ties).
pub fn kmpp<R: Rng + ?Sized>(
    data: &Dataset,
    cfg: &SeedingConfig,
    lloyd_cfg: &LloydConfig,
    rng: &mut R,
) -> Result<BestOfRestarts> {
    cfg.validate()?;
    let mut best: Option<LloydResult> = None;
    let mut total_iterations = 0;
    let mut restart_sse = Vec::with_capacity(cfg.restarts);
    for _ in 0..cfg.restarts {
        let init = seed_kmpp(data, cfg, rng)?;
        let res = run_lloyd(data, init, lloyd_cfg)?;
        total_iterations += res.iterations;
        restart_sse.push(res.sse);
        if best.as_ref().is_none_or(|b| res.sse < b.sse) {
            best = Some(res);
        }
    }
    Ok(BestOfRestarts {
        best: best.expect("restarts >= 1"),
        total_iterations,
        restart_sse,
    })
}
