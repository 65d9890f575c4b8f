//! Lloyd's algorithm.
//!
//! One iteration is an update pass (every center moves to the mean of its
//! Voronoi set) followed by an assignment pass. The loop stops when the
//! assignment no longer changes, when the SSE gain falls below
//! [`LloydConfig::tolerance`] (if positive), or at the iteration cap.
//!
//! A center whose Voronoi set is empty is relocated onto the point that is
//! currently worst represented. Empty centers are handled in ascending index
//! order and each takes a different point.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{assign, squared_distance, CenterSet, Dataset, Partition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LloydConfig {
    pub max_iterations: usize,
    /// Stop once an iteration improves the SSE by less than this. `0` means
    /// stop only when the assignment is stable.
    pub tolerance: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            tolerance: 0.0,
        }
    }
}

impl LloydConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                reason: "must be at least 1",
            });
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: "must be a finite non-negative number",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydResult {
    pub centers: CenterSet,
    pub sse: f64,
    /// Lloyd iterations executed to produce `centers`.
    pub iterations: usize,
    pub converged: bool,
}

/// New centers from a partition: Voronoi means, with empty sets relocated.
fn update_centers(data: &Dataset, centers: &CenterSet, part: &Partition) -> CenterSet {
    let d = data.dim();
    let k = centers.len();
    let mut sums = vec![0.0; k * d];
    for (x, &c) in data.points().zip(&part.nearest_idx) {
        for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (c, &count) in part.voronoi_count.iter().enumerate() {
        if count > 0 {
            let inv = count as f64;
            sums[c * d..(c + 1) * d].iter_mut().for_each(|s| *s /= inv);
        }
    }
    let mut next = CenterSet::new(d, sums).expect("means of finite points are finite");

    if part.voronoi_count.contains(&0) {
        let mut residual: Vec<f64> = data
            .points()
            .zip(&part.nearest_idx)
            .map(|(x, &c)| squared_distance(x, next.center(c)))
            .collect();
        for c in (0..k).filter(|&c| part.voronoi_count[c] == 0) {
            let mut worst = 0;
            for (i, &r) in residual.iter().enumerate() {
                if r > residual[worst] {
                    worst = i;
                }
            }
            next.center_mut(c).copy_from_slice(data.point(worst));
            residual[worst] = 0.0;
        }
    }
    next
}

fn step(data: &Dataset, centers: &CenterSet, part: &Partition) -> (CenterSet, Partition, bool) {
    let next = update_centers(data, centers, part);
    let next_part = assign(data, &next).expect("dimensions already checked");
    let changed = next_part.nearest_idx != part.nearest_idx;
    (next, next_part, changed)
}

/// Performs a single Lloyd iteration starting from `centers`.
///
/// Returns the moved centers, their partition and whether any point changed
/// its nearest center.
pub fn lloyd_iteration(
    data: &Dataset,
    centers: &CenterSet,
) -> Result<(CenterSet, Partition, bool)> {
    let part = assign(data, centers)?;
    Ok(step(data, centers, &part))
}

/// Runs Lloyd iterations from `init` until convergence or the cap.
pub fn run_lloyd(data: &Dataset, init: CenterSet, cfg: &LloydConfig) -> Result<LloydResult> {
    run_lloyd_observed(data, init, cfg, |_, _| {})
}

/// Like [`run_lloyd`], calling `observer(iteration, sse)` once for the
/// initial state (iteration 0) and after every iteration.
pub fn run_lloyd_observed(
    data: &Dataset,
    init: CenterSet,
    cfg: &LloydConfig,
    observer: impl FnMut(usize, f64),
) -> Result<LloydResult> {
    run_lloyd_partitioned(data, init, cfg, observer).map(|(res, _)| res)
}

pub(crate) fn run_lloyd_partitioned(
    data: &Dataset,
    init: CenterSet,
    cfg: &LloydConfig,
    mut observer: impl FnMut(usize, f64),
) -> Result<(LloydResult, Partition)> {
    cfg.validate()?;
    let mut centers = init;
    let mut part = assign(data, &centers)?;
    let mut sse = part.sse();
    observer(0, sse);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        let (next, next_part, changed) = step(data, &centers, &part);
        let next_sse = next_part.sse();
        iterations += 1;
        observer(iterations, next_sse);
        debug_assert!(
            next_sse <= sse + 1e-12 * sse,
            "Lloyd iteration increased SSE: {sse} -> {next_sse}"
        );
        let gain = sse - next_sse;
        centers = next;
        part = next_part;
        sse = next_sse;
        if !changed || (cfg.tolerance > 0.0 && gain < cfg.tolerance) {
            converged = true;
            break;
        }
    }

    Ok((
        LloydResult {
            centers,
            sse,
            iterations,
            converged,
        },
        part,
    ))
}

/// `k` distinct data points drawn uniformly without replacement.
pub fn seed_random<R: Rng + ?Sized>(data: &Dataset, k: usize, rng: &mut R) -> Result<CenterSet> {
    if k == 0 {
        return Err(Error::TooFewCenters { k, needed: 1 });
    }
    if k > data.len() {
        return Err(Error::TooManyCenters { k, n: data.len() });
    }
    let picked = rand::seq::index::sample(rng, data.len(), k).into_vec();
    CenterSet::from_points(data, &picked)
}
