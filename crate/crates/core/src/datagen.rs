//! Benchmark datasets.
//!
//! [`gen_grid`] builds a square arrangement of square point lattices; the
//! default [`GridSpec::dataset_a`] is 6×6 clusters of 6×6 points on the unit
//! square with cluster pitch 1/6 and point pitch 1/72. With that geometry the
//! one-center-per-cluster SSE is `36·210/72²` and the four-per-cluster SSE is
//! `36·48/72²`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{CenterSet, Dataset};
use crate::{Error, Result};

fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct GridSpec {
    pub clusters_per_side: usize,
    pub points_per_side: usize,
    /// Distance between neighbouring points inside a cluster.
    pub intra_spacing: f64,
    /// Distance between neighbouring cluster centers.
    pub cluster_pitch: f64,
}

impl GridSpec {
    pub fn dataset_a() -> Self {
        Self {
            clusters_per_side: 6,
            points_per_side: 6,
            intra_spacing: 1.0 / 72.0,
            cluster_pitch: 1.0 / 6.0,
        }
    }

    pub fn cluster_width(&self) -> f64 {
        (self.points_per_side - 1) as f64 * self.intra_spacing
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters_per_side == 0 || self.points_per_side == 0 {
            return Err(invalid("grid", "cluster and point counts must be positive"));
        }
        if !(self.intra_spacing > 0.0 && self.cluster_pitch > 0.0) {
            return Err(invalid("grid", "spacings must be positive"));
        }
        if self.cluster_width() >= self.cluster_pitch {
            return Err(invalid("grid", "clusters would touch or overlap"));
        }
        Ok(())
    }

    /// Coordinate of lattice point `p` in cluster `c` along one axis.
    fn coord(&self, c: usize, p: usize) -> f64 {
        let margin = (self.cluster_pitch - self.cluster_width()) / 2.0;
        c as f64 * self.cluster_pitch + margin + p as f64 * self.intra_spacing
    }

    /// Centers of an even split of every cluster into `parts × parts`
    /// sub-blocks (row-major over clusters, then sub-blocks). `parts = 1`
    /// gives the cluster centroids; `parts = 2` the quadrant centroids.
    pub fn block_centroids(&self, parts: usize) -> Result<CenterSet> {
        self.validate()?;
        if parts == 0 || self.points_per_side % parts != 0 {
            return Err(invalid("parts", "must divide points_per_side"));
        }
        let m = self.points_per_side / parts;
        let mut axis = Vec::with_capacity(self.clusters_per_side * parts);
        for c in 0..self.clusters_per_side {
            for b in 0..parts {
                let sum: f64 = (b * m..(b + 1) * m).map(|p| self.coord(c, p)).sum();
                axis.push(sum / m as f64);
            }
        }
        let mut coords = Vec::with_capacity(axis.len() * axis.len() * 2);
        for &y in &axis {
            for &x in &axis {
                coords.push(x);
                coords.push(y);
            }
        }
        CenterSet::new(2, coords)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::dataset_a()
    }
}

/// Grid of square clusters. Deterministic; `n = (clusters·points)²`, `d = 2`.
pub fn gen_grid(spec: &GridSpec) -> Result<Dataset> {
    spec.validate()?;
    let side = spec.clusters_per_side * spec.points_per_side;
    let axis: Vec<f64> = (0..side)
        .map(|i| spec.coord(i / spec.points_per_side, i % spec.points_per_side))
        .collect();
    let mut coords = Vec::with_capacity(side * side * 2);
    for &y in &axis {
        for &x in &axis {
            coords.push(x);
            coords.push(y);
        }
    }
    let name = format!("grid-{}x{}", spec.clusters_per_side, spec.points_per_side);
    Dataset::new(name, 2, coords)
}

/// Unstructured `n_side × n_side` lattice with pitch `1/n_side`, starting at
/// the origin.
pub fn gen_uniform_grid(n_side: usize) -> Result<Dataset> {
    if n_side == 0 {
        return Err(invalid("n_side", "must be positive"));
    }
    let step = 1.0 / n_side as f64;
    let mut coords = Vec::with_capacity(n_side * n_side * 2);
    for y in 0..n_side {
        for x in 0..n_side {
            coords.push(x as f64 * step);
            coords.push(y as f64 * step);
        }
    }
    Dataset::new(format!("flat-{n_side}"), 2, coords)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OneDSpec {
    /// Number of clusters.
    pub g: usize,
    /// Points per cluster.
    pub h: usize,
    /// Cluster length.
    pub a: f64,
    /// Gap between clusters as a multiple of `a`.
    pub eta: f64,
}

impl OneDSpec {
    pub fn validate(&self) -> Result<()> {
        if self.g == 0 || self.h == 0 {
            return Err(invalid("oned", "g and h must be positive"));
        }
        if !(self.a > 0.0 && self.a.is_finite() && self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid("oned", "a and eta must be finite and positive"));
        }
        Ok(())
    }

    pub fn cluster_start(&self, c: usize) -> f64 {
        c as f64 * self.a * (1.0 + self.eta)
    }
}

/// `g` clusters of `h` evenly spaced points covering `[start, start + a]`,
/// separated by gaps of `a·η`.
pub fn gen_1d(spec: &OneDSpec) -> Result<Dataset> {
    spec.validate()?;
    let pitch = if spec.h > 1 {
        spec.a / (spec.h - 1) as f64
    } else {
        0.0
    };
    let mut coords = Vec::with_capacity(spec.g * spec.h);
    for c in 0..spec.g {
        let start = spec.cluster_start(c);
        coords.extend((0..spec.h).map(|j| start + j as f64 * pitch));
    }
    Dataset::new(format!("oned-g{}-h{}", spec.g, spec.h), 1, coords)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureSpec {
    pub d: usize,
    /// Number of components.
    pub g: usize,
    pub sigma: f64,
    pub n: usize,
}

impl MixtureSpec {
    /// 5-D, 50 components, 2000 points, `σ = 1e-5`.
    pub fn gaussian_5d() -> Self {
        Self {
            d: 5,
            g: 50,
            sigma: 1e-5,
            n: 2000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.g == 0 || self.n == 0 {
            return Err(invalid("mixture", "d, g and n must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", "must be finite and positive"));
        }
        Ok(())
    }
}

/// Gaussian mixture sample with its component labels and component centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub data: Dataset,
    pub labels: Vec<usize>,
    pub means: CenterSet,
}

/// Isotropic Gaussian mixture: component means uniform in the unit
/// hypercube, each point from a uniformly chosen component.
pub fn gen_mixture<R: Rng + ?Sized>(spec: &MixtureSpec, rng: &mut R) -> Result<Mixture> {
    spec.validate()?;
    let means: Vec<f64> = (0..spec.g * spec.d).map(|_| rng.random::<f64>()).collect();
    let mut coords = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let c = rng.random_range(0..spec.g);
        labels.push(c);
        for m in &means[c * spec.d..(c + 1) * spec.d] {
            let z: f64 = rng.sample(StandardNormal);
            coords.push(m + spec.sigma * z);
        }
    }
    Ok(Mixture {
        data: Dataset::new(format!("gmm-d{}-g{}", spec.d, spec.g), spec.d, coords)?,
        labels,
        means: CenterSet::new(spec.d, means)?,
    })
}
