//! Closed-form seeding probabilities for `g` well separated 1-D clusters of
//! length `a` with gaps `a·η`.
//!
//! A cluster with one center at its middle contributes `F₁ = a³/12` (the
//! integral of `x²` over the cluster); with two centers at 25% and 75% it
//! contributes `F₂ = a³/48`.

use crate::{Error, Result};

/// `∫ x² dx` over a cluster of length `a` with one center in the middle.
pub fn f1(a: f64) -> f64 {
    a * a * a / 12.0
}

/// Same integral with two centers at the quarter points.
pub fn f2(a: f64) -> f64 {
    a * a * a / 48.0
}

/// `F₁ / F₂`, independent of `a`.
pub fn f_ratio() -> f64 {
    f1(1.0) / f2(1.0)
}

/// Upper bound on the probability that the next D² seed lands in one of the
/// `i` clusters that already hold a center: `1 / (1 + 12·(g/i − 1)·η²)`.
pub fn pf_wrong_seeding(i: usize, g: usize, eta: f64) -> Result<f64> {
    if i == 0 || i >= g {
        return Err(Error::InvalidParameter {
            name: "i",
            reason: "covered clusters must satisfy 1 <= i < g",
        });
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: "must be finite and positive",
        });
    }
    let ratio = g as f64 / i as f64;
    Ok(1.0 / (1.0 + 12.0 * (ratio - 1.0) * eta * eta))
}

/// Probability that D² seeding places centers `g+1 … 2g` one per cluster:
/// `Π_{i=1}^{g−1} (g − i) / (g − ¾·i)`.
pub fn pcorr(g: usize) -> Result<f64> {
    if g == 0 {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: "must be at least 1",
        });
    }
    let gf = g as f64;
    Ok((1..g)
        .map(|i| {
            let i = i as f64;
            (gf - i) / (gf - 0.75 * i)
        })
        .product())
}
