//! Similarity functionals used as data misfit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridVector};
use crate::wasserstein;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Similarity {
    /// `||v1 - v2||`.
    Norm,
    /// `||v1 - v2||^q`, `q` in `[1, 4]`.
    NormPower { q: f64 },
    /// Wasserstein distance of order `q >= 1` between densities on a common grid.
    Wasserstein1d { q: f64 },
}

impl Similarity {
    pub fn norm_power(q: f64) -> Result<Self> {
        if !(1.0..=4.0).contains(&q) {
            return Err(Error::domain(format!("norm-power exponent must lie in [1, 4], got {q}")));
        }
        Ok(Similarity::NormPower { q })
    }

    pub fn wasserstein(q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::domain(format!("wasserstein exponent must be >= 1, got {q}")));
        }
        Ok(Similarity::Wasserstein1d { q })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Similarity::Norm => Ok(()),
            Similarity::NormPower { q } => Self::norm_power(q).map(|_| ()),
            Similarity::Wasserstein1d { q } => Self::wasserstein(q).map(|_| ()),
        }
    }

    pub fn value(&self, v1: &GridVector, v2: &GridVector) -> Result<f64> {
        match *self {
            Similarity::Norm => Ok(v1.sub(v2)?.norm()),
            Similarity::NormPower { q } => Ok(v1.sub(v2)?.norm().powf(q)),
            Similarity::Wasserstein1d { q } => wasserstein::wasserstein_1d(v1, v2, q),
        }
    }

    /// Constant `s` of the quasi-triangle inequality
    /// `S(v1, v2) <= s S(v1, v3) + s S(v3, v2)`.
    pub fn quasi_triangle_constant(&self) -> f64 {
        match *self {
            Similarity::Norm | Similarity::Wasserstein1d { .. } => 1.0,
            Similarity::NormPower { q } => 2f64.powf(q - 1.0),
        }
    }

    pub fn requires_measures(&self) -> bool {
        matches!(self, Similarity::Wasserstein1d { .. })
    }

    /// Exponent `e` with `S = ||v1 - v2||^e` for the norm kinds.
    pub(crate) fn norm_exponent(&self) -> Option<f64> {
        match *self {
            Similarity::Norm => Some(1.0),
            Similarity::NormPower { q } => Some(q),
            Similarity::Wasserstein1d { .. } => None,
        }
    }

    /// Value of `S(w, v)^p` and its gradient with respect to `w`
    /// (h-weighted), evaluated on raw slices. Used by the solvers.
    ///
    /// At a zero residual with total exponent `<= 1` the zero vector is
    /// returned, which is a valid element of the subdifferential.
    pub(crate) fn power_and_gradient(&self, w: &[f64], v: &[f64], h: f64, p: f64) -> Result<(f64, Vec<f64>)> {
        match *self {
            Similarity::Norm | Similarity::NormPower { .. } => {
                let e = self.norm_exponent().unwrap_or(1.0) * p;
                let r = grid::sub(w, v);
                let rn = grid::norm(&r, h);
                if rn == 0.0 {
                    return Ok((0.0, vec![0.0; w.len()]));
                }
                let value = rn.powf(e);
                let factor = e * rn.powf(e - 2.0);
                Ok((value, r.into_iter().map(|x| factor * x).collect()))
            }
            Similarity::Wasserstein1d { q } => {
                if q != 1.0 {
                    return Err(Error::domain("gradient available only for the order-1 Wasserstein distance"));
                }
                let w1 = cdf_distance(w, v, h);
                if w1 == 0.0 {
                    return Ok((0.0, vec![0.0; w.len()]));
                }
                let g = wasserstein::wasserstein1_gradient(w, v, h);
                let factor = p * w1.powf(p - 1.0);
                Ok((w1.powf(p), g.into_iter().map(|x| factor * x).collect()))
            }
        }
    }
}

fn cdf_distance(w: &[f64], v: &[f64], h: f64) -> f64 {
    let mut c = 0.0;
    let mut total = 0.0;
    for k in 0..w.len().saturating_sub(1) {
        c += h * (w[k] - v[k]);
        total += c.abs() * h;
    }
    total
}
