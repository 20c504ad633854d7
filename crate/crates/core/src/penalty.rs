//! Convex stabilizing functionals, their subgradients and Bregman distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Penalty {
    /// `||u||^2`.
    SquaredNorm,
    /// `||u||_t^t = h sum |u_i|^t`, `t` in `(1, 2]`.
    PowerNorm { t: f64 },
    /// Relative entropy with respect to the uniform density `m = 1/(n h)`:
    /// `h sum (u log(u/m) - u + m)`. Vanishes exactly at the uniform measure.
    NegativeEntropy,
}

/// A subgradient `xi`, acting on `u` through the h-weighted inner product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientElement {
    coefficients: Vec<f64>,
}

impl SubgradientElement {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("subgradient coefficients must be finite"));
        }
        Ok(SubgradientElement { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `xi(u)`.
    pub fn apply(&self, u: &GridVector) -> Result<f64> {
        u.check_len(self.len())?;
        Ok(self.apply_slice(u.values(), u.h()))
    }

    pub(crate) fn apply_slice(&self, u: &[f64], h: f64) -> f64 {
        h * self.coefficients.iter().zip(u).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Dual norm, which equals the h-weighted norm of the coefficients.
    pub fn norm(&self, h: f64) -> f64 {
        crate::grid::norm(&self.coefficients, h)
    }

    pub fn as_grid(&self, h: f64) -> GridVector {
        GridVector::raw(self.coefficients.clone(), h)
    }
}

impl Penalty {
    pub fn power_norm(t: f64) -> Result<Self> {
        if !(t > 1.0 && t <= 2.0) {
            return Err(Error::domain(format!("power-norm exponent must lie in (1, 2], got {t}")));
        }
        Ok(Penalty::PowerNorm { t })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Penalty::PowerNorm { t } => Self::power_norm(t).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// `Omega(u)`, `+inf` outside the domain.
    pub fn value(&self, u: &GridVector) -> f64 {
        self.value_slice(u.values(), u.h())
    }

    pub(crate) fn value_slice(&self, u: &[f64], h: f64) -> f64 {
        match *self {
            Penalty::SquaredNorm => h * u.iter().map(|x| x * x).sum::<f64>(),
            Penalty::PowerNorm { t } => h * u.iter().map(|x| x.abs().powf(t)).sum::<f64>(),
            Penalty::NegativeEntropy => {
                if u.iter().any(|&x| x < 0.0) {
                    return f64::INFINITY;
                }
                let m = uniform_density(u.len(), h);
                h * u
                    .iter()
                    .map(|&x| {
                        let xlogx = if x == 0.0 { 0.0 } else { x * (x / m).ln() };
                        xlogx - x + m
                    })
                    .sum::<f64>()
            }
        }
    }

    pub fn subgradient(&self, u: &GridVector) -> Result<SubgradientElement> {
        Ok(SubgradientElement {
            coefficients: self.gradient_slice(u.values(), u.h())?,
        })
    }

    pub(crate) fn gradient_slice(&self, u: &[f64], h: f64) -> Result<Vec<f64>> {
        match *self {
            Penalty::SquaredNorm => Ok(u.iter().map(|x| 2.0 * x).collect()),
            Penalty::PowerNorm { t } => Ok(u
                .iter()
                .map(|&x| t * x.abs().powf(t - 1.0) * x.signum() * (x != 0.0) as u8 as f64)
                .collect()),
            Penalty::NegativeEntropy => {
                if let Some(i) = u.iter().position(|&x| !(x > 0.0)) {
                    return Err(Error::NoSubgradient(format!(
                        "entropy subgradient needs strictly positive values (index {i})"
                    )));
                }
                let m = uniform_density(u.len(), h);
                Ok(u.iter().map(|&x| (x / m).ln()).collect())
            }
        }
    }

    /// `B_xi(u, u_ref) = Omega(u) - Omega(u_ref) - xi(u - u_ref)`.
    pub fn bregman(&self, u: &GridVector, u_ref: &GridVector, xi: &SubgradientElement) -> Result<f64> {
        u.check_compatible(u_ref)?;
        u.check_len(xi.len())?;
        Ok(self.bregman_slice(u.values(), u_ref.values(), u.h(), xi))
    }

    pub(crate) fn bregman_slice(&self, u: &[f64], u_ref: &[f64], h: f64, xi: &SubgradientElement) -> f64 {
        if *self == Penalty::SquaredNorm {
            // Expanded form equals ||u - u_ref||^2 only up to cancellation error.
            let expected: Vec<f64> = u_ref.iter().map(|x| 2.0 * x).collect();
            if xi.coefficients == expected {
                return h * u.iter().zip(u_ref).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
        }
        let diff = crate::grid::sub(u, u_ref);
        self.value_slice(u, h) - self.value_slice(u_ref, h) - xi.apply_slice(&diff, h)
    }

    pub fn requires_positive(&self) -> bool {
        matches!(self, Penalty::NegativeEntropy)
    }
}

pub(crate) fn uniform_density(n: usize, h: f64) -> f64 {
    1.0 / (n as f64 * h)
}
