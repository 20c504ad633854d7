//! Discretized elements of the solution and data spaces.
//!
//! All inner products are weighted by the grid spacing `h`:
//! `<u, w> = h * sum_i u_i w_i`. Both spaces share the same weight, so
//! adjoints are plain matrix transposes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the h-weighted total mass of a probability measure.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Function,
    ProbabilityMeasure,
}

/// A grid function or a discrete probability density on a uniform grid.
///
/// For measures, `values` are densities: the mass of cell `i` is
/// `h * values[i]`, located at `x_i = i * h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridVector {
    values: Vec<f64>,
    h: f64,
    kind: GridKind,
}

impl GridVector {
    pub fn function(values: Vec<f64>, h: f64) -> Result<Self> {
        check_spacing(h)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at index {i}")));
        }
        Ok(GridVector {
            values,
            h,
            kind: GridKind::Function,
        })
    }

    pub fn measure(values: Vec<f64>, h: f64) -> Result<Self> {
        let mut v = Self::function(values, h)?;
        if let Some(i) = v.values.iter().position(|&x| x < 0.0) {
            return Err(Error::domain(format!("negative density at index {i}")));
        }
        let mass = v.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!("total mass {mass} differs from 1")));
        }
        v.kind = GridKind::ProbabilityMeasure;
        Ok(v)
    }

    /// Normalizes nonnegative weights to a probability density.
    pub fn measure_from_weights(weights: &[f64], h: f64) -> Result<Self> {
        check_spacing(h)?;
        let total: f64 = weights.iter().sum::<f64>() * h;
        if !(total > 0.0) || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::domain("weights must be nonnegative with positive sum"));
        }
        let values = weights.iter().map(|w| w / total).collect();
        Self::measure(values, h)
    }

    pub fn zeros(n: usize, h: f64) -> Result<Self> {
        Self::function(vec![0.0; n], h)
    }

    /// Internal constructor for values produced by arithmetic on valid inputs.
    pub(crate) fn raw(values: Vec<f64>, h: f64) -> Self {
        GridVector {
            values,
            h,
            kind: GridKind::Function,
        }
    }

    pub(crate) fn raw_measure(values: Vec<f64>, h: f64) -> Self {
        GridVector {
            values,
            h,
            kind: GridKind::ProbabilityMeasure,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_measure(&self) -> bool {
        self.kind == GridKind::ProbabilityMeasure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reinterprets as a plain function, dropping the measure tag.
    pub fn as_function(&self) -> GridVector {
        GridVector::raw(self.values.clone(), self.h)
    }

    pub fn mass(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    pub fn inner(&self, other: &GridVector) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(dot(&self.values, &other.values, self.h))
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values, self.h)
    }

    pub fn sub(&self, other: &GridVector) -> Result<GridVector> {
        self.check_compatible(other)?;
        Ok(GridVector::raw(sub(&self.values, &other.values), self.h))
    }

    pub fn add(&self, other: &GridVector) -> Result<GridVector> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GridVector::raw(values, self.h))
    }

    pub fn scale(&self, factor: f64) -> GridVector {
        GridVector::raw(self.values.iter().map(|v| v * factor).collect(), self.h)
    }

    /// `self + t * direction`.
    pub fn axpy(&self, t: f64, direction: &GridVector) -> Result<GridVector> {
        self.check_compatible(direction)?;
        let values = self
            .values
            .iter()
            .zip(&direction.values)
            .map(|(a, d)| a + t * d)
            .collect();
        Ok(GridVector::raw(values, self.h))
    }

    pub fn check_compatible(&self, other: &GridVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        if (self.h - other.h).abs() > 1e-14 * self.h.max(other.h) {
            return Err(Error::GridMismatch(self.h, other.h));
        }
        Ok(())
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

fn check_spacing(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("grid spacing must be positive, got {h}")));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

pub(crate) fn norm(a: &[f64], h: f64) -> f64 {
    (h * a.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
