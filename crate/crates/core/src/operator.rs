//! Forward operators, their derivatives and h-weighted adjoints.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForwardOperator {
    /// `(Au)_k = sigma_k u_k` with positive, nonincreasing `sigma`.
    Diagonal { sigma: Vec<f64> },
    /// Cumulative quadrature `(Au)_j = h sum_{i <= j} u_i`.
    Integration { n: usize },
    /// `(F(u))_j = h sum_{i <= j} u_i u_{j-i}`.
    Autoconvolution { n: usize },
}

impl ForwardOperator {
    pub fn diagonal(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::domain("diagonal operator needs at least one entry"));
        }
        if sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::domain("diagonal entries must be positive and finite"));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::domain("diagonal entries must be nonincreasing"));
        }
        Ok(ForwardOperator::Diagonal { sigma })
    }

    /// `sigma_k = k^(-decay)`, `k = 1..=n`.
    pub fn power_law_diagonal(n: usize, decay: f64) -> Result<Self> {
        Self::diagonal((1..=n).map(|k| (k as f64).powf(-decay)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ForwardOperator::Diagonal { sigma } => Self::diagonal(sigma.clone()).map(|_| ()),
            ForwardOperator::Integration { n } | ForwardOperator::Autoconvolution { n } => {
                if *n == 0 {
                    Err(Error::domain("operator dimension must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn dim_u(&self) -> usize {
        match self {
            ForwardOperator::Diagonal { sigma } => sigma.len(),
            ForwardOperator::Integration { n } | ForwardOperator::Autoconvolution { n } => *n,
        }
    }

    pub fn dim_v(&self) -> usize {
        self.dim_u()
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, ForwardOperator::Autoconvolution { .. })
    }

    pub fn apply(&self, u: &GridVector) -> Result<GridVector> {
        u.check_len(self.dim_u())?;
        Ok(GridVector::raw(self.apply_slice(u.values(), u.h()), u.h()))
    }

    pub fn derivative_apply(&self, u0: &GridVector, direction: &GridVector) -> Result<GridVector> {
        u0.check_len(self.dim_u())?;
        u0.check_compatible(direction)?;
        Ok(GridVector::raw(
            self.derivative_slice(u0.values(), direction.values(), u0.h()),
            u0.h(),
        ))
    }

    /// `F'(u0)^* w` with respect to the h-weighted inner products.
    pub fn adjoint_derivative_apply(&self, u0: &GridVector, w: &GridVector) -> Result<GridVector> {
        u0.check_len(self.dim_u())?;
        w.check_len(self.dim_v())?;
        u0.check_compatible(w)?;
        Ok(GridVector::raw(
            self.adjoint_slice(u0.values(), w.values(), u0.h()),
            u0.h(),
        ))
    }

    pub(crate) fn apply_slice(&self, u: &[f64], h: f64) -> Vec<f64> {
        match self {
            ForwardOperator::Diagonal { sigma } => sigma.iter().zip(u).map(|(s, x)| s * x).collect(),
            ForwardOperator::Integration { .. } => cumulative(u, h),
            ForwardOperator::Autoconvolution { .. } => convolve(u, u, h),
        }
    }

    pub(crate) fn derivative_slice(&self, u0: &[f64], d: &[f64], h: f64) -> Vec<f64> {
        match self {
            ForwardOperator::Autoconvolution { .. } => convolve(u0, d, 2.0 * h),
            _ => self.apply_slice(d, h),
        }
    }

    pub(crate) fn adjoint_slice(&self, u0: &[f64], w: &[f64], h: f64) -> Vec<f64> {
        match self {
            ForwardOperator::Diagonal { sigma } => sigma.iter().zip(w).map(|(s, x)| s * x).collect(),
            ForwardOperator::Integration { .. } => reverse_cumulative(w, h),
            ForwardOperator::Autoconvolution { .. } => correlate(u0, w, 2.0 * h),
        }
    }

    /// Matrix of a linear operator acting on coefficient vectors.
    pub fn matrix(&self, h: f64) -> Option<DMatrix<f64>> {
        match self {
            ForwardOperator::Diagonal { sigma } => Some(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(sigma))),
            ForwardOperator::Integration { n } => Some(DMatrix::from_fn(*n, *n, |i, j| if j <= i { h } else { 0.0 })),
            ForwardOperator::Autoconvolution { .. } => None,
        }
    }

    /// Matrix of `F'(u0)`.
    pub fn derivative_matrix(&self, u0: &[f64], h: f64) -> DMatrix<f64> {
        match self {
            ForwardOperator::Autoconvolution { n } => {
                DMatrix::from_fn(*n, *n, |j, k| if k <= j { 2.0 * h * u0[j - k] } else { 0.0 })
            }
            _ => self.matrix(h).expect("linear operator has a matrix"),
        }
    }
}

fn cumulative(u: &[f64], h: f64) -> Vec<f64> {
    let mut acc = 0.0;
    u.iter()
        .map(|x| {
            acc += x;
            h * acc
        })
        .collect()
}

fn reverse_cumulative(w: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    let mut acc = 0.0;
    for k in (0..w.len()).rev() {
        acc += w[k];
        out[k] = h * acc;
    }
    out
}

/// `scale * sum_{i <= j} a_i b_{j-i}`, truncated to the grid.
fn convolve(a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|j| scale * (0..=j).map(|i| a[i] * b[j - i]).sum::<f64>())
        .collect()
}

/// Transpose of `d -> convolve(a, d, scale)`: `scale * sum_{j >= k} a_{j-k} w_j`.
fn correlate(a: &[f64], w: &[f64], scale: f64) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|k| scale * (k..n).map(|j| a[j - k] * w[j]).sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gv(v: &[f64], h: f64) -> GridVector {
        GridVector::function(v.to_vec(), h).unwrap()
    }

    #[test]
    fn diagonal_apply() {
        let op = ForwardOperator::diagonal(vec![1.0, 0.5]).unwrap();
        let out = op.apply(&gv(&[1.0, 1.0], 1.0)).unwrap();
        assert_eq!(out.values(), &[1.0, 0.5]);
        assert!(ForwardOperator::diagonal(vec![0.5, 1.0]).is_err());
        assert!(ForwardOperator::diagonal(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = gv(&[0.0; 4], 0.25);
        for op in [
            ForwardOperator::power_law_diagonal(4, 1.0).unwrap(),
            ForwardOperator::Integration { n: 4 },
            ForwardOperator::Autoconvolution { n: 4 },
        ] {
            assert!(op.apply(&z).unwrap().values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn integration_of_constant() {
        let op = ForwardOperator::Integration { n: 4 };
        let out = op.apply(&gv(&[1.0; 4], 0.25)).unwrap();
        assert_eq!(out.values(), &[0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn autoconvolution_derivative_at_zero_vanishes() {
        let op = ForwardOperator::Autoconvolution { n: 3 };
        let d = op
            .derivative_apply(&gv(&[0.0; 3], 0.5), &gv(&[1.0, -2.0, 3.0], 0.5))
            .unwrap();
        assert!(d.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn autoconvolution_derivative_finite_difference() {
        let h = 0.1;
        let op = ForwardOperator::Autoconvolution { n: 5 };
        let u0 = gv(&[0.4, 1.0, -0.3, 0.8, 0.2], h);
        let e = gv(&[0.1, -0.5, 0.7, 0.3, -0.2], h);
        let t = 1e-6;
        let fu = op.apply(&u0).unwrap();
        let ft = op.apply(&u0.axpy(t, &e).unwrap()).unwrap();
        let fd = ft.sub(&fu).unwrap().scale(1.0 / t);
        let d = op.derivative_apply(&u0, &e).unwrap();
        // remainder is t * (e * e) * h, so the error is O(t)
        assert!(fd.sub(&d).unwrap().norm() < 10.0 * t);
    }

    #[test]
    fn matrices_agree_with_apply() {
        let h = 0.2;
        let u = [0.3, -1.0, 0.5, 2.0, 0.1];
        for op in [ForwardOperator::power_law_diagonal(5, 1.0).unwrap(), ForwardOperator::Integration { n: 5 }] {
            let m = op.matrix(h).unwrap();
            let mu = &m * nalgebra::DVector::from_column_slice(&u);
            let direct = op.apply_slice(&u, h);
            for k in 0..5 {
                assert!((mu[k] - direct[k]).abs() < 1e-14);
            }
        }
        let op = ForwardOperator::Autoconvolution { n: 5 };
        let u0 = [0.2, 0.4, -0.1, 0.3, 0.9];
        let m = op.derivative_matrix(&u0, h);
        let mu = &m * nalgebra::DVector::from_column_slice(&u);
        let direct = op.derivative_slice(&u0, &u, h);
        for k in 0..5 {
            assert!((mu[k] - direct[k]).abs() < 1e-14);
        }
    }
}
