//! Exact global minimization for linear `F`, squared-norm penalty and
//! norm-type misfit `||Au - v||^e` (any `e > 0`).
//!
//! For a fixed residual level the minimum-norm point is on the Tikhonov
//! path `u(beta) = (A*A + beta)^{-1} A* v`, so the minimizer is one of
//! `u(0)`, `u(inf) = 0` or a local minimizer of
//! `phi(beta) = r(beta)^e + alpha ||u(beta)||^2` with `r(beta) = ||A u(beta) - v||`.
//! In the singular basis, with `a_k = sigma_k^2`,
//! `phi'(beta) = 2 S3(beta) ((e/2) r^(e-2) beta - alpha)`, `S3 > 0`,
//! so local minima are sign changes (from - to +) of
//! `g(beta) = (e/2) r(beta)^(e-2) beta - alpha`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::ForwardOperator;

const GRID_POINTS: usize = 480;
const BISECTION_STEPS: usize = 200;

/// Singular value decomposition of a linear operator applied to fixed data.
#[derive(Debug, Clone)]
pub(crate) struct TikhonovPath {
    /// Squared singular values.
    a: Vec<f64>,
    sigma: Vec<f64>,
    /// Data coefficients in the left singular basis.
    c: Vec<f64>,
    /// Squared norm (unweighted) of the data component outside the range.
    outside: f64,
    /// Right singular vectors as columns; `None` for diagonal operators.
    v_basis: Option<DMatrix<f64>>,
    h: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PathPoint {
    pub beta: f64,
    pub objective: f64,
}

impl TikhonovPath {
    pub fn new(op: &ForwardOperator, v: &[f64], h: f64) -> Result<Self> {
        match op {
            ForwardOperator::Diagonal { sigma } => Ok(TikhonovPath {
                a: sigma.iter().map(|s| s * s).collect(),
                sigma: sigma.clone(),
                c: v.to_vec(),
                outside: 0.0,
                v_basis: None,
                h,
            }),
            _ => {
                let m = op
                    .matrix(h)
                    .ok_or_else(|| Error::domain("Tikhonov path requires a linear operator"))?;
                let svd = m.svd(true, true);
                let u = svd.u.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
                let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
                let data = DVector::from_column_slice(v);
                let c = u.transpose() * &data;
                let outside = (&data - &u * &c).norm_squared();
                let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
                Ok(TikhonovPath {
                    a: sigma.iter().map(|s| s * s).collect(),
                    sigma,
                    c: c.iter().copied().collect(),
                    outside,
                    v_basis: Some(vt.transpose()),
                    h,
                })
            }
        }
    }

    fn residual_sq(&self, beta: f64) -> f64 {
        if beta.is_infinite() {
            return self.h * (self.c.iter().map(|c| c * c).sum::<f64>() + self.outside);
        }
        let inside: f64 = self
            .a
            .iter()
            .zip(&self.c)
            .map(|(a, c)| {
                let f = beta / (a + beta);
                f * f * c * c
            })
            .sum();
        self.h * (inside + self.outside)
    }

    fn solution_norm_sq(&self, beta: f64) -> f64 {
        if beta.is_infinite() {
            return 0.0;
        }
        self.h
            * self
                .a
                .iter()
                .zip(&self.sigma)
                .zip(&self.c)
                .map(|((a, s), c)| {
                    if *a == 0.0 {
                        0.0
                    } else {
                        let x = s * c / (a + beta);
                        x * x
                    }
                })
                .sum::<f64>()
    }

    pub fn objective(&self, beta: f64, alpha: f64, e: f64) -> f64 {
        self.residual_sq(beta).powf(0.5 * e) + alpha * self.solution_norm_sq(beta)
    }

    fn stationarity(&self, beta: f64, alpha: f64, e: f64) -> f64 {
        let r2 = self.residual_sq(beta);
        if r2 == 0.0 {
            return if e < 2.0 { f64::INFINITY } else { -alpha };
        }
        0.5 * e * r2.powf(0.5 * e - 1.0) * beta - alpha
    }

    /// Coefficients of `u(beta)` in the original basis.
    pub fn solution(&self, beta: f64) -> Vec<f64> {
        let n = self.a.len();
        let coeffs: Vec<f64> = (0..n)
            .map(|k| {
                if beta.is_infinite() || self.a[k] == 0.0 {
                    0.0
                } else {
                    self.sigma[k] * self.c[k] / (self.a[k] + beta)
                }
            })
            .collect();
        match &self.v_basis {
            None => coeffs,
            Some(vb) => (vb * DVector::from_vec(coeffs)).iter().copied().collect(),
        }
    }

    /// Global minimizer of `phi` over `beta in [0, inf]`, and the number of
    /// objective evaluations spent.
    pub fn minimize(&self, alpha: f64, e: f64) -> (PathPoint, usize) {
        let a_max = self.a.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let lo = (a_max * 1e-24).ln();
        let hi = (a_max * 1e12).ln();
        let mut evaluations = 0usize;
        let mut best = PathPoint {
            beta: f64::INFINITY,
            objective: self.objective(f64::INFINITY, alpha, e),
        };
        let consider = |beta: f64, best: &mut PathPoint| {
            let objective = self.objective(beta, alpha, e);
            if objective < best.objective {
                *best = PathPoint { beta, objective };
            }
        };
        consider(0.0, &mut best);
        evaluations += 2;

        let grid: Vec<f64> = (0..GRID_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
            .collect();
        let signs: Vec<f64> = grid.iter().map(|&lb| self.stationarity(lb.exp(), alpha, e)).collect();
        evaluations += GRID_POINTS;
        for i in 0..GRID_POINTS - 1 {
            if signs[i] < 0.0 && signs[i + 1] >= 0.0 {
                let (mut l, mut r) = (grid[i], grid[i + 1]);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (l + r);
                    if self.stationarity(mid.exp(), alpha, e) < 0.0 {
                        l = mid;
                    } else {
                        r = mid;
                    }
                    if r - l <= 1e-15 * mid.abs().max(1.0) {
                        break;
                    }
                }
                evaluations += BISECTION_STEPS;
                consider((0.5 * (l + r)).exp(), &mut best);
            }
        }
        // The grid ends may cut a minimum; check them as candidates as well.
        consider(lo.exp(), &mut best);
        consider(hi.exp(), &mut best);
        (best, evaluations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_case_recovers_alpha() {
        let op = ForwardOperator::power_law_diagonal(6, 1.0).unwrap();
        let v = [1.0, -0.5, 0.3, 0.2, 0.0, 0.1];
        let path = TikhonovPath::new(&op, &v, 1.0 / 6.0).unwrap();
        let (pt, _) = path.minimize(0.05, 2.0);
        assert!((pt.beta / 0.05 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_and_diagonal_paths_agree() {
        // a diagonal operator routed through the dense SVD branch
        let sigma = vec![1.0, 0.5, 0.25];
        let v = [0.3, 0.7, -0.2];
        let diag = TikhonovPath::new(&ForwardOperator::diagonal(sigma.clone()).unwrap(), &v, 0.5).unwrap();
        let m = DMatrix::from_diagonal(&DVector::from_vec(sigma));
        let svd = m.svd(true, true);
        let c = svd.u.clone().unwrap().transpose() * DVector::from_column_slice(&v);
        let dense = TikhonovPath {
            a: svd.singular_values.iter().map(|s| s * s).collect(),
            sigma: svd.singular_values.iter().copied().collect(),
            c: c.iter().copied().collect(),
            outside: 0.0,
            v_basis: Some(svd.v_t.unwrap().transpose()),
            h: 0.5,
        };
        for beta in [0.0, 1e-3, 0.1, 3.0] {
            let a = diag.solution(beta);
            let b = dense.solution(beta);
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-13);
            }
            assert!((diag.objective(beta, 0.1, 1.0) - dense.objective(beta, 0.1, 1.0)).abs() < 1e-13);
        }
    }
}
