//! `d~(r) = min { ||xi - A* eta|| : ||eta|| <= r }` with `A = F'(u_true)`.
//!
//! The minimizer is `eta_lambda = (A A* + lambda)^{-1} A xi` with the
//! smallest `lambda >= 0` giving `||eta_lambda|| <= r`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{self, GridVector};
use crate::model::Problem;
use crate::operator::ForwardOperator;

use super::table::DistanceTable;

/// Singular values below this fraction of the largest count as zero.
const RANK_CUTOFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct AscPoint {
    pub value: f64,
    pub eta: GridVector,
    pub lambda: f64,
}

/// `A` in its singular basis: `A* eta = V diag(sigma) U^T eta`, `x = V^T xi`.
struct Spectral {
    sigma: Vec<f64>,
    x: Vec<f64>,
    u_basis: Option<DMatrix<f64>>,
    h: f64,
}

impl Spectral {
    fn from_problem(problem: &Problem) -> Result<Self> {
        let h = problem.h();
        let xi = problem.xi().coefficients();
        match problem.operator() {
            ForwardOperator::Diagonal { sigma } => Ok(Spectral {
                sigma: sigma.clone(),
                x: xi.to_vec(),
                u_basis: None,
                h,
            }),
            op => {
                let m = op.derivative_matrix(problem.u_true().values(), h);
                let svd = m.svd(true, true);
                let u = svd.u.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
                let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
                let x = &vt * DVector::from_column_slice(xi);
                let smax = svd.singular_values.max();
                Ok(Spectral {
                    sigma: svd
                        .singular_values
                        .iter()
                        .map(|&s| if s <= RANK_CUTOFF * smax { 0.0 } else { s })
                        .collect(),
                    x: x.iter().copied().collect(),
                    u_basis: Some(u),
                    h,
                })
            }
        }
    }

    /// `||eta_lambda||^2`, infinite at `lambda = 0` without a preimage.
    fn eta_norm_sq(&self, lambda: f64) -> f64 {
        self.h
            * self
                .sigma
                .iter()
                .zip(&self.x)
                .map(|(&s, &x)| {
                    if s == 0.0 {
                        if lambda == 0.0 && x != 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    } else {
                        let z = s * x / (s * s + lambda);
                        z * z
                    }
                })
                .sum::<f64>()
    }

    fn eta_norm_sq_derivative(&self, lambda: f64) -> f64 {
        -2.0 * self.h
            * self
                .sigma
                .iter()
                .zip(&self.x)
                .filter(|(s, _)| **s > 0.0)
                .map(|(&s, &x)| s * s * x * x / (s * s + lambda).powi(3))
                .sum::<f64>()
    }

    fn residual(&self, lambda: f64) -> f64 {
        let sq: f64 = self
            .sigma
            .iter()
            .zip(&self.x)
            .map(|(&s, &x)| {
                if s == 0.0 {
                    x * x
                } else {
                    let z = lambda * x / (s * s + lambda);
                    z * z
                }
            })
            .sum();
        (self.h * sq).sqrt()
    }

    fn eta(&self, lambda: f64) -> Vec<f64> {
        let z: Vec<f64> = self
            .sigma
            .iter()
            .zip(&self.x)
            .map(|(&s, &x)| if s == 0.0 { 0.0 } else { s * x / (s * s + lambda) })
            .collect();
        match &self.u_basis {
            None => z,
            Some(u) => (u * DVector::from_vec(z)).iter().copied().collect(),
        }
    }

    /// Root of `1/||eta_lambda|| = 1/r` by safeguarded Newton.
    fn lambda_for(&self, r: f64) -> f64 {
        let target = 1.0 / r;
        let f = |l: f64| 1.0 / self.eta_norm_sq(l).sqrt() - target;
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        // upper bound: ||eta_lambda|| <= ||A xi|| / lambda
        let axi = (self.h
            * self.sigma.iter().zip(&self.x).map(|(s, x)| (s * x) * (s * x)).sum::<f64>())
        .sqrt();
        if axi > 0.0 {
            hi = axi / r;
        }
        let mut l = 0.0;
        for _ in 0..200 {
            let n2 = self.eta_norm_sq(l);
            let val = f(l);
            if val.abs() <= 1e-15 * target {
                return l;
            }
            if val < 0.0 {
                lo = l;
            } else {
                hi = l;
            }
            let next = if n2.is_finite() && n2 > 0.0 {
                let d = -0.5 * n2.powf(-1.5) * self.eta_norm_sq_derivative(l);
                l - val / d
            } else {
                f64::NAN
            };
            l = if next.is_finite() && next > lo && next < hi {
                next
            } else if lo == 0.0 {
                hi * 1e-3
            } else {
                (lo * hi).sqrt()
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return hi;
            }
        }
        l
    }
}

pub fn asc_distance(problem: &Problem, r: f64) -> Result<AscPoint> {
    check_r(r)?;
    let h = problem.h();
    if r == 0.0 {
        return Ok(AscPoint {
            value: problem.xi().norm(h),
            eta: GridVector::zeros(problem.dim(), h)?,
            lambda: f64::INFINITY,
        });
    }
    let sp = Spectral::from_problem(problem)?;
    let lambda = if sp.eta_norm_sq(0.0) <= r * r { 0.0 } else { sp.lambda_for(r) };
    let value = if lambda == 0.0 && sp.sigma.iter().zip(&sp.x).all(|(s, x)| *s > 0.0 || *x == 0.0) {
        0.0
    } else {
        sp.residual(lambda)
    };
    Ok(AscPoint {
        value,
        eta: GridVector::raw(sp.eta(lambda), h),
        lambda,
    })
}

/// Same quantity through dense solves of `(M M^T + lambda) eta = M xi`
/// and bisection on `log lambda`.
pub fn asc_distance_normal_equations(problem: &Problem, r: f64) -> Result<AscPoint> {
    check_r(r)?;
    let h = problem.h();
    let xi = DVector::from_column_slice(problem.xi().coefficients());
    if r == 0.0 {
        return Ok(AscPoint {
            value: problem.xi().norm(h),
            eta: GridVector::zeros(problem.dim(), h)?,
            lambda: f64::INFINITY,
        });
    }
    let m = problem.operator().derivative_matrix(problem.u_true().values(), h);
    let mt = m.transpose();
    let gram = &m * &mt;
    let rhs = &m * &xi;
    let solve = |lambda: f64| -> Option<DVector<f64>> {
        let mut a = gram.clone();
        for k in 0..a.nrows() {
            a[(k, k)] += lambda;
        }
        a.cholesky().map(|c| c.solve(&rhs))
    };
    let norm = |v: &DVector<f64>| (h * v.norm_squared()).sqrt();
    let finish = |eta: DVector<f64>, lambda: f64| {
        let resid = &xi - &mt * &eta;
        AscPoint {
            value: (h * resid.norm_squared()).sqrt(),
            eta: GridVector::raw(eta.iter().copied().collect(), h),
            lambda,
        }
    };
    if let Some(eta0) = solve(0.0) {
        if eta0.iter().all(|x| x.is_finite()) && norm(&eta0) <= r {
            return Ok(finish(eta0, 0.0));
        }
    }
    let mut hi = norm(&rhs).max(f64::MIN_POSITIVE) / r;
    let mut lo = hi * 1e-30;
    match solve(lo) {
        Some(e) if norm(&e) >= r => {}
        _ => {
            // constraint inactive down to lambda ~ 0
            hi = lo;
            lo = hi;
        }
    }
    for _ in 0..300 {
        if hi / lo - 1.0 <= 1e-15 {
            break;
        }
        let mid = (lo * hi).sqrt();
        match solve(mid) {
            Some(e) if norm(&e) > r => lo = mid,
            _ => hi = mid,
        }
    }
    let eta = solve(hi).ok_or_else(|| Error::Numerical("normal equations are singular".into()))?;
    Ok(finish(eta, hi))
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be nonnegative, got {r}")));
    }
    Ok(())
}

/// `d~` on `r_grid`; grid points are independent.
pub fn asc_table(problem: &Problem, r_grid: &[f64]) -> Result<DistanceTable> {
    let values = crate::parallel::map_indexed(r_grid.len(), |i| asc_distance(problem, r_grid[i]).map(|p| p.value));
    let mut entries = Vec::with_capacity(r_grid.len());
    for (r, v) in r_grid.iter().zip(values) {
        entries.push((*r, v?));
    }
    DistanceTable::new(entries)
}

/// Norm of the least-norm exact preimage of `xi`, infinite if none.
pub fn preimage_radius(problem: &Problem) -> Result<f64> {
    let sp = Spectral::from_problem(problem)?;
    Ok(sp.eta_norm_sq(0.0).sqrt())
}

/// `||xi - A* eta||` for a given `eta`.
pub fn asc_residual(problem: &Problem, eta: &GridVector) -> Result<f64> {
    eta.check_len(problem.operator().dim_v())?;
    let h = problem.h();
    let at = problem
        .operator()
        .adjoint_slice(problem.u_true().values(), eta.values(), h);
    Ok(grid::norm(&grid::sub(problem.xi().coefficients(), &at), h))
}
