//! One-dimensional optimal transport between discrete measures on a common grid.
//!
//! In one dimension the optimal coupling is the monotone rearrangement, so
//! `W_q(mu, nu)^q = int_0^1 |Q_mu(t) - Q_nu(t)|^q dt` with `Q` the quantile
//! functions. For atoms on a grid both quantile functions are piecewise
//! constant and the integral is a finite sum over the merged breakpoints.

use crate::error::{Error, Result};
use crate::grid::GridVector;

/// `W_q` between two probability densities on the grid `x_i = i * h`.
pub fn wasserstein_1d(mu1: &GridVector, mu2: &GridVector, q: f64) -> Result<f64> {
    check_pair(mu1, mu2)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::domain(format!("wasserstein exponent must be >= 1, got {q}")));
    }
    let h = mu1.h();
    let a: Vec<f64> = mu1.values().iter().map(|v| v * h).collect();
    let b: Vec<f64> = mu2.values().iter().map(|v| v * h).collect();
    let cost = transport_cost(&a, &b, h, q);
    Ok(cost.powf(1.0 / q))
}

/// `int |Q_a - Q_b|^q` for atom masses `a`, `b` at positions `i * h`.
fn transport_cost(a: &[f64], b: &[f64], h: f64, q: f64) -> f64 {
    let n = a.len();
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (a.first().copied().unwrap_or(0.0), b.first().copied().unwrap_or(0.0));
    let mut total = 0.0;
    loop {
        while ra <= 0.0 && i + 1 < n {
            i += 1;
            ra = a[i];
        }
        while rb <= 0.0 && j + 1 < n {
            j += 1;
            rb = b[j];
        }
        if ra <= 0.0 || rb <= 0.0 {
            break;
        }
        let step = ra.min(rb);
        let dist = (i as f64 - j as f64).abs() * h;
        total += step * dist.powf(q);
        ra -= step;
        rb -= step;
        if ra <= 0.0 && i + 1 == n || rb <= 0.0 && j + 1 == n {
            break;
        }
    }
    total
}

/// `W_1` through the cumulative distribution functions: `sum_j |C1_j - C2_j| h`.
pub fn wasserstein1_cdf(mu1: &GridVector, mu2: &GridVector) -> Result<f64> {
    check_pair(mu1, mu2)?;
    let h = mu1.h();
    let mut c = 0.0;
    let mut total = 0.0;
    let n = mu1.len();
    for k in 0..n.saturating_sub(1) {
        c += h * (mu1.values()[k] - mu2.values()[k]);
        total += c.abs() * h;
    }
    Ok(total)
}

/// Subgradient of `mu -> W_1(mu, nu)` with respect to the h-weighted inner
/// product on densities.
///
/// `mu` need not be normalized here: the solver evaluates it at iterates that
/// only approximately satisfy the mass constraint.
pub fn wasserstein1_gradient(mu: &[f64], nu: &[f64], h: f64) -> Vec<f64> {
    let n = mu.len();
    let mut signs = vec![0.0; n];
    let mut c = 0.0;
    for k in 0..n.saturating_sub(1) {
        c += h * (mu[k] - nu[k]);
        signs[k] = if c > 0.0 {
            1.0
        } else if c < 0.0 {
            -1.0
        } else {
            0.0
        };
    }
    let mut grad = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        if k + 1 < n {
            acc += signs[k];
        }
        grad[k] = h * acc;
    }
    grad
}

fn check_pair(mu1: &GridVector, mu2: &GridVector) -> Result<()> {
    if !mu1.is_measure() || !mu2.is_measure() {
        return Err(Error::domain("wasserstein distance requires probability measures"));
    }
    mu1.check_compatible(mu2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass(n: usize, h: f64, at: usize) -> GridVector {
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        GridVector::measure_from_weights(&w, h).unwrap()
    }

    #[test]
    fn unit_shift_of_point_mass() {
        let a = point_mass(2, 1.0, 0);
        let b = point_mass(2, 1.0, 1);
        assert!((wasserstein_1d(&a, &b, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((wasserstein_1d(&a, &b, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_measures_have_zero_distance() {
        let a = GridVector::measure_from_weights(&[1.0, 2.0, 3.0], 0.1).unwrap();
        assert_eq!(wasserstein_1d(&a, &a, 1.0).unwrap(), 0.0);
        assert_eq!(wasserstein_1d(&a, &a, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn two_atom_shift() {
        // 1/2 (d_0 + d_1) against 1/2 (d_0.5 + d_1.5)
        let a = GridVector::measure_from_weights(&[1.0, 0.0, 1.0, 0.0], 0.5).unwrap();
        let b = GridVector::measure_from_weights(&[0.0, 1.0, 0.0, 1.0], 0.5).unwrap();
        assert!((wasserstein_1d(&a, &b, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cdf_form_matches_quantile_form() {
        let a = GridVector::measure_from_weights(&[0.3, 0.0, 1.2, 0.7, 0.1], 0.2).unwrap();
        let b = GridVector::measure_from_weights(&[0.0, 0.9, 0.4, 0.0, 1.5], 0.2).unwrap();
        let w_q = wasserstein_1d(&a, &b, 1.0).unwrap();
        let w_c = wasserstein1_cdf(&a, &b).unwrap();
        assert!((w_q - w_c).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 0.25;
        let a = GridVector::measure_from_weights(&[0.3, 0.5, 1.2, 0.7], h).unwrap();
        let b = GridVector::measure_from_weights(&[1.0, 0.2, 0.4, 0.6], h).unwrap();
        let g = wasserstein1_gradient(a.values(), b.values(), h);
        // moving density from cell 3 to cell 0 keeps the mass
        let eps = 1e-7;
        let mut shifted = a.values().to_vec();
        shifted[0] += eps;
        shifted[3] -= eps;
        let a2 = GridVector::raw_measure(shifted, h);
        let fd = (wasserstein1_cdf(&a2, &b).unwrap() - wasserstein1_cdf(&a, &b).unwrap()) / eps;
        let predicted = h * (g[0] - g[3]);
        assert!((fd - predicted).abs() < 1e-6, "{fd} vs {predicted}");
    }

    #[test]
    fn rejects_functions() {
        let a = GridVector::function(vec![1.0, 0.0], 1.0).unwrap();
        let b = point_mass(2, 1.0, 1);
        assert!(wasserstein_1d(&a, &b, 1.0).is_err());
    }
}
