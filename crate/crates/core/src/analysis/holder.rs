//! Hölder source conditions and the upper bound on admissible `kappa`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridVector;
use crate::model::{level_set_member, Problem};

use super::avi::AviParams;

/// Agreement required between the extrapolated `L_Omega` and `xi(direction)`.
pub const DIRECTIONAL_TOLERANCE: f64 = 1e-6;

/// `kappa = 2 mu / (1 + mu)`.
pub fn holder_kappa(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain(format!("mu must lie in (0, 1], got {mu}")));
    }
    Ok(2.0 * mu / (1.0 + mu))
}

/// Open upper bound `kappa / (2 - kappa)` on `mu`.
pub fn holder_mu_bound(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::domain(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    Ok(kappa / (2.0 - kappa))
}

/// `{1e-2, 1e-3, ..., 1e-6}`.
pub fn default_t_grid() -> Vec<f64> {
    (2..=6).map(|k| 10f64.powi(-k)).collect()
}

/// Limit at `t = 0` of the polynomial through `(t_i, y_i)` (Neville).
pub fn extrapolate_to_zero(t: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = t.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (t[i + m] * p[i] - t[i] * p[i + 1]) / (t[i + m] - t[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaBoundReport {
    pub xi_direction: f64,
    pub l_omega: f64,
    pub l_s: f64,
    pub omega_matches: bool,
    /// The implied bound `kappa <= q`.
    pub q: f64,
    pub kappa: f64,
    pub kappa_violates: bool,
}

pub fn kappa_upper_bound_check(
    problem: &Problem,
    params: &AviParams,
    direction: &GridVector,
    q: f64,
    t_grid: &[f64],
) -> Result<KappaBoundReport> {
    params.validate()?;
    direction.check_len(problem.dim())?;
    if !(q > 0.0) {
        return Err(Error::domain(format!("q must be positive, got {q}")));
    }
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::domain("t grid needs at least two positive steps"));
    }
    let h = problem.h();
    let xi_dir = problem.xi().apply_slice(direction.values(), h);
    if !(xi_dir < 0.0) {
        return Err(Error::precondition(format!("xi(direction) = {xi_dir} must be negative")));
    }
    let ut = problem.u_true();
    let omega0 = problem.penalty().value(ut);
    let v0 = problem.v_exact();
    let mut d_omega = Vec::with_capacity(t_grid.len());
    let mut d_s = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let u = ut.axpy(t, direction)?;
        if !level_set_member(problem, &params.spec, &u)? {
            return Err(Error::precondition(format!("u_true + {t} * direction leaves the level set")));
        }
        d_omega.push((problem.penalty().value(&u) - omega0) / t);
        d_s.push(problem.misfit(&u, v0)?.powf(q) / t);
    }
    let l_omega = extrapolate_to_zero(t_grid, &d_omega);
    let l_s = extrapolate_to_zero(t_grid, &d_s);
    Ok(KappaBoundReport {
        xi_direction: xi_dir,
        l_omega,
        l_s,
        omega_matches: (l_omega - xi_dir).abs() <= DIRECTIONAL_TOLERANCE * xi_dir.abs().max(1.0),
        q,
        kappa: params.kappa,
        kappa_violates: params.kappa > q,
    })
}
