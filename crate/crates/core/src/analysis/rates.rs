//! Empirical convergence rates and the constants of the error bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{c_p, Problem};
use crate::solver::{make_noisy_data, minimize_tikhonov, SolverConfig};

use super::avi::AviParams;

pub const MIN_RATE_DELTAS: usize = 5;
pub const MIN_RATE_SUCCESSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(log delta, log error)`.
pub fn fit_loglog(samples: &[(f64, f64)]) -> Result<RateFit> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("{} samples, need 2", samples.len())));
    }
    let mut deltas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    deltas.sort_by(f64::total_cmp);
    if deltas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("rate samples need distinct deltas"));
    }
    if samples.iter().any(|&(d, e)| !(d > 0.0 && e > 0.0)) {
        return Err(Error::domain("rate samples must be positive"));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        samples: samples.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub delta: f64,
    pub alpha: f64,
    pub bregman_error: f64,
    pub objective: f64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRun {
    pub rows: Vec<RateRow>,
    pub fit: RateFit,
}

/// For each `delta`: noisy data (same direction seed throughout), `alpha`
/// from `choice`, a solve, and the Bregman error; then a log-log fit.
pub fn empirical_rate<C>(
    problem: &Problem,
    choice: C,
    delta_grid: &[f64],
    cfg: &SolverConfig,
    noise_seed: u64,
) -> Result<RateRun>
where
    C: Fn(f64) -> Result<f64> + Sync + Send,
{
    if delta_grid.len() < MIN_RATE_DELTAS {
        return Err(Error::precondition(format!(
            "{} deltas given, need {MIN_RATE_DELTAS}",
            delta_grid.len()
        )));
    }
    if delta_grid.iter().any(|d| !(*d > 0.0)) || delta_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::precondition("delta grid must be positive and strictly decreasing"));
    }
    if delta_grid[0] / delta_grid[delta_grid.len() - 1] < 100.0 {
        return Err(Error::precondition("delta grid must span at least two decades"));
    }
    let rows = crate::parallel::map_indexed(delta_grid.len(), |i| {
        let delta = delta_grid[i];
        let attempt = || -> Result<RateRow> {
            let v = make_noisy_data(problem.v_exact(), problem.similarity(), delta, noise_seed)?;
            let alpha = choice(delta)?;
            let sol = minimize_tikhonov(problem, &v, alpha, cfg)?;
            Ok(RateRow {
                delta,
                alpha,
                bregman_error: problem.bregman(&sol.minimizer)?,
                objective: sol.objective,
                converged: sol.converged,
                error: None,
            })
        };
        attempt().unwrap_or_else(|e| RateRow {
            delta,
            alpha: f64::NAN,
            bregman_error: f64::NAN,
            objective: f64::NAN,
            converged: false,
            error: Some(e.to_string()),
        })
    });
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error.is_none() && r.bregman_error > 0.0)
        .map(|r| (r.delta, r.bregman_error))
        .collect();
    if samples.len() < MIN_RATE_SUCCESSES {
        return Err(Error::InsufficientData(format!(
            "{} successful solves, need {MIN_RATE_SUCCESSES}",
            samples.len()
        )));
    }
    Ok(RateRun {
        fit: fit_loglog(&samples)?,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

pub fn lemma_constants(problem: &Problem, params: &AviParams) -> Result<LemmaConstants> {
    params.validate()?;
    let p = problem.p();
    let kappa = params.kappa;
    if !(kappa < p) {
        return Err(Error::domain(format!("need kappa < p, got kappa = {kappa}, p = {p}")));
    }
    let b1 = 1.0 - params.beta1;
    let s = problem.s();
    let base = c_p(kappa)? * params.beta2 * s.powf(kappa);
    let k2 = 2.0 * base.powf(p / (p - kappa)) * (kappa / p).powf(kappa / (p - kappa)) * (p - kappa) / (p * b1);
    Ok(LemmaConstants {
        k1: 2.0 / b1,
        k2,
        k3: 1.0 / b1,
    })
}

/// `K1 delta^p / alpha + K2 alpha^(kappa/(p-kappa)) r^(gamma p/(p-kappa)) + K3 d`.
pub fn rates_lemma_bound(
    problem: &Problem,
    params: &AviParams,
    r: f64,
    delta: f64,
    alpha: f64,
    d_value: f64,
) -> Result<f64> {
    let k = lemma_constants(problem, params)?;
    if !(r >= 0.0 && delta >= 0.0 && alpha > 0.0 && d_value >= 0.0) {
        return Err(Error::domain("need r, delta, d >= 0 and alpha > 0"));
    }
    let p = problem.p();
    let kappa = params.kappa;
    let middle = if k.k2 == 0.0 {
        0.0
    } else {
        k.k2 * alpha.powf(kappa / (p - kappa)) * r.powf(params.gamma * p / (p - kappa))
    };
    Ok(k.k1 * delta.powf(p) / alpha + middle + k.k3 * d_value)
}

/// Majorant `a r^(-b gamma)` of the distance function when a variational
/// inequality holds with exponent `mu`, used at exponent `kappa < mu`.
pub fn vi_to_avi_majorant(beta2: f64, gamma: f64, kappa: f64, mu: f64) -> Result<(f64, f64)> {
    if !(beta2 > 0.0) {
        return Err(Error::domain("beta2 must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain("gamma must be nonnegative"));
    }
    if !(kappa > 0.0 && mu > kappa) {
        return Err(Error::domain(format!("need 0 < kappa < mu, got kappa = {kappa}, mu = {mu}")));
    }
    let b = kappa / (mu - kappa);
    let a = (mu / kappa).powf(kappa / (mu - kappa)) * (mu / (mu - kappa)) * beta2;
    Ok((a, b))
}
