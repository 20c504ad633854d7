//! `Psi`, `Phi`, their inverses and the resulting parameter choices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::table::{DistanceTable, Lookup};

fn check_exponents(p: f64, kappa: f64, gamma: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < p) {
        return Err(Error::domain(format!("need 0 < kappa < p, got kappa = {kappa}, p = {p}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be nonnegative, got {gamma}")));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("r must be positive, got {r}")));
    }
    Ok(())
}

/// `Psi(r) = d(r)^((p - kappa)/kappa) r^(-gamma p / kappa)`.
pub fn psi(r: f64, table: &DistanceTable, p: f64, kappa: f64, gamma: f64) -> Result<Lookup> {
    check_exponents(p, kappa, gamma)?;
    check_r(r)?;
    let d = table.lookup(r);
    Ok(Lookup {
        value: d.value.powf((p - kappa) / kappa) * r.powf(-gamma * p / kappa),
        extrapolated: d.extrapolated,
    })
}

/// `Phi(r) = d(r)^(1/kappa) r^(-gamma/kappa)`.
pub fn phi(r: f64, table: &DistanceTable, kappa: f64, gamma: f64) -> Result<Lookup> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!("gamma must be nonnegative, got {gamma}")));
    }
    check_r(r)?;
    let d = table.lookup(r);
    Ok(Lookup {
        value: d.value.powf(1.0 / kappa) * r.powf(-gamma / kappa),
        extrapolated: d.extrapolated,
    })
}

/// Solves `f(r) = target` for decreasing `f` by bisection in `log r`.
pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, target: f64, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::domain(format!("invalid bracket ({lo}, {hi})")));
    }
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo >= target && target >= f_hi) {
        return Err(Error::Bracket { f_lo, f_hi, target });
    }
    if f_lo == target {
        return Ok(lo);
    }
    if f_hi == target {
        return Ok(hi);
    }
    for _ in 0..400 {
        if hi / lo - 1.0 <= 2.0 * f64::EPSILON {
            break;
        }
        let mid = (lo * hi).sqrt();
        let fm = f(mid);
        if fm == target {
            return Ok(mid);
        }
        if fm > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if (f(lo) - target).abs() <= (f(hi) - target).abs() { lo } else { hi })
}

/// `c delta^(p - kappa)`.
pub fn choose_alpha_apriori(delta: f64, p: f64, kappa: f64, c: f64) -> Result<f64> {
    check_exponents(p, kappa, 0.0)?;
    if !(delta > 0.0) || !(c > 0.0) {
        return Err(Error::domain("delta and c must be positive"));
    }
    Ok(c * delta.powf(p - kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub r_star: f64,
}

/// `alpha` with `delta^p = alpha d(Psi^{-1}(alpha))`, by bisection on
/// `log alpha` with an inner inversion of `Psi`.
pub fn choose_alpha_phi(delta: f64, table: &DistanceTable, p: f64, kappa: f64, gamma: f64) -> Result<AlphaChoice> {
    check_exponents(p, kappa, gamma)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    let (r_lo, r_hi) = table.range();
    if table.entries().iter().any(|&(_, v)| v <= 0.0) || !table.is_strictly_decreasing() {
        return Err(Error::precondition("table must be positive and strictly decreasing"));
    }
    let psi_of = |r: f64| table.value(r).powf((p - kappa) / kappa) * r.powf(-gamma * p / kappa);
    let r_of = |alpha: f64| invert_monotone(psi_of, alpha, (r_lo, r_hi));
    let g = |alpha: f64| -> Result<(f64, f64)> {
        let r = r_of(alpha)?;
        Ok((alpha * table.value(r), r))
    };
    let target = delta.powf(p);
    let (mut a_lo, mut a_hi) = (psi_of(r_hi), psi_of(r_lo));
    let (g_lo, _) = g(a_lo)?;
    let (g_hi, _) = g(a_hi)?;
    if !(g_lo <= target && target <= g_hi) {
        return Err(Error::Bracket {
            f_lo: g_lo,
            f_hi: g_hi,
            target,
        });
    }
    for _ in 0..400 {
        if a_hi / a_lo - 1.0 <= 2.0 * f64::EPSILON {
            break;
        }
        let mid = (a_lo * a_hi).sqrt();
        if g(mid)?.0 < target {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    let (glo, rlo) = g(a_lo)?;
    let (ghi, rhi) = g(a_hi)?;
    Ok(if (glo - target).abs() <= (ghi - target).abs() {
        AlphaChoice { alpha: a_lo, r_star: rlo }
    } else {
        AlphaChoice { alpha: a_hi, r_star: rhi }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedRate {
    /// `d(Phi^{-1}(delta))`.
    pub value: f64,
    pub r_star: f64,
    /// Relative residual of `delta^kappa / value = r_star^(-gamma)`.
    pub identity_residual: f64,
    pub extrapolated: bool,
}

/// Predicted error bound `d(Phi^{-1}(delta))`, from the table or from a
/// power-law majorant `a r^(-b gamma)`.
pub fn predicted_rate(
    delta: f64,
    table: &DistanceTable,
    kappa: f64,
    gamma: f64,
    majorant: Option<(f64, f64)>,
) -> Result<PredictedRate> {
    if !(delta > 0.0) || !(kappa > 0.0) || !(gamma >= 0.0) {
        return Err(Error::domain("need delta > 0, kappa > 0, gamma >= 0"));
    }
    let (value, r_star, extrapolated) = match majorant {
        Some((a, b)) => {
            if !(a > 0.0 && b > 0.0 && gamma > 0.0) {
                return Err(Error::domain("majorant needs a > 0, b > 0 and gamma > 0"));
            }
            // Phi(r) = a^(1/kappa) r^(-gamma (b + 1) / kappa)
            let r = (delta / a.powf(1.0 / kappa)).powf(-kappa / (gamma * (b + 1.0)));
            (a * r.powf(-b * gamma), r, false)
        }
        None => {
            let (lo, hi) = table.range();
            let f = |r: f64| table.value(r).powf(1.0 / kappa) * r.powf(-gamma / kappa);
            let r = invert_monotone(f, delta, (lo, hi))?;
            (table.value(r), r, !table.contains(r))
        }
    };
    let expected = r_star.powf(-gamma);
    let identity_residual = if value > 0.0 {
        ((delta.powf(kappa) / value) - expected).abs() / expected
    } else {
        f64::INFINITY
    };
    Ok(PredictedRate {
        value,
        r_star,
        identity_residual,
        extrapolated,
    })
}

/// Rate exponent `b kappa / (b + 1)` obtained from a majorant `a r^(-b gamma)`.
pub fn majorant_rate_exponent(b: f64, kappa: f64) -> f64 {
    b * kappa / (b + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaDiagnostic {
    /// `(delta, delta^q / d(Phi^{-1}(delta)))` in the order of the grid.
    pub ratios: Vec<(f64, f64)>,
    pub trends_to_zero: bool,
}

/// Whether `delta^q / d(Phi^{-1}(delta))` decays along a decreasing delta
/// grid (monotonically, by more than a factor 10 overall). At `q = kappa`
/// the ratio equals `Phi^{-1}(delta)^(-gamma)`.
pub fn kappa_ratio_diagnostic(
    table: &DistanceTable,
    kappa: f64,
    gamma: f64,
    q: f64,
    deltas: &[f64],
) -> Result<KappaDiagnostic> {
    let ratios: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| predicted_rate(d, table, kappa, gamma, None).map(|p| (d, d.powf(q) / p.value)))
        .collect::<Result<_>>()?;
    let decreasing = ratios.windows(2).all(|w| w[1].1 <= w[0].1);
    let trends_to_zero = decreasing
        && ratios.len() >= 2
        && ratios[ratios.len() - 1].1 < 0.1 * ratios[0].1;
    Ok(KappaDiagnostic { ratios, trends_to_zero })
}
