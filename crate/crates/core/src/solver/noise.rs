//! Synthetic data at an exact noise level.

use crate::error::{Error, Result};
use crate::grid::GridVector;
use crate::rng;
use crate::similarity::Similarity;
use crate::wasserstein::wasserstein_1d;

const CALIBRATION_TOLERANCE: f64 = 1e-10;

/// `v_delta` with `S(v_delta, v_exact) = delta`.
///
/// Norm kinds add a pseudorandom direction scaled so the misfit is
/// `delta`. The Wasserstein kind translates the exact measure by a
/// fractional number of cells, to the right for even seeds and to the
/// left for odd ones, with mass piling up at the boundary cell.
pub fn make_noisy_data(
    v_exact: &GridVector,
    similarity: &Similarity,
    delta: f64,
    direction_seed: u64,
) -> Result<GridVector> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("noise level must be positive, got {delta}")));
    }
    similarity.validate()?;
    match *similarity {
        Similarity::Norm | Similarity::NormPower { .. } => {
            let e = similarity.norm_exponent().unwrap_or(1.0);
            let h = v_exact.h();
            let mut gen = rng::seeded(direction_seed);
            let dir = rng::unit_direction(&mut gen, v_exact.len(), h);
            let radius = delta.powf(1.0 / e);
            let noisy = |r: f64| {
                GridVector::raw(v_exact.values().iter().zip(&dir).map(|(v, d)| v + r * d).collect(), h)
            };
            // re-measure once to absorb rounding in the direction's norm
            let first = noisy(radius);
            let measured = first.sub(v_exact)?.norm();
            Ok(if measured > 0.0 { noisy(radius * radius / measured) } else { first })
        }
        Similarity::Wasserstein1d { q } => {
            if !v_exact.is_measure() {
                return Err(Error::domain("Wasserstein noise needs a probability measure"));
            }
            let right = direction_seed % 2 == 0;
            let n = v_exact.len();
            let dist = |tau: f64| -> Result<f64> { wasserstein_1d(&shift(v_exact, tau, right), v_exact, q) };
            let max_tau = (n - 1) as f64;
            let reachable = dist(max_tau)?;
            if reachable < delta {
                return Err(Error::precondition(format!(
                    "noise level {delta} exceeds the largest reachable shift distance {reachable}"
                )));
            }
            let (mut lo, mut hi) = (0.0, max_tau);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let d = dist(mid)?;
                if (d - delta).abs() <= CALIBRATION_TOLERANCE * delta.max(1.0) {
                    return Ok(shift(v_exact, mid, right));
                }
                if d < delta {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(shift(v_exact, 0.5 * (lo + hi), right))
        }
    }
}

/// Translation by `tau` cells with linear interpolation between cells.
fn shift(mu: &GridVector, tau: f64, right: bool) -> GridVector {
    let n = mu.len();
    let k = tau.floor() as usize;
    let theta = tau - k as f64;
    let mut out = vec![0.0; n];
    let src: Vec<f64> = if right { mu.values().to_vec() } else { mu.values().iter().rev().copied().collect() };
    for (i, &m) in src.iter().enumerate() {
        let a = (i + k).min(n - 1);
        let b = (i + k + 1).min(n - 1);
        out[a] += (1.0 - theta) * m;
        out[b] += theta * m;
    }
    if !right {
        out.reverse();
    }
    GridVector::raw_measure(out, mu.h())
}
