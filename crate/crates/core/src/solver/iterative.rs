//! Gradient descent with Barzilai-Borwein steps and Armijo backtracking.
//! Handles free, positive-orthant and simplex domains; on the entropy
//! penalty the steps are multiplicative (mirror descent).

use crate::error::Result;
use crate::grid;
use crate::model::Problem;
use crate::penalty::Penalty;

const STEP_MIN: f64 = 1e-14;
const STEP_MAX: f64 = 1e12;
/// Relative band in which two objective values are indistinguishable.
const ROUNDOFF_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    Free,
    /// Nonnegative (positive for entropy) coefficients.
    Positive,
    /// Probability densities: nonnegative with h-mass one.
    Simplex,
}

pub(crate) fn domain_of(problem: &Problem) -> Domain {
    if problem.similarity().requires_measures() {
        Domain::Simplex
    } else if problem.penalty().requires_positive() {
        Domain::Positive
    } else {
        Domain::Free
    }
}

/// Objective and gradient of `S(F(u), v)^p + alpha Omega(u)` on raw slices.
pub(crate) struct Objective<'a> {
    pub problem: &'a Problem,
    pub v: &'a [f64],
    pub alpha: f64,
}

impl Objective<'_> {
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        let h = self.problem.h();
        let omega = self.problem.penalty().value_slice(u, h);
        if !omega.is_finite() {
            return Ok(f64::INFINITY);
        }
        let fu = self.problem.operator().apply_slice(u, h);
        let (misfit, _) = self
            .problem
            .similarity()
            .power_and_gradient(&fu, self.v, h, self.problem.p())?;
        Ok(misfit + self.alpha * omega)
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let h = self.problem.h();
        let op = self.problem.operator();
        let fu = op.apply_slice(u, h);
        let (_, gw) = self
            .problem
            .similarity()
            .power_and_gradient(&fu, self.v, h, self.problem.p())?;
        let mut g = op.adjoint_slice(u, &gw, h);
        let gp = self.problem.penalty().gradient_slice(u, h)?;
        for (a, b) in g.iter_mut().zip(gp) {
            *a += self.alpha * b;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RunOutcome {
    pub u: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RunSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

/// Euclidean projection onto `{u >= 0, h sum u = 1}`.
pub(crate) fn project_simplex(y: &[f64], h: f64) -> Vec<f64> {
    let total = 1.0 / h;
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        acc += s;
        let t = (acc - total) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn normalize_mass(u: &mut [f64], h: f64) {
    let mass = h * u.iter().sum::<f64>();
    if mass > 0.0 {
        for x in u.iter_mut() {
            *x /= mass;
        }
    }
}

/// Maps an arbitrary starting vector into the domain.
pub(crate) fn into_domain(u: &[f64], domain: Domain, entropic: bool, h: f64) -> Vec<f64> {
    match domain {
        Domain::Free => u.to_vec(),
        Domain::Positive | Domain::Simplex => {
            let floor = if entropic { 1e-3 / (u.len() as f64 * h) } else { 0.0 };
            let mut out: Vec<f64> = u.iter().map(|x| x.max(floor)).collect();
            if out.iter().all(|&x| x == 0.0) {
                out = vec![1.0; u.len()];
            }
            if domain == Domain::Simplex {
                if entropic {
                    normalize_mass(&mut out, h);
                } else {
                    out = project_simplex(&out, h);
                }
            }
            out
        }
    }
}

fn step(u: &[f64], g: &[f64], t: f64, domain: Domain, entropic: bool, h: f64) -> Vec<f64> {
    if entropic {
        // exponentiated gradient, shifted for stability
        let mut out: Vec<f64> = u
            .iter()
            .zip(g)
            .map(|(x, gi)| x * (-t * gi).clamp(-700.0, 700.0).exp())
            .collect();
        if domain == Domain::Simplex {
            normalize_mass(&mut out, h);
        }
        return out;
    }
    let y: Vec<f64> = u.iter().zip(g).map(|(x, gi)| x - t * gi).collect();
    match domain {
        Domain::Free => y,
        Domain::Positive => y.into_iter().map(|x| x.max(0.0)).collect(),
        Domain::Simplex => project_simplex(&y, h),
    }
}

/// Monotone descent from `u0`. Stationarity is measured by the gradient
/// mapping `||u - step(u, g, 1)||`.
pub(crate) fn descend(obj: &Objective, u0: Vec<f64>, settings: &RunSettings) -> Result<RunOutcome> {
    let h = obj.problem.h();
    let domain = domain_of(obj.problem);
    let entropic = obj.problem.penalty() == &Penalty::NegativeEntropy;
    let mut u = u0;
    let mut f = obj.value(&u)?;
    let mut g = obj.gradient(&u)?;
    let mut t = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for it in 0..settings.max_iterations {
        let mapping = grid::norm(&grid::sub(&u, &step(&u, &g, 1.0, domain, entropic, h)), h);
        if mapping <= settings.tolerance {
            return Ok(RunOutcome { u, objective: f, iterations: it, converged: true });
        }
        if let Some((pu, pg)) = &prev {
            let s = grid::sub(&u, pu);
            let y = grid::sub(&g, pg);
            let sy = grid::dot(&s, &y, h);
            if sy > 0.0 {
                t = (grid::dot(&s, &s, h) / sy).clamp(STEP_MIN, STEP_MAX);
            }
        }
        let mut accepted = None;
        let mut trial_t = t;
        while trial_t >= STEP_MIN {
            let cand = step(&u, &g, trial_t, domain, entropic, h);
            let fc = obj.value(&cand)?;
            let moved = grid::sub(&cand, &u);
            let decrease = if entropic {
                -settings.sufficient_decrease * grid::dot(&g, &moved, h)
            } else {
                settings.sufficient_decrease * grid::dot(&moved, &moved, h) / trial_t
            };
            if fc.is_finite() && fc <= f - decrease && fc <= f {
                accepted = Some((cand, fc, None));
                break;
            }
            // below the resolution of f: judge the decrease by the trapezoid
            // rule on the gradients instead
            if fc.is_finite() && (fc - f).abs() <= ROUNDOFF_BAND * f.abs().max(f64::MIN_POSITIVE) {
                let gc = obj.gradient(&cand)?;
                let mean: Vec<f64> = g.iter().zip(&gc).map(|(a, b)| 0.5 * (a + b)).collect();
                let estimate = grid::dot(&mean, &moved, h);
                if estimate <= -decrease {
                    accepted = Some((cand, fc, Some(gc)));
                    break;
                }
            }
            trial_t *= settings.shrink;
        }
        let Some((cand, fc, gc)) = accepted else {
            // no descent possible at machine precision
            return Ok(RunOutcome { u, objective: f, iterations: it, converged: mapping <= settings.tolerance });
        };
        let gc = match gc {
            Some(gc) => gc,
            None => obj.gradient(&cand)?,
        };
        prev = Some((std::mem::replace(&mut u, cand), std::mem::replace(&mut g, gc)));
        f = fc;
        t = trial_t;
    }
    let mapping = grid::norm(&grid::sub(&u, &step(&u, &g, 1.0, domain, entropic, h)), h);
    Ok(RunOutcome {
        u,
        objective: f,
        iterations: settings.max_iterations,
        converged: mapping <= settings.tolerance,
    })
}
