//! Numerical lower bound `d_num(r)` for the distance function of the
//! approximate variational inequality:
//! `d(r) = -inf_{u in M} [ xi(u - u_true) + beta1 B(u, u_true) + beta2 r^gamma S(F(u), F(u_true))^kappa ]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridVector};
use crate::levelset::boundary_along;
use crate::model::{level_set_member, LevelSetSpec, Problem};
use crate::rng;
use crate::solver::SolverConfig;

use super::table::DistanceTable;

const STEP_MIN: f64 = 1e-14;
/// Random starting directions per solve, in addition to `-xi`.
const RANDOM_STARTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AviParams {
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub spec: LevelSetSpec,
}

impl AviParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(Error::domain(format!("beta1 must lie in [0, 1), got {}", self.beta1)));
        }
        if !(self.beta2 >= 0.0 && self.beta2.is_finite()) {
            return Err(Error::domain("beta2 must be nonnegative"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain("gamma must be nonnegative"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::domain("kappa must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AviDiagnostics {
    pub starts: usize,
    pub iterations: usize,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AviPoint {
    pub value: f64,
    pub minimizer: GridVector,
    pub diagnostics: AviDiagnostics,
}

/// `xi(u - u_true) + beta1 B + weight * S(F(u), v0)^kappa` with `weight = beta2 r^gamma`.
struct ViResidual<'a> {
    problem: &'a Problem,
    params: &'a AviParams,
}

impl ViResidual<'_> {
    fn parts(&self, u: &[f64]) -> Result<(f64, f64)> {
        let p = self.problem;
        let h = p.h();
        let ut = p.u_true().values();
        let diff = grid::sub(u, ut);
        let linear = p.xi().apply_slice(&diff, h);
        let breg = if self.params.beta1 > 0.0 {
            p.penalty().bregman_slice(u, ut, h, p.xi())
        } else {
            0.0
        };
        let fu = p.operator().apply_slice(u, h);
        let (sk, _) = p
            .similarity()
            .power_and_gradient(&fu, p.v_exact().values(), h, self.params.kappa)?;
        Ok((linear + self.params.beta1 * breg, sk))
    }

    fn value(&self, u: &[f64], weight: f64) -> Result<f64> {
        let (a, b) = self.parts(u)?;
        Ok(a + weight * b)
    }

    fn gradient(&self, u: &[f64], weight: f64) -> Result<Vec<f64>> {
        let p = self.problem;
        let h = p.h();
        let b1 = self.params.beta1;
        let mut g: Vec<f64> = p.xi().coefficients().iter().map(|x| (1.0 - b1) * x).collect();
        if b1 > 0.0 {
            for (a, b) in g.iter_mut().zip(p.penalty().gradient_slice(u, h)?) {
                *a += b1 * b;
            }
        }
        if weight > 0.0 {
            let fu = p.operator().apply_slice(u, h);
            let (_, gw) = p
                .similarity()
                .power_and_gradient(&fu, p.v_exact().values(), h, self.params.kappa)?;
            for (a, b) in g.iter_mut().zip(p.operator().adjoint_slice(u, &gw, h)) {
                *a += weight * b;
            }
        }
        Ok(g)
    }
}

fn weight(params: &AviParams, r: f64) -> f64 {
    if params.beta2 == 0.0 {
        0.0
    } else {
        params.beta2 * r.powf(params.gamma)
    }
}

/// Keeps iterates where the functionals are defined, then pulls them back
/// into the level set along the segment toward `u_true`.
fn project(problem: &Problem, spec: &LevelSetSpec, u: Vec<f64>) -> Result<Vec<f64>> {
    let h = problem.h();
    let mut u = u;
    if problem.similarity().requires_measures() {
        u = crate::solver::project_onto_simplex(&u, h);
    }
    if problem.penalty().requires_positive() {
        let floor = 1e-300;
        u.iter_mut().for_each(|x| *x = x.max(floor));
    }
    let candidate = GridVector::raw(u, h);
    if level_set_member(problem, spec, &candidate)? {
        return Ok(candidate.into_values());
    }
    let ut = problem.u_true().values();
    let dir = GridVector::raw(grid::sub(candidate.values(), ut), h);
    let t = boundary_along(problem, spec, &dir)?.min(1.0);
    Ok(ut.iter().zip(dir.values()).map(|(a, d)| a + t * d).collect())
}

/// Starting points: `u_true` moved toward the boundary along `-xi` and
/// along seeded random directions.
fn starts(problem: &Problem, spec: &LevelSetSpec, seed: u64) -> Result<Vec<Vec<f64>>> {
    let h = problem.h();
    let n = problem.dim();
    let ut = problem.u_true().values();
    let mut dirs = Vec::new();
    let xi = problem.xi().coefficients();
    if grid::norm(xi, h) > 0.0 {
        dirs.push(xi.iter().map(|x| -x).collect::<Vec<f64>>());
    }
    let mut gen = rng::seeded(seed);
    for _ in 0..RANDOM_STARTS {
        dirs.push(rng::unit_direction(&mut gen, n, h));
    }
    let mut out = Vec::new();
    for d in dirs {
        let dir = GridVector::raw(d, h);
        let t = boundary_along(problem, spec, &dir)?;
        let t = if t.is_finite() { t } else { 1.0 };
        for frac in [0.5, 0.999] {
            let u: Vec<f64> = ut.iter().zip(dir.values()).map(|(a, b)| a + frac * t * b).collect();
            out.push(project(problem, spec, u)?);
        }
    }
    Ok(out)
}

/// Projected descent with Barzilai-Borwein steps and backtracking.
fn descend(
    problem: &Problem,
    params: &AviParams,
    res: &ViResidual,
    w: f64,
    u0: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let h = problem.h();
    let mut u = u0;
    let mut f = res.value(&u, w)?;
    let mut g = res.gradient(&u, w)?;
    let mut t = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for it in 0..cfg.max_iterations {
        if let Some((pu, pg)) = &prev {
            let s = grid::sub(&u, pu);
            let y = grid::sub(&g, pg);
            let sy = grid::dot(&s, &y, h);
            if sy > 0.0 {
                t = (grid::dot(&s, &s, h) / sy).clamp(STEP_MIN, 1e12);
            } else {
                t *= 2.0;
            }
        }
        let mut accepted = None;
        let mut trial = t;
        while trial >= STEP_MIN {
            let y: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a - trial * b).collect();
            let cand = project(problem, &params.spec, y)?;
            let fc = res.value(&cand, w)?;
            let moved = grid::sub(&cand, &u);
            let m2 = grid::dot(&moved, &moved, h);
            if fc <= f - cfg.sufficient_decrease * m2 / trial && fc < f {
                accepted = Some((cand, fc, m2));
                break;
            }
            trial *= cfg.shrink;
        }
        let Some((cand, fc, m2)) = accepted else {
            return Ok((u, f, it, true));
        };
        let gc = res.gradient(&cand, w)?;
        let small = m2.sqrt() / trial <= cfg.gradient_tolerance;
        prev = Some((std::mem::replace(&mut u, cand), std::mem::replace(&mut g, gc)));
        f = fc;
        t = trial;
        if small {
            return Ok((u, f, it + 1, true));
        }
    }
    Ok((u, f, cfg.max_iterations, false))
}

/// `d_num(r)` with its best violating point. Never negative since `u_true`
/// is always a candidate.
pub fn avi_distance(problem: &Problem, params: &AviParams, r: f64, cfg: &SolverConfig) -> Result<AviPoint> {
    let (values, points, diag) = avi_candidates(problem, params, &[r], cfg)?;
    Ok(AviPoint {
        value: values[0].0,
        minimizer: GridVector::raw(points[values[0].1].clone(), problem.h()),
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AviTable {
    pub table: DistanceTable,
    /// Best violating point for each grid radius.
    pub minimizers: Vec<GridVector>,
    pub diagnostics: AviDiagnostics,
}

/// `d_num` on `r_grid`. Candidates found for any radius are scored at every
/// radius, which makes the table exactly nonincreasing.
pub fn avi_table(problem: &Problem, params: &AviParams, r_grid: &[f64], cfg: &SolverConfig) -> Result<AviTable> {
    let (values, points, diagnostics) = avi_candidates(problem, params, r_grid, cfg)?;
    let table = DistanceTable::new(r_grid.iter().zip(&values).map(|(r, (v, _))| (*r, *v)).collect())?;
    let h = problem.h();
    Ok(AviTable {
        table,
        minimizers: values.iter().map(|(_, k)| GridVector::raw(points[*k].clone(), h)).collect(),
        diagnostics,
    })
}

type Candidates = (Vec<(f64, usize)>, Vec<Vec<f64>>, AviDiagnostics);

fn avi_candidates(problem: &Problem, params: &AviParams, r_grid: &[f64], cfg: &SolverConfig) -> Result<Candidates> {
    params.validate()?;
    cfg.validate()?;
    if r_grid.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::domain("radii must be nonnegative"));
    }
    let res = ViResidual { problem, params };
    let start_points = starts(problem, &params.spec, cfg.seed)?;
    let runs = crate::parallel::map_indexed(r_grid.len(), |i| -> Result<(Vec<Vec<f64>>, usize, bool)> {
        let w = weight(params, r_grid[i]);
        let mut found = Vec::with_capacity(start_points.len());
        let mut iterations = 0;
        let mut exhausted = false;
        for s in &start_points {
            let (u, _, it, ok) = descend(problem, params, &res, w, s.clone(), cfg)?;
            iterations += it;
            exhausted |= !ok;
            found.push(u);
        }
        Ok((found, iterations, exhausted))
    });

    let mut pool: Vec<Vec<f64>> = vec![problem.u_true().values().to_vec()];
    let mut diag = AviDiagnostics {
        starts: start_points.len(),
        ..Default::default()
    };
    for run in runs {
        let (found, it, ex) = run?;
        diag.iterations += it;
        diag.budget_exhausted |= ex;
        pool.extend(found);
    }
    let parts: Vec<(f64, f64)> = pool.iter().map(|u| res.parts(u)).collect::<Result<_>>()?;
    let values = r_grid
        .iter()
        .map(|&r| {
            let w = weight(params, r);
            // u_true sits at index 0 with value exactly zero
            let mut best = (0.0, 0usize);
            for (k, (a, b)) in parts.iter().enumerate().skip(1) {
                let v = -(a + w * b);
                if v > best.0 {
                    best = (v, k);
                }
            }
            best
        })
        .collect();
    Ok((values, pool, diag))
}
