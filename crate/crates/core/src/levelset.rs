//! Geometry of the level sets `M_alpha_bar(rho * alpha_bar)` around the
//! exact solution: boundary search along rays, radial projection, sampling.

use crate::error::{Error, Result};
use crate::grid::GridVector;
use crate::model::{level_set_member, LevelSetSpec, Problem};
use crate::rng;

const BISECTION_STEPS: usize = 80;

fn member_at(problem: &Problem, spec: &LevelSetSpec, direction: &GridVector, t: f64) -> Result<bool> {
    let u = problem.u_true().axpy(t, direction)?;
    level_set_member(problem, spec, &u)
}

/// Largest `t` (up to bisection accuracy) with `u_true + t * direction` in the level set.
///
/// Returns `f64::INFINITY` if the ray never leaves the set up to `t = 1e12`.
pub fn boundary_along(problem: &Problem, spec: &LevelSetSpec, direction: &GridVector) -> Result<f64> {
    if direction.norm() == 0.0 {
        return Err(Error::precondition("direction must be nonzero"));
    }
    let mut hi = 1.0;
    while member_at(problem, spec, direction, hi)? {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if member_at(problem, spec, direction, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Pulls `u` back onto the segment `[u_true, u]` so that it lies in the
/// level set. Points already inside are returned unchanged.
pub fn project_toward_center(problem: &Problem, spec: &LevelSetSpec, u: &GridVector) -> Result<GridVector> {
    if level_set_member(problem, spec, u)? {
        return Ok(u.clone());
    }
    let direction = u.sub(problem.u_true())?;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if member_at(problem, spec, &direction, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    problem.u_true().axpy(lo, &direction)
}

/// Random points of the level set: `u_true + U(0,1) * t_max(d) * d` for
/// Gaussian directions `d`.
pub fn sample_level_set(problem: &Problem, spec: &LevelSetSpec, count: usize, seed: u64) -> Result<Vec<GridVector>> {
    use rand::Rng;
    let mut rng = rng::seeded(seed);
    let n = problem.dim();
    let h = problem.h();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = GridVector::raw(rng::unit_direction(&mut rng, n, h), h);
        let t_max = boundary_along(problem, spec, &d)?.min(1e6);
        let frac: f64 = rng.random::<f64>();
        let u = problem.u_true().axpy(frac * t_max, &d)?;
        if level_set_member(problem, spec, &u)? {
            out.push(u);
        }
    }
    Ok(out)
}

/// Estimate of `K_alpha_bar >= sup ||u - u_true||` over the level set:
/// the largest boundary distance found along random and coordinate rays,
/// inflated by 1.5.
pub fn level_set_radius(problem: &Problem, spec: &LevelSetSpec, random_rays: usize, seed: u64) -> Result<f64> {
    let n = problem.dim();
    let h = problem.h();
    let mut rng = rng::seeded(seed);
    let mut best: f64 = 0.0;
    let mut consider = |d: GridVector| -> Result<()> {
        let t = boundary_along(problem, spec, &d)?;
        if !t.is_finite() {
            return Err(Error::Numerical("level set is unbounded along a sampled ray".into()));
        }
        best = best.max(t * d.norm());
        Ok(())
    };
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[k] = sign / h.sqrt();
            consider(GridVector::raw(e, h))?;
        }
    }
    for _ in 0..random_rays {
        consider(GridVector::raw(rng::unit_direction(&mut rng, n, h), h))?;
    }
    Ok(1.5 * best)
}
