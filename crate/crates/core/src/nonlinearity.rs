//! Empirical degree of nonlinearity of `F` around the exact solution:
//! the smallest `K` (for fitted `c1`, `c2`) with
//! `||F(u) - F(u_true) - F'(u_true)(u - u_true)|| <= K ||F(u) - F(u_true)||^c1 B(u, u_true)^c2`
//! on a sample of level-set points.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridVector};
use crate::model::{level_set_member, LevelSetSpec, Problem};

pub const MIN_SAMPLES: usize = 10;

/// Upper clamp for `c2`, which must stay below 1.
const C2_MAX: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityDegreeFit {
    pub c1: f64,
    pub c2: f64,
    pub k: f64,
    /// RMS residual of the log-space regression.
    pub residual: f64,
    pub samples_used: usize,
}

/// The three quantities entering the defining inequality at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorSample {
    pub remainder: f64,
    pub image_distance: f64,
    pub bregman: f64,
}

pub fn taylor_sample(problem: &Problem, u: &GridVector) -> Result<TaylorSample> {
    let op = problem.operator();
    let h = problem.h();
    let ut = problem.u_true().values();
    let fu = op.apply_slice(u.values(), h);
    let ft = problem.v_exact().values();
    let diff = grid::sub(u.values(), ut);
    let lin = op.derivative_slice(ut, &diff, h);
    let remainder: Vec<f64> = fu.iter().zip(ft).zip(&lin).map(|((a, b), l)| a - b - l).collect();
    Ok(TaylorSample {
        remainder: grid::norm(&remainder, h),
        image_distance: grid::norm(&grid::sub(&fu, ft), h),
        bregman: problem.bregman(u)?,
    })
}

impl NonlinearityDegreeFit {
    /// `K ||F(u) - F(u_true)||^c1 B^c2` for a sample.
    pub fn bound(&self, s: &TaylorSample) -> f64 {
        self.k * s.image_distance.powf(self.c1) * s.bregman.powf(self.c2)
    }
}

pub fn fit_nonlinearity_degree(
    problem: &Problem,
    spec: &LevelSetSpec,
    sample_points: &[GridVector],
) -> Result<NonlinearityDegreeFit> {
    for (i, u) in sample_points.iter().enumerate() {
        if !level_set_member(problem, spec, u)? {
            return Err(Error::precondition(format!("sample {i} lies outside the level set")));
        }
    }
    if problem.operator().is_linear() {
        return Ok(NonlinearityDegreeFit {
            c1: 1.0,
            c2: 0.0,
            k: 0.0,
            residual: 0.0,
            samples_used: sample_points.len(),
        });
    }
    let samples: Vec<TaylorSample> = sample_points
        .iter()
        .map(|u| taylor_sample(problem, u))
        .collect::<Result<_>>()?;
    let usable: Vec<&TaylorSample> = samples
        .iter()
        .filter(|s| s.remainder > 0.0 && s.image_distance > 0.0 && s.bregman > 0.0)
        .collect();
    if usable.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} nondegenerate samples, need {MIN_SAMPLES}",
            usable.len()
        )));
    }

    let m = usable.len();
    let design = DMatrix::from_fn(m, 3, |i, j| match j {
        0 => usable[i].image_distance.ln(),
        1 => usable[i].bregman.ln(),
        _ => 1.0,
    });
    let target = DVector::from_fn(m, |i, _| usable[i].remainder.ln());
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-12)
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    let residual = ((&design * &coef - &target).norm_squared() / m as f64).sqrt();

    let c1 = coef[0].max(0.0);
    let c2 = coef[1].clamp(0.0, C2_MAX);
    // Inflate K so the inequality holds on every sample.
    let k = usable
        .iter()
        .map(|s| s.remainder / (s.image_distance.powf(c1) * s.bregman.powf(c2)))
        .fold(coef[2].exp(), f64::max);

    Ok(NonlinearityDegreeFit {
        c1,
        c2,
        k,
        residual,
        samples_used: m,
    })
}
