//! Minimization of `S(F(u), v_delta)^p + alpha Omega(u)`.

mod iterative;
mod noise;
mod path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridVector;
use crate::model::{c_p, tikhonov_value, LevelSetSpec, Problem};
use crate::operator::ForwardOperator;
use crate::penalty::Penalty;
use crate::rng;

pub use noise::make_noisy_data;
pub(crate) use iterative::project_simplex as project_onto_simplex;

/// Restart count used for nonconvex exponents `p < 1`.
pub const MIN_NONCONVEX_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPoint {
    #[default]
    Zero,
    UTruePerturbed,
    DataBackprojection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Exact path search where it applies, iterative otherwise.
    #[default]
    Auto,
    Iterative,
    /// Linear `F`, squared norm penalty and a norm misfit only.
    SpectralPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub restarts: usize,
    pub initial_point: InitialPoint,
    pub method: SolverMethod,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 20_000,
            gradient_tolerance: 1e-10,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            restarts: 1,
            initial_point: InitialPoint::Zero,
            method: SolverMethod::Auto,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::Config("gradient_tolerance must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config("shrink factor must lie in (0, 1)".into()));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::Config("sufficient-decrease constant must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub minimizer: GridVector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub best_restart: usize,
}

/// Whether the exact path search applies to this problem.
pub fn path_applicable(problem: &Problem) -> bool {
    problem.operator().is_linear()
        && *problem.penalty() == Penalty::SquaredNorm
        && problem.similarity().norm_exponent().is_some()
}

pub fn minimize_tikhonov(problem: &Problem, v_data: &GridVector, alpha: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    cfg.validate()?;
    v_data.check_len(problem.operator().dim_v())?;
    if (v_data.h() - problem.h()).abs() > 0.0 {
        return Err(Error::GridMismatch(v_data.h(), problem.h()));
    }
    let use_path = match cfg.method {
        SolverMethod::Auto => path_applicable(problem),
        SolverMethod::SpectralPath => {
            if !path_applicable(problem) {
                return Err(Error::domain(
                    "path search needs a linear operator, squared norm penalty and norm misfit",
                ));
            }
            true
        }
        SolverMethod::Iterative => false,
    };
    if use_path {
        solve_on_path(problem, v_data, alpha)
    } else {
        solve_iteratively(problem, v_data, alpha, cfg)
    }
}

fn solve_on_path(problem: &Problem, v_data: &GridVector, alpha: f64) -> Result<SolveResult> {
    let h = problem.h();
    let e = problem.similarity().norm_exponent().unwrap_or(1.0) * problem.p();
    let path = path::TikhonovPath::new(problem.operator(), v_data.values(), h)?;
    let (best, evaluations) = path.minimize(alpha, e);
    let minimizer = GridVector::raw(path.solution(best.beta), h);
    let objective = tikhonov_value(problem, &minimizer, v_data, alpha)?;
    Ok(SolveResult {
        minimizer,
        objective,
        iterations: evaluations,
        converged: true,
        best_restart: 0,
    })
}

fn initial_point(problem: &Problem, v_data: &GridVector, cfg: &SolverConfig) -> Vec<f64> {
    let h = problem.h();
    let n = problem.dim();
    let op = problem.operator();
    match cfg.initial_point {
        InitialPoint::Zero => {
            if problem.penalty().requires_positive() || problem.similarity().requires_measures() {
                vec![1.0 / (n as f64 * h); n]
            } else {
                vec![0.0; n]
            }
        }
        InitialPoint::UTruePerturbed => {
            let ut = problem.u_true().values();
            let scale = 0.1 * problem.u_true().norm().max(1e-3);
            let mut gen = rng::substream(cfg.seed, u64::MAX);
            let d = rng::unit_direction(&mut gen, n, h);
            ut.iter().zip(d).map(|(a, b)| a + scale * b).collect()
        }
        InitialPoint::DataBackprojection => {
            let base = vec![1.0; n];
            op.adjoint_slice(&base, v_data.values(), h)
        }
    }
}

fn perturb(u: &[f64], restart: usize, cfg: &SolverConfig, h: f64) -> Vec<f64> {
    if restart == 0 {
        return u.to_vec();
    }
    let mut gen = rng::substream(cfg.seed, restart as u64);
    let d = rng::unit_direction(&mut gen, u.len(), h);
    let scale = crate::grid::norm(u, h).max(1.0) * 0.5;
    u.iter().zip(d).map(|(a, b)| a + scale * b).collect()
}

fn solve_iteratively(problem: &Problem, v_data: &GridVector, alpha: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    let h = problem.h();
    let restarts = if problem.p() < 1.0 {
        cfg.restarts.max(MIN_NONCONVEX_RESTARTS)
    } else {
        cfg.restarts.max(1)
    };
    let objective = iterative::Objective {
        problem,
        v: v_data.values(),
        alpha,
    };
    let settings = iterative::RunSettings {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.gradient_tolerance,
        shrink: cfg.shrink,
        sufficient_decrease: cfg.sufficient_decrease,
    };
    let domain = iterative::domain_of(problem);
    let entropic = problem.penalty().requires_positive();
    let base = initial_point(problem, v_data, cfg);
    let run = |r: usize| -> Result<iterative::RunOutcome> {
        let start = iterative::into_domain(&perturb(&base, r, cfg, h), domain, entropic, h);
        iterative::descend(&objective, start, &settings)
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<iterative::RunOutcome>> = (0..restarts).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<iterative::RunOutcome>> = (0..restarts).map(run).collect();

    let mut best: Option<(usize, iterative::RunOutcome)> = None;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome?;
        let better = match &best {
            None => true,
            Some((_, b)) => outcome.objective < b.objective,
        };
        if better {
            best = Some((r, outcome));
        }
    }
    let (best_restart, outcome) = best.expect("at least one restart");
    let minimizer = if domain == iterative::Domain::Simplex {
        GridVector::raw_measure(outcome.u, h)
    } else {
        GridVector::raw(outcome.u, h)
    };
    let objective = tikhonov_value(problem, &minimizer, v_data, alpha)?;
    Ok(SolveResult {
        minimizer,
        objective,
        iterations: outcome.iterations,
        converged: outcome.converged,
        best_restart,
    })
}

/// Solution of `(A*A + alpha) u = A* v_data`.
pub fn closed_form_linear_l2(op: &ForwardOperator, v_data: &GridVector, alpha: f64) -> Result<GridVector> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    v_data.check_len(op.dim_v())?;
    let h = v_data.h();
    match op {
        ForwardOperator::Diagonal { sigma } => Ok(GridVector::raw(
            sigma
                .iter()
                .zip(v_data.values())
                .map(|(s, v)| s * v / (s * s + alpha))
                .collect(),
            h,
        )),
        ForwardOperator::Integration { .. } => {
            let a = op.matrix(h).expect("linear operator");
            let at = a.transpose();
            let mut normal = &at * &a;
            for k in 0..normal.nrows() {
                normal[(k, k)] += alpha;
            }
            let rhs = &at * DVector::from_column_slice(v_data.values());
            let chol = normal
                .cholesky()
                .ok_or_else(|| Error::Numerical("normal matrix is not positive definite".into()))?;
            Ok(GridVector::raw(chol.solve(&rhs).iter().copied().collect(), h))
        }
        ForwardOperator::Autoconvolution { .. } => Err(Error::domain("closed form needs a linear operator")),
    }
}

/// `alpha <= alpha_bar` and `delta^p / alpha <= rho / (2 c_p s^p) - Omega(u_true) / 2`.
pub fn apriori_validity(delta: f64, alpha: f64, spec: &LevelSetSpec, problem: &Problem) -> bool {
    let p = problem.p();
    let Ok(cp) = c_p(p) else { return false };
    if !(alpha > 0.0) || alpha > spec.alpha_bar {
        return false;
    }
    let bound = spec.rho / (2.0 * cp * problem.s().powf(p)) - 0.5 * problem.omega_true();
    delta.powf(p) / alpha <= bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::Similarity;

    fn scalar(p: f64) -> Problem {
        Problem::new(
            ForwardOperator::diagonal(vec![1.0]).unwrap(),
            Penalty::SquaredNorm,
            Similarity::Norm,
            GridVector::function(vec![1.0], 1.0).unwrap(),
            p,
        )
        .unwrap()
    }

    #[test]
    fn scalar_examples() {
        let prob = scalar(2.0);
        let v = GridVector::function(vec![1.0], 1.0).unwrap();
        for method in [SolverMethod::Auto, SolverMethod::Iterative] {
            let cfg = SolverConfig { method, ..Default::default() };
            let r = minimize_tikhonov(&prob, &v, 1.0, &cfg).unwrap();
            assert!((r.minimizer.values()[0] - 0.5).abs() < 1e-9);
            let r = minimize_tikhonov(&prob, &v, 1e-8, &cfg).unwrap();
            assert!((r.minimizer.values()[0] - 1.0).abs() < 1e-3);
        }
        assert!(minimize_tikhonov(&prob, &v, 0.0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let op = ForwardOperator::diagonal(vec![1.0]).unwrap();
        let v = GridVector::function(vec![1.0], 1.0).unwrap();
        assert!((closed_form_linear_l2(&op, &v, 1.0).unwrap().values()[0] - 0.5).abs() < 1e-15);
        let z = GridVector::zeros(1, 1.0).unwrap();
        assert_eq!(closed_form_linear_l2(&op, &z, 0.3).unwrap().values(), &[0.0]);
        assert!(closed_form_linear_l2(&op, &v, 0.0).is_err());
    }

    #[test]
    fn integration_path_matches_closed_form() {
        let n = 20;
        let h = 1.0 / n as f64;
        let ut = GridVector::function((0..n).map(|i| (i as f64 * h * 3.0).sin()).collect(), h).unwrap();
        let prob = Problem::new(ForwardOperator::Integration { n }, Penalty::SquaredNorm, Similarity::norm_power(2.0).unwrap(), ut, 1.0).unwrap();
        let v = make_noisy_data(prob.v_exact(), prob.similarity(), 1e-3, 4).unwrap();
        let closed = closed_form_linear_l2(prob.operator(), &v, 1e-3).unwrap();
        for method in [SolverMethod::SpectralPath, SolverMethod::Iterative] {
            let cfg = SolverConfig { method, gradient_tolerance: 1e-13, max_iterations: 200_000, ..Default::default() };
            let r = minimize_tikhonov(&prob, &v, 1e-3, &cfg).unwrap();
            let err = r.minimizer.sub(&closed).unwrap().norm();
            assert!(err < 1e-8, "{method:?}: {err}");
        }
    }

    #[test]
    fn apriori_examples() {
        let prob = scalar(2.0);
        let spec = LevelSetSpec::new(&prob, 1.0, 2.2).unwrap();
        // bound = 2.2 / (2 * 2) - 0.5 = 0.05
        assert!(!apriori_validity(0.1, 0.1, &spec, &prob));
        assert!(apriori_validity(0.05, 0.1, &spec, &prob));
        assert!(!apriori_validity(0.05, 2.0, &spec, &prob));
        let tight = LevelSetSpec { alpha_bar: 1.0, rho: 2.0 };
        assert!(!apriori_validity(1e-6, 0.5, &tight, &prob));
    }
}
