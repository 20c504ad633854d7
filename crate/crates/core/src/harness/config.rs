//! Experiment configuration, read from and written to TOML.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, AviParams};
use crate::error::{Error, Result};
use crate::grid::GridVector;
use crate::model::{LevelSetSpec, Problem};
use crate::operator::ForwardOperator;
use crate::penalty::Penalty;
use crate::rng;
use crate::similarity::Similarity;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the default output root when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub level_set: LevelSetConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub task: TaskConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    pub operator: OperatorConfig,
    pub penalty: Penalty,
    pub similarity: Similarity,
    pub u_true: UTrueRecipe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorConfig {
    /// `sigma_k = k^(-decay)`.
    PowerLawDiagonal { n: usize, decay: f64 },
    Identity { n: usize },
    Integration { n: usize },
    Autoconvolution { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UTrueRecipe {
    /// `u_k = sigma_k^mu k^(-1/2)` with seeded signs; diagonal operators only.
    Holder { mu: f64 },
    /// `u = A* w`, `w_k = k^(-1/2)` with seeded signs; linear operators only.
    SourceImage,
    /// `offset + exp(-(x - center)^2 / (2 width^2))` at cell midpoints.
    Gaussian { center: f64, width: f64, offset: f64 },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSetConfig {
    pub alpha_bar: f64,
    /// Defaults to `1.1 c_p s^p Omega(u_true)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl Default for LevelSetConfig {
    fn default() -> Self {
        LevelSetConfig { alpha_bar: 1.0, rho: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AviConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub kappa: f64,
}

/// A grid given explicitly or as `count` log-spaced points on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit(Vec<f64>),
    Log { lo: f64, hi: f64, count: usize },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            GridSpec::Explicit(v) => v.clone(),
            GridSpec::Log { lo, hi, count } => analysis::log_grid(*lo, *hi, *count)?,
        };
        if pts.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if pts.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Config("grid points must be positive".into()));
        }
        if pts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        Ok(pts)
    }

    /// Points in decreasing order, as used for noise levels.
    pub fn decreasing(&self) -> Result<Vec<f64>> {
        let mut p = self.points()?;
        p.reverse();
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaRule {
    /// `c delta^(p - kappa)`.
    Apriori { kappa: f64, c: f64 },
    Fixed { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Expectation {
    Slope { target: f64, tolerance: f64, min_r_squared: f64 },
    /// One-sided: the fitted slope must not exceed `bound`.
    SlopeAtMost { bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TableSource {
    Dtilde,
    Davi { avi: AviConfig },
    /// `a r^(-exponent)`.
    PowerLaw { a: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    Solve {
        delta: f64,
        alpha: f64,
    },
    Dtilde {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_grid: Option<GridSpec>,
    },
    Davi {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_grid: Option<GridSpec>,
        avi: AviConfig,
    },
    Rates {
        deltas: GridSpec,
        alpha: AlphaRule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    ChooseAlpha {
        deltas: GridSpec,
        table: TableSource,
        kappa: f64,
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_grid: Option<GridSpec>,
    },
    CheckBounds {
        avi: AviConfig,
        /// Exponent in the directional limit of the misfit.
        q: f64,
        /// Noise levels for the error-bound check; empty skips it.
        #[serde(default)]
        deltas: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_grid: Option<GridSpec>,
        /// Level-set samples for the nonlinearity fit; zero skips it.
        #[serde(default)]
        nonlinearity_samples: usize,
    },
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Solve { .. } => "solve",
            TaskConfig::Dtilde { .. } => "dtilde",
            TaskConfig::Davi { .. } => "davi",
            TaskConfig::Rates { .. } => "rates",
            TaskConfig::ChooseAlpha { .. } => "choose-alpha",
            TaskConfig::CheckBounds { .. } => "check-bounds",
        }
    }
}

pub(crate) fn r_grid_or_default(spec: &Option<GridSpec>) -> Result<Vec<f64>> {
    match spec {
        Some(g) => g.points(),
        None => Ok(analysis::default_r_grid()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks everything that can be checked without running the task.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config("name must be nonempty and contain no path separators".into()));
        }
        self.solver.validate()?;
        let problem = self.build_problem().map_err(cfg_err)?;
        self.level_set_spec(&problem).map_err(cfg_err)?;
        let check_avi = |a: &AviConfig| self.avi_params(&problem, a).map(|_| ()).map_err(cfg_err);
        match &self.task {
            TaskConfig::Solve { delta, alpha } => {
                if !(*delta > 0.0 && *alpha > 0.0) {
                    return Err(Error::Config("solve needs delta > 0 and alpha > 0".into()));
                }
            }
            TaskConfig::Dtilde { r_grid } => {
                r_grid_or_default(r_grid)?;
            }
            TaskConfig::Davi { r_grid, avi } => {
                r_grid_or_default(r_grid)?;
                check_avi(avi)?;
            }
            TaskConfig::Rates { deltas, alpha, .. } => {
                deltas.points()?;
                match alpha {
                    AlphaRule::Apriori { kappa, c } => {
                        if !(*kappa > 0.0 && *kappa < self.problem.p && *c > 0.0) {
                            return Err(Error::Config("a-priori rule needs 0 < kappa < p and c > 0".into()));
                        }
                    }
                    AlphaRule::Fixed { alpha } => {
                        if !(*alpha > 0.0) {
                            return Err(Error::Config("fixed alpha must be positive".into()));
                        }
                    }
                }
            }
            TaskConfig::ChooseAlpha {
                deltas,
                table,
                kappa,
                gamma,
                r_grid,
            } => {
                deltas.points()?;
                r_grid_or_default(r_grid)?;
                if !(*kappa > 0.0 && *kappa < self.problem.p && *gamma >= 0.0) {
                    return Err(Error::Config("choose-alpha needs 0 < kappa < p and gamma >= 0".into()));
                }
                if let TableSource::Davi { avi } = table {
                    check_avi(avi)?;
                }
            }
            TaskConfig::CheckBounds {
                avi, q, deltas, r_grid, ..
            } => {
                check_avi(avi)?;
                r_grid_or_default(r_grid)?;
                if !(*q > 0.0) {
                    return Err(Error::Config("q must be positive".into()));
                }
                if deltas.iter().any(|d| !(*d > 0.0)) {
                    return Err(Error::Config("deltas must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn build_operator(&self) -> Result<ForwardOperator> {
        match &self.problem.operator {
            OperatorConfig::PowerLawDiagonal { n, decay } => ForwardOperator::power_law_diagonal(*n, *decay),
            OperatorConfig::Identity { n } => ForwardOperator::diagonal(vec![1.0; *n]),
            OperatorConfig::Integration { n } => Ok(ForwardOperator::Integration { n: *n }),
            OperatorConfig::Autoconvolution { n } => Ok(ForwardOperator::Autoconvolution { n: *n }),
        }
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let op = self.build_operator()?;
        op.validate()?;
        let n = op.dim_u();
        let h = 1.0 / n as f64;
        let signs = || -> Vec<f64> {
            use rand::Rng;
            let mut gen = rng::substream(self.seed, 1);
            (0..n).map(|_| if gen.random::<bool>() { 1.0 } else { -1.0 }).collect()
        };
        let normalize = |v: Vec<f64>| -> Result<GridVector> {
            let g = GridVector::function(v, h)?;
            let norm = g.norm();
            if norm == 0.0 {
                return Err(Error::domain("exact solution recipe produced zero"));
            }
            Ok(g.scale(1.0 / norm))
        };
        let u_true = match &self.problem.u_true {
            UTrueRecipe::Holder { mu } => {
                let ForwardOperator::Diagonal { sigma } = &op else {
                    return Err(Error::domain("Hölder recipe needs a diagonal operator"));
                };
                if !(*mu > 0.0) {
                    return Err(Error::domain("mu must be positive"));
                }
                let s = signs();
                normalize(
                    sigma
                        .iter()
                        .enumerate()
                        .map(|(k, sg)| sg.powf(*mu) * ((k + 1) as f64).powf(-0.5) * s[k])
                        .collect(),
                )?
            }
            UTrueRecipe::SourceImage => {
                if !op.is_linear() {
                    return Err(Error::domain("source-image recipe needs a linear operator"));
                }
                let s = signs();
                let w: Vec<f64> = (0..n).map(|k| ((k + 1) as f64).powf(-0.5) * s[k]).collect();
                normalize(op.adjoint_slice(&vec![0.0; n], &w, h))?
            }
            UTrueRecipe::Gaussian { center, width, offset } => {
                if !(*width > 0.0) {
                    return Err(Error::domain("width must be positive"));
                }
                let v: Vec<f64> = (0..n)
                    .map(|i| {
                        let x = (i as f64 + 0.5) * h;
                        offset + (-(x - center).powi(2) / (2.0 * width * width)).exp()
                    })
                    .collect();
                if self.problem.similarity.requires_measures() {
                    GridVector::measure_from_weights(&v, h)?
                } else {
                    GridVector::function(v, h)?
                }
            }
            UTrueRecipe::Values { values } => {
                if values.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: values.len(),
                    });
                }
                GridVector::function(values.clone(), h)?
            }
        };
        Problem::new(op, self.problem.penalty, self.problem.similarity, u_true, self.problem.p)
    }

    pub fn level_set_spec(&self, problem: &Problem) -> Result<LevelSetSpec> {
        match self.level_set.rho {
            Some(rho) => LevelSetSpec::new(problem, self.level_set.alpha_bar, rho),
            None => LevelSetSpec::with_default_rho(problem, self.level_set.alpha_bar),
        }
    }

    pub fn avi_params(&self, problem: &Problem, avi: &AviConfig) -> Result<AviParams> {
        let params = AviParams {
            beta1: avi.beta1,
            beta2: avi.beta2,
            gamma: avi.gamma,
            kappa: avi.kappa,
            spec: self.level_set_spec(problem)?,
        };
        params.validate()?;
        Ok(params)
    }
}
