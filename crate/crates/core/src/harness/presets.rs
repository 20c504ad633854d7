//! Named, ready-to-run experiment configurations.

use crate::analysis::holder_kappa;
use crate::penalty::Penalty;
use crate::similarity::Similarity;
use crate::solver::SolverConfig;

use super::config::{
    AlphaRule, AviConfig, ExperimentConfig, Expectation, GridSpec, LevelSetConfig, OperatorConfig, ProblemConfig,
    TableSource, TaskConfig, UTrueRecipe,
};

pub const DEFAULT_SEED: u64 = 1;

const RATE_TOLERANCE: f64 = 0.1;
const MIN_R_SQUARED: f64 = 0.98;

const QUADRATIC_AVI: AviConfig = AviConfig {
    beta1: 0.0,
    beta2: 1.0,
    gamma: 1.0,
    kappa: 1.0,
};

fn base(name: &str, problem: ProblemConfig, task: TaskConfig) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        seed: DEFAULT_SEED,
        output_dir: None,
        problem,
        level_set: LevelSetConfig::default(),
        solver: SolverConfig::default(),
        task,
    }
}

fn holder_problem(n: usize, mu: f64) -> ProblemConfig {
    ProblemConfig {
        p: 2.0,
        operator: OperatorConfig::PowerLawDiagonal { n, decay: 1.0 },
        penalty: Penalty::SquaredNorm,
        similarity: Similarity::Norm,
        u_true: UTrueRecipe::Holder { mu },
    }
}

fn holder_rates(name: &str, mu: f64) -> ExperimentConfig {
    let kappa = holder_kappa(mu).expect("valid mu");
    base(
        name,
        holder_problem(200, mu),
        TaskConfig::Rates {
            deltas: GridSpec::Log { lo: 1e-6, hi: 1e-2, count: 8 },
            alpha: AlphaRule::Apriori { kappa, c: 1.0 },
            expect: Some(Expectation::Slope {
                target: kappa,
                tolerance: RATE_TOLERANCE,
                min_r_squared: MIN_R_SQUARED,
            }),
        },
    )
}

fn source_problem(n: usize, p: f64) -> ProblemConfig {
    ProblemConfig {
        p,
        operator: OperatorConfig::PowerLawDiagonal { n, decay: 1.0 },
        penalty: Penalty::SquaredNorm,
        similarity: Similarity::Norm,
        u_true: UTrueRecipe::SourceImage,
    }
}

pub fn presets() -> Vec<ExperimentConfig> {
    vec![
        holder_rates("holder-mu-0.25", 0.25),
        holder_rates("holder-mu-0.5", 0.5),
        holder_rates("holder-mu-1.0", 1.0),
        base(
            "exact-penalization",
            source_problem(1_000_000, 1.0),
            TaskConfig::Rates {
                deltas: GridSpec::Log { lo: 1e-6, hi: 1e-3, count: 8 },
                alpha: AlphaRule::Fixed { alpha: 0.1 },
                expect: Some(Expectation::Slope {
                    target: 1.0,
                    tolerance: RATE_TOLERANCE,
                    min_r_squared: MIN_R_SQUARED,
                }),
            },
        ),
        base(
            "small-p",
            source_problem(10_000, 0.5),
            TaskConfig::Rates {
                deltas: GridSpec::Log { lo: 1e-6, hi: 1e-2, count: 8 },
                alpha: AlphaRule::Apriori { kappa: 0.4, c: 1.0 },
                expect: Some(Expectation::SlopeAtMost { bound: 0.6 }),
            },
        ),
        base(
            "autoconvolution-degree",
            ProblemConfig {
                p: 2.0,
                operator: OperatorConfig::Autoconvolution { n: 64 },
                penalty: Penalty::SquaredNorm,
                similarity: Similarity::Norm,
                u_true: UTrueRecipe::Gaussian {
                    center: 0.5,
                    width: 0.15,
                    offset: 0.5,
                },
            },
            TaskConfig::CheckBounds {
                avi: QUADRATIC_AVI,
                q: 1.0,
                deltas: vec![],
                r_grid: None,
                nonlinearity_samples: 60,
            },
        ),
        ExperimentConfig {
            solver: SolverConfig {
                max_iterations: 5_000,
                gradient_tolerance: 1e-9,
                ..SolverConfig::default()
            },
            ..base(
                "wasserstein-entropy",
                ProblemConfig {
                    p: 2.0,
                    operator: OperatorConfig::Identity { n: 64 },
                    penalty: Penalty::NegativeEntropy,
                    similarity: Similarity::Wasserstein1d { q: 1.0 },
                    u_true: UTrueRecipe::Gaussian {
                        center: 0.4,
                        width: 0.1,
                        offset: 0.05,
                    },
                },
                TaskConfig::Solve { delta: 0.02, alpha: 1e-3 },
            )
        },
        base("dtilde-diagonal", holder_problem(200, 0.5), TaskConfig::Dtilde { r_grid: None }),
        base(
            "davi-quadratic",
            holder_problem(50, 0.5),
            TaskConfig::Davi {
                r_grid: None,
                avi: QUADRATIC_AVI,
            },
        ),
        base(
            "phi-choice",
            holder_problem(200, 0.5),
            TaskConfig::ChooseAlpha {
                deltas: GridSpec::Log { lo: 1e-4, hi: 1e-2, count: 6 },
                table: TableSource::Dtilde,
                kappa: 1.0,
                gamma: 1.0,
                r_grid: Some(GridSpec::Log { lo: 1e-2, hi: 1e6, count: 80 }),
            },
        ),
        base(
            "bounds-holder",
            holder_problem(50, 0.5),
            TaskConfig::CheckBounds {
                avi: QUADRATIC_AVI,
                q: 1.0,
                deltas: vec![1e-4, 1e-3, 1e-2],
                r_grid: None,
                nonlinearity_samples: 0,
            },
        ),
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    presets().into_iter().find(|p| p.name == name)
}

pub fn preset_names() -> Vec<String> {
    presets().into_iter().map(|p| p.name).collect()
}
