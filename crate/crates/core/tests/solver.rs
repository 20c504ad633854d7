use regrate::model::{level_set_member, tikhonov_value, LevelSetSpec};
use regrate::solver::{
    apriori_validity, make_noisy_data, minimize_tikhonov, InitialPoint, SolverConfig, SolverMethod,
};
use regrate::{ForwardOperator, GridVector, Penalty, Problem, Similarity};

fn bump(n: usize, center: f64, width: f64, offset: f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (0..n)
        .map(|i| offset + (-((i as f64 + 0.5) * h - center).powi(2) / (2.0 * width * width)).exp())
        .collect()
}

fn problems() -> Vec<(&'static str, Problem)> {
    let n = 32;
    let h = 1.0 / n as f64;
    let smooth = GridVector::function(bump(n, 0.4, 0.15, 0.1), h).unwrap();
    let density = GridVector::measure_from_weights(&bump(n, 0.5, 0.1, 0.05), h).unwrap();
    vec![
        (
            "diagonal p=2",
            Problem::new(ForwardOperator::power_law_diagonal(n, 1.0).unwrap(), Penalty::SquaredNorm, Similarity::Norm, smooth.clone(), 2.0)
                .unwrap(),
        ),
        (
            "integration power-norm p=1.5",
            Problem::new(
                ForwardOperator::Integration { n },
                Penalty::power_norm(1.5).unwrap(),
                Similarity::Norm,
                smooth.clone(),
                1.5,
            )
            .unwrap(),
        ),
        (
            "autoconvolution p=2",
            Problem::new(ForwardOperator::Autoconvolution { n }, Penalty::SquaredNorm, Similarity::Norm, smooth, 2.0).unwrap(),
        ),
        (
            "identity entropy W1",
            Problem::new(
                ForwardOperator::diagonal(vec![1.0; n]).unwrap(),
                Penalty::NegativeEntropy,
                Similarity::wasserstein(1.0).unwrap(),
                density,
                2.0,
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn noisy_data_has_requested_misfit() {
    for (name, prob) in problems() {
        for seed in 0..4 {
            let v = make_noisy_data(prob.v_exact(), prob.similarity(), 0.01, seed).unwrap();
            let d = prob.similarity().value(&v, prob.v_exact()).unwrap();
            assert!((d - 0.01).abs() <= 1e-8, "{name}: {d}");
        }
    }
}

#[test]
fn minimality_certificate() {
    let delta = 0.01;
    for (name, prob) in problems() {
        let v = make_noisy_data(prob.v_exact(), prob.similarity(), delta, 3).unwrap();
        for alpha in [1e-3, 1e-2, 1e-1] {
            let cfg = SolverConfig {
                initial_point: InitialPoint::DataBackprojection,
                ..SolverConfig::default()
            };
            let sol = minimize_tikhonov(&prob, &v, alpha, &cfg).unwrap();
            let value = tikhonov_value(&prob, &sol.minimizer, &v, alpha).unwrap();
            assert!((value - sol.objective).abs() <= 1e-12 * value.max(1.0), "{name}");
            let comparison = delta.powf(prob.p()) + alpha * prob.omega_true();
            assert!(value <= comparison * (1.0 + 1e-9), "{name}, alpha {alpha}: {value} > {comparison}");
        }
    }
}

#[test]
fn apriori_validity_implies_membership() {
    for (name, prob) in problems() {
        let spec = LevelSetSpec::with_default_rho(&prob, 1.0).unwrap();
        let mut checked = 0;
        for delta in [1e-3, 1e-2, 5e-2] {
            for alpha in [1e-3, 1e-2, 1e-1, 1.0] {
                if !apriori_validity(delta, alpha, &spec, &prob) {
                    continue;
                }
                let v = make_noisy_data(prob.v_exact(), prob.similarity(), delta, 0).unwrap();
                let sol = minimize_tikhonov(&prob, &v, alpha, &SolverConfig::default()).unwrap();
                assert!(level_set_member(&prob, &spec, &sol.minimizer).unwrap(), "{name}: delta {delta}, alpha {alpha}");
                checked += 1;
            }
        }
        assert!(checked > 0, "{name}: no valid pair");
    }
}

#[test]
fn more_restarts_never_worse() {
    let n = 12;
    let h = 1.0 / n as f64;
    let prob = Problem::new(
        ForwardOperator::power_law_diagonal(n, 1.0).unwrap(),
        Penalty::SquaredNorm,
        Similarity::Norm,
        GridVector::function(bump(n, 0.5, 0.2, 0.0), h).unwrap(),
        0.5,
    )
    .unwrap();
    let v = make_noisy_data(prob.v_exact(), prob.similarity(), 0.05, 1).unwrap();
    let run = |restarts: usize| {
        let cfg = SolverConfig {
            method: SolverMethod::Iterative,
            restarts,
            seed: 42,
            ..SolverConfig::default()
        };
        minimize_tikhonov(&prob, &v, 0.05, &cfg).unwrap().objective
    };
    let objectives: Vec<f64> = [8, 12, 16, 24].iter().map(|&r| run(r)).collect();
    assert!(objectives.windows(2).all(|w| w[1] <= w[0]), "{objectives:?}");
    assert_eq!(run(16), run(16));
}

#[test]
fn path_search_is_global_for_small_p() {
    let n = 12;
    let h = 1.0 / n as f64;
    let prob = Problem::new(
        ForwardOperator::power_law_diagonal(n, 1.0).unwrap(),
        Penalty::SquaredNorm,
        Similarity::Norm,
        GridVector::function(bump(n, 0.5, 0.2, 0.0), h).unwrap(),
        0.5,
    )
    .unwrap();
    let v = make_noisy_data(prob.v_exact(), prob.similarity(), 0.05, 1).unwrap();
    for alpha in [1e-3, 1e-2, 0.1, 1.0] {
        let path = minimize_tikhonov(&prob, &v, alpha, &SolverConfig::default()).unwrap();
        let iter = minimize_tikhonov(
            &prob,
            &v,
            alpha,
            &SolverConfig {
                method: SolverMethod::Iterative,
                restarts: 16,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        assert!(path.objective <= iter.objective * (1.0 + 1e-9), "alpha {alpha}: {} vs {}", path.objective, iter.objective);
    }
}

#[test]
fn rejects_bad_arguments() {
    let (_, prob) = problems().remove(0);
    let v = prob.v_exact().clone();
    assert!(minimize_tikhonov(&prob, &v, 0.0, &SolverConfig::default()).is_err());
    let short = GridVector::function(vec![0.0; 3], prob.h()).unwrap();
    assert!(minimize_tikhonov(&prob, &short, 0.1, &SolverConfig::default()).is_err());
    let (_, auto) = problems().remove(2);
    let cfg = SolverConfig {
        method: SolverMethod::SpectralPath,
        ..SolverConfig::default()
    };
    assert!(minimize_tikhonov(&auto, auto.v_exact(), 0.1, &cfg).is_err());
}
