use regrate::analysis::{
    asc_table, avi_distance, avi_table, kappa_ratio_diagnostic, log_grid, predicted_rate, AviParams,
    DistanceTable,
};
use regrate::harness::{preset, TaskConfig};
use regrate::model::LevelSetSpec;
use regrate::solver::SolverConfig;

fn quadratic_setup() -> (regrate::Problem, AviParams) {
    let cfg = preset("davi-quadratic").unwrap();
    let prob = cfg.build_problem().unwrap();
    let TaskConfig::Davi { avi, .. } = &cfg.task else { panic!() };
    let params = cfg.avi_params(&prob, avi).unwrap();
    (prob, params)
}

#[test]
fn dtilde_table_nonincreasing() {
    let prob = preset("dtilde-diagonal").unwrap().build_problem().unwrap();
    let t = asc_table(&prob, &log_grid(1e-3, 1e3, 60).unwrap()).unwrap();
    assert!(t.entries().windows(2).all(|w| w[1].1 <= w[0].1));
}

#[test]
fn davi_continuity_modulus() {
    let (prob, params) = quadratic_setup();
    let grid = log_grid(0.1, 30.0, 12).unwrap();
    let t = avi_table(&prob, &params, &grid, &SolverConfig::default()).unwrap();
    // beta2 (rho alpha_bar)^(kappa/p) |r^gamma - s^gamma|, plus slack for the inner solves
    let level: f64 = params.spec.rho * params.spec.alpha_bar;
    let lip = params.beta2 * level.powf(params.kappa / prob.p());
    for w in t.table.entries().windows(2) {
        let ((r, a), (s, b)) = (w[0], w[1]);
        let bound = lip * (s.powf(params.gamma) - r.powf(params.gamma)).abs();
        assert!((a - b).abs() <= bound + 1e-6, "r {r} -> {s}: {a} vs {b}, bound {bound}");
    }
}

#[test]
fn davi_minimizers_concentrate() {
    let (prob, params) = quadratic_setup();
    let misfits: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&r| {
            let pt = avi_distance(&prob, &params, r, &SolverConfig::default()).unwrap();
            prob.misfit(&pt.minimizer, prob.v_exact()).unwrap()
        })
        .collect();
    assert!(misfits.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{misfits:?}");
    assert!(misfits[3] < 0.1 * misfits[0].max(1e-300) || misfits[3] < 1e-8, "{misfits:?}");
}

#[test]
fn davi_rejects_bad_parameters() {
    let (prob, params) = quadratic_setup();
    let bad = AviParams { beta1: 1.0, ..params };
    assert!(avi_distance(&prob, &bad, 1.0, &SolverConfig::default()).is_err());
    let bad = AviParams { kappa: -1.0, ..params };
    assert!(avi_distance(&prob, &bad, 1.0, &SolverConfig::default()).is_err());
    assert!(avi_distance(&prob, &params, -1.0, &SolverConfig::default()).is_err());
    let spec = LevelSetSpec::with_default_rho(&prob, 1.0).unwrap();
    assert!(spec.rho > 0.0);
}

#[test]
fn predicted_rate_dominates_delta_kappa() {
    // strictly decreasing table with gamma > 0
    let t = DistanceTable::new(log_grid(1e-2, 1e9, 80).unwrap().into_iter().map(|r| (r, 1.0 / (2.0 + r).ln())).collect()).unwrap();
    let (kappa, gamma) = (1.0, 1.0);
    let deltas: Vec<f64> = (2..=6).map(|k| 10f64.powi(-k)).collect();
    for &d in &deltas {
        let pr = predicted_rate(d, &t, kappa, gamma, None).unwrap();
        let ratio = d.powf(kappa) / pr.value;
        assert!((ratio / pr.r_star.powf(-gamma) - 1.0).abs() < 1e-8);
    }
    let diag = kappa_ratio_diagnostic(&t, kappa, gamma, kappa, &deltas).unwrap();
    assert!(diag.trends_to_zero, "{:?}", diag.ratios);
}

#[test]
fn table_interpolation_is_exact_on_power_laws() {
    let t = DistanceTable::power_law(2.0, 0.75, &log_grid(1e-2, 1e4, 13).unwrap()).unwrap();
    for r in [0.013, 0.5, 7.0, 999.0] {
        let l = t.lookup(r);
        assert!((l.value / (2.0 * r.powf(-0.75)) - 1.0).abs() < 1e-12);
        assert!(!l.extrapolated);
    }
    assert!(t.lookup(1e6).extrapolated);
    assert!(DistanceTable::new(vec![(1.0, 1.0), (0.5, 2.0)]).is_err());
}
