use proptest::prelude::*;
use regrate::model::{level_set_member, LevelSetSpec};
use regrate::{ForwardOperator, GridVector, Penalty, Problem, Similarity};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn vec3(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    let v = || proptest::collection::vec(-3.0..3.0f64, n);
    (v(), v(), v())
}

fn weights3() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..24).prop_flat_map(|n| {
        let w = move || proptest::collection::vec(0.0..1.0f64, n).prop_filter("mass", |w| w.iter().sum::<f64>() > 1e-3);
        (w(), w(), w())
    })
}

fn quasi_triangle(sim: Similarity, a: &GridVector, b: &GridVector, c: &GridVector) -> Result<(), TestCaseError> {
    let s = sim.quasi_triangle_constant();
    let ac = sim.value(a, c).unwrap();
    let ab = sim.value(a, b).unwrap();
    let bc = sim.value(b, c).unwrap();
    prop_assert!(ac <= s * (ab + bc) + 1e-10, "{ac} > {s} ({ab} + {bc})");
    prop_assert!((sim.value(c, a).unwrap() - ac).abs() <= 1e-12 * ac.max(1.0));
    prop_assert!(ac >= 0.0);
    Ok(())
}

proptest! {
    #![proptest_config(cases(10_000))]

    #[test]
    fn quasi_triangle_norm(x in vec3(8)) {
        let g = |v: &Vec<f64>| GridVector::function(v.clone(), 0.125).unwrap();
        quasi_triangle(Similarity::Norm, &g(&x.0), &g(&x.1), &g(&x.2))?;
    }

    #[test]
    fn quasi_triangle_norm_power(x in vec3(8), q in 1.0..4.0f64) {
        let g = |v: &Vec<f64>| GridVector::function(v.clone(), 0.125).unwrap();
        quasi_triangle(Similarity::norm_power(q).unwrap(), &g(&x.0), &g(&x.1), &g(&x.2))?;
    }

    #[test]
    fn quasi_triangle_wasserstein(w in weights3(), q in 1.0..3.0f64) {
        let h = 1.0 / w.0.len() as f64;
        let m = |v: &Vec<f64>| GridVector::measure_from_weights(v, h).unwrap();
        quasi_triangle(Similarity::wasserstein(q).unwrap(), &m(&w.0), &m(&w.1), &m(&w.2))?;
    }

    #[test]
    fn subgradient_inequality_squared_norm(x in vec3(6)) {
        check_subgradient(Penalty::SquaredNorm, x.0, x.1)?;
    }

    #[test]
    fn subgradient_inequality_power_norm(x in vec3(6), t in 1.05..2.0f64) {
        check_subgradient(Penalty::power_norm(t).unwrap(), x.0, x.1)?;
    }

    #[test]
    fn subgradient_inequality_entropy(
        u in proptest::collection::vec(1e-3..3.0f64, 6),
        w in proptest::collection::vec(1e-3..3.0f64, 6),
    ) {
        check_subgradient(Penalty::NegativeEntropy, u, w)?;
    }
}

fn check_subgradient(pen: Penalty, u: Vec<f64>, w: Vec<f64>) -> Result<(), TestCaseError> {
    let h = 0.2;
    let u = GridVector::function(u, h).unwrap();
    let w = GridVector::function(w, h).unwrap();
    let xi = pen.subgradient(&w).unwrap();
    // direct evaluation, independent of the bregman routine
    let gap = pen.value(&u) - pen.value(&w) - xi.apply(&u.sub(&w).unwrap()).unwrap();
    let scale = pen.value(&u).abs().max(pen.value(&w).abs()).max(1.0);
    prop_assert!(gap >= -1e-12 * scale, "subgradient inequality violated by {gap}");
    let b = pen.bregman(&u, &w, &xi).unwrap();
    prop_assert!(b >= 0.0);
    prop_assert!((b - gap.max(0.0)).abs() <= 1e-10 * scale);
    prop_assert_eq!(pen.bregman(&w, &w, &xi).unwrap(), 0.0);
    Ok(())
}

fn adjoint_gap(op: &ForwardOperator, u0: &[f64], d: &[f64], w: &[f64], h: f64) -> Result<(), TestCaseError> {
    let g = |v: &[f64]| GridVector::function(v.to_vec(), h).unwrap();
    let (u0, d, w) = (g(u0), g(d), g(w));
    let fd = op.derivative_apply(&u0, &d).unwrap();
    let fw = op.adjoint_derivative_apply(&u0, &w).unwrap();
    let lhs = fd.inner(&w).unwrap();
    let rhs = d.inner(&fw).unwrap();
    let scale = fd.norm() * w.norm() + d.norm() * fw.norm();
    prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300), "{lhs} vs {rhs}");
    Ok(())
}

proptest! {
    #![proptest_config(cases(1_000))]

    #[test]
    fn adjoint_diagonal(x in vec3(12), decay in 0.0..2.0f64) {
        adjoint_gap(&ForwardOperator::power_law_diagonal(12, decay).unwrap(), &x.0, &x.1, &x.2, 1.0 / 12.0)?;
    }

    #[test]
    fn adjoint_integration(x in vec3(12)) {
        adjoint_gap(&ForwardOperator::Integration { n: 12 }, &x.0, &x.1, &x.2, 1.0 / 12.0)?;
    }

    #[test]
    fn adjoint_autoconvolution(x in vec3(12)) {
        adjoint_gap(&ForwardOperator::Autoconvolution { n: 12 }, &x.0, &x.1, &x.2, 1.0 / 12.0)?;
    }

    #[test]
    fn level_set_nesting(
        u in proptest::collection::vec(-2.0..2.0f64, 5),
        a1 in 1e-3..1.0f64,
        ratio in 1.0..50.0f64,
        extra in 0.01..5.0f64,
    ) {
        let prob = Problem::new(
            ForwardOperator::power_law_diagonal(5, 1.0).unwrap(),
            Penalty::SquaredNorm,
            Similarity::Norm,
            GridVector::function(vec![0.3, -0.2, 0.1, 0.05, -0.4], 0.2).unwrap(),
            2.0,
        ).unwrap();
        let u = GridVector::function(u, 0.2).unwrap();
        let a2 = a1 * ratio;
        // admissible rho must exceed c_p s^p Omega(u_true)
        let rho = 2.0 * prob.omega_true() + extra;
        let c = rho * a2;
        // fixed level c: membership at the larger alpha implies membership at the smaller
        let fixed = |a: f64| level_set_member(&prob, &LevelSetSpec::new(&prob, a, c / a).unwrap(), &u).unwrap();
        if fixed(a2) {
            prop_assert!(fixed(a1));
        }
        // level rho alpha with fixed rho: the sets grow with alpha
        let scaled = |a: f64| level_set_member(&prob, &LevelSetSpec::new(&prob, a, rho).unwrap(), &u).unwrap();
        if scaled(a1) {
            prop_assert!(scaled(a2));
        }
    }
}

#[test]
fn level_set_intersection() {
    let prob = Problem::new(
        ForwardOperator::diagonal(vec![1.0]).unwrap(),
        Penalty::SquaredNorm,
        Similarity::Norm,
        GridVector::function(vec![1.0], 1.0).unwrap(),
        2.0,
    )
    .unwrap();
    let rho = 3.0;
    let alphas: Vec<f64> = (0..=10).map(|k| 10f64.powi(-k)).collect();
    for x in [-1.0, 0.0, 0.5, 1.0, 1.0 + 1e-6, 1.5] {
        let u = GridVector::function(vec![x], 1.0).unwrap();
        let all = alphas
            .iter()
            .all(|&a| level_set_member(&prob, &LevelSetSpec::new(&prob, a, rho).unwrap(), &u).unwrap());
        if all {
            let misfit = prob.misfit(&u, prob.v_exact()).unwrap();
            assert!(misfit <= (rho * 1e-10f64).sqrt() * (1.0 + 1e-9), "x = {x}");
            assert!(prob.penalty().value(&u) <= rho);
        }
    }
}

#[test]
fn bregman_squared_norm_exact() {
    let u = GridVector::function(vec![0.3, -1.2, 2.0], 0.5).unwrap();
    let w = GridVector::function(vec![1.0, 0.25, -0.5], 0.5).unwrap();
    let xi = Penalty::SquaredNorm.subgradient(&w).unwrap();
    let b = Penalty::SquaredNorm.bregman(&u, &w, &xi).unwrap();
    let d = u.sub(&w).unwrap().norm();
    assert!((b - d * d).abs() <= 4.0 * f64::EPSILON * d * d);
}

#[test]
fn finite_difference_subgradient() {
    let u = GridVector::function(vec![0.4, 1.3, 0.7, 2.1], 0.25).unwrap();
    let e = GridVector::function(vec![0.3, -0.5, 0.2, 0.1], 0.25).unwrap();
    for pen in [Penalty::SquaredNorm, Penalty::power_norm(1.5).unwrap(), Penalty::NegativeEntropy] {
        let xi_e = pen.subgradient(&u).unwrap().apply(&e).unwrap();
        let err = |eps: f64| ((pen.value(&u.axpy(eps, &e).unwrap()) - pen.value(&u)) / eps - xi_e).abs();
        let (e4, e6) = (err(1e-4), err(1e-6));
        assert!(e4 < 10.0 * 1e-4, "{pen:?}: {e4}");
        assert!(e6 < e4, "{pen:?}: {e6} vs {e4}");
    }
}

#[test]
fn directional_derivative_converges() {
    let h = 1.0 / 16.0;
    let u0 = GridVector::function((0..16).map(|i| 0.5 + (i as f64 * 0.3).sin()).collect(), h).unwrap();
    let d = GridVector::function((0..16).map(|i| (i as f64 * 0.7).cos()).collect(), h).unwrap();
    for op in [
        ForwardOperator::Autoconvolution { n: 16 },
        ForwardOperator::Integration { n: 16 },
        ForwardOperator::power_law_diagonal(16, 1.0).unwrap(),
    ] {
        let lin = op.derivative_apply(&u0, &d).unwrap();
        let f0 = op.apply(&u0).unwrap();
        let errs: Vec<f64> = (2..=6)
            .map(|k| {
                let t = 10f64.powi(-k);
                let ft = op.apply(&u0.axpy(t, &d).unwrap()).unwrap();
                ft.sub(&f0).unwrap().scale(1.0 / t).sub(&lin).unwrap().norm()
            })
            .collect();
        if op.is_linear() {
            assert!(errs.iter().all(|e| *e < 1e-8), "{op:?}: {errs:?}");
        } else {
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        }
    }
}

#[test]
fn diagonal_operator_is_componentwise() {
    let sigma = vec![2.0, 1.0, 0.5, 0.25];
    let op = ForwardOperator::diagonal(sigma.clone()).unwrap();
    let u = GridVector::function(vec![1.0, -3.0, 0.7, 9.0], 0.25).unwrap();
    let fu = op.apply(&u).unwrap();
    let adj = op.adjoint_derivative_apply(&u, &u).unwrap();
    for k in 0..4 {
        assert_eq!(fu.values()[k], sigma[k] * u.values()[k]);
        assert_eq!(adj.values()[k], sigma[k] * u.values()[k]);
    }
}

#[test]
fn similarity_continuity_spot_check() {
    let h = 0.1;
    let w: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
    let v: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect();
    let w = GridVector::measure_from_weights(&w, h).unwrap();
    let v = GridVector::measure_from_weights(&v, h).unwrap();
    for sim in [Similarity::Norm, Similarity::norm_power(2.0).unwrap(), Similarity::wasserstein(1.0).unwrap()] {
        let target = sim.value(&v, &w).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let eps = 10f64.powi(-k);
            let mixed: Vec<f64> = v.values().iter().zip(w.values()).map(|(a, b)| (1.0 - eps) * a + eps * b).collect();
            let vk = GridVector::measure_from_weights(&mixed, h).unwrap();
            let gap = (sim.value(&vk, &w).unwrap() - target).abs();
            assert!(gap <= prev + 1e-15);
            prev = gap;
        }
        assert!(prev < 1e-5, "{sim:?}: {prev}");
    }
}
