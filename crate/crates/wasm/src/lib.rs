//! Browser bindings: three small experiments returning JSON strings.

use regrate::analysis::{self, holder_kappa};
use regrate::harness::{ExperimentConfig, OperatorConfig, ProblemConfig, TaskConfig, UTrueRecipe};
use regrate::solver::{make_noisy_data, minimize_tikhonov, SolverConfig};
use regrate::{Penalty, Problem, Similarity};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 20_000;

fn holder_problem(n: usize, mu: f64, seed: u64) -> Result<Problem, String> {
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must lie in [2, {MAX_N}]"));
    }
    let cfg = ExperimentConfig {
        name: "demo".into(),
        seed,
        output_dir: None,
        problem: ProblemConfig {
            p: 2.0,
            operator: OperatorConfig::PowerLawDiagonal { n, decay: 1.0 },
            penalty: Penalty::SquaredNorm,
            similarity: Similarity::Norm,
            u_true: UTrueRecipe::Holder { mu },
        },
        level_set: Default::default(),
        solver: SolverConfig::default(),
        task: TaskConfig::Dtilde { r_grid: None },
    };
    cfg.validate().map_err(|e| e.to_string())?;
    cfg.build_problem().map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(|e| JsValue::from_str(&e.to_string()))
}

fn js(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
struct RatesView {
    kappa: f64,
    slope: f64,
    r_squared: f64,
    deltas: Vec<f64>,
    errors: Vec<f64>,
}

/// Bregman error against delta for the a-priori choice `alpha = delta^(2 - kappa)`.
#[wasm_bindgen]
pub fn holder_rates(mu: f64, n: usize, lo_exp: f64, hi_exp: f64, count: usize) -> Result<String, JsValue> {
    let prob = holder_problem(n, mu, 1).map_err(js)?;
    let kappa = holder_kappa(mu).map_err(js)?;
    let mut deltas = analysis::log_grid(10f64.powf(lo_exp), 10f64.powf(hi_exp), count).map_err(js)?;
    deltas.reverse();
    let choice = |d: f64| analysis::choose_alpha_apriori(d, 2.0, kappa, 1.0);
    let run = analysis::empirical_rate(&prob, choice, &deltas, &SolverConfig::default(), 1).map_err(js)?;
    to_json(&RatesView {
        kappa,
        slope: run.fit.slope,
        r_squared: run.fit.r_squared,
        deltas: run.fit.samples.iter().map(|s| s.0).collect(),
        errors: run.fit.samples.iter().map(|s| s.1).collect(),
    })
}

#[derive(Serialize)]
struct DistanceView {
    r: Vec<f64>,
    dtilde: Vec<f64>,
    preimage_radius: f64,
    alpha: Option<f64>,
    r_star: Option<f64>,
    predicted_error: Option<f64>,
    message: Option<String>,
}

/// `dtilde` on a log grid, and the `Phi`-based parameter for `delta`.
#[wasm_bindgen]
pub fn distance_and_choice(mu: f64, n: usize, delta: f64, kappa: f64) -> Result<String, JsValue> {
    let prob = holder_problem(n, mu, 1).map_err(js)?;
    let grid = analysis::log_grid(1e-2, 1e6, 80).map_err(js)?;
    let table = analysis::asc_table(&prob, &grid).map_err(js)?;
    let positive: Vec<(f64, f64)> = table.entries().iter().copied().filter(|e| e.1 > 0.0).collect();
    let mut view = DistanceView {
        r: grid.clone(),
        dtilde: table.entries().iter().map(|e| e.1).collect(),
        preimage_radius: analysis::preimage_radius(&prob).map_err(js)?,
        alpha: None,
        r_star: None,
        predicted_error: None,
        message: None,
    };
    let choice = analysis::DistanceTable::new(positive).and_then(|t| {
        let c = analysis::choose_alpha_phi(delta, &t, 2.0, kappa, 1.0)?;
        let pr = analysis::predicted_rate(delta, &t, kappa, 1.0, None)?;
        Ok((c, pr))
    });
    match choice {
        Ok((c, pr)) => {
            view.alpha = Some(c.alpha);
            view.r_star = Some(c.r_star);
            view.predicted_error = Some(pr.value);
        }
        Err(e) => view.message = Some(e.to_string()),
    }
    to_json(&view)
}

#[derive(Serialize)]
struct SolveView {
    x: Vec<f64>,
    u_true: Vec<f64>,
    u_alpha: Vec<f64>,
    v_delta: Vec<f64>,
    v_exact: Vec<f64>,
    bregman_error: f64,
    objective: f64,
}

/// Regularized solution of the Holder problem for one `(delta, alpha)`.
#[wasm_bindgen]
pub fn solve_once(mu: f64, n: usize, delta: f64, alpha: f64, seed: u64) -> Result<String, JsValue> {
    let prob = holder_problem(n, mu, seed).map_err(js)?;
    let v = make_noisy_data(prob.v_exact(), prob.similarity(), delta, seed).map_err(js)?;
    let sol = minimize_tikhonov(&prob, &v, alpha, &SolverConfig::default()).map_err(js)?;
    to_json(&SolveView {
        x: (1..=n).map(|k| k as f64).collect(),
        u_true: prob.u_true().values().to_vec(),
        u_alpha: sol.minimizer.values().to_vec(),
        v_delta: v.values().to_vec(),
        v_exact: prob.v_exact().values().to_vec(),
        bregman_error: prob.bregman(&sol.minimizer).map_err(js)?,
        objective: sol.objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bindings_produce_json() {
        let r: serde_json::Value = serde_json::from_str(&holder_rates(1.0, 200, -4.0, -1.0, 6).unwrap()).unwrap();
        assert_eq!(r["errors"].as_array().unwrap().len(), 6);
        let d: serde_json::Value = serde_json::from_str(&distance_and_choice(0.5, 100, 1e-2, 1.0).unwrap()).unwrap();
        assert!(d["alpha"].as_f64().unwrap() > 0.0);
        // below the floor of Phi the choice reports why instead of failing
        let d: serde_json::Value = serde_json::from_str(&distance_and_choice(0.5, 100, 1e-9, 1.0).unwrap()).unwrap();
        assert!(d["alpha"].is_null() && d["message"].is_string());
        let s: serde_json::Value = serde_json::from_str(&solve_once(0.5, 50, 1e-2, 1e-3, 3).unwrap()).unwrap();
        assert_eq!(s["u_alpha"].as_array().unwrap().len(), 50);
    }
}
