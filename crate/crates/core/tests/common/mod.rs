//! Shared oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use regrate::wasserstein::wasserstein_1d;
use regrate::GridVector;
use std::io::Write;

/// Equality constraints of the transport polytope for masses `a`, `b`
/// (the last column constraint is redundant and dropped).
pub fn transport_system(a: &[f64], b: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let (m, n) = (a.len(), b.len());
    let rows = m + n - 1;
    let mut mat = DMatrix::zeros(rows, m * n);
    let mut rhs = DVector::zeros(rows);
    for i in 0..m {
        for j in 0..n {
            mat[(i, i * n + j)] = 1.0;
            if j + 1 < n {
                mat[(m + j, i * n + j)] = 1.0;
            }
        }
        rhs[i] = a[i];
    }
    for j in 0..n - 1 {
        rhs[m + j] = b[j];
    }
    (mat, rhs)
}

pub fn costs(n: usize, h: f64, q: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            c.push(((i as f64 - j as f64).abs() * h).powf(q));
        }
    }
    c
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Minimum cost over all basic feasible couplings.
pub fn vertex_enumeration(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let (mat, rhs) = transport_system(a, b);
    let rows = mat.nrows();
    let mut best = f64::INFINITY;
    for basis in subsets(mat.ncols(), rows) {
        let sub = mat.select_columns(basis.iter());
        let Some(x) = sub.lu().solve(&rhs) else { continue };
        if x.iter().any(|v| *v < -1e-12 || !v.is_finite()) {
            continue;
        }
        let full = &mat.select_columns(basis.iter()) * &x;
        if (full - &rhs).amax() > 1e-10 {
            continue;
        }
        let cost: f64 = basis.iter().zip(x.iter()).map(|(k, v)| c[*k] * v.max(0.0)).sum();
        best = best.min(cost);
    }
    best
}

/// Two-phase tableau simplex with Bland's rule for `min c x, A x = b, x >= 0`
/// with `b >= 0`.
pub fn simplex(mat: &DMatrix<f64>, rhs: &DVector<f64>, c: &[f64]) -> f64 {
    let (m, n) = (mat.nrows(), mat.ncols());
    let width = n + m + 1;
    let mut t = DMatrix::<f64>::zeros(m + 1, width);
    for i in 0..m {
        for j in 0..n {
            t[(i, j)] = mat[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, width - 1)] = rhs[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let eps = 1e-12;

    let pivot = |t: &mut DMatrix<f64>, r: usize, col: usize| {
        let p = t[(r, col)];
        for j in 0..t.ncols() {
            t[(r, j)] /= p;
        }
        for i in 0..t.nrows() {
            if i != r {
                let f = t[(i, col)];
                if f != 0.0 {
                    for j in 0..t.ncols() {
                        let v = t[(r, j)];
                        t[(i, j)] -= f * v;
                    }
                }
            }
        }
    };
    let run = |t: &mut DMatrix<f64>, basis: &mut Vec<usize>, allowed: usize| loop {
        let obj = t.nrows() - 1;
        let Some(col) = (0..allowed).find(|&j| t[(obj, j)] < -eps) else { break };
        let mut row = None;
        let mut best = f64::INFINITY;
        for i in 0..obj {
            if t[(i, col)] > eps {
                let ratio = t[(i, t.ncols() - 1)] / t[(i, col)];
                if ratio < best - 1e-15 || (ratio <= best + 1e-15 && row.is_some_and(|r: usize| basis[i] < basis[r])) {
                    best = ratio;
                    row = Some(i);
                }
            }
        }
        let r = row.expect("unbounded transport program");
        pivot(t, r, col);
        basis[r] = col;
    };

    // phase one: minimize the sum of artificials
    for j in 0..width {
        t[(m, j)] = -(0..m).map(|i| t[(i, j)]).sum::<f64>();
    }
    for i in 0..m {
        t[(m, n + i)] = 0.0;
    }
    run(&mut t, &mut basis, n);
    assert!(t[(m, width - 1)].abs() < 1e-9, "transport program infeasible");
    for r in 0..m {
        if basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| t[(r, j)].abs() > 1e-9) {
                pivot(&mut t, r, col);
                basis[r] = col;
            }
        }
    }
    // phase two
    for j in 0..width {
        t[(m, j)] = if j < n { c[j] } else { 0.0 };
    }
    for r in 0..m {
        if basis[r] < n {
            let f = t[(m, basis[r])];
            for j in 0..width {
                let v = t[(r, j)];
                t[(m, j)] -= f * v;
            }
        }
    }
    run(&mut t, &mut basis, n);
    -t[(m, width - 1)]
}

pub fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
    if w.iter().all(|v| *v == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// `W_q` from atom masses on the grid `i * h`.
pub fn kernel(a: &[f64], b: &[f64], h: f64, q: f64) -> f64 {
    let mu = GridVector::measure(a.iter().map(|v| v / h).collect(), h).unwrap();
    let nu = GridVector::measure(b.iter().map(|v| v / h).collect(), h).unwrap();
    wasserstein_1d(&mu, &nu, q).unwrap()
}

/// One line per criterion, written past the test harness capture.
pub fn report(id: &str, pass: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    let _ = out.flush();
}
