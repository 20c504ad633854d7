//! Problem instances, structural constants and level sets of the
//! Tikhonov-type functional `S(F(u), v)^p + alpha * Omega(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridVector;
use crate::operator::ForwardOperator;
use crate::penalty::{Penalty, SubgradientElement};
use crate::similarity::Similarity;

/// Default safety factor in `rho > c_p s^p Omega(u_true)`.
pub const DEFAULT_RHO_MARGIN: f64 = 1.1;

/// Slack on level-set membership tests.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Constant in `(a + b)^p <= c_p (a^p + b^p)`.
pub fn c_p(p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("exponent must be positive, got {p}")));
    }
    Ok(if p < 1.0 { 1.0 } else { 2f64.powf(p - 1.0) })
}

/// `margin * c_p * s^p * Omega(u_true)`, or `margin` when `Omega(u_true) = 0`.
pub fn rho_default(omega_true: f64, p: f64, s: f64, margin: f64) -> Result<f64> {
    if !(margin > 1.0) {
        return Err(Error::precondition(format!("rho margin must exceed 1, got {margin}")));
    }
    if !(s >= 1.0) {
        return Err(Error::precondition(format!("quasi-triangle constant must be >= 1, got {s}")));
    }
    if !(omega_true >= 0.0) {
        return Err(Error::precondition("penalty value must be nonnegative"));
    }
    if omega_true == 0.0 {
        return Ok(margin);
    }
    Ok(margin * c_p(p)? * s.powf(p) * omega_true)
}

/// One complete test instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    operator: ForwardOperator,
    penalty: Penalty,
    similarity: Similarity,
    u_true: GridVector,
    v_exact: GridVector,
    p: f64,
    xi: SubgradientElement,
}

impl Problem {
    /// Builds the instance with `v_exact = F(u_true)` and `xi` the
    /// gradient of the penalty at `u_true`.
    pub fn new(
        operator: ForwardOperator,
        penalty: Penalty,
        similarity: Similarity,
        u_true: GridVector,
        p: f64,
    ) -> Result<Self> {
        let xi = penalty.subgradient(&u_true)?;
        Self::with_subgradient(operator, penalty, similarity, u_true, p, xi)
    }

    pub fn with_subgradient(
        operator: ForwardOperator,
        penalty: Penalty,
        similarity: Similarity,
        u_true: GridVector,
        p: f64,
        xi: SubgradientElement,
    ) -> Result<Self> {
        operator.validate()?;
        penalty.validate()?;
        similarity.validate()?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::domain(format!("exponent p must be positive, got {p}")));
        }
        u_true.check_len(operator.dim_u())?;
        if xi.len() != u_true.len() {
            return Err(Error::DimensionMismatch {
                expected: u_true.len(),
                found: xi.len(),
            });
        }
        if !penalty.value(&u_true).is_finite() {
            return Err(Error::domain("exact solution lies outside the penalty domain"));
        }
        let image = operator.apply(&u_true)?;
        let v_exact = if similarity.requires_measures() {
            GridVector::measure(image.into_values(), u_true.h())?
        } else {
            image
        };
        Ok(Problem {
            operator,
            penalty,
            similarity,
            u_true,
            v_exact,
            p,
            xi,
        })
    }

    pub fn operator(&self) -> &ForwardOperator {
        &self.operator
    }

    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    pub fn similarity(&self) -> &Similarity {
        &self.similarity
    }

    pub fn u_true(&self) -> &GridVector {
        &self.u_true
    }

    pub fn v_exact(&self) -> &GridVector {
        &self.v_exact
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn xi(&self) -> &SubgradientElement {
        &self.xi
    }

    pub fn h(&self) -> f64 {
        self.u_true.h()
    }

    pub fn dim(&self) -> usize {
        self.u_true.len()
    }

    /// Quasi-triangle constant of the similarity.
    pub fn s(&self) -> f64 {
        self.similarity.quasi_triangle_constant()
    }

    pub fn omega_true(&self) -> f64 {
        self.penalty.value(&self.u_true)
    }

    /// `F(u)`, tagged as a measure when the similarity compares measures.
    pub fn forward(&self, u: &GridVector) -> Result<GridVector> {
        let image = self.operator.apply(u)?;
        if self.similarity.requires_measures() {
            GridVector::measure(image.into_values(), u.h())
        } else {
            Ok(image)
        }
    }

    /// `S(F(u), v)`.
    pub fn misfit(&self, u: &GridVector, v: &GridVector) -> Result<f64> {
        let fu = self.forward(u)?;
        self.similarity.value(&fu, v)
    }

    pub fn bregman(&self, u: &GridVector) -> Result<f64> {
        self.penalty.bregman(u, &self.u_true, &self.xi)
    }

    pub fn default_rho(&self) -> Result<f64> {
        rho_default(self.omega_true(), self.p, self.s(), DEFAULT_RHO_MARGIN)
    }
}

/// `S(F(u), v_data)^p + alpha * Omega(u)`.
pub fn tikhonov_value(problem: &Problem, u: &GridVector, v_data: &GridVector, alpha: f64) -> Result<f64> {
    u.check_len(problem.dim())?;
    v_data.check_len(problem.operator.dim_v())?;
    let omega = problem.penalty.value(u);
    if !omega.is_finite() {
        return Ok(f64::INFINITY);
    }
    let misfit = problem.misfit(u, v_data)?;
    Ok(misfit.powf(problem.p) + alpha * omega)
}

/// Parameters of the level set `M_alpha_bar(rho * alpha_bar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSpec {
    pub alpha_bar: f64,
    pub rho: f64,
}

impl LevelSetSpec {
    /// Checks `rho > c_p s^p Omega(u_true)`.
    pub fn new(problem: &Problem, alpha_bar: f64, rho: f64) -> Result<Self> {
        if !(alpha_bar > 0.0 && alpha_bar.is_finite()) {
            return Err(Error::domain(format!("alpha_bar must be positive, got {alpha_bar}")));
        }
        let bound = c_p(problem.p())? * problem.s().powf(problem.p()) * problem.omega_true();
        if !(rho > bound && rho > 0.0) {
            return Err(Error::precondition(format!("rho = {rho} must exceed {bound}")));
        }
        Ok(LevelSetSpec { alpha_bar, rho })
    }

    pub fn with_default_rho(problem: &Problem, alpha_bar: f64) -> Result<Self> {
        Self::new(problem, alpha_bar, problem.default_rho()?)
    }

    pub fn level(&self) -> f64 {
        self.rho * self.alpha_bar
    }
}

/// Value of the exact-data functional at `alpha_bar`, compared against `rho * alpha_bar`.
pub fn level_set_value(problem: &Problem, spec: &LevelSetSpec, u: &GridVector) -> Result<f64> {
    tikhonov_value(problem, u, problem.v_exact(), spec.alpha_bar)
}

pub fn level_set_member(problem: &Problem, spec: &LevelSetSpec, u: &GridVector) -> Result<bool> {
    let value = level_set_value(problem, spec, u)?;
    let level = spec.level();
    Ok(value <= level + MEMBERSHIP_SLACK * level.max(1.0))
}
