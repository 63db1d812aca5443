//! Coefficient state, hyperparameters and the two penalized objectives.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{DesignMatrix, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Logistic,
    Exponential,
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Logistic => "logistic",
            Loss::Exponential => "exponential",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "exponential" | "exp" => Ok(Loss::Exponential),
            other => Err(Error::InvalidConfig(format!("unknown loss `{other}`"))),
        }
    }
}

/// Lower-bound family used to screen swap candidates under the logistic loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CutMode {
    /// Tangent-line cutting planes; valid with or without a ridge term.
    Lin,
    /// Quadratic cuts; need `lambda2 > 0`.
    Quad,
    /// Quadratic when `lambda2 > 0`, linear otherwise.
    #[default]
    Auto,
}

impl fmt::Display for CutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutMode::Lin => "lin",
            CutMode::Quad => "quad",
            CutMode::Auto => "auto",
        })
    }
}

impl FromStr for CutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lin" => Ok(CutMode::Lin),
            "quad" => Ok(CutMode::Quad),
            "auto" => Ok(CutMode::Auto),
            other => Err(Error::InvalidConfig(format!("unknown cut mode `{other}`"))),
        }
    }
}

/// Solver hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// L0 strength.
    pub lambda0: f64,
    /// Ridge strength; must be 0 for the exponential loss.
    pub lambda2: f64,
    pub loss: Loss,
    /// Thresholding iterations used by the swap line search.
    pub max_inner_iter: usize,
    /// Minimum objective decrease that counts as an improvement.
    pub objective_tol: f64,
    /// Number of outside features tried per support feature; `None` tries all.
    pub candidate_limit: Option<usize>,
    pub cut: CutMode,
    pub warm_start_sweeps: usize,
    pub reopt_sweeps: usize,
}

impl HyperParams {
    pub fn logistic(lambda0: f64, lambda2: f64) -> Self {
        Self {
            lambda0,
            lambda2,
            loss: Loss::Logistic,
            max_inner_iter: 10,
            objective_tol: 1e-8,
            candidate_limit: None,
            cut: CutMode::Auto,
            warm_start_sweeps: 500,
            reopt_sweeps: 100,
        }
    }

    pub fn exponential(lambda0: f64) -> Self {
        Self { loss: Loss::Exponential, ..Self::logistic(lambda0, 0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda0 must be >= 0, got {}", self.lambda0)));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda2 must be >= 0, got {}", self.lambda2)));
        }
        if self.loss == Loss::Exponential && self.lambda2 != 0.0 {
            return Err(Error::InvalidConfig(
                "the exponential loss takes no ridge penalty (lambda2 must be 0)".into(),
            ));
        }
        if self.cut == CutMode::Quad && self.lambda2 <= 0.0 {
            return Err(Error::InvalidConfig("quadratic cuts require lambda2 > 0".into()));
        }
        if self.max_inner_iter == 0 {
            return Err(Error::InvalidConfig("max_inner_iter must be positive".into()));
        }
        if self.objective_tol.is_nan() || self.objective_tol <= 0.0 {
            return Err(Error::InvalidConfig("objective_tol must be positive".into()));
        }
        if self.candidate_limit == Some(0) {
            return Err(Error::InvalidConfig("candidate_limit must be positive".into()));
        }
        Ok(())
    }

    /// `true` when swap screening uses quadratic cuts.
    pub fn uses_quad_cuts(&self) -> bool {
        match self.cut {
            CutMode::Quad => true,
            CutMode::Lin => false,
            CutMode::Auto => self.lambda2 > 0.0,
        }
    }
}

/// Coefficients, support, intercept and the per-observation margin cache
/// `margins[i] = y_i * (w^T x_i + intercept)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    w: Vec<f64>,
    support: BTreeSet<usize>,
    intercept: f64,
    margins: Vec<f64>,
}

impl ModelState {
    pub fn zeros(data: &DesignMatrix) -> Self {
        Self {
            w: vec![0.0; data.p()],
            support: BTreeSet::new(),
            intercept: 0.0,
            margins: vec![0.0; data.n()],
        }
    }

    pub fn from_coefficients(data: &DesignMatrix, w: Vec<f64>, intercept: f64) -> Result<Self> {
        if w.len() != data.p() {
            return Err(Error::Dimension { expected: data.p(), got: w.len() });
        }
        let support = w.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect();
        let mut state = Self { w, support, intercept, margins: vec![0.0; data.n()] };
        state.recompute_margins(data);
        Ok(state)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.w
    }

    pub fn coef(&self, j: usize) -> f64 {
        self.w[j]
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    /// `sum_j w_j^2` (the intercept is not penalized).
    pub fn sq_norm(&self) -> f64 {
        self.support.iter().map(|&j| self.w[j] * self.w[j]).sum()
    }

    /// Sets `w_j`, updating the margins in O(n).
    pub fn set_coef(&mut self, data: &DesignMatrix, j: usize, value: f64) {
        let delta = value - self.w[j];
        if delta == 0.0 {
            return;
        }
        for ((m, &x), &y) in self.margins.iter_mut().zip(data.column(j)).zip(data.labels()) {
            *m += delta * x * y;
        }
        self.w[j] = value;
        if value == 0.0 {
            self.support.remove(&j);
        } else {
            self.support.insert(j);
        }
    }

    pub fn set_intercept(&mut self, data: &DesignMatrix, value: f64) {
        let delta = value - self.intercept;
        if delta == 0.0 {
            return;
        }
        for (m, &y) in self.margins.iter_mut().zip(data.labels()) {
            *m += delta * y;
        }
        self.intercept = value;
    }

    /// Rebuilds the margin cache from the coefficients.
    pub fn recompute_margins(&mut self, data: &DesignMatrix) {
        for (i, m) in self.margins.iter_mut().enumerate() {
            let f: f64 = self.support.iter().map(|&j| self.w[j] * data.value(i, j)).sum();
            *m = data.labels()[i] * (f + self.intercept);
        }
    }

    /// Raw score `w^T x + intercept`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::Dimension { expected: self.w.len(), got: x.len() });
        }
        Ok(self.support.iter().map(|&j| self.w[j] * x[j]).sum::<f64>() + self.intercept)
    }
}

/// `log(1 + exp(-m))`, stable for both signs of `m`.
#[inline]
pub fn logistic_loss(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `1 / (1 + exp(-t))`.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Smooth logistic part `G(w) = sum_i log(1+exp(-margin_i)) + lambda2 ||w||^2`.
pub fn logistic_smooth_loss(state: &ModelState, lambda2: f64) -> f64 {
    let loss: f64 = state.margins().iter().map(|&m| logistic_loss(m)).sum();
    loss + lambda2 * state.sq_norm()
}

/// `G(w) + lambda0 * |support|`.
pub fn logistic_objective(state: &ModelState, _data: &DesignMatrix, hp: &HyperParams) -> f64 {
    logistic_smooth_loss(state, hp.lambda2) + hp.lambda0 * state.support().len() as f64
}

/// `H(w) + lambda0 * |support|` with `H(w) = sum_i exp(-margin_i)`.
pub fn exponential_objective(state: &ModelState, data: &DesignMatrix, hp: &HyperParams) -> Result<f64> {
    if !data.is_binary() {
        return Err(Error::InvalidData(
            "the exponential loss needs a design matrix with entries in {-1, +1}".into(),
        ));
    }
    let h: f64 = state.margins().iter().map(|&m| (-m).exp()).sum();
    Ok(h + hp.lambda0 * state.support().len() as f64)
}

/// Probability of `y = +1` given the raw score `f`.
pub fn probability_from_score(f: f64, loss: Loss) -> f64 {
    match loss {
        Loss::Logistic => sigmoid(f),
        Loss::Exponential => sigmoid(2.0 * f),
    }
}

pub fn predict_probability(state: &ModelState, x: &[f64], loss: Loss) -> Result<f64> {
    Ok(probability_from_score(state.score(x)?, loss))
}
