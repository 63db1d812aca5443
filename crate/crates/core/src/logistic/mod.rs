//! Coordinate machinery for the logistic loss
//! `G(w) = sum_i log(1 + exp(-y_i (w^T x_i + b))) + lambda2 ||w||^2`.

pub mod cuts;

use crate::engine::{Engine, SweepSummary};
use crate::model::{logistic_loss, logistic_smooth_loss, sigmoid};
use crate::swap::{try_add_lincut, try_add_quad, AddDecision, AddOutcome};
use crate::{DesignMatrix, HyperParams, ModelState};

/// Location, value and slope of a one-dimensional function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbePoint {
    pub x: f64,
    pub value: f64,
    pub slope: f64,
}

/// A differentiable convex function of one variable.
pub trait Univariate {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;

    fn point(&self, x: f64) -> ProbePoint {
        ProbePoint { x, value: self.value(x), slope: self.slope(x) }
    }
}

/// The restriction `f(x) = G(w + e_j (x - w_j))` of the logistic objective
/// to coordinate `j`, with every other coefficient held fixed.
#[derive(Debug, Clone)]
pub struct CoordinateProbe<'a> {
    margins: &'a [f64],
    column: &'a [f64],
    labels: &'a [f64],
    anchor: f64,
    lambda2: f64,
    rest_penalty: f64,
    lipschitz: f64,
    origin: Option<ProbePoint>,
}

impl<'a> CoordinateProbe<'a> {
    pub fn new(state: &'a ModelState, data: &'a DesignMatrix, j: usize, lambda2: f64) -> Self {
        let anchor = state.coef(j);
        Self {
            margins: state.margins(),
            column: data.column(j),
            labels: data.labels(),
            anchor,
            lambda2,
            rest_penalty: lambda2 * (state.sq_norm() - anchor * anchor),
            lipschitz: lipschitz_j(data, j, lambda2),
            origin: None,
        }
    }

    /// Probe for a coordinate that is currently zero, reusing the loss and
    /// the weights `sigmoid(-margin_i)` already computed for `state`.
    fn at_zero(state: &'a ModelState, data: &'a DesignMatrix, j: usize, lambda2: f64, screen: &LogisticScreen) -> Self {
        debug_assert_eq!(state.coef(j), 0.0);
        let slope = grad_from_weights(data, j, &screen.weights);
        Self {
            margins: state.margins(),
            column: data.column(j),
            labels: data.labels(),
            anchor: 0.0,
            lambda2,
            rest_penalty: screen.penalty,
            lipschitz: lipschitz_j(data, j, lambda2),
            origin: Some(ProbePoint { x: 0.0, value: screen.loss, slope }),
        }
    }

    /// Value of coordinate `j` in the state the probe was built from.
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    #[inline]
    fn shifted(&self, x: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let d = x - self.anchor;
        self.margins
            .iter()
            .zip(self.column)
            .zip(self.labels)
            .map(move |((&m, &c), &y)| {
                let z = c * y;
                (m + d * z, z)
            })
    }
}

impl Univariate for CoordinateProbe<'_> {
    fn value(&self, x: f64) -> f64 {
        if let Some(origin) = self.origin.filter(|o| o.x == x) {
            return origin.value;
        }
        let loss: f64 = self.shifted(x).map(|(m, _)| logistic_loss(m)).sum();
        loss + self.rest_penalty + self.lambda2 * x * x
    }

    fn slope(&self, x: f64) -> f64 {
        if let Some(origin) = self.origin.filter(|o| o.x == x) {
            return origin.slope;
        }
        let g: f64 = self.shifted(x).map(|(m, z)| z * sigmoid(-m)).sum();
        -g + 2.0 * self.lambda2 * x
    }

    fn point(&self, x: f64) -> ProbePoint {
        if let Some(origin) = self.origin.filter(|o| o.x == x) {
            return origin;
        }
        let (mut loss, mut g) = (0.0, 0.0);
        for (m, z) in self.shifted(x) {
            let e = (-m.abs()).exp();
            loss += e.ln_1p() + (-m).max(0.0);
            // sigmoid(-m) from the same exponential
            g += z * if m >= 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
        }
        ProbePoint {
            x,
            value: loss + self.rest_penalty + self.lambda2 * x * x,
            slope: -g + 2.0 * self.lambda2 * x,
        }
    }
}

/// `sigmoid(-margin_i)` for every observation.
pub fn neg_sigmoid(margins: &[f64]) -> Vec<f64> {
    margins.iter().map(|&m| sigmoid(-m)).collect()
}

fn grad_from_weights(data: &DesignMatrix, j: usize, weights: &[f64]) -> f64 {
    -data
        .column(j)
        .iter()
        .zip(data.labels())
        .zip(weights)
        .map(|((&x, &y), &s)| x * y * s)
        .sum::<f64>()
}

/// `d G / d w_j = -sum_i y_i x_ij sigmoid(-margin_i) + 2 lambda2 w_j`.
pub fn grad_j(state: &ModelState, data: &DesignMatrix, j: usize, lambda2: f64) -> f64 {
    let g: f64 = data
        .column(j)
        .iter()
        .zip(data.labels())
        .zip(state.margins())
        .map(|((&x, &y), &m)| x * y * sigmoid(-m))
        .sum();
    -g + 2.0 * lambda2 * state.coef(j)
}

/// Coordinate Lipschitz constant `sum_i x_ij^2 / 4 + 2 lambda2`.
///
/// A zero column with `lambda2 = 0` yields 0: the coordinate is inert.
pub fn lipschitz_j(data: &DesignMatrix, j: usize, lambda2: f64) -> f64 {
    0.25 * data.col_sq_norm(j) + 2.0 * lambda2
}

/// Minimizer of the quadratic surrogate plus the L0 penalty along one coordinate.
#[inline]
pub fn threshold_value(w_j: f64, grad: f64, lipschitz: f64, lambda0: f64) -> f64 {
    let c = w_j - grad / lipschitz;
    if c.abs() >= (2.0 * lambda0 / lipschitz).sqrt() {
        c
    } else {
        0.0
    }
}

/// Thresholding update for coordinate `j` with `hp.lambda0` active.
/// Returns the current coefficient unchanged for an inert coordinate.
pub fn threshold_step(state: &ModelState, data: &DesignMatrix, j: usize, hp: &HyperParams) -> f64 {
    let l = lipschitz_j(data, j, hp.lambda2);
    if l <= 0.0 {
        return state.coef(j);
    }
    threshold_value(state.coef(j), grad_j(state, data, j, hp.lambda2), l, hp.lambda0)
}

/// Applies the support-fixed thresholding step `max_iter` times starting at `start`.
pub fn iterate_threshold<P: Univariate + ?Sized>(
    probe: &P,
    start: f64,
    lipschitz: f64,
    max_iter: usize,
) -> f64 {
    let mut x = start;
    for _ in 0..max_iter {
        x -= probe.slope(x) / lipschitz;
    }
    x
}

/// Approximate line search on coordinate `j` by repeated support-fixed
/// thresholding from its current value.
pub fn find_new_coefficient(state: &ModelState, data: &DesignMatrix, j: usize, hp: &HyperParams) -> f64 {
    let probe = CoordinateProbe::new(state, data, j, hp.lambda2);
    if probe.lipschitz() <= 0.0 {
        return state.coef(j);
    }
    iterate_threshold(&probe, state.coef(j), probe.lipschitz(), hp.max_inner_iter)
}

/// Exact minimization of the loss over the (unpenalized) intercept.
///
/// The derivative in the intercept shift is increasing, so its root is
/// bracketed first and then found by Newton steps that fall back to bisection
/// whenever they leave the bracket.
pub fn refit_intercept(state: &mut ModelState, data: &DesignMatrix) {
    let n = data.n();
    if n == 0 {
        return;
    }
    let y = data.labels();
    let derivs = |shift: f64| -> (f64, f64) {
        let (mut g, mut h) = (0.0, 0.0);
        for (&m, &yi) in state.margins().iter().zip(y) {
            let s = sigmoid(-(m + shift * yi));
            g -= yi * s;
            h += s * (1.0 - s);
        }
        (g, h)
    };
    let tol = 1e-12 * n as f64;
    let (g0, h0) = derivs(0.0);
    if g0.abs() <= tol {
        return;
    }
    // the unpenalized optimum is infinite when all labels agree; stop at a large shift
    let dir = -g0.signum();
    let (mut inner, mut outer) = (0.0, dir);
    while derivs(outer).0 * dir < 0.0 {
        inner = outer;
        outer *= 2.0;
        if outer.abs() > 64.0 {
            break;
        }
    }
    let (mut lo, mut hi) = if dir > 0.0 { (inner, outer) } else { (outer, inner) };
    let mut shift = inner;
    let (mut g, mut h) = if inner == 0.0 { (g0, h0) } else { derivs(inner) };
    for _ in 0..200 {
        if g.abs() <= tol || hi - lo <= 1e-15 * (1.0 + shift.abs()) {
            break;
        }
        if g < 0.0 {
            lo = shift;
        } else {
            hi = shift;
        }
        let newton = if h > 0.0 { shift - g / h } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == shift {
            break;
        }
        shift = next;
        (g, h) = derivs(shift);
    }
    let b = state.intercept() + shift;
    state.set_intercept(data, b);
}

/// Loss, ridge term and weights of a state whose outside features are screened.
#[derive(Debug, Clone)]
pub struct LogisticScreen {
    loss: f64,
    penalty: f64,
    weights: Vec<f64>,
}

/// Logistic-loss implementation of [`Engine`].
#[derive(Debug, Clone)]
pub struct LogisticEngine<'a> {
    data: &'a DesignMatrix,
    hp: HyperParams,
    lipschitz: Vec<f64>,
}

impl<'a> LogisticEngine<'a> {
    pub fn new(data: &'a DesignMatrix, hp: HyperParams) -> Self {
        let lipschitz = (0..data.p()).map(|j| lipschitz_j(data, j, hp.lambda2)).collect();
        Self { data, hp, lipschitz }
    }

    fn refresh_weights(state: &ModelState, weights: &mut [f64]) {
        for (s, &m) in weights.iter_mut().zip(state.margins()) {
            *s = sigmoid(-m);
        }
    }

    fn sweep(&self, state: &mut ModelState, coords: &[usize], lambda0: f64) -> SweepSummary {
        let mut weights = neg_sigmoid(state.margins());
        let mut summary = SweepSummary::default();
        for &j in coords {
            let l = self.lipschitz[j];
            if l <= 0.0 {
                continue;
            }
            let old = state.coef(j);
            let g = grad_from_weights(self.data, j, &weights) + 2.0 * self.hp.lambda2 * old;
            let new = threshold_value(old, g, l, lambda0);
            if new != old {
                summary.record(old, new);
                state.set_coef(self.data, j, new);
                Self::refresh_weights(state, &mut weights);
            }
        }
        let b = state.intercept();
        refit_intercept(state, self.data);
        summary.max_change = summary.max_change.max((state.intercept() - b).abs());
        summary
    }
}

impl Engine for LogisticEngine<'_> {
    type State = ModelState;
    type Screen = LogisticScreen;

    fn data(&self) -> &DesignMatrix {
        self.data
    }

    fn params(&self) -> &HyperParams {
        &self.hp
    }

    fn start(&self, model: ModelState) -> ModelState {
        model
    }

    fn model<'s>(&self, state: &'s ModelState) -> &'s ModelState {
        state
    }

    fn finish(&self, state: ModelState) -> ModelState {
        state
    }

    fn smooth_loss(&self, state: &ModelState) -> f64 {
        logistic_smooth_loss(state, self.hp.lambda2)
    }

    fn set_coef(&self, state: &mut ModelState, j: usize, value: f64) {
        state.set_coef(self.data, j, value);
    }

    fn refit_intercept(&self, state: &mut ModelState) {
        refit_intercept(state, self.data);
    }

    fn l0_sweep(&self, state: &mut ModelState) -> SweepSummary {
        let coords: Vec<usize> = (0..self.data.p()).collect();
        self.sweep(state, &coords, self.hp.lambda0)
    }

    fn reoptimize(&self, state: &mut ModelState) {
        refit_intercept(state, self.data);
        let mut previous = self.smooth_loss(state);
        for _ in 0..self.hp.reopt_sweeps {
            let coords: Vec<usize> = state.support().iter().copied().collect();
            self.sweep(state, &coords, 0.0);
            let current = self.smooth_loss(state);
            if previous - current < self.hp.objective_tol {
                break;
            }
            previous = current;
        }
    }

    fn screen(&self, without: &ModelState) -> LogisticScreen {
        let penalty = self.hp.lambda2 * without.sq_norm();
        LogisticScreen {
            loss: logistic_smooth_loss(without, 0.0) + penalty,
            penalty,
            weights: neg_sigmoid(without.margins()),
        }
    }

    fn candidate_scores(&self, state: &ModelState, screen: &LogisticScreen, candidates: &[usize]) -> Vec<f64> {
        candidates
            .iter()
            .map(|&j| {
                (grad_from_weights(self.data, j, &screen.weights) + 2.0 * self.hp.lambda2 * state.coef(j)).abs()
            })
            .collect()
    }

    fn try_add(&self, without: &ModelState, screen: &LogisticScreen, j: usize, threshold: f64) -> AddOutcome {
        let probe = if without.coef(j) == 0.0 {
            CoordinateProbe::at_zero(without, self.data, j, self.hp.lambda2, screen)
        } else {
            CoordinateProbe::new(without, self.data, j, self.hp.lambda2)
        };
        if probe.lipschitz() <= 0.0 {
            return AddOutcome { decision: AddDecision::NoDescent, line_search_iters: 0 };
        }
        if self.hp.uses_quad_cuts() {
            try_add_quad(&probe, probe.lipschitz(), self.hp.lambda2, self.hp.max_inner_iter, threshold)
        } else {
            try_add_lincut(&probe, probe.lipschitz(), self.hp.max_inner_iter, threshold)
        }
    }
}
