//! Exponential-loss coordinate updates with closed-form line search.
//!
//! With `z_ij = y_i x_ij` in `{-1, +1}`, the loss along coordinate `j` is
//! `c_+ e^{-x} + c_- e^{x}` where `c_+` and `c_-` are the total weights of the
//! observations with `z_ij = +1` and `-1`. Its minimizer is
//! `x* = ln(c_+ / c_-) / 2`, and the best attainable loss is
//! `2 sqrt(c_+ c_-) = 2 H sqrt(d (1 - d))` with `d = c_- / H`.

use crate::engine::{Engine, SweepSummary};
use crate::swap::{AddDecision, AddOutcome};
use crate::{DesignMatrix, Error, HyperParams, ModelState, Result};

/// Weighted fractions are clamped to `[EPS, 1 - EPS]` before taking logs so a
/// perfectly separating column gets a large finite coefficient.
pub const SEPARATION_EPS: f64 = 1e-10;

/// Updates between exact recomputations of the weights.
pub const REFRESH_INTERVAL: usize = 64;

/// Model state plus the observation weights `c_i = exp(-margin_i)` and their
/// sum `H`, maintained multiplicatively.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpState {
    model: ModelState,
    weights: Vec<f64>,
    total: f64,
    since_refresh: usize,
}

impl ExpState {
    pub fn new(data: &DesignMatrix, model: ModelState) -> Result<Self> {
        if !data.is_binary() {
            return Err(Error::InvalidData(
                "the exponential loss needs a design matrix with entries in {-1, +1}".into(),
            ));
        }
        if model.coefficients().len() != data.p() {
            return Err(Error::Dimension { expected: data.p(), got: model.coefficients().len() });
        }
        let mut state = Self { model, weights: Vec::new(), total: 0.0, since_refresh: 0 };
        state.refresh();
        Ok(state)
    }

    pub fn model(&self) -> &ModelState {
        &self.model
    }

    pub fn into_model(self) -> ModelState {
        self.model
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `H = sum_i c_i`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `H + lambda0 * |support|`.
    pub fn objective(&self, lambda0: f64) -> f64 {
        self.total + lambda0 * self.model.support().len() as f64
    }

    /// Recomputes the weights and their sum from the margins.
    pub fn refresh(&mut self) {
        self.weights = self.model.margins().iter().map(|&m| (-m).exp()).collect();
        self.total = self.weights.iter().sum();
        self.since_refresh = 0;
    }

    /// Weight sums over observations with `z_ij = +1` and `z_ij = -1`.
    fn split(&self, data: &DesignMatrix, j: usize) -> (f64, f64) {
        split_by_sign(&self.weights, data.column(j), data.labels())
    }

    fn apply(&mut self, data: &DesignMatrix, column: Option<usize>, delta: f64, plus: f64, minus: f64) {
        if delta == 0.0 {
            return;
        }
        let (down, up) = ((-delta).exp(), delta.exp());
        let labels = data.labels();
        match column {
            Some(j) => {
                for ((c, &x), &y) in self.weights.iter_mut().zip(data.column(j)).zip(labels) {
                    *c *= if x * y > 0.0 { down } else { up };
                }
                let value = self.model.coef(j) + delta;
                self.model.set_coef(data, j, value);
            }
            None => {
                for (c, &y) in self.weights.iter_mut().zip(labels) {
                    *c *= if y > 0.0 { down } else { up };
                }
                let value = self.model.intercept() + delta;
                self.model.set_intercept(data, value);
            }
        }
        self.total = plus * down + minus * up;
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh();
        }
    }

    /// Sets `w_j` and rescales the weights by `exp(-delta z_ij)`.
    pub fn set_coef(&mut self, data: &DesignMatrix, j: usize, value: f64) {
        let delta = value - self.model.coef(j);
        if delta == 0.0 {
            return;
        }
        let (plus, minus) = self.split(data, j);
        self.apply(data, Some(j), delta, plus, minus);
        if value == 0.0 && self.model.coef(j) != 0.0 {
            // w_j + delta may round to a tiny nonzero
            self.model.set_coef(data, j, 0.0);
            self.refresh();
        }
    }

    /// Closed-form refit of the intercept (its signed column is `y`).
    pub fn refit_intercept(&mut self, data: &DesignMatrix) {
        let (plus, minus) = split_by_sign(&self.weights, &vec![1.0; data.n()], data.labels());
        if plus + minus <= 0.0 {
            return;
        }
        let delta = coefficient_from_fraction(minus / (plus + minus));
        self.apply(data, None, delta, plus, minus);
    }
}

fn split_by_sign(weights: &[f64], column: &[f64], labels: &[f64]) -> (f64, f64) {
    // z_ij = y_i x_ij is +-1, so plus - minus = sum_i c_i z_ij
    let (mut total, mut signed) = (0.0, 0.0);
    for ((&c, &x), &y) in weights.iter().zip(column).zip(labels) {
        total += c;
        signed += c * x * y;
    }
    (0.5 * (total + signed), 0.5 * (total - signed))
}

/// `ln((1 - d) / d) / 2` with `d` clamped away from 0 and 1.
pub fn coefficient_from_fraction(d: f64) -> f64 {
    let d = d.clamp(SEPARATION_EPS, 1.0 - SEPARATION_EPS);
    0.5 * ((1.0 - d) / d).ln()
}

/// Coordinate `j` with its own contribution removed: `(D_-, H_{not j})`.
fn excluded_split(state: &ExpState, data: &DesignMatrix, j: usize) -> (f64, f64) {
    let (plus, minus) = state.split(data, j);
    let w = state.model.coef(j);
    // c_i exp(w z_ij): z = +1 gains e^{w}, z = -1 gains e^{-w}
    let (plus, minus) = (plus * w.exp(), minus * (-w).exp());
    (plus, minus)
}

/// Weighted fraction of observations with `z_ij = -1`.
///
/// With `exclude_own` the weights are first re-expressed with `w_j = 0`.
pub fn d_minus(state: &ExpState, data: &DesignMatrix, j: usize, exclude_own: bool) -> f64 {
    let (plus, minus) = if exclude_own { excluded_split(state, data, j) } else { state.split(data, j) };
    minus / (plus + minus)
}

/// Interval of `d` values for which a nonzero coefficient cannot repay `lambda0`.
///
/// The loss can drop by at most `h_ref`, so for `lambda0 >= h_ref` every `d`
/// is in the interval.
pub fn zero_interval(h_ref: f64, lambda0: f64) -> (f64, f64) {
    if lambda0 >= h_ref {
        return (0.0, 1.0);
    }
    let half = (lambda0 * (2.0 * h_ref - lambda0)).sqrt() / (2.0 * h_ref);
    (0.5 - half, 0.5 + half)
}

/// Penalized closed-form update of coordinate `j`; applies it to `state` and
/// returns the new coefficient (possibly 0).
pub fn exp_coordinate_update(state: &mut ExpState, data: &DesignMatrix, j: usize, lambda0: f64) -> f64 {
    let (plus, minus) = excluded_split(state, data, j);
    let h_ref = plus + minus;
    let d = minus / h_ref;
    let (lo, hi) = zero_interval(h_ref, lambda0);
    let new = if lo <= d && d <= hi { 0.0 } else { coefficient_from_fraction(d) };
    state.set_coef(data, j, new);
    new
}

/// Unpenalized minimizer along coordinate `j`, everything else fixed.
pub fn exp_line_search(state: &ExpState, data: &DesignMatrix, j: usize) -> f64 {
    coefficient_from_fraction(d_minus(state, data, j, true))
}

/// Exponential-loss implementation of [`Engine`].
#[derive(Debug, Clone)]
pub struct ExponentialEngine<'a> {
    data: &'a DesignMatrix,
    hp: HyperParams,
}

impl<'a> ExponentialEngine<'a> {
    pub fn new(data: &'a DesignMatrix, hp: HyperParams) -> Result<Self> {
        if !data.is_binary() {
            return Err(Error::InvalidData(
                "the exponential loss needs a design matrix with entries in {-1, +1}".into(),
            ));
        }
        Ok(Self { data, hp })
    }

    fn sweep(&self, state: &mut ExpState, coords: &[usize], lambda0: f64) -> SweepSummary {
        let mut summary = SweepSummary::default();
        for &j in coords {
            let old = state.model.coef(j);
            let new = exp_coordinate_update(state, self.data, j, lambda0);
            summary.record(old, new);
        }
        let b = state.model.intercept();
        state.refit_intercept(self.data);
        summary.max_change = summary.max_change.max((state.model.intercept() - b).abs());
        summary
    }
}

impl Engine for ExponentialEngine<'_> {
    type State = ExpState;
    type Screen = ();

    fn data(&self) -> &DesignMatrix {
        self.data
    }

    fn params(&self) -> &HyperParams {
        &self.hp
    }

    fn start(&self, model: ModelState) -> ExpState {
        ExpState::new(self.data, model).expect("engine data is binary")
    }

    fn model<'s>(&self, state: &'s ExpState) -> &'s ModelState {
        state.model()
    }

    fn finish(&self, state: ExpState) -> ModelState {
        state.into_model()
    }

    fn smooth_loss(&self, state: &ExpState) -> f64 {
        state.total()
    }

    fn set_coef(&self, state: &mut ExpState, j: usize, value: f64) {
        state.set_coef(self.data, j, value);
    }

    fn refit_intercept(&self, state: &mut ExpState) {
        state.refit_intercept(self.data);
    }

    fn l0_sweep(&self, state: &mut ExpState) -> SweepSummary {
        let coords: Vec<usize> = (0..self.data.p()).collect();
        self.sweep(state, &coords, self.hp.lambda0)
    }

    fn reoptimize(&self, state: &mut ExpState) {
        state.refit_intercept(self.data);
        let mut previous = state.total();
        for _ in 0..self.hp.reopt_sweeps {
            let coords: Vec<usize> = state.model.support().iter().copied().collect();
            self.sweep(state, &coords, 0.0);
            let current = state.total();
            if previous - current < self.hp.objective_tol {
                break;
            }
            previous = current;
        }
    }

    fn screen(&self, _without: &ExpState) {}

    fn candidate_scores(&self, state: &ExpState, _screen: &(), candidates: &[usize]) -> Vec<f64> {
        candidates
            .iter()
            .map(|&j| {
                let (plus, minus) = state.split(self.data, j);
                (plus - minus).abs()
            })
            .collect()
    }

    fn try_add(&self, without: &ExpState, _screen: &(), j: usize, threshold: f64) -> AddOutcome {
        let (plus, minus) = excluded_split(without, self.data, j);
        let h = plus + minus;
        let d = minus / h;
        let coef = coefficient_from_fraction(d);
        let decision = if coef == 0.0 {
            AddDecision::NoDescent
        } else {
            let best = plus * (-coef).exp() + minus * coef.exp();
            if best < threshold {
                AddDecision::Accept(coef)
            } else {
                AddDecision::NoImprovement
            }
        };
        AddOutcome { decision, line_search_iters: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binary_data(cols: Vec<Vec<f64>>, y: Vec<f64>) -> DesignMatrix {
        let p = cols.len();
        DesignMatrix::from_columns(cols, y, (0..p).map(|j| format!("b{j}")).collect()).unwrap()
    }

    fn random_binary(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DesignMatrix {
        let sign = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let cols = (0..p).map(|_| (0..n).map(|_| sign(rng)).collect()).collect();
        let y = (0..n).map(|_| sign(rng)).collect();
        binary_data(cols, y)
    }

    #[test]
    fn d_minus_counts() {
        let data = binary_data(vec![vec![1.0, -1.0], vec![1.0, 1.0, 1.0, -1.0][..2].to_vec()], vec![1.0, 1.0]);
        let state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        assert_eq!(d_minus(&state, &data, 0, false), 0.5);

        let data = binary_data(vec![vec![1.0, 1.0, 1.0, -1.0]], vec![1.0; 4]);
        let state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        assert_eq!(d_minus(&state, &data, 0, false), 0.25);
    }

    #[test]
    fn excluded_fraction_matches_scratch_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let data = random_binary(30, 4, &mut rng);
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let model = ModelState::from_coefficients(&data, w.clone(), 0.2).unwrap();
            let state = ExpState::new(&data, model).unwrap();
            let j = rng.random_range(0..4);
            let mut w0 = w.clone();
            w0[j] = 0.0;
            let scratch = ExpState::new(&data, ModelState::from_coefficients(&data, w0, 0.2).unwrap()).unwrap();
            let a = d_minus(&state, &data, j, true);
            let b = d_minus(&scratch, &data, j, false);
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_interval_cases() {
        assert_eq!(zero_interval(4.0, 0.0), (0.5, 0.5));
        let (lo, hi) = zero_interval(4.0, 0.5);
        assert!((lo - 0.257939).abs() < 1e-6 && (hi - 0.742061).abs() < 1e-6);
        assert_eq!(zero_interval(4.0, 8.0), (0.0, 1.0));
        assert_eq!(zero_interval(4.0, 4.0), (0.0, 1.0));
    }

    #[test]
    fn balanced_column_stays_zero() {
        let data = binary_data(vec![vec![1.0, -1.0]], vec![1.0, 1.0]);
        let mut state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        assert_eq!(exp_coordinate_update(&mut state, &data, 0, 0.0), 0.0);
    }

    #[test]
    fn hand_worked_update() {
        let data = binary_data(vec![vec![1.0, 1.0, 1.0, -1.0]], vec![1.0; 4]);
        let mut state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        assert_eq!(state.total(), 4.0);
        let w = exp_coordinate_update(&mut state, &data, 0, 0.5);
        assert!((w - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!((w - 0.549306).abs() < 1e-6);
        assert!((state.total() - 8.0 * 0.1875f64.sqrt()).abs() < 1e-12);
        assert!((state.total() - 3.464102).abs() < 1e-6);
        assert!((4.0 - state.total() - 0.535898).abs() < 1e-6);

        let mut state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        assert_eq!(exp_coordinate_update(&mut state, &data, 0, 0.6), 0.0);
        assert_eq!(state.total(), 4.0);
    }

    #[test]
    fn line_search_is_stationary() {
        assert_eq!(coefficient_from_fraction(0.5), 0.0);
        assert!((coefficient_from_fraction(0.25) - 0.5 * 3f64.ln()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let data = random_binary(25, 3, &mut rng);
            let model = ModelState::from_coefficients(&data, vec![0.3, -0.2, 0.0], 0.1).unwrap();
            let state = ExpState::new(&data, model).unwrap();
            let x = exp_line_search(&state, &data, 2);
            let d = d_minus(&state, &data, 2, true);
            let deriv = -(1.0 - d) * (-x).exp() + d * x.exp();
            assert!(deriv.abs() < 1e-10);
        }
    }

    #[test]
    fn separating_column_is_clamped() {
        let data = binary_data(vec![vec![1.0, 1.0, -1.0]], vec![1.0, 1.0, -1.0]);
        let mut state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        let w = exp_coordinate_update(&mut state, &data, 0, 0.0);
        let cap = 0.5 * ((1.0 - SEPARATION_EPS) / SEPARATION_EPS).ln();
        assert!((w - cap).abs() < 1e-9);
        assert!(state.weights().iter().all(|&c| c > 0.0));
    }

    #[test]
    fn multiplicative_updates_track_scratch_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let data = random_binary(40, 6, &mut rng);
        let mut state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
        for step in 0..1000 {
            let j = rng.random_range(0..6);
            if step % 7 == 0 {
                state.refit_intercept(&data);
            } else {
                let v = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(-1.0..1.0) };
                state.set_coef(&data, j, v);
            }
        }
        let mut scratch = state.model().clone();
        scratch.recompute_margins(&data);
        let scratch = ExpState::new(&data, scratch).unwrap();
        for (a, b) in state.weights().iter().zip(scratch.weights()) {
            assert!(((a - b) / b).abs() < 1e-7);
        }
        assert!(((state.total() - scratch.total()) / scratch.total()).abs() < 1e-9);
    }

    #[test]
    fn coordinate_updates_never_increase_the_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let data = random_binary(30, 5, &mut rng);
            let lambda0 = rng.random_range(0.0..3.0);
            let mut state = ExpState::new(&data, ModelState::zeros(&data)).unwrap();
            let mut prev = state.objective(lambda0);
            for _ in 0..40 {
                let j = rng.random_range(0..5);
                exp_coordinate_update(&mut state, &data, j, lambda0);
                let cur = state.objective(lambda0);
                assert!(cur <= prev + 1e-9 * prev.max(1.0));
                prev = cur;
            }
        }
    }
}
