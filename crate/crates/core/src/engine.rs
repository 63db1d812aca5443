//! The loss-specific operations the warm start and the swap search are built on.

use crate::swap::AddOutcome;
use crate::{DesignMatrix, HyperParams, ModelState};

/// What one coordinate sweep changed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepSummary {
    /// Largest absolute change of any coefficient or the intercept.
    pub max_change: f64,
    pub support_changed: bool,
}

impl SweepSummary {
    pub(crate) fn record(&mut self, old: f64, new: f64) {
        self.max_change = self.max_change.max((new - old).abs());
        if (old == 0.0) != (new == 0.0) {
            self.support_changed = true;
        }
    }
}

/// A loss together with the data and hyperparameters of one fit.
///
/// `State` carries the coefficients plus whatever per-observation cache the
/// loss maintains incrementally.
pub trait Engine {
    type State: Clone;
    /// Per-state quantities shared by every candidate screened against it.
    type Screen;

    fn data(&self) -> &DesignMatrix;
    fn params(&self) -> &HyperParams;

    fn start(&self, model: ModelState) -> Self::State;
    fn model<'s>(&self, state: &'s Self::State) -> &'s ModelState;
    fn finish(&self, state: Self::State) -> ModelState;

    /// Loss without the L0 term (ridge included).
    fn smooth_loss(&self, state: &Self::State) -> f64;

    fn objective(&self, state: &Self::State) -> f64 {
        self.smooth_loss(state) + self.params().lambda0 * self.model(state).support().len() as f64
    }

    fn set_coef(&self, state: &mut Self::State, j: usize, value: f64);

    fn refit_intercept(&self, state: &mut Self::State);

    /// One cyclic pass over every coordinate with the L0 penalty active,
    /// followed by an intercept refit.
    fn l0_sweep(&self, state: &mut Self::State) -> SweepSummary;

    /// Coordinate descent restricted to the current support.
    fn reoptimize(&self, state: &mut Self::State);

    fn screen(&self, without: &Self::State) -> Self::Screen;

    /// Ranking keys for outside features (larger is tried first).
    fn candidate_scores(&self, without: &Self::State, screen: &Self::Screen, candidates: &[usize]) -> Vec<f64>;

    /// Decides whether feature `j` (currently zero) can bring the smooth loss
    /// strictly below `threshold` with everything else held fixed.
    fn try_add(&self, without: &Self::State, screen: &Self::Screen, j: usize, threshold: f64) -> AddOutcome;
}
