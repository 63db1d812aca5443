//! Swap-1-OPT local search: the failure-count priority queue, delete-or-swap
//! evaluation and cut-pruned candidate screening.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::exponential::ExponentialEngine;
use crate::logistic::cuts::{lin_cut, quad_cut_one_unchecked, quad_cut_two_unchecked};
use crate::logistic::{iterate_threshold, LogisticEngine, ProbePoint, Univariate};
use crate::{DesignMatrix, Error, HyperParams, Loss, ModelState, Result};

/// Verdict of a single add attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AddDecision {
    /// The line search reached a loss below the threshold at this coefficient.
    Accept(f64),
    /// A lower bound showed the threshold is out of reach.
    Pruned,
    /// Zero slope at the origin: the feature offers no descent direction.
    NoDescent,
    /// The line search ran but did not beat the threshold.
    NoImprovement,
}

impl AddDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, AddDecision::Accept(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddOutcome {
    pub decision: AddDecision,
    /// Thresholding iterations spent in the line search (0 when pruned).
    pub line_search_iters: usize,
}

impl AddOutcome {
    fn new(decision: AddDecision, line_search_iters: usize) -> Self {
        Self { decision, line_search_iters }
    }
}

fn finish_line_search<P: Univariate + ?Sized>(
    probe: &P,
    lipschitz: f64,
    max_iter: usize,
    threshold: f64,
) -> AddOutcome {
    let w = iterate_threshold(probe, 0.0, lipschitz, max_iter);
    let decision = if w != 0.0 && probe.value(w) < threshold {
        AddDecision::Accept(w)
    } else {
        AddDecision::NoImprovement
    };
    AddOutcome::new(decision, max_iter)
}

fn brackets(origin: &ProbePoint, other: &ProbePoint) -> bool {
    origin.slope * other.slope < 0.0
}

fn safe_lin_cut(a: ProbePoint, b: ProbePoint) -> f64 {
    if a.slope * b.slope <= 0.0 {
        lin_cut(a, b)
    } else {
        f64::NEG_INFINITY
    }
}

/// Cutting-plane screening of a zero coordinate, for `lambda2 = 0`.
///
/// `probe` is the loss along the candidate with every other coefficient held
/// fixed and the candidate currently at 0. Accepts when the line search
/// brings the loss strictly below `threshold`.
pub fn try_add_lincut<P: Univariate + ?Sized>(
    probe: &P,
    lipschitz: f64,
    max_iter: usize,
    threshold: f64,
) -> AddOutcome {
    let origin = probe.point(0.0);
    let t = -origin.slope / lipschitz;
    if t == 0.0 || !t.is_finite() {
        return AddOutcome::new(AddDecision::NoDescent, 0);
    }
    let far = probe.point(2.0 * t);
    let (a, b) = if brackets(&origin, &far) {
        let (mut a, mut b) = (probe.point(t), far);
        let c = probe.point(0.5 * (a.x + b.x));
        if brackets(&origin, &c) {
            b = c;
        } else {
            a = c;
        }
        (a, b)
    } else {
        let farther = probe.point(3.0 * t);
        if !brackets(&origin, &farther) {
            return finish_line_search(probe, lipschitz, max_iter, threshold);
        }
        (far, farther)
    };
    if safe_lin_cut(a, b) >= threshold {
        return AddOutcome::new(AddDecision::Pruned, 0);
    }
    finish_line_search(probe, lipschitz, max_iter, threshold)
}

/// Quadratic-cut screening of a zero coordinate, for `lambda2 > 0`.
pub fn try_add_quad<P: Univariate + ?Sized>(
    probe: &P,
    lipschitz: f64,
    lambda2: f64,
    max_iter: usize,
    threshold: f64,
) -> AddOutcome {
    debug_assert!(lambda2 > 0.0);
    let pruned = AddOutcome::new(AddDecision::Pruned, 0);
    let origin = probe.point(0.0);
    if quad_cut_one_unchecked(origin, lambda2) >= threshold {
        return pruned;
    }
    let t = -origin.slope / lipschitz;
    if t == 0.0 || !t.is_finite() {
        return AddOutcome::new(AddDecision::NoDescent, 0);
    }
    let far = probe.point(2.0 * t);
    let (a, b) = if brackets(&origin, &far) {
        let (mut a, mut b) = (probe.point(t), far);
        let c = probe.point(0.5 * (a.x + b.x));
        if quad_cut_one_unchecked(c, lambda2) >= threshold {
            return pruned;
        }
        if brackets(&origin, &c) {
            b = c;
        } else {
            a = c;
        }
        (a, b)
    } else {
        if quad_cut_one_unchecked(far, lambda2) >= threshold {
            return pruned;
        }
        let farther = probe.point(3.0 * t);
        if !brackets(&origin, &farther) {
            if quad_cut_one_unchecked(farther, lambda2) >= threshold {
                return pruned;
            }
            return finish_line_search(probe, lipschitz, max_iter, threshold);
        }
        (far, farther)
    };
    if quad_cut_two_unchecked(a, b, lambda2) >= threshold {
        return pruned;
    }
    finish_line_search(probe, lipschitz, max_iter, threshold)
}

/// Reference evaluator without any pruning: always runs the line search.
pub fn try_add_exhaustive<P: Univariate + ?Sized>(
    probe: &P,
    lipschitz: f64,
    max_iter: usize,
    threshold: f64,
) -> AddOutcome {
    if probe.slope(0.0) == 0.0 {
        return AddOutcome::new(AddDecision::NoDescent, 0);
    }
    finish_line_search(probe, lipschitz, max_iter, threshold)
}

/// Order in which support features are visited by the outer loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// Fewest failed swaps first, ties by index.
    #[default]
    Dynamic,
    /// Ascending feature index.
    Sequential,
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::Dynamic => "dynamic",
            Ordering::Sequential => "sequential",
        })
    }
}

impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dynamic" => Ok(Ordering::Dynamic),
            "sequential" => Ok(Ordering::Sequential),
            other => Err(Error::InvalidConfig(format!("unknown ordering `{other}`"))),
        }
    }
}

/// Per-feature tallies of failed delete-or-swap attempts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailureQueue {
    counts: Vec<u64>,
}

impl FailureQueue {
    pub fn new(p: usize) -> Self {
        Self { counts: vec![0; p] }
    }

    pub fn record_failure(&mut self, j: usize) {
        self.counts[j] += 1;
    }

    pub fn count(&self, j: usize) -> u64 {
        self.counts[j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The support in visiting order.
    pub fn order(&self, support: impl IntoIterator<Item = usize>, ordering: Ordering) -> Vec<usize> {
        let mut s: Vec<usize> = support.into_iter().collect();
        match ordering {
            Ordering::Dynamic => s.sort_by_key(|&j| (self.counts[j], j)),
            Ordering::Sequential => s.sort_unstable(),
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapKind {
    NoChange,
    Deleted,
    Swapped,
}

/// Result of one delete-or-swap attempt on a support feature.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapOutcome<S> {
    pub kind: SwapKind,
    pub removed: Option<usize>,
    pub added: Option<usize>,
    pub state: S,
    pub candidates_evaluated: usize,
    pub cut_prunes: usize,
    pub line_searches: usize,
}

/// Tries to delete support feature `j`, or else to replace it by the first
/// outside feature (ranked by gradient magnitude) that lowers the loss.
pub fn try_delete_or_swap<E: Engine>(engine: &E, state: &E::State, j: usize) -> SwapOutcome<E::State> {
    let hp = engine.params();
    let data = engine.data();
    let mut outcome = SwapOutcome {
        kind: SwapKind::NoChange,
        removed: None,
        added: None,
        state: state.clone(),
        candidates_evaluated: 0,
        cut_prunes: 0,
        line_searches: 0,
    };
    let best = engine.smooth_loss(state);
    let mut without = state.clone();
    engine.set_coef(&mut without, j, 0.0);
    if engine.smooth_loss(&without) <= best {
        engine.reoptimize(&mut without);
        outcome.kind = SwapKind::Deleted;
        outcome.removed = Some(j);
        outcome.state = without;
        return outcome;
    }

    let model = engine.model(state);
    let outside: Vec<usize> = (0..data.p()).filter(|&k| model.coef(k) == 0.0).collect();
    let screen = engine.screen(&without);
    let scores = engine.candidate_scores(&without, &screen, &outside);
    let mut ranked: Vec<(usize, f64)> = outside.into_iter().zip(scores).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    if let Some(limit) = hp.candidate_limit {
        ranked.truncate(limit);
    }

    let threshold = best - hp.objective_tol;
    for (k, _) in ranked {
        outcome.candidates_evaluated += 1;
        let add = engine.try_add(&without, &screen, k, threshold);
        if add.line_search_iters > 0 {
            outcome.line_searches += 1;
        }
        match add.decision {
            AddDecision::Pruned => outcome.cut_prunes += 1,
            AddDecision::Accept(w) => {
                let mut next = without;
                engine.set_coef(&mut next, k, w);
                engine.reoptimize(&mut next);
                outcome.kind = SwapKind::Swapped;
                outcome.removed = Some(j);
                outcome.added = Some(k);
                outcome.state = next;
                return outcome;
            }
            AddDecision::NoDescent | AddDecision::NoImprovement => {}
        }
    }
    outcome
}

/// Counters and final state of a swap search.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapReport {
    pub state: ModelState,
    /// Delete-or-swap attempts.
    pub calls: usize,
    pub swaps: usize,
    pub deletions: usize,
    /// Outside features screened across all attempts.
    pub candidates_evaluated: usize,
    pub cut_prunes: usize,
    pub line_searches: usize,
    pub queue: FailureQueue,
}

/// Runs the outer loop on any engine.
pub fn swap_search<E: Engine>(engine: &E, initial: ModelState, ordering: Ordering) -> SwapReport {
    let p = engine.data().p();
    let mut queue = FailureQueue::new(p);
    let mut state = engine.start(initial);
    let (mut calls, mut swaps, mut deletions) = (0, 0, 0);
    let (mut evaluated, mut prunes, mut searches) = (0, 0, 0);
    'restart: loop {
        let order = queue.order(engine.model(&state).support().iter().copied(), ordering);
        for j in order {
            calls += 1;
            let out = try_delete_or_swap(engine, &state, j);
            evaluated += out.candidates_evaluated;
            prunes += out.cut_prunes;
            searches += out.line_searches;
            match out.kind {
                SwapKind::NoChange => queue.record_failure(j),
                SwapKind::Deleted => {
                    deletions += 1;
                    state = out.state;
                    continue 'restart;
                }
                SwapKind::Swapped => {
                    swaps += 1;
                    state = out.state;
                    continue 'restart;
                }
            }
        }
        break;
    }
    SwapReport {
        state: engine.finish(state),
        calls,
        swaps,
        deletions,
        candidates_evaluated: evaluated,
        cut_prunes: prunes,
        line_searches: searches,
        queue,
    }
}

/// Swap-1-OPT search from `initial` under the loss in `hp`.
pub fn fit_swap_1opt(
    initial: ModelState,
    data: &DesignMatrix,
    hp: &HyperParams,
    ordering: Ordering,
) -> Result<SwapReport> {
    hp.validate()?;
    if initial.coefficients().len() != data.p() {
        return Err(Error::Dimension { expected: data.p(), got: initial.coefficients().len() });
    }
    if initial.margins().len() != data.n() {
        return Err(Error::Dimension { expected: data.n(), got: initial.margins().len() });
    }
    Ok(match hp.loss {
        Loss::Logistic => swap_search(&LogisticEngine::new(data, hp.clone()), initial, ordering),
        Loss::Exponential => swap_search(&ExponentialEngine::new(data, hp.clone())?, initial, ordering),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f(x) = s (x - m)^2 + base` with curvature `s >= lambda2`.
    struct Parabola {
        s: f64,
        m: f64,
        base: f64,
    }

    impl Univariate for Parabola {
        fn value(&self, x: f64) -> f64 {
            self.s * (x - self.m).powi(2) + self.base
        }
        fn slope(&self, x: f64) -> f64 {
            2.0 * self.s * (x - self.m)
        }
    }

    #[test]
    fn zero_slope_is_no_descent() {
        let f = Parabola { s: 1.0, m: 0.0, base: 1.0 };
        assert_eq!(try_add_lincut(&f, 2.0, 10, 5.0).decision, AddDecision::NoDescent);
        assert_eq!(try_add_quad(&f, 2.0, 0.5, 10, 5.0).decision, AddDecision::NoDescent);
    }

    #[test]
    fn quad_prunes_at_origin_without_line_search() {
        let f = Parabola { s: 1.0, m: 0.1, base: 3.0 };
        let out = try_add_quad(&f, 2.0, 1.0, 10, 2.0);
        assert_eq!(out, AddOutcome::new(AddDecision::Pruned, 0));
    }

    #[test]
    fn accepts_large_reduction() {
        let f = Parabola { s: 1.0, m: 2.0, base: 0.0 };
        let out = try_add_lincut(&f, 2.0, 10, 1.0);
        match out.decision {
            AddDecision::Accept(w) => assert!((w - 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let out = try_add_quad(&f, 2.0, 0.5, 10, 1.0);
        assert!(out.decision.is_accept());
    }

    #[test]
    fn lincut_prunes_after_bracketing() {
        // minimum 0.9 at x = 1 while the threshold is 0.5
        let f = Parabola { s: 0.5, m: 1.0, base: 0.9 };
        let out = try_add_lincut(&f, 1.5, 10, 0.5);
        assert_eq!(out.decision, AddDecision::Pruned);
    }

    #[test]
    fn failure_queue_orders() {
        let mut q = FailureQueue::new(6);
        q.record_failure(1);
        q.record_failure(1);
        q.record_failure(4);
        assert_eq!(q.order([1, 3, 4, 5], Ordering::Dynamic), vec![3, 5, 4, 1]);
        assert_eq!(q.order([5, 1, 3, 4], Ordering::Sequential), vec![1, 3, 4, 5]);
        assert_eq!(q.count(1), 2);
    }

    #[test]
    fn ordering_parses() {
        assert_eq!("Dynamic".parse::<Ordering>().unwrap(), Ordering::Dynamic);
        assert!("random".parse::<Ordering>().is_err());
        assert_eq!(Ordering::Sequential.to_string(), "sequential");
    }
}
