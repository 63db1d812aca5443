//! Warm starts, single fits and warm-started regularization paths.

use std::time::Instant;

use crate::engine::Engine;
use crate::exponential::ExponentialEngine;
use crate::logistic::LogisticEngine;
use crate::swap::{swap_search, Ordering, SwapReport};
use crate::{DesignMatrix, Error, HyperParams, Loss, ModelState, Result};

/// Largest coefficient change tolerated in a sweep that certifies convergence.
pub const WARM_START_TOL: f64 = 1e-10;

/// Default `lambda0` grid, strictly descending.
pub const DEFAULT_LAMBDA0_GRID: [f64; 8] = [7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.8];

/// Default `lambda2` grid.
pub const DEFAULT_LAMBDA2_GRID: [f64; 2] = [1e-5, 1e-3];

fn run_warm_start<E: Engine>(engine: &E, state: &mut E::State) -> usize {
    let cap = engine.params().warm_start_sweeps;
    for sweep in 1..=cap {
        let summary = engine.l0_sweep(state);
        if summary.max_change <= WARM_START_TOL && !summary.support_changed {
            return sweep;
        }
    }
    cap
}

fn check_start(data: &DesignMatrix, init: &ModelState) -> Result<()> {
    if init.coefficients().len() != data.p() {
        return Err(Error::Dimension { expected: data.p(), got: init.coefficients().len() });
    }
    if init.margins().len() != data.n() {
        return Err(Error::Dimension { expected: data.n(), got: init.margins().len() });
    }
    Ok(())
}

/// Cyclic coordinate descent with the L0 penalty active, from `init` (or
/// zero), until a full sweep changes nothing or the sweep cap is hit.
pub fn warm_start(data: &DesignMatrix, hp: &HyperParams, init: Option<&ModelState>) -> Result<ModelState> {
    Ok(warm_start_counted(data, hp, init)?.0)
}

/// [`warm_start`] that also reports the number of sweeps used.
pub fn warm_start_counted(
    data: &DesignMatrix,
    hp: &HyperParams,
    init: Option<&ModelState>,
) -> Result<(ModelState, usize)> {
    hp.validate()?;
    let init = match init {
        Some(s) => {
            check_start(data, s)?;
            s.clone()
        }
        None => ModelState::zeros(data),
    };
    Ok(match hp.loss {
        Loss::Logistic => {
            let engine = LogisticEngine::new(data, hp.clone());
            let mut state = engine.start(init);
            let sweeps = run_warm_start(&engine, &mut state);
            (engine.finish(state), sweeps)
        }
        Loss::Exponential => {
            let engine = ExponentialEngine::new(data, hp.clone())?;
            let mut state = engine.start(init);
            let sweeps = run_warm_start(&engine, &mut state);
            (engine.finish(state), sweeps)
        }
    })
}

/// A fitted model together with the search counters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub state: ModelState,
    /// Smooth loss plus `lambda0 * |support|`.
    pub objective: f64,
    /// Loss including the ridge term, without the L0 term.
    pub smooth_loss: f64,
    pub warm_start_sweeps: usize,
    /// Delete-or-swap attempts.
    pub swap_calls: usize,
    pub swaps: usize,
    pub deletions: usize,
    /// Candidate features screened during the swap search.
    pub swap_evals: usize,
    pub cut_prunes: usize,
    pub wall_ms: f64,
}

impl FitResult {
    fn new<E: Engine>(engine: &E, report: SwapReport, sweeps: usize, started: Instant) -> Self {
        let state = engine.start(report.state);
        let objective = engine.objective(&state);
        let smooth_loss = engine.smooth_loss(&state);
        Self {
            state: engine.finish(state),
            objective,
            smooth_loss,
            warm_start_sweeps: sweeps,
            swap_calls: report.calls,
            swaps: report.swaps,
            deletions: report.deletions,
            swap_evals: report.candidates_evaluated,
            cut_prunes: report.cut_prunes,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn fit_engine<E: Engine>(engine: &E, init: ModelState, ordering: Ordering, started: Instant) -> FitResult {
    let mut state = engine.start(init);
    let sweeps = run_warm_start(engine, &mut state);
    let report = swap_search(engine, engine.finish(state), ordering);
    FitResult::new(engine, report, sweeps, started)
}

/// Warm start from `init` (or zero) followed by the swap search.
pub fn fit_from(
    data: &DesignMatrix,
    hp: &HyperParams,
    ordering: Ordering,
    init: Option<&ModelState>,
) -> Result<FitResult> {
    let started = Instant::now();
    hp.validate()?;
    let init = match init {
        Some(s) => {
            check_start(data, s)?;
            s.clone()
        }
        None => ModelState::zeros(data),
    };
    let result = match hp.loss {
        Loss::Logistic => fit_engine(&LogisticEngine::new(data, hp.clone()), init, ordering, started),
        Loss::Exponential => fit_engine(&ExponentialEngine::new(data, hp.clone())?, init, ordering, started),
    };
    if !result.objective.is_finite() {
        return Err(Error::Numeric(format!("objective evaluated to {}", result.objective)));
    }
    Ok(result)
}

/// Warm start from zero followed by the swap search.
pub fn fit(data: &DesignMatrix, hp: &HyperParams, ordering: Ordering) -> Result<FitResult> {
    fit_from(data, hp, ordering, None)
}

/// Grid of penalties plus the settings shared by every fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub lambda0_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    /// Every field except the two penalties is taken from here.
    pub template: HyperParams,
    pub ordering: Ordering,
}

impl PathSpec {
    pub fn new(
        lambda0_grid: Vec<f64>,
        lambda2_grid: Vec<f64>,
        template: HyperParams,
        ordering: Ordering,
    ) -> Result<Self> {
        let spec = Self { lambda0_grid, lambda2_grid, template, ordering };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda0_grid.is_empty() || self.lambda2_grid.is_empty() {
            return Err(Error::InvalidConfig("penalty grids must not be empty".into()));
        }
        if let Some(v) = self.lambda0_grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidConfig(format!("lambda0 grid values must be positive, got {v}")));
        }
        if self.lambda0_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("lambda0 grid must be strictly descending".into()));
        }
        if let Some(v) = self.lambda2_grid.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidConfig(format!("lambda2 grid values must be nonnegative, got {v}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lambda0_grid.len() * self.lambda2_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn params(&self, lambda0: f64, lambda2: f64) -> HyperParams {
        HyperParams { lambda0, lambda2, ..self.template.clone() }
    }
}

/// One grid point of a path.
#[derive(Debug)]
pub struct PathPoint {
    pub lambda0: f64,
    pub lambda2: f64,
    pub result: Result<FitResult>,
}

/// Grid points in execution order: `lambda2` outer, `lambda0` descending inner.
#[derive(Debug)]
pub struct PathResult {
    pub points: Vec<PathPoint>,
}

impl PathResult {
    /// Successful fits with their penalties.
    pub fn fits(&self) -> impl Iterator<Item = (f64, f64, &FitResult)> {
        self.points.iter().filter_map(|p| p.result.as_ref().ok().map(|r| (p.lambda0, p.lambda2, r)))
    }
}

/// Fits every grid point. Each `lambda2` chain starts cold; within a chain each
/// fit is warm-started from the previous successful one. A failing point is
/// recorded and the path continues.
pub fn fit_path(data: &DesignMatrix, spec: &PathSpec) -> Result<PathResult> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.len());
    for &lambda2 in &spec.lambda2_grid {
        let mut previous: Option<ModelState> = None;
        for &lambda0 in &spec.lambda0_grid {
            let hp = spec.params(lambda0, lambda2);
            let result = fit_from(data, &hp, spec.ordering, previous.as_ref()).map_err(|e| Error::GridPoint {
                lambda0,
                lambda2,
                source: Box::new(e),
            });
            if let Ok(r) = &result {
                previous = Some(r.state.clone());
            }
            points.push(PathPoint { lambda0, lambda2, result });
        }
    }
    Ok(PathResult { points })
}
