//! L0-regularized sparse classification.
//!
//! Fits sparse linear (and, after threshold binarization, additive) models by
//! minimizing the logistic loss with optional ridge penalty, or the exponential
//! loss, plus an L0 penalty `lambda0 * |support|`:
//!
//! 1. a warm start drives thresholded coordinate descent to a point that no
//!    single surrogate coordinate step can improve;
//! 2. a local search then tries to delete or swap each support feature, visiting
//!    features in ascending order of how often they already failed, and screens
//!    swap candidates with linear or quadratic cuts before paying for a line
//!    search.
//!
//! Under the exponential loss with `{-1, +1}` features the coordinate line
//! search has a closed form, so no cuts are needed.
//!
//! ```
//! use l0swap::{fit, synth, HyperParams, Ordering};
//!
//! let spec = synth::SynthSpec { n: 200, p: 20, k: 4, rho: 0.5, seed: 1 };
//! let (data, _truth) = synth::gen_classification(&spec).unwrap();
//! let hp = HyperParams::logistic(4.0, 1e-3);
//! let result = fit(&data, &hp, Ordering::Dynamic).unwrap();
//! assert!(result.state.support().len() <= 20);
//! ```

pub mod binarize;
pub mod data;
pub mod engine;
mod error;
pub mod exponential;
pub mod logistic;
pub mod metrics;
pub mod model;
pub mod path;
pub mod scorecard;
pub mod swap;
pub mod synth;

pub use data::DesignMatrix;
pub use error::{Error, Result};
pub use model::{
    exponential_objective, logistic_objective, predict_probability, probability_from_score,
    CutMode, HyperParams, Loss, ModelState,
};
pub use path::{fit, fit_path, warm_start, FitResult, PathResult, PathSpec};
pub use swap::{fit_swap_1opt, Ordering};
