//! Lower bounds on the minimum of a convex one-dimensional function from
//! first-order information at one or two points.
//!
//! All bounds take [`ProbePoint`]s (location, value, slope) so callers can
//! reuse evaluations they already paid for.

use super::ProbePoint;
use crate::{Error, Result};

/// Intersection of the tangent lines at `a` and `b`.
///
/// Needs `a.slope * b.slope <= 0`. When both slopes are zero either point is
/// already a minimizer and its value is returned. Slopes of the same strict
/// sign do not bracket a minimizer; the trivial bound `-inf` is returned.
pub fn lin_cut(a: ProbePoint, b: ProbePoint) -> f64 {
    let (a1, a2) = (a.slope, b.slope);
    debug_assert!(a1 * a2 <= 0.0, "lin_cut needs bracketing slopes ({a1}, {a2})");
    if a1 * a2 > 0.0 {
        return f64::NEG_INFINITY;
    }
    if a1 == a2 {
        return a.value;
    }
    (a1 * b.value - a2 * a.value + a1 * a2 * (a.x - b.x)) / (a1 - a2)
}

/// Minimum of the quadratic minorant `f(a) + f'(a)(x - a) + lambda2 (x - a)^2`.
pub fn quad_cut_one(a: ProbePoint, lambda2: f64) -> Result<f64> {
    if lambda2.is_nan() || lambda2 <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "quadratic cut needs lambda2 > 0, got {lambda2}"
        )));
    }
    Ok(quad_cut_one_unchecked(a, lambda2))
}

#[inline]
pub(crate) fn quad_cut_one_unchecked(a: ProbePoint, lambda2: f64) -> f64 {
    a.value - a.slope * a.slope / (4.0 * lambda2)
}

const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Minimum of the pointwise max of the quadratic minorants at `a` and `b`.
///
/// The two minorants share the curvature `lambda2`, so they cross at a single
/// point `x_hat`. The usual case evaluates the minorant there. When a
/// minorant's own vertex lies on the side where that minorant dominates, the
/// max is minimized at the vertex instead and the vertex value is returned.
/// A vanishing denominator means the minorants differ by a constant; the
/// larger single-point bound is then exact for their max.
pub fn quad_cut_two(a: ProbePoint, b: ProbePoint, lambda2: f64) -> Result<f64> {
    if lambda2.is_nan() || lambda2 <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "quadratic cut needs lambda2 > 0, got {lambda2}"
        )));
    }
    Ok(quad_cut_two_unchecked(a, b, lambda2))
}

pub(crate) fn quad_cut_two_unchecked(a: ProbePoint, b: ProbePoint, lambda2: f64) -> f64 {
    let one_a = quad_cut_one_unchecked(a, lambda2);
    let one_b = quad_cut_one_unchecked(b, lambda2);
    let denom = a.slope - b.slope - 2.0 * lambda2 * (a.x - b.x);
    if denom.abs() <= DEGENERATE_DENOMINATOR {
        return one_a.max(one_b);
    }
    let numer = -a.value + b.value + a.slope * a.x - b.slope * b.x + lambda2 * (b.x * b.x - a.x * a.x);
    let x_hat = numer / denom;
    let minorant = |p: ProbePoint, x: f64| p.value + p.slope * (x - p.x) + lambda2 * (x - p.x).powi(2);
    let mut bound = minorant(a, x_hat);

    let vertex_a = a.x - a.slope / (2.0 * lambda2);
    if minorant(a, vertex_a) >= minorant(b, vertex_a) {
        bound = bound.min(one_a);
    }
    let vertex_b = b.x - b.slope / (2.0 * lambda2);
    if minorant(b, vertex_b) >= minorant(a, vertex_b) {
        bound = bound.min(one_b);
    }
    bound
}
