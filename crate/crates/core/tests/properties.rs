mod common;

use l0swap::binarize::{Direction, Encoding};
use l0swap::logistic::threshold_value;
use l0swap::metrics::auc;
use l0swap::scorecard::{ModelFile, Scorecard, Term};
use l0swap::{DesignMatrix, Loss, ModelState};
use proptest::prelude::*;

fn scores_and_labels() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(-50.0f64..50.0, n),
            prop::collection::vec(prop::bool::ANY, n).prop_filter("both classes", |v| v.iter().any(|&b| b) && v.iter().any(|&b| !b)),
        )
            .prop_map(|(s, y)| (s, y.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect()))
    })
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn term() -> impl Strategy<Value = Term> {
    ("[a-z][a-z0-9_]{0,8}", prop::bool::ANY, finite(), finite()).prop_map(|(feature, le, threshold, weight)| Term {
        feature,
        op: if le { Direction::AtMost } else { Direction::AtLeast },
        threshold,
        weight,
    })
}

proptest! {
    #[test]
    fn auc_ignores_monotone_transforms((s, y) in scores_and_labels()) {
        let base = auc(&s, &y).unwrap();
        // scaling by a power of two is exact, so ties are preserved
        let scaled: Vec<f64> = s.iter().map(|v| 4.0 * v).collect();
        prop_assert_eq!(auc(&scaled, &y).unwrap(), base);
        let flipped: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((auc(&flipped, &y).unwrap() - (1.0 - base)).abs() < 1e-12);
    }

    #[test]
    fn scorecard_json_round_trips(terms in prop::collection::vec(term(), 0..25), intercept in finite(), pm1 in prop::bool::ANY) {
        let card = ModelFile::Scorecard(Scorecard {
            loss: if pm1 { Loss::Exponential } else { Loss::Logistic },
            lambda0: 5.0,
            lambda2: 0.0,
            intercept,
            encoding: if pm1 { Encoding::PlusMinusOne } else { Encoding::ZeroOne },
            terms,
        });
        let text = card.to_json().unwrap();
        prop_assert_eq!(ModelFile::from_json(&text).unwrap(), card);
    }

    #[test]
    fn threshold_value_minimizes_the_surrogate(w in -5.0f64..5.0, g in -20.0f64..20.0, l in 0.01f64..50.0, lambda0 in 0.0f64..10.0) {
        let surrogate = |x: f64| g * (x - w) + l / 2.0 * (x - w) * (x - w) + if x != 0.0 { lambda0 } else { 0.0 };
        let c = w - g / l;
        let best = surrogate(0.0).min(surrogate(c));
        let chosen = threshold_value(w, g, l, lambda0);
        prop_assert!(chosen == 0.0 || chosen == c);
        prop_assert!(surrogate(chosen) <= best + 1e-9 * (1.0 + best.abs()));
    }

    #[test]
    fn margins_track_coefficient_edits(seed in 0u64..1000, edits in prop::collection::vec((0usize..6, -3.0f64..3.0), 1..40)) {
        let mut r = common::rng(seed);
        let data: DesignMatrix = common::random_real(30, 6, 2.0, &mut r);
        let mut state = ModelState::zeros(&data);
        let mut w = vec![0.0; 6];
        for (k, (j, v)) in edits.into_iter().enumerate() {
            let v = if k % 3 == 0 { 0.0 } else { v };
            state.set_coef(&data, j, v);
            w[j] = v;
        }
        state.set_intercept(&data, 0.25);
        let expect = common::margins(&data, &w, 0.25);
        for (a, b) in state.margins().iter().zip(&expect) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let support: Vec<usize> = state.support().iter().copied().collect();
        let nonzero: Vec<usize> = (0..6).filter(|&j| w[j] != 0.0).collect();
        prop_assert_eq!(support, nonzero);
    }
}
