//! Reference computations for the integration tests, written from the
//! definitions without calling into the solver.

#![allow(dead_code, clippy::needless_range_loop)]

use l0swap::DesignMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j}")).collect()
}

pub fn sign(r: &mut ChaCha8Rng) -> f64 {
    if r.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Uniform real features in `[-scale, scale]` and fair coin labels.
pub fn random_real(n: usize, p: usize, scale: f64, r: &mut ChaCha8Rng) -> DesignMatrix {
    let cols = (0..p).map(|_| (0..n).map(|_| r.random_range(-scale..scale)).collect()).collect();
    let y = (0..n).map(|_| sign(r)).collect();
    DesignMatrix::from_columns(cols, y, names(p)).unwrap()
}

/// `{-1, +1}` features and labels.
pub fn random_binary(n: usize, p: usize, r: &mut ChaCha8Rng) -> DesignMatrix {
    let cols = (0..p).map(|_| (0..n).map(|_| sign(r)).collect()).collect();
    let y = (0..n).map(|_| sign(r)).collect();
    DesignMatrix::from_columns(cols, y, names(p)).unwrap()
}

/// `log(1 + e^{-m})` without overflow.
pub fn softplus_neg(m: f64) -> f64 {
    if m >= 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

pub fn margins(data: &DesignMatrix, w: &[f64], b: f64) -> Vec<f64> {
    (0..data.n())
        .map(|i| {
            let mut f = b;
            for (j, &wj) in w.iter().enumerate() {
                f += wj * data.value(i, j);
            }
            data.labels()[i] * f
        })
        .collect()
}

/// `sum_i log(1 + exp(-y_i f_i)) + lambda2 ||w||^2`.
pub fn logistic_g(data: &DesignMatrix, w: &[f64], b: f64, lambda2: f64) -> f64 {
    let loss: f64 = margins(data, w, b).into_iter().map(softplus_neg).sum();
    loss + lambda2 * w.iter().map(|v| v * v).sum::<f64>()
}

pub fn logistic_grad(data: &DesignMatrix, w: &[f64], b: f64, lambda2: f64, j: usize) -> f64 {
    let m = margins(data, w, b);
    let mut g = 0.0;
    for (i, &mi) in m.iter().enumerate() {
        g -= data.labels()[i] * data.value(i, j) / (1.0 + mi.exp());
    }
    g + 2.0 * lambda2 * w[j]
}

/// `sum_i exp(-y_i f_i)`.
pub fn exp_h(data: &DesignMatrix, w: &[f64], b: f64) -> f64 {
    margins(data, w, b).into_iter().map(|m| (-m).exp()).sum()
}

fn ternary_on_grid(f: &dyn Fn(f64) -> f64, lo: f64, step: f64, count: usize) -> (f64, f64) {
    let at = |k: usize| lo + k as f64 * step;
    let (mut l, mut r) = (0usize, count);
    while r - l > 2 {
        let m1 = l + (r - l) / 3;
        let m2 = r - (r - l) / 3;
        if f(at(m1)) <= f(at(m2)) {
            r = m2;
        } else {
            l = m1;
        }
    }
    (l..=r).map(|k| (at(k), f(at(k)))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap()
}

/// Minimum of a convex `f` over the grid `lo, lo + step, ..., hi`, then over a
/// 1000x finer grid around the best cell, `refinements` times.
///
/// For convex `f` a ternary search over grid indices returns the same point as
/// scanning the whole grid, at logarithmic cost.
pub fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64, refinements: usize) -> (f64, f64) {
    let count = ((hi - lo) / step).round() as usize;
    let (mut x, mut fx) = ternary_on_grid(&f, lo, step, count);
    let mut h = step;
    for _ in 0..refinements {
        let fine = h / 1000.0;
        let (lo2, hi2) = ((x - h).max(lo), (x + h).min(hi));
        let (x2, f2) = ternary_on_grid(&f, lo2, fine, ((hi2 - lo2) / fine).round() as usize);
        if f2 <= fx {
            x = x2;
            fx = f2;
        }
        h = fine;
    }
    (x, fx)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Exact minimizer of the logistic loss plus ridge over the coefficients in
/// `support` and the unpenalized intercept, by damped Newton. Returns the full
/// coefficient vector, the intercept and the minimal smooth loss.
pub fn newton_fit(data: &DesignMatrix, support: &[usize], lambda2: f64) -> (Vec<f64>, f64, f64) {
    let k = support.len();
    let mut theta = vec![0.0; k + 1];
    let unpack = |theta: &[f64]| {
        let mut w = vec![0.0; data.p()];
        for (t, &j) in support.iter().enumerate() {
            w[j] = theta[t];
        }
        (w, theta[k])
    };
    let value = |theta: &[f64]| {
        let (w, b) = unpack(theta);
        logistic_g(data, &w, b, lambda2)
    };
    let mut current = value(&theta);
    for _ in 0..200 {
        let (w, b) = unpack(&theta);
        let m = margins(data, &w, b);
        let mut grad = vec![0.0; k + 1];
        let mut hess = vec![vec![0.0; k + 1]; k + 1];
        for i in 0..data.n() {
            let s = 1.0 / (1.0 + m[i].exp());
            let y = data.labels()[i];
            let row: Vec<f64> = support.iter().map(|&j| data.value(i, j)).chain([1.0]).collect();
            for a in 0..=k {
                grad[a] -= y * row[a] * s;
                for c in 0..=k {
                    hess[a][c] += s * (1.0 - s) * row[a] * row[c];
                }
            }
        }
        for a in 0..k {
            grad[a] += 2.0 * lambda2 * theta[a];
            hess[a][a] += 2.0 * lambda2;
        }
        for a in 0..=k {
            hess[a][a] += 1e-12;
        }
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < 1e-11 {
            break;
        }
        let step = solve(hess, grad.iter().map(|g| -g).collect());
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            let v = value(&cand);
            if v <= current {
                moved = v < current;
                theta = cand;
                current = v;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let (w, b) = unpack(&theta);
    (w, b, current)
}

/// Support positions of the ordering scenario: six support features, two of
/// which (3 and 9) are noisy stand-ins for the outside features 5 and 10.
pub const SCENARIO_START: [usize; 6] = [1, 3, 7, 9, 11, 15];
pub const SCENARIO_END: [usize; 6] = [1, 5, 7, 10, 11, 15];

/// Data for the ordering scenario: 16 Gaussian features, labels from a
/// logistic model on `SCENARIO_END`, and features 3 and 9 replaced by
/// correlated copies of 5 and 10.
pub fn scenario_data(n: usize, seed: u64) -> DesignMatrix {
    let mut r = rng(seed);
    let p = 16;
    let mut cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| r.sample(StandardNormal)).collect()).collect();
    for (copy, source) in [(3, 5), (9, 10)] {
        cols[copy] = (0..n).map(|i| 0.6 * cols[source][i] + 0.8 * cols[copy][i]).collect();
    }
    let y = (0..n)
        .map(|i| {
            let f: f64 = SCENARIO_END.iter().map(|&j| cols[j][i]).sum();
            if r.random::<f64>() < 1.0 / (1.0 + (-f).exp()) {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    DesignMatrix::from_columns(cols, y, names(p)).unwrap()
}
