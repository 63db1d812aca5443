//! AUC, accuracy and support-recovery F1.

use std::collections::BTreeSet;

use crate::{Error, Result};

fn check_lengths(scores: &[f64], labels: &[f64]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension { expected: labels.len(), got: scores.len() });
    }
    Ok(())
}

/// Area under the ROC curve: the fraction of (positive, negative) pairs whose
/// scores are correctly ordered, ties counting one half.
///
/// Runs in `O(n log n)` by sorting and crediting each group of tied scores at once.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_lengths(scores, labels)?;
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::InvalidData(format!("score {s} cannot be ranked")));
    }
    let positives = labels.iter().filter(|&&y| y > 0.0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidData("AUC needs both positive and negative labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the number of correctly ordered pairs, to keep the tie credit integral
    let mut doubled: u128 = 0;
    let mut negatives_below: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let (mut pos, mut neg) = (0u128, 0u128);
        for &i in &order[start..end] {
            if labels[i] > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        doubled += pos * (2 * negatives_below + neg);
        negatives_below += neg;
        start = end;
    }
    Ok(doubled as f64 / (2.0 * positives as f64 * negatives as f64))
}

/// Fraction of observations with `sign(score - threshold) == label`, where
/// `sign(0) = +1`.
pub fn accuracy(scores: &[f64], labels: &[f64], threshold: f64) -> Result<f64> {
    check_lengths(scores, labels)?;
    if scores.is_empty() {
        return Err(Error::InvalidData("accuracy of an empty sample".into()));
    }
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| {
            let predicted = if s - threshold >= 0.0 { 1.0 } else { -1.0 };
            predicted == y
        })
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// Precision, recall and F1 of an estimated support against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportComparison {
    pub estimated: BTreeSet<usize>,
    pub truth: BTreeSet<usize>,
    /// 0 for an empty estimate.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SupportComparison {
    pub fn new(estimated: BTreeSet<usize>, truth: BTreeSet<usize>) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::InvalidData("the true support must not be empty".into()));
        }
        let hits = estimated.intersection(&truth).count() as f64;
        let precision = if estimated.is_empty() { 0.0 } else { hits / estimated.len() as f64 };
        let recall = hits / truth.len() as f64;
        let f1 = if hits == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Ok(Self { estimated, truth, precision, recall, f1 })
    }
}

/// Harmonic mean of support precision and recall.
pub fn recovery_f1(estimated: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> Result<f64> {
    Ok(SupportComparison::new(estimated.clone(), truth.clone())?.f1)
}
