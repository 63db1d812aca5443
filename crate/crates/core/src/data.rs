//! Dense design matrices with `{-1, +1}` labels.

use std::collections::HashSet;

use crate::{Error, Result};

/// Observations by features, stored column-major, with labels in `{-1, +1}`.
///
/// Immutable after construction. `binary` is set when every entry is `-1` or
/// `+1`, which the exponential-loss engine requires.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    feature_names: Vec<String>,
    binary: bool,
    col_sq_norms: Vec<f64>,
}

/// Maps `{0, 1}` labels to `{-1, +1}`; `{-1, +1}` labels pass through.
pub fn normalize_labels(labels: &[f64]) -> Result<Vec<f64>> {
    if labels.iter().all(|&v| v == 1.0 || v == -1.0) {
        return Ok(labels.to_vec());
    }
    if labels.iter().all(|&v| v == 0.0 || v == 1.0) {
        return Ok(labels.iter().map(|&v| if v == 1.0 { 1.0 } else { -1.0 }).collect());
    }
    let bad = labels
        .iter()
        .find(|&&v| !(v == 1.0 || v == -1.0 || v == 0.0))
        .copied()
        .unwrap_or(f64::NAN);
    Err(Error::InvalidData(format!(
        "labels must be in {{-1, 1}} or {{0, 1}}, found {bad} (or a mix of 0 and -1)"
    )))
}

impl DesignMatrix {
    /// Builds a matrix from feature columns. Labels may be `{0,1}` or `{-1,+1}`.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        labels: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        let p = columns.len();
        if feature_names.len() != p {
            return Err(Error::Dimension { expected: p, got: feature_names.len() });
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate feature name `{name}`")));
            }
        }
        let y = normalize_labels(&labels)?;
        let mut x = Vec::with_capacity(n * p);
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(Error::Dimension { expected: n, got: col.len() });
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value {v} in feature `{}`",
                    feature_names[j]
                )));
            }
            x.extend(col);
        }
        Ok(Self::assemble(n, p, x, y, feature_names))
    }

    /// Builds a matrix from observation rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        let p = feature_names.len();
        if rows.len() != labels.len() {
            return Err(Error::Dimension { expected: labels.len(), got: rows.len() });
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for row in rows {
            if row.len() != p {
                return Err(Error::Dimension { expected: p, got: row.len() });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(columns, labels, feature_names)
    }

    fn assemble(n: usize, p: usize, x: Vec<f64>, y: Vec<f64>, feature_names: Vec<String>) -> Self {
        let binary = x.iter().all(|&v| v == 1.0 || v == -1.0);
        let col_sq_norms = x
            .chunks(n.max(1))
            .take(p)
            .map(|c| c.iter().map(|v| v * v).sum())
            .collect::<Vec<f64>>();
        let col_sq_norms = if n == 0 { vec![0.0; p] } else { col_sq_norms };
        Self { n, p, x, y, feature_names, binary, col_sq_norms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// True when every entry is in `{-1, +1}`.
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.x[j * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.value(i, j)).collect()
    }

    /// `sum_i x_ij^2`.
    pub fn col_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }

    /// Signed entry `z_ij = y_i * x_ij`.
    pub fn signed(&self, i: usize, j: usize) -> f64 {
        self.y[i] * self.value(i, j)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Keeps the rows in `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = (0..self.p)
            .map(|j| {
                let col = self.column(j);
                rows.iter().map(|&i| col[i]).collect()
            })
            .collect();
        let labels = rows.iter().map(|&i| self.y[i]).collect();
        Self::from_columns(columns, labels, self.feature_names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn zero_one_labels_are_remapped() {
        let d = DesignMatrix::from_columns(vec![vec![1.0, 2.0, 3.0]], vec![0.0, 1.0, 0.0], names(1))
            .unwrap();
        assert_eq!(d.labels(), &[-1.0, 1.0, -1.0]);
        assert!(!d.is_binary());
    }

    #[test]
    fn rejects_bad_labels_and_duplicate_names() {
        assert!(DesignMatrix::from_columns(vec![vec![1.0]], vec![2.0], names(1)).is_err());
        assert!(DesignMatrix::from_columns(vec![vec![1.0, 2.0]], vec![0.0, -1.0], names(1)).is_err());
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(DesignMatrix::from_columns(vec![vec![1.0], vec![1.0]], vec![1.0], dup).is_err());
        assert!(DesignMatrix::from_columns(vec![vec![f64::NAN]], vec![1.0], names(1)).is_err());
    }

    #[test]
    fn binary_flag_and_rows() {
        let rows = vec![vec![1.0, -1.0], vec![-1.0, -1.0], vec![1.0, 1.0]];
        let d = DesignMatrix::from_rows(&rows, vec![1.0, -1.0, 1.0], names(2)).unwrap();
        assert!(d.is_binary());
        assert_eq!(d.column(1), &[-1.0, -1.0, 1.0]);
        assert_eq!(d.row(1), vec![-1.0, -1.0]);
        assert_eq!(d.col_sq_norm(0), 3.0);
        assert_eq!(d.signed(1, 0), 1.0);
    }

    #[test]
    fn empty_observations_are_allowed() {
        let d = DesignMatrix::from_columns(vec![vec![], vec![]], vec![], names(2)).unwrap();
        assert_eq!(d.n(), 0);
        assert_eq!(d.col_sq_norm(1), 0.0);
    }
}
