//! Model files: additive scorecards over threshold indicators and plain sparse
//! linear models, stored as JSON with 17 significant digits per number.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binarize::{Direction, Encoding, ThresholdMap};
use crate::{probability_from_score, Error, HyperParams, Loss, ModelState, Result};

/// One weighted indicator `weight * enc(1[feature op threshold])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub feature: String,
    pub op: Direction,
    pub threshold: f64,
    pub weight: f64,
}

/// Sparse additive model over raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorecard {
    pub loss: Loss,
    pub lambda0: f64,
    pub lambda2: f64,
    pub intercept: f64,
    /// How an indicator enters the score.
    pub encoding: Encoding,
    /// Grouped by source feature, thresholds ascending within a group.
    pub terms: Vec<Term>,
}

/// Sparse linear model over raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub loss: Loss,
    pub lambda0: f64,
    pub lambda2: f64,
    pub intercept: f64,
    /// Nonzero coefficients only.
    pub coefficients: Vec<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub feature: String,
    pub weight: f64,
}

/// Anything the CLI can write and read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Scorecard(Scorecard),
    Linear(LinearModel),
}

/// Scorecard for a state fitted on the columns produced by `map`.
///
/// `names` are the fitted matrix's feature names and must match the map's
/// generated column names.
pub fn export_scorecard(
    state: &ModelState,
    map: &ThresholdMap,
    names: &[String],
    hp: &HyperParams,
) -> Result<Scorecard> {
    let expected = map.column_names();
    if names.len() != expected.len() || state.coefficients().len() != expected.len() {
        return Err(Error::Dimension { expected: expected.len(), got: state.coefficients().len() });
    }
    if let Some((got, want)) = names.iter().zip(&expected).find(|(a, b)| a != b) {
        return Err(Error::InvalidData(format!("column `{got}` does not match map column `{want}`")));
    }
    let mut terms = Vec::new();
    for f in &map.features {
        for (&t, &c) in f.thresholds.iter().zip(&f.columns) {
            let weight = state.coef(c);
            if weight != 0.0 {
                terms.push(Term { feature: f.feature.clone(), op: map.direction, threshold: t, weight });
            }
        }
    }
    Ok(Scorecard {
        loss: hp.loss,
        lambda0: hp.lambda0,
        lambda2: hp.lambda2,
        intercept: state.intercept(),
        encoding: map.encoding,
        terms,
    })
}

/// Linear model file for a state fitted on features named `names`.
pub fn export_linear(state: &ModelState, names: &[String], hp: &HyperParams) -> Result<LinearModel> {
    if names.len() != state.coefficients().len() {
        return Err(Error::Dimension { expected: state.coefficients().len(), got: names.len() });
    }
    let coefficients = state
        .support()
        .iter()
        .map(|&j| Coefficient { feature: names[j].clone(), weight: state.coef(j) })
        .collect();
    Ok(LinearModel {
        loss: hp.loss,
        lambda0: hp.lambda0,
        lambda2: hp.lambda2,
        intercept: state.intercept(),
        coefficients,
    })
}

impl ModelFile {
    pub fn loss(&self) -> Loss {
        match self {
            ModelFile::Scorecard(s) => s.loss,
            ModelFile::Linear(m) => m.loss,
        }
    }

    pub fn intercept(&self) -> f64 {
        match self {
            ModelFile::Scorecard(s) => s.intercept,
            ModelFile::Linear(m) => m.intercept,
        }
    }

    /// Number of nonzero terms.
    pub fn size(&self) -> usize {
        match self {
            ModelFile::Scorecard(s) => s.terms.len(),
            ModelFile::Linear(m) => m.coefficients.len(),
        }
    }

    /// Resolves feature names against the columns of a raw data table.
    pub fn bind(&self, columns: &[String]) -> Result<BoundModel> {
        let index = |name: &str| {
            columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::InvalidData(format!("model feature `{name}` not found in data")))
        };
        let mut terms = Vec::new();
        match self {
            ModelFile::Scorecard(s) => {
                for t in &s.terms {
                    terms.push(BoundTerm::Indicator {
                        column: index(&t.feature)?,
                        op: t.op,
                        threshold: t.threshold,
                        encoding: s.encoding,
                        weight: t.weight,
                    });
                }
            }
            ModelFile::Linear(m) => {
                for c in &m.coefficients {
                    terms.push(BoundTerm::Linear { column: index(&c.feature)?, weight: c.weight });
                }
            }
        }
        Ok(BoundModel { loss: self.loss(), intercept: self.intercept(), width: columns.len(), terms })
    }

    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut out = String::new();
        write_value(&value, 0, &mut out);
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BoundTerm {
    Indicator { column: usize, op: Direction, threshold: f64, encoding: Encoding, weight: f64 },
    Linear { column: usize, weight: f64 },
}

/// A model whose features are resolved to column positions of a raw table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundModel {
    loss: Loss,
    intercept: f64,
    width: usize,
    terms: Vec<BoundTerm>,
}

impl BoundModel {
    pub fn loss(&self) -> Loss {
        self.loss
    }

    /// Raw score `f(x)`.
    pub fn score(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.width {
            return Err(Error::Dimension { expected: self.width, got: row.len() });
        }
        let mut f = self.intercept;
        for term in &self.terms {
            f += match *term {
                BoundTerm::Indicator { column, op, threshold, encoding, weight } => {
                    weight * encoding.encode(op.holds(row[column], threshold))
                }
                BoundTerm::Linear { column, weight } => weight * row[column],
            };
        }
        Ok(f)
    }

    /// `P(y = 1 | x)` under the model's loss.
    pub fn probability(&self, row: &[f64]) -> Result<f64> {
        Ok(probability_from_score(self.score(row)?, self.loss))
    }
}

/// Renders a float with 17 significant digits; integers-valued floats keep a
/// decimal point so they parse back as floats.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s
        } else {
            format!("{s}.0")
        }
    } else {
        format!("{v:.16e}")
    }
}

fn write_value(value: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => out.push_str(&i.to_string()),
            (_, Some(u), _) => out.push_str(&u.to_string()),
            (_, _, Some(f)) => out.push_str(&format_number(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::binarize;
    use crate::DesignMatrix;

    fn toy() -> (DesignMatrix, DesignMatrix, ThresholdMap) {
        let cols = vec![vec![3.0, 1.0, 3.0, 7.0], vec![0.5, 0.25, 0.5, 0.75]];
        let raw = DesignMatrix::from_columns(cols, vec![1.0, -1.0, 1.0, -1.0], vec!["A".into(), "B".into()])
            .unwrap();
        let (bin, map) = binarize(&raw, Direction::AtMost, Encoding::ZeroOne, None).unwrap();
        (raw, bin, map)
    }

    #[test]
    fn empty_model_exports_intercept_only() {
        let (_, bin, map) = toy();
        let state = ModelState::from_coefficients(&bin, vec![0.0; bin.p()], -0.25).unwrap();
        let card = export_scorecard(&state, &map, bin.feature_names(), &HyperParams::logistic(1.0, 0.0)).unwrap();
        assert!(card.terms.is_empty());
        assert_eq!(card.intercept, -0.25);
    }

    #[test]
    fn terms_grouped_by_feature() {
        let (_, bin, map) = toy();
        let mut w = vec![0.0; bin.p()];
        w[0] = 0.5;
        w[1] = -1.5;
        w[4] = 2.0;
        let state = ModelState::from_coefficients(&bin, w, 0.1).unwrap();
        let card = export_scorecard(&state, &map, bin.feature_names(), &HyperParams::logistic(1.0, 0.0)).unwrap();
        let a: Vec<&Term> = card.terms.iter().filter(|t| t.feature == "A").collect();
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].threshold, a[0].weight), (1.0, 0.5));
        assert_eq!((a[1].threshold, a[1].weight), (3.0, -1.5));
        assert_eq!(card.terms[2].feature, "B");
    }

    #[test]
    fn scorecard_matches_linear_model_on_binarized_rows() {
        let (raw, bin, map) = toy();
        let w: Vec<f64> = (0..bin.p()).map(|j| 0.3 * j as f64 - 0.4).collect();
        let state = ModelState::from_coefficients(&bin, w, 0.7).unwrap();
        let card = export_scorecard(&state, &map, bin.feature_names(), &HyperParams::logistic(1.0, 0.0)).unwrap();
        let bound = ModelFile::Scorecard(card).bind(raw.feature_names()).unwrap();
        for i in 0..raw.n() {
            let direct = state.score(&bin.row(i)).unwrap();
            assert!((bound.score(&raw.row(i)).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_names_rejected() {
        let (_, bin, map) = toy();
        let state = ModelState::zeros(&bin);
        let mut names = bin.feature_names().to_vec();
        names.swap(0, 1);
        assert!(export_scorecard(&state, &map, &names, &HyperParams::logistic(1.0, 0.0)).is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, -0.2584626, 1.0, 1e-7, 123456789.125, 1e300, -3.0e-300, std::f64::consts::PI] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(0.1), "0.10000000000000001");
        assert_eq!(format_number(2.0), "2.0000000000000000");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let card = Scorecard {
            loss: Loss::Exponential,
            lambda0: 5.0,
            lambda2: 0.0,
            intercept: -0.2584626,
            encoding: Encoding::PlusMinusOne,
            terms: vec![Term { feature: "A \"q\"".into(), op: Direction::AtMost, threshold: 63.0, weight: 0.1825955 }],
        };
        let file = ModelFile::Scorecard(card);
        let text = file.to_json().unwrap();
        assert!(text.contains("\"op\": \"<=\""));
        assert_eq!(ModelFile::from_json(&text).unwrap(), file);
    }
}
