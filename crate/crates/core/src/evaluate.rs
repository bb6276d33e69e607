//! Confusion matrices, per-class precision/recall/F1 and rater agreement.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Artifact, LabelClass};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvaluateError {
    #[error("label lists differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("nothing to evaluate")]
    Empty,
}

/// Rows are true classes, columns predicted, both in (positive, neutral,
/// negative) order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_rows(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn get(&self, truth: LabelClass, predicted: LabelClass) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn column_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    /// Misclassifications in either direction between two classes.
    pub fn confusions_between(&self, a: LabelClass, b: LabelClass) -> u64 {
        self.get(a, b) + self.get(b, a)
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for i in 0..3 {
            for j in 0..3 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{:>10}", "true\\pred");
        for c in LabelClass::ALL {
            let _ = write!(out, "{:>10}", c.as_str());
        }
        out.push('\n');
        for t in LabelClass::ALL {
            let _ = write!(out, "{:>10}", t.as_str());
            for p in LabelClass::ALL {
                let _ = write!(out, "{:>10}", self.get(t, p));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true,positive,neutral,negative\n");
        for t in LabelClass::ALL {
            let r = self.counts[t.index()];
            let _ = writeln!(out, "{},{},{},{}", t.as_str(), r[0], r[1], r[2]);
        }
        out
    }
}

pub fn confusion(predicted: &[LabelClass], truth: &[LabelClass]) -> Result<ConfusionMatrix, EvaluateError> {
    if predicted.len() != truth.len() {
        return Err(EvaluateError::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvaluateError::Empty);
    }
    let mut m = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        m.counts[t.index()][p.index()] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: LabelClass,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True-class count.
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub total: u64,
    /// Some ratio had an empty denominator and was reported as 0.
    pub zero_division: bool,
}

impl ClassificationReport {
    pub fn class(&self, c: LabelClass) -> &ClassMetrics {
        &self.classes[c.index()]
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{:>10}{:>11}{:>8}{:>10}{:>11}\n", "", "precision", "recall", "f1-score", "frequency");
        for m in &self.classes {
            let _ = writeln!(
                out,
                "{:>10}{:>11.2}{:>8.2}{:>10.2}{:>11}",
                m.class.as_str(),
                m.precision,
                m.recall,
                m.f1,
                m.frequency
            );
        }
        let _ = writeln!(out, "\n{:>10}{:>29.2}{:>11}", "accuracy", self.accuracy, self.total);
        if self.zero_division {
            out.push_str("note: some ratios had an empty denominator and are reported as 0\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1,frequency\n");
        for m in &self.classes {
            let _ = writeln!(out, "{},{},{},{},{}", m.class.as_str(), m.precision, m.recall, m.f1, m.frequency);
        }
        let _ = writeln!(out, "accuracy,,,{},{}", self.accuracy, self.total);
        out
    }
}

impl Artifact for ClassificationReport {
    const KIND: &'static str = "classification-report";

    fn check(&self) -> Result<(), String> {
        if self.classes.len() != 3 {
            return Err("expected three classes".into());
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.accuracy) || self.classes.iter().any(|m| !in_unit(m.precision) || !in_unit(m.recall) || !in_unit(m.f1)) {
            return Err("metrics must lie in [0, 1]".into());
        }
        if self.classes.iter().map(|m| m.frequency).sum::<u64>() != self.total {
            return Err("frequencies do not sum to the total".into());
        }
        Ok(())
    }
}

fn ratio(num: u64, den: u64, zero: &mut bool) -> f64 {
    if den == 0 {
        *zero = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn report(matrix: &ConfusionMatrix) -> Result<ClassificationReport, EvaluateError> {
    let total = matrix.total();
    if total == 0 {
        return Err(EvaluateError::Empty);
    }
    let mut zero_division = false;
    let classes = LabelClass::ALL
        .iter()
        .map(|&c| {
            let i = c.index();
            let tp = matrix.counts[i][i];
            let precision = ratio(tp, matrix.column_sum(i), &mut zero_division);
            let recall = ratio(tp, matrix.row_sum(i), &mut zero_division);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                class: c,
                precision,
                recall,
                f1,
                frequency: matrix.row_sum(i),
            }
        })
        .collect();
    Ok(ClassificationReport {
        classes,
        accuracy: matrix.trace() as f64 / total as f64,
        total,
        zero_division,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub raw: f64,
    /// Absent when chance agreement is 1.
    pub kappa: Option<f64>,
    pub matches: usize,
    pub total: usize,
}

/// Position-aligned raw agreement and Cohen's kappa.
pub fn agreement(a: &[LabelClass], b: &[LabelClass]) -> Result<Agreement, EvaluateError> {
    if a.len() != b.len() {
        return Err(EvaluateError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(EvaluateError::Empty);
    }
    let n = a.len() as f64;
    let matches = a.iter().zip(b).filter(|(x, y)| x == y).count();
    let raw = matches as f64 / n;
    let chance: f64 = LabelClass::ALL
        .iter()
        .map(|c| {
            let pa = a.iter().filter(|x| *x == c).count() as f64 / n;
            let pb = b.iter().filter(|x| *x == c).count() as f64 / n;
            pa * pb
        })
        .sum();
    let kappa = (chance < 1.0).then(|| (raw - chance) / (1.0 - chance));
    Ok(Agreement {
        raw,
        kappa,
        matches,
        total: a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use LabelClass::*;

    #[test]
    fn identity_is_diagonal() {
        let truth: Vec<LabelClass> = (0..10).map(|i| LabelClass::ALL[i % 3]).collect();
        let m = confusion(&truth, &truth).unwrap();
        assert_eq!(m.trace(), 10);
        let r = report(&m).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert!(r.classes.iter().all(|c| c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0));
    }

    #[test]
    fn single_cell() {
        let m = confusion(&[Negative], &[Neutral]).unwrap();
        assert_eq!(m.get(Neutral, Negative), 1);
        assert_eq!(m.total(), 1);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            confusion(&[Neutral], &[]),
            Err(EvaluateError::LengthMismatch { left: 1, right: 0 })
        );
        assert!(agreement(&[Neutral], &[Neutral, Neutral]).is_err());
    }

    #[test]
    fn empty_column_reports_zero() {
        let m = ConfusionMatrix::from_rows([[0, 2, 0], [0, 3, 0], [0, 0, 0]]);
        let r = report(&m).unwrap();
        assert!(r.zero_division);
        assert_eq!(r.class(Positive).precision, 0.0);
        assert_eq!(r.class(Negative).f1, 0.0);
    }

    #[test]
    fn kappa_constant_rater() {
        let a: Vec<LabelClass> = (0..30).map(|i| LabelClass::ALL[i % 3]).collect();
        let b = vec![Neutral; 30];
        // raw = 1/3, chance = 1/3 * 1 → kappa 0.
        let g = agreement(&a, &b).unwrap();
        assert!(g.kappa.unwrap().abs() < 1e-15);
        let same = agreement(&b, &b).unwrap();
        assert_eq!((same.raw, same.kappa), (1.0, None));
    }

    #[test]
    fn renderings() {
        let m = ConfusionMatrix::from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 2]]);
        let r = report(&m).unwrap();
        assert!(r.render_text().contains("accuracy"));
        assert_eq!(r.to_csv().lines().count(), 5);
        assert_eq!(m.to_csv().lines().nth(3), Some("negative,0,0,2"));
        assert!(m.render_text().contains("positive"));
    }
}
