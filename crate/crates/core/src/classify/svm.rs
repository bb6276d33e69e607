use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{resolve_scores, ClassifyError, Result, Row, SvmParams};
use crate::corpus::LabelClass;
use crate::seed::rng;

pub fn hinge_loss(y: f64, margin: f64) -> f64 {
    (1.0 - y * margin).max(0.0)
}

/// Binary classifier of one class against the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLinear {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl BinaryLinear {
    pub fn margin(&self, row: &Row) -> f64 {
        let dense: f64 = row.dense.iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        let offset = row.dense.len();
        let sparse: f64 = row
            .sparse
            .iter()
            .filter_map(|&(i, x)| self.weights.get(offset + i).map(|w| w * x))
            .sum();
        dense + sparse + self.bias
    }
}

/// One-vs-rest linear SVM. Classes absent from training have no model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    /// Indexed by `LabelClass::index()`.
    pub classes: [Option<BinaryLinear>; 3],
}

impl LinearSvm {
    pub fn margins(&self, row: &Row) -> [Option<f64>; 3] {
        [0, 1, 2].map(|c| self.classes[c].as_ref().map(|m| m.margin(row)))
    }

    pub fn predict(&self, row: &Row) -> LabelClass {
        resolve_scores(self.margins(row))
    }
}

/// Weights kept as `scale * v` so the L2 shrink of every step is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    bias: f64,
}

impl ScaledWeights {
    fn margin(&self, row: &Row) -> f64 {
        let offset = row.dense.len();
        let dot: f64 = row.dense.iter().zip(&self.v).map(|(x, w)| x * w).sum::<f64>()
            + row.sparse.iter().map(|&(i, x)| self.v[offset + i] * x).sum::<f64>();
        self.scale * dot + self.bias
    }

    fn add(&mut self, row: &Row, step: f64) {
        let k = step / self.scale;
        let offset = row.dense.len();
        for (w, x) in self.v.iter_mut().zip(&row.dense) {
            *w += k * x;
        }
        for &(i, x) in &row.sparse {
            self.v[offset + i] += k * x;
        }
    }

    fn finish(self) -> BinaryLinear {
        BinaryLinear {
            weights: self.v.into_iter().map(|w| w * self.scale).collect(),
            bias: self.bias,
        }
    }
}

/// Stochastic subgradient descent on `λ/2 ||w||² + hinge`, step size
/// `learning_rate / (1 + epoch)`, one shuffle per epoch shared by all
/// binary problems.
pub fn train_svm(rows: &[Row], labels: &[LabelClass], n_features: usize, params: &SvmParams, seed: u64) -> Result<LinearSvm> {
    if rows.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    if rows.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let mut present = [false; 3];
    for l in labels {
        present[l.index()] = true;
    }
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(ClassifyError::SingleClass(labels[0]));
    }

    let mut models: Vec<Option<ScaledWeights>> = present
        .iter()
        .map(|&p| {
            p.then(|| ScaledWeights {
                v: vec![0.0; n_features],
                scale: 1.0,
                bias: 0.0,
            })
        })
        .collect();
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for epoch in 0..params.epochs {
        order.shuffle(&mut r);
        let lr = params.learning_rate / (1.0 + epoch as f64);
        let shrink = 1.0 - lr * params.l2_lambda;
        for &s in &order {
            let row = &rows[s];
            for (c, model) in models.iter_mut().enumerate() {
                let Some(m) = model else { continue };
                let y = if labels[s].index() == c { 1.0 } else { -1.0 };
                let margin = m.margin(row);
                m.scale *= shrink;
                if y * margin < 1.0 {
                    m.add(row, lr * y);
                    m.bias += lr * y;
                }
                if m.scale < 1e-9 {
                    for w in &mut m.v {
                        *w *= m.scale;
                    }
                    m.scale = 1.0;
                }
            }
        }
    }
    let mut classes = [None, None, None];
    for (c, m) in models.into_iter().enumerate() {
        classes[c] = m.map(ScaledWeights::finish);
    }
    Ok(LinearSvm { classes })
}
