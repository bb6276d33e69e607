use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Pearson r between dense metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Metrics with zero variance; their r is 0 against everything.
    pub constant: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Single-pass co-moment accumulation over samples (rows) of equal width.
pub fn correlation_matrix(names: &[String], rows: &[Vec<f64>]) -> Result<CorrelationMatrix, FeatureError> {
    if rows.len() < 2 {
        return Err(FeatureError::TooFewSamples(rows.len()));
    }
    let d = names.len();
    for (index, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(FeatureError::RaggedRows {
                index,
                found: row.len(),
                expected: d,
            });
        }
        if let Some((j, &v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FeatureError::NonFinite {
                name: names[j].clone(),
                value: v,
            });
        }
    }

    let mut mean = vec![0.0; d];
    let mut comoment = vec![vec![0.0; d]; d];
    let mut delta = vec![0.0; d];
    for (k, row) in rows.iter().enumerate() {
        let n = (k + 1) as f64;
        for j in 0..d {
            delta[j] = row[j] - mean[j];
            mean[j] += delta[j] / n;
        }
        for i in 0..d {
            for j in i..d {
                comoment[i][j] += delta[i] * (row[j] - mean[j]);
            }
        }
    }

    let constant: Vec<bool> = (0..d)
        .map(|j| rows.iter().all(|r| r[j] == rows[0][j]))
        .collect();
    let mut values = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let r = if constant[i] || constant[j] {
                0.0
            } else if i == j {
                1.0
            } else {
                let denom = (comoment[i][i] * comoment[j][j]).sqrt();
                if denom > 0.0 {
                    (comoment[i][j] / denom).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: names.to_vec(),
        values,
        constant,
    })
}

/// Pearson r of two columns.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, FeatureError> {
    let names = vec!["x".to_string(), "y".to_string()];
    let rows: Vec<Vec<f64>> = x.iter().zip(y).map(|(&a, &b)| vec![a, b]).collect();
    Ok(correlation_matrix(&names, &rows)?.values[0][1])
}

/// Greedy pass in schema order: a metric is kept unless its |r| with an
/// already kept metric exceeds `threshold`.
pub fn prune_correlated(matrix: &CorrelationMatrix, threshold: f64) -> Vec<String> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..matrix.names.len() {
        if kept.iter().all(|&j| matrix.values[i][j].abs() <= threshold) {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| matrix.names[i].clone()).collect()
}
