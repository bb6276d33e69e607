use serde::{Deserialize, Serialize};

use super::{resolve_scores, ClassifyError, NbParams, Result};
use crate::corpus::LabelClass;

/// Per-class Gaussian statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub log_prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Indexed by `LabelClass::index()`; absent classes are `None`.
    pub classes: [Option<ClassGaussian>; 3],
    pub epsilon: f64,
}

/// Floor for the smoothing term when every feature is constant.
const MIN_EPSILON: f64 = 1e-12;

fn population_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

impl GaussianNb {
    pub fn log_posteriors(&self, x: &[f64]) -> [Option<f64>; 3] {
        [0, 1, 2].map(|c| {
            self.classes[c].as_ref().map(|g| {
                let ll: f64 = x
                    .iter()
                    .zip(g.means.iter().zip(&g.variances))
                    .map(|(v, (m, var))| -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (v - m).powi(2) / (2.0 * var))
                    .sum();
                g.log_prior + ll
            })
        })
    }

    pub fn predict(&self, x: &[f64]) -> LabelClass {
        resolve_scores(self.log_posteriors(x))
    }
}

/// Priors are class frequencies; every variance is widened by
/// `variance_smoothing * max_j var(x_j)`.
pub fn train_nb(rows: &[Vec<f64>], labels: &[LabelClass], params: &NbParams) -> Result<GaussianNb> {
    if rows.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    if rows.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let d = rows[0].len();
    let max_var = (0..d)
        .map(|j| population_variance(rows.iter().map(move |r| r[j])))
        .fold(0.0, f64::max);
    let epsilon = (params.variance_smoothing * max_var).max(MIN_EPSILON);
    let n = rows.len() as f64;
    let classes = LabelClass::ALL.map(|c| {
        let members: Vec<&Vec<f64>> = rows.iter().zip(labels).filter(|(_, l)| **l == c).map(|(r, _)| r).collect();
        if members.is_empty() {
            return None;
        }
        let means = (0..d)
            .map(|j| members.iter().map(|r| r[j]).sum::<f64>() / members.len() as f64)
            .collect();
        let variances = (0..d)
            .map(|j| population_variance(members.iter().map(move |r| r[j])) + epsilon)
            .collect();
        Some(ClassGaussian {
            log_prior: (members.len() as f64 / n).ln(),
            means,
            variances,
        })
    });
    Ok(GaussianNb { classes, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use LabelClass::*;

    fn smoothing(v: f64) -> NbParams {
        NbParams { variance_smoothing: v }
    }

    #[test]
    fn one_dimensional_example() {
        let rows = vec![vec![1.0], vec![3.0], vec![10.0], vec![12.0]];
        let model = train_nb(&rows, &[Positive, Positive, Negative, Negative], &smoothing(1e-9)).unwrap();
        assert_eq!(model.predict(&[2.5]), Positive);
        // Closed form: equal priors and variances, so the nearer mean wins.
        let g = model.classes[0].as_ref().unwrap();
        assert_eq!(g.means, [2.0]);
        assert!((g.variances[0] - (1.0 + 1e-9 * 21.25)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_tie_goes_neutral() {
        let rows = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
        let model = train_nb(&rows, &[Positive, Positive, Negative, Negative], &smoothing(1e-9)).unwrap();
        let post = model.log_posteriors(&[0.0]);
        assert_eq!(post[0], post[2]);
        assert_eq!(model.predict(&[0.0]), Neutral);
    }

    #[test]
    fn prior_dominates_identical_likelihoods() {
        let mut rows = vec![vec![0.0], vec![1.0]];
        let mut labels = vec![Negative, Negative];
        for _ in 0..9 {
            rows.extend([vec![0.0], vec![1.0]]);
            labels.extend([Positive, Positive]);
        }
        let model = train_nb(&rows, &labels, &smoothing(1e-9)).unwrap();
        assert_eq!(model.predict(&[0.5]), Positive);
    }

    #[test]
    fn constant_features_stay_finite() {
        let rows = vec![vec![1.0], vec![1.0]];
        let model = train_nb(&rows, &[Positive, Negative], &smoothing(1e-9)).unwrap();
        assert!(model.log_posteriors(&[2.0]).iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(train_nb(&[], &[], &smoothing(1e-9)), Err(ClassifyError::EmptyData)));
    }
}
