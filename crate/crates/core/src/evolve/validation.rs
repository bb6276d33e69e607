use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{EvolveError, Result};
use crate::classify::{train_ensemble, EnsembleModel, Hyperparameters};
use crate::corpus::{Artifact, LabelClass};
use crate::evaluate::{confusion, ConfusionMatrix};
use crate::features::LabeledSample;
use crate::seed::{derive_seed, rng};

/// Index sets of a stratified split, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class test counts by largest remainder on `n_c * fraction`, with the
/// total fixed at `round(n * fraction)` and every class keeping at least
/// one training sample.
fn allocate(counts: [usize; 3], fraction: f64) -> [usize; 3] {
    let n: usize = counts.iter().sum();
    let cap = counts.map(|c| c.saturating_sub(1));
    let target = ((n as f64 * fraction).round() as usize).clamp(1, cap.iter().sum::<usize>().max(1));
    let ideal = counts.map(|c| c as f64 * fraction);
    let mut alloc = [0; 3];
    for c in 0..3 {
        alloc[c] = (ideal[c].floor() as usize).min(cap[c]);
    }
    while alloc.iter().sum::<usize>() < target {
        let open = (0..3).filter(|&c| alloc[c] < cap[c]);
        let Some(c) = open.max_by(|&a, &b| (ideal[a] - alloc[a] as f64).total_cmp(&(ideal[b] - alloc[b] as f64)).then(b.cmp(&a)))
        else {
            break;
        };
        alloc[c] += 1;
    }
    alloc
}

pub fn stratified_split(labels: &[LabelClass], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvolveError::Config(format!("test fraction {test_fraction} must be in (0, 1)")));
    }
    if labels.is_empty() {
        return Err(EvolveError::Split("no samples to split".into()));
    }
    let mut members: [Vec<usize>; 3] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        members[l.index()].push(i);
    }
    let alloc = allocate(members.each_ref().map(Vec::len), test_fraction);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (c, idx) in members.iter_mut().enumerate() {
        idx.shuffle(&mut rng(derive_seed(seed, c as u64)));
        split.test.extend_from_slice(&idx[..alloc[c]]);
        split.train.extend_from_slice(&idx[alloc[c]..]);
    }
    if split.test.is_empty() || split.train.is_empty() {
        return Err(EvolveError::Split(format!(
            "a {test_fraction} split of {} samples leaves an empty side",
            labels.len()
        )));
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub stddev: f64,
    /// Summed over all repeats.
    pub confusion: ConfusionMatrix,
    pub test_fraction: f64,
    pub seed: u64,
}

impl CrossValidation {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("repeat,accuracy\n");
        for (i, a) in self.accuracies.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, a));
        }
        out.push_str(&format!("mean,{}\nstddev,{}\n", self.mean, self.stddev));
        out
    }
}

impl Artifact for CrossValidation {
    const KIND: &'static str = "cross-validation";

    fn check(&self) -> std::result::Result<(), String> {
        if self.accuracies.is_empty() {
            return Err("no repeats recorded".into());
        }
        Ok(())
    }
}

pub fn mean_and_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stddev = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, stddev)
}

/// Trains on the train side of a split and scores the test side.
pub fn train_and_test(
    hp: &Hyperparameters,
    data: &[LabeledSample],
    split: &Split,
    seed: u64,
) -> Result<(EnsembleModel, ConfusionMatrix)> {
    let train: Vec<LabeledSample> = split.train.iter().map(|&i| data[i].clone()).collect();
    let model = train_ensemble(&train, hp, seed)?;
    let mut predicted = Vec::with_capacity(split.test.len());
    for &i in &split.test {
        predicted.push(model.predict(&data[i].features)?.label);
    }
    let truth: Vec<LabelClass> = split.test.iter().map(|&i| data[i].label).collect();
    Ok((model, confusion(&predicted, &truth)?))
}

/// `repeats` independent stratified splits, each with a full retrain.
/// Repeat `r` splits with `derive_seed(seed, r)`.
pub fn cross_validate(
    hp: &Hyperparameters,
    data: &[LabeledSample],
    repeats: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<CrossValidation> {
    if repeats == 0 {
        return Err(EvolveError::Config("repeats must be at least 1".into()));
    }
    let labels: Vec<LabelClass> = data.iter().map(|s| s.label).collect();
    let mut accuracies = Vec::with_capacity(repeats);
    let mut total = ConfusionMatrix::default();
    for r in 0..repeats {
        let split_seed = derive_seed(seed, r as u64);
        let split = stratified_split(&labels, test_fraction, split_seed)?;
        let (_, m) = train_and_test(hp, data, &split, derive_seed(split_seed, u64::MAX))?;
        accuracies.push(m.trace() as f64 / m.total() as f64);
        total.merge(&m);
    }
    let (mean, stddev) = mean_and_stddev(&accuracies);
    Ok(CrossValidation {
        accuracies,
        mean,
        stddev,
        confusion: total,
        test_fraction,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use LabelClass::*;

    fn labels(p: usize, u: usize, n: usize) -> Vec<LabelClass> {
        let mut v = vec![Positive; p];
        v.extend(vec![Neutral; u]);
        v.extend(vec![Negative; n]);
        v
    }

    fn test_counts(l: &[LabelClass], s: &Split) -> [usize; 3] {
        let mut c = [0; 3];
        for &i in &s.test {
            c[l[i].index()] += 1;
        }
        c
    }

    #[test]
    fn proportional_allocation() {
        let l = labels(50, 30, 20);
        let s = stratified_split(&l, 0.1, 7).unwrap();
        assert_eq!(test_counts(&l, &s), [5, 3, 2]);
        assert_eq!(s, stratified_split(&l, 0.1, 7).unwrap());
        assert_ne!(s, stratified_split(&l, 0.1, 8).unwrap());
    }

    #[test]
    fn two_samples_half() {
        let l = vec![Neutral, Neutral];
        let s = stratified_split(&l, 0.5, 0).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 1));
    }

    #[test]
    fn single_sample_cannot_split() {
        assert!(matches!(stratified_split(&[Positive], 0.5, 0), Err(EvolveError::Split(_))));
        assert!(matches!(stratified_split(&[Positive, Neutral], 1.0, 0), Err(EvolveError::Config(_))));
    }

    #[test]
    fn remainders_stay_within_one() {
        let l = labels(7, 11, 4);
        for seed in 0..5 {
            let s = stratified_split(&l, 0.3, seed).unwrap();
            let c = test_counts(&l, &s);
            for (k, &n) in [7usize, 11, 4].iter().enumerate() {
                assert!((c[k] as f64 - n as f64 * 0.3).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn stddev_of_constant_is_zero() {
        assert_eq!(mean_and_stddev(&[0.5, 0.5, 0.5]), (0.5, 0.0));
        let (m, s) = mean_and_stddev(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
