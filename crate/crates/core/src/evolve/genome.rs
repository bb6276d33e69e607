use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{FeatureParams, ForestParams, Hyperparameters, NbParams, SvmParams};
use crate::seed::fnv1a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneSpec {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub scale: Scale,
    pub integer: bool,
}

const fn gene(name: &'static str, min: f64, max: f64, scale: Scale, integer: bool) -> GeneSpec {
    GeneSpec {
        name,
        min,
        max,
        scale,
        integer,
    }
}

/// One gene per hyperparameter, in `Hyperparameters` field order.
pub const GENES: [GeneSpec; 12] = [
    gene("forest.n_trees", 5.0, 200.0, Scale::Log, true),
    gene("forest.max_depth", 2.0, 20.0, Scale::Linear, true),
    gene("forest.min_leaf", 1.0, 10.0, Scale::Linear, true),
    gene("forest.feature_subsample_fraction", 0.05, 1.0, Scale::Linear, false),
    gene("svm.l2_lambda", 1e-5, 1e-1, Scale::Log, false),
    gene("svm.epochs", 5.0, 50.0, Scale::Linear, true),
    gene("svm.learning_rate", 1e-3, 1.0, Scale::Log, false),
    gene("nb.variance_smoothing", 1e-9, 1e-1, Scale::Log, false),
    gene("features.ngram_max", 1.0, 2.0, Scale::Linear, true),
    gene("features.tfidf_enabled", 0.0, 1.0, Scale::Linear, true),
    gene("features.vocab_cap", 16.0, 2048.0, Scale::Log, true),
    gene("features.prune_threshold", 0.5, 1.0, Scale::Linear, false),
];

impl GeneSpec {
    /// Uniform draw on the gene's scale, rounded for integer genes.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let raw = match self.scale {
            Scale::Linear => rng.gen_range(self.min..=self.max),
            Scale::Log => rng.gen_range(self.min.ln()..=self.max.ln()).exp(),
        };
        self.clamp(raw)
    }

    pub fn clamp(&self, value: f64) -> f64 {
        let v = if self.integer { value.round() } else { value };
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.min..=self.max).contains(&value) && (!self.integer || value.fract() == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome {
    pub values: Vec<f64>,
}

impl Genome {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Genome {
            values: GENES.iter().map(|g| g.sample(rng)).collect(),
        }
    }

    pub fn from_hyperparameters(hp: &Hyperparameters) -> Self {
        let values = [
            hp.forest.n_trees as f64,
            hp.forest.max_depth as f64,
            hp.forest.min_leaf as f64,
            hp.forest.feature_fraction,
            hp.svm.l2_lambda,
            hp.svm.epochs as f64,
            hp.svm.learning_rate,
            hp.nb.variance_smoothing,
            hp.features.ngram_max as f64,
            if hp.features.tfidf_enabled { 1.0 } else { 0.0 },
            hp.features.vocab_cap as f64,
            hp.features.prune_threshold,
        ];
        Genome {
            values: values.iter().zip(&GENES).map(|(v, g)| g.clamp(*v)).collect(),
        }
    }

    pub fn to_hyperparameters(&self) -> Hyperparameters {
        let v = &self.values;
        let int = |i: usize| v[i].round() as usize;
        Hyperparameters {
            forest: ForestParams {
                n_trees: int(0),
                max_depth: int(1),
                min_leaf: int(2),
                feature_fraction: v[3],
            },
            svm: SvmParams {
                l2_lambda: v[4],
                epochs: int(5),
                learning_rate: v[6],
            },
            nb: NbParams {
                variance_smoothing: v[7],
            },
            features: FeatureParams {
                ngram_max: int(8),
                tfidf_enabled: v[9] >= 0.5,
                vocab_cap: int(10),
                prune_threshold: v[11],
            },
        }
    }

    pub fn in_range(&self) -> bool {
        self.values.len() == GENES.len() && self.values.iter().zip(&GENES).all(|(v, g)| g.contains(*v))
    }

    /// Stable across runs and platforms: hashes the bit patterns.
    pub fn hash(&self) -> u64 {
        fnv1a(self.values.iter().flat_map(|v| v.to_bits().to_le_bytes()))
    }

    pub fn key(&self) -> Vec<u64> {
        self.values.iter().map(|v| v.to_bits()).collect()
    }

    /// Gene-name map, for human-readable exports.
    pub fn named(&self) -> BTreeMap<&'static str, f64> {
        GENES.iter().map(|g| g.name).zip(self.values.iter().copied()).collect()
    }

    /// Each gene comes from `other` with probability `rate`.
    pub fn crossover<R: Rng>(&self, other: &Genome, rate: f64, rng: &mut R) -> Genome {
        Genome {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| if rng.gen_bool(rate) { *b } else { *a })
                .collect(),
        }
    }

    /// Each gene is redrawn uniformly on its scale with probability `rate`.
    pub fn mutate<R: Rng>(&mut self, rate: f64, rng: &mut R) {
        for (v, g) in self.values.iter_mut().zip(&GENES) {
            if rng.gen_bool(rate) {
                *v = g.sample(rng);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;

    #[test]
    fn default_hyperparameters_roundtrip() {
        let hp = Hyperparameters::default();
        let g = Genome::from_hyperparameters(&hp);
        assert!(g.in_range());
        assert_eq!(g.to_hyperparameters(), hp);
    }

    #[test]
    fn random_genomes_are_valid() {
        let mut r = rng(5);
        for _ in 0..500 {
            let g = Genome::random(&mut r);
            assert!(g.in_range());
            g.to_hyperparameters().validate().unwrap();
        }
    }

    #[test]
    fn hash_depends_on_values() {
        let mut r = rng(1);
        let a = Genome::random(&mut r);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.values[3] = GENES[3].clamp(b.values[3] + 0.01);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn operator_extremes() {
        let mut r = rng(2);
        let a = Genome::random(&mut r);
        let b = Genome::random(&mut r);
        assert_eq!(a.crossover(&b, 0.0, &mut r), a);
        assert_eq!(a.crossover(&b, 1.0, &mut r), b);
        let mut c = a.clone();
        c.mutate(0.0, &mut r);
        assert_eq!(c, a);
    }
}
