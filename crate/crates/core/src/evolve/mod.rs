//! Evolutionary hyperparameter search and the repeated stratified-split
//! validation harness.

mod genome;
mod validation;

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{ClassifyError, EnsembleModel};
use crate::corpus::{Artifact, LabelClass};
use crate::evaluate::{EvaluateError, ConfusionMatrix};
use crate::features::LabeledSample;
use crate::seed::{derive_seed, rng};

pub use genome::{GeneSpec, Genome, Scale, GENES};
pub use validation::{cross_validate, mean_and_stddev, stratified_split, train_and_test, CrossValidation, Split};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid evolution config: {0}")]
    Config(String),
    #[error("cannot split data: {0}")]
    Split(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
}

pub type Result<T, E = EvolveError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub elitism_count: usize,
    /// Per-gene probability of a fresh uniform draw.
    pub mutation_rate: f64,
    /// Per-gene probability of taking the second parent's gene.
    pub crossover_rate: f64,
    pub fitness_splits: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 20,
            generations: 80,
            tournament_size: 3,
            elitism_count: 1,
            mutation_rate: 0.2,
            crossover_rate: 0.5,
            fitness_splits: 5,
            test_fraction: 0.1,
            seed: 42,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(EvolveError::Config(m.to_string()));
        if self.population_size < 2 {
            return fail("population_size must be at least 2");
        }
        if self.tournament_size < 1 {
            return fail("tournament_size must be at least 1");
        }
        if self.elitism_count > self.population_size {
            return fail("elitism_count cannot exceed population_size");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) || !(0.0..=1.0).contains(&self.crossover_rate) {
            return fail("rates must lie in [0, 1]");
        }
        if self.fitness_splits < 1 {
            return fail("fitness_splits must be at least 1");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail("test_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fitness {
    pub value: f64,
    /// Why a training fold failed, when `value` was forced to 0.
    pub diagnostic: Option<String>,
}

/// Mean test accuracy over `fitness_splits` splits seeded by
/// `(config.seed, genome hash)`. Any fold error yields fitness 0.
pub fn fitness(genome: &Genome, data: &[LabeledSample], config: &EvolutionConfig) -> Fitness {
    let hp = genome.to_hyperparameters();
    let seed = derive_seed(config.seed, genome.hash());
    match cross_validate(&hp, data, config.fitness_splits, config.test_fraction, seed) {
        Ok(cv) => Fitness {
            value: cv.mean,
            diagnostic: None,
        },
        Err(e) => Fitness {
            value: 0.0,
            diagnostic: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_genome: Genome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionHistory {
    pub generations: Vec<GenerationRecord>,
    /// Fold failures seen during the run, in order of first occurrence.
    pub diagnostics: Vec<String>,
}

impl EvolutionHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,best_genome\n");
        for g in &self.generations {
            let genome = serde_json::to_string(&g.best_genome.named()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},\"{}\"",
                g.generation,
                g.best_fitness,
                g.mean_fitness,
                genome.replace('"', "\"\"")
            );
        }
        out
    }
}

impl Artifact for EvolutionHistory {
    const KIND: &'static str = "evolution-history";

    fn check(&self) -> std::result::Result<(), String> {
        if self.generations.iter().enumerate().any(|(i, g)| g.generation != i) {
            return Err("generation numbers must run 0, 1, 2, ...".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutcome {
    pub model: EnsembleModel,
    pub history: EvolutionHistory,
    pub best_genome: Genome,
    pub best_fitness: f64,
    /// Held-out accuracy of the retrained model on the final split.
    pub final_test_accuracy: f64,
    pub final_confusion: ConfusionMatrix,
}

fn tournament<R: Rng>(scores: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.gen_range(0..scores.len());
    for _ in 1..size {
        let c = rng.gen_range(0..scores.len());
        if scores[c] > scores[best] {
            best = c;
        }
    }
    best
}

/// Generation 0 is the random population; each later generation keeps the
/// top `elitism_count` genomes and fills up with mutated crossovers of
/// tournament winners. The best genome is retrained on a final split.
pub fn run_evolution(data: &[LabeledSample], config: &EvolutionConfig) -> Result<EvolutionOutcome> {
    config.validate()?;
    let mut r = rng(derive_seed(config.seed, 0xE7));
    let mut population: Vec<Genome> = (0..config.population_size).map(|_| Genome::random(&mut r)).collect();
    let mut cache: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut history = EvolutionHistory {
        generations: Vec::new(),
        diagnostics: Vec::new(),
    };
    let mut best: Option<(Genome, f64)> = None;

    for generation in 0..=config.generations {
        let scores: Vec<f64> = population
            .iter()
            .map(|g| {
                *cache.entry(g.key()).or_insert_with(|| {
                    let f = fitness(g, data, config);
                    if let Some(d) = f.diagnostic {
                        if !history.diagnostics.contains(&d) {
                            history.diagnostics.push(d);
                        }
                    }
                    f.value
                })
            })
            .collect();
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let top = ranked[0];
        history.generations.push(GenerationRecord {
            generation,
            best_fitness: scores[top],
            mean_fitness: scores.iter().sum::<f64>() / scores.len() as f64,
            best_genome: population[top].clone(),
        });
        if best.as_ref().is_none_or(|(_, f)| scores[top] > *f) {
            best = Some((population[top].clone(), scores[top]));
        }
        if generation == config.generations {
            break;
        }
        let mut next: Vec<Genome> = ranked[..config.elitism_count].iter().map(|&i| population[i].clone()).collect();
        while next.len() < config.population_size {
            let a = tournament(&scores, config.tournament_size, &mut r);
            let b = tournament(&scores, config.tournament_size, &mut r);
            let mut child = population[a].crossover(&population[b], config.crossover_rate, &mut r);
            child.mutate(config.mutation_rate, &mut r);
            next.push(child);
        }
        population = next;
    }

    let (best_genome, best_fitness) = best.expect("at least one generation is evaluated");
    let labels: Vec<LabelClass> = data.iter().map(|s| s.label).collect();
    let final_seed = derive_seed(config.seed, 0xF1);
    let split = stratified_split(&labels, config.test_fraction, final_seed)?;
    let (model, m) = train_and_test(&best_genome.to_hyperparameters(), data, &split, derive_seed(final_seed, 1))?;
    Ok(EvolutionOutcome {
        model,
        history,
        best_genome,
        best_fitness,
        final_test_accuracy: m.trace() as f64 / m.total() as f64,
        final_confusion: m,
    })
}
