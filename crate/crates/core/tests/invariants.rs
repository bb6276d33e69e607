use std::collections::HashSet;

use chatmood::classify::{
    resolve_scores, train_ensemble, train_forest, train_nb, train_svm, vote, ForestParams, Hyperparameters, NbParams,
    Row, SvmParams,
};
use chatmood::evaluate::{agreement, confusion, report, ConfusionMatrix};
use chatmood::evolve::{stratified_split, Genome};
use chatmood::fixture::Fixture;
use chatmood::mood::{daily_series, TimedLabel};
use chatmood::seed::rng;
use chatmood::LabelClass;
use proptest::prelude::*;

fn class() -> impl Strategy<Value = LabelClass> {
    (0usize..3).prop_map(|i| LabelClass::ALL[i])
}

fn dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<LabelClass>)> {
    (1usize..4, 6usize..30).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n),
            prop::collection::vec(class(), n),
        )
    })
}

fn mode(counts: [usize; 3]) -> LabelClass {
    let max = *counts.iter().max().unwrap();
    let winners: Vec<usize> = (0..3).filter(|&c| counts[c] == max).collect();
    if winners.len() == 1 {
        LabelClass::ALL[winners[0]]
    } else {
        LabelClass::Neutral
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forest_predicts_mode_of_trees((rows, labels) in dataset(), seed in any::<u64>()) {
        let rows: Vec<Row> = rows.into_iter().map(Row::dense).collect();
        let d = rows[0].dense.len();
        let params = ForestParams { n_trees: 7, max_depth: 4, min_leaf: 1, feature_fraction: 0.5 };
        let f = train_forest(&rows, &labels, d, &params, seed).unwrap();
        prop_assert_eq!(f.trees.len(), 7);
        for r in &rows {
            let mut counts = [0; 3];
            for t in &f.trees {
                counts[t.predict(r).index()] += 1;
            }
            prop_assert_eq!(f.predict(r), mode(counts));
            prop_assert!(f.trees.iter().all(|t| t.depth() <= 4));
        }
    }

    #[test]
    fn nb_and_svm_predict_argmax((rows, mut labels) in dataset(), seed in any::<u64>()) {
        labels[0] = LabelClass::Positive;
        labels[1] = LabelClass::Negative;
        let nb = train_nb(&rows, &labels, &NbParams { variance_smoothing: 1e-3 }).unwrap();
        let dense: Vec<Row> = rows.iter().cloned().map(Row::dense).collect();
        let svm = train_svm(&dense, &labels, rows[0].len(), &SvmParams { l2_lambda: 1e-3, epochs: 5, learning_rate: 0.1 }, seed).unwrap();
        for (x, r) in rows.iter().zip(&dense) {
            prop_assert_eq!(nb.predict(x), resolve_scores(nb.log_posteriors(x)));
            prop_assert_eq!(svm.predict(r), resolve_scores(svm.margins(r)));
        }
    }

    #[test]
    fn vote_is_symmetric(a in class(), b in class(), c in class()) {
        let v = vote([a, b, c]);
        prop_assert_eq!(v, vote([c, a, b]));
        prop_assert_eq!(v, vote([b, c, a]));
        prop_assert_eq!(v, vote([b, a, c]));
    }

    #[test]
    fn genomes_stay_in_range(seed in any::<u64>(), rate in 0.0f64..1.0) {
        let mut r = rng(seed);
        let a = Genome::random(&mut r);
        let b = Genome::random(&mut r);
        prop_assert!(a.in_range() && b.in_range());
        let mut child = a.crossover(&b, rate, &mut r);
        child.mutate(rate, &mut r);
        prop_assert!(child.in_range());
        let hp = child.to_hyperparameters();
        prop_assert!(hp.validate().is_ok());
        let back = Genome::from_hyperparameters(&hp);
        prop_assert_eq!(back.to_hyperparameters(), hp);
    }

    #[test]
    fn split_has_no_leakage(labels in prop::collection::vec(class(), 6..200), fraction in 0.05f64..0.5, seed in any::<u64>()) {
        let counts = LabelClass::ALL.map(|c| labels.iter().filter(|&&l| l == c).count());
        prop_assume!(counts.iter().all(|&n| n == 0 || n >= 2));
        let Ok(s) = stratified_split(&labels, fraction, seed) else { return Ok(()); };
        let train: HashSet<usize> = s.train.iter().copied().collect();
        let test: HashSet<usize> = s.test.iter().copied().collect();
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.len() + test.len(), labels.len());
        prop_assert_eq!(train.len(), s.train.len());
        for c in LabelClass::ALL {
            let n = labels.iter().filter(|&&l| l == c).count();
            if n > 0 {
                prop_assert!(s.train.iter().any(|&i| labels[i] == c));
                let t = s.test.iter().filter(|&&i| labels[i] == c).count() as f64;
                prop_assert!((t - n as f64 * fraction).abs() <= 1.0 + 1e-9 || t == n as f64 - 1.0);
            }
        }
        prop_assert_eq!(stratified_split(&labels, fraction, seed).unwrap(), s);
    }

    #[test]
    fn report_identities(pairs in prop::collection::vec((class(), class()), 1..300)) {
        let (pred, truth): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let m = confusion(&pred, &truth).unwrap();
        prop_assert_eq!(m.total(), pred.len() as u64);
        let r = report(&m).unwrap();
        let correct = pred.iter().zip(&truth).filter(|(a, b)| a == b).count();
        prop_assert_eq!(r.accuracy, correct as f64 / pred.len() as f64);
        prop_assert_eq!(r.classes.iter().map(|c| c.frequency).sum::<u64>(), m.total());
        for c in &r.classes {
            for v in [c.precision, c.recall, c.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let lo = c.precision.min(c.recall);
            let hi = c.precision.max(c.recall);
            prop_assert!(c.f1 >= lo - 1e-12 && c.f1 <= hi + 1e-12);
        }
        let mut doubled = m;
        doubled.merge(&m);
        prop_assert_eq!(doubled.total(), 2 * m.total());
        let g = agreement(&pred, &truth).unwrap();
        prop_assert_eq!(g.raw, r.accuracy);
    }

    #[test]
    fn daily_means_bounded(items in prop::collection::vec((0i64..30 * 86_400, class()), 1..100), offset in -720i32..720) {
        let items: Vec<TimedLabel> = items.into_iter().map(|(t, c)| TimedLabel { timestamp: 1_600_000_000 + t, class: c }).collect();
        let s = daily_series(&items, offset).unwrap();
        prop_assert_eq!(s.points.iter().map(|p| p.count).sum::<usize>(), items.len());
        prop_assert!(s.points.windows(2).all(|w| w[0].date < w[1].date));
        prop_assert!(s.points.iter().all(|p| (-1.0..=1.0).contains(&p.mean_score)));
        prop_assert_eq!(s.trend.is_some(), s.points.len() >= 2);
    }
}

#[test]
fn confusion_is_symmetric_in_pairs() {
    let m = ConfusionMatrix::from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 9]]);
    use LabelClass::*;
    assert_eq!(m.confusions_between(Positive, Neutral), m.confusions_between(Neutral, Positive));
    assert_eq!(m.confusions_between(Positive, Neutral), 6);
    assert_eq!(m.trace(), 15);
}

#[test]
fn ensemble_training_is_deterministic() {
    let samples = Fixture::generate(15, 3, 5).labeled_samples().unwrap();
    let hp = Hyperparameters::default();
    let a = train_ensemble(&samples, &hp, 11).unwrap();
    let b = train_ensemble(&samples, &hp, 11).unwrap();
    assert_eq!(a, b);
    for s in &samples {
        let p = a.predict(&s.features).unwrap();
        assert_eq!(p.label, vote([p.votes.forest, p.votes.svm, p.votes.nb]));
    }
}

#[test]
fn ensemble_rejects_missing_metric() {
    let samples = Fixture::generate(10, 2, 5).labeled_samples().unwrap();
    let model = train_ensemble(&samples, &Hyperparameters::default(), 1).unwrap();
    let mut f = samples[0].features.clone();
    let name = model.schema.metric_names[0].clone();
    f.dense.remove(&name);
    assert!(model.predict(&f).is_err());
}
