use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{resolve_scores, ClassifyError, ForestParams, Result, Row};
use crate::corpus::LabelClass;
use crate::seed::{derive_seed, rng};

/// Gini impurity `1 - Σ p_c²` of class counts.
pub fn gini(counts: &[usize; 3]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        class: LabelClass,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART tree; `nodes[0]` is the root. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

fn class_counts(labels: &[LabelClass], samples: &[usize]) -> [usize; 3] {
    let mut counts = [0; 3];
    for &s in samples {
        counts[labels[s].index()] += 1;
    }
    counts
}

fn majority(counts: &[usize; 3]) -> LabelClass {
    resolve_scores(counts.map(|c| Some(c as f64)))
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl DecisionTree {
    /// Grows a tree on `samples` (indices into `rows`, repeats allowed).
    pub fn fit<R: Rng>(
        rows: &[Row],
        labels: &[LabelClass],
        samples: &[usize],
        n_features: usize,
        params: &ForestParams,
        rng: &mut R,
    ) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(rows, labels, samples.to_vec(), 0, n_features, params, rng);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow<R: Rng>(
        &mut self,
        rows: &[Row],
        labels: &[LabelClass],
        samples: Vec<usize>,
        depth: usize,
        n_features: usize,
        params: &ForestParams,
        rng: &mut R,
    ) -> usize {
        let id = self.nodes.len();
        let counts = class_counts(labels, &samples);
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let parent = gini(&counts);
        if parent == 0.0 || depth >= params.max_depth || samples.len() < 2 * params.min_leaf || n_features == 0 {
            return id;
        }
        let k = ((params.feature_fraction * n_features as f64).ceil() as usize).clamp(1, n_features);
        let mut candidates = sample(rng, n_features, k).into_vec();
        candidates.sort_unstable();
        let Some(best) = best_split(rows, labels, &samples, &candidates, params.min_leaf) else {
            return id;
        };
        if best.impurity >= parent {
            return id;
        }
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| rows[s].value(best.feature) <= best.threshold);
        let l = self.grow(rows, labels, left, depth + 1, n_features, params, rng);
        let r = self.grow(rows, labels, right, depth + 1, n_features, params, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    pub fn predict(&self, row: &Row) -> LabelClass {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row.value(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Lowest weighted child impurity over all midpoints of the candidates.
/// The first candidate wins ties.
fn best_split(rows: &[Row], labels: &[LabelClass], samples: &[usize], candidates: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let n = samples.len();
    let total = class_counts(labels, samples);
    let mut best: Option<BestSplit> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &feature in candidates {
        column.clear();
        column.extend(samples.iter().map(|&s| (rows[s].value(feature), labels[s].index())));
        if column.iter().all(|c| c.0 == column[0].0) {
            continue;
        }
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize; 3];
        for i in 0..n - 1 {
            left[column[i].1] += 1;
            let (a, b) = (column[i].0, column[i + 1].0);
            if a == b || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1], total[2] - left[2]];
            let nl = (i + 1) as f64;
            let impurity = (nl * gini(&left) + (n as f64 - nl) * gini(&right)) / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let mid = a + (b - a) / 2.0;
                best = Some(BestSplit {
                    feature,
                    threshold: if mid < b { mid } else { a },
                    impurity,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub n_features: usize,
}

impl Forest {
    pub fn tree_votes(&self, row: &Row) -> [usize; 3] {
        let mut counts = [0; 3];
        for t in &self.trees {
            counts[t.predict(row).index()] += 1;
        }
        counts
    }

    /// Mode of the tree predictions; ties resolve to neutral.
    pub fn predict(&self, row: &Row) -> LabelClass {
        majority(&self.tree_votes(row))
    }
}

/// Bagged CART trees. Tree `t` draws its bootstrap sample and candidate
/// features from a stream seeded by `(seed, t)`.
pub fn train_forest(rows: &[Row], labels: &[LabelClass], n_features: usize, params: &ForestParams, seed: u64) -> Result<Forest> {
    if rows.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    if rows.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let n = rows.len();
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut r = rng(derive_seed(seed, t as u64));
            let bootstrap: Vec<usize> = (0..n).map(|_| r.gen_range(0..n)).collect();
            DecisionTree::fit(rows, labels, &bootstrap, n_features, params, &mut r)
        })
        .collect();
    Ok(Forest { trees, n_features })
}

#[cfg(test)]
mod tests {
    use super::*;
    use LabelClass::*;

    fn params(depth: usize) -> ForestParams {
        ForestParams {
            n_trees: 5,
            max_depth: depth,
            min_leaf: 1,
            feature_fraction: 1.0,
        }
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[0, 4, 0]), 0.0);
        assert!((gini(&[1, 1, 0]) - 0.5).abs() < 1e-15);
        assert!((gini(&[1, 1, 1]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_sample_gives_leaves() {
        let f = train_forest(&[Row::dense(vec![0.3, 1.0])], &[Negative], 2, &params(5), 1).unwrap();
        for t in &f.trees {
            assert_eq!(t.nodes, vec![Node::Leaf { class: Negative }]);
        }
    }

    #[test]
    fn pure_node_does_not_split() {
        let rows: Vec<Row> = (0..6).map(|i| Row::dense(vec![i as f64])).collect();
        let t = DecisionTree::fit(&rows, &[Neutral; 6], &[0, 1, 2, 3, 4, 5], 1, &params(5), &mut rng(0));
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn depth_one_separable() {
        // Feature 1 separates; feature 0 is noise.
        let rows = vec![
            Row::dense(vec![5.0, 1.0]),
            Row::dense(vec![1.0, 2.0]),
            Row::dense(vec![4.0, 7.0]),
            Row::dense(vec![2.0, 9.0]),
        ];
        let labels = [Positive, Positive, Negative, Negative];
        let t = DecisionTree::fit(&rows, &labels, &[0, 1, 2, 3], 2, &params(1), &mut rng(3));
        assert_eq!(
            t.nodes[0],
            Node::Split {
                feature: 1,
                threshold: 4.5,
                left: 1,
                right: 2
            }
        );
        for (r, l) in rows.iter().zip(labels) {
            assert_eq!(t.predict(r), l);
        }
    }

    #[test]
    fn sparse_feature_split() {
        let rows: Vec<Row> = (0..4)
            .map(|i| Row {
                dense: vec![0.0],
                sparse: if i < 2 { vec![(0, 1.0)] } else { vec![] },
            })
            .collect();
        let labels = [Positive, Positive, Neutral, Neutral];
        let t = DecisionTree::fit(&rows, &labels, &[0, 1, 2, 3], 2, &params(3), &mut rng(0));
        assert!(matches!(t.nodes[0], Node::Split { feature: 1, .. }));
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let rows: Vec<Row> = (0..3).map(|i| Row::dense(vec![i as f64])).collect();
        let p = ForestParams { min_leaf: 2, ..params(5) };
        let t = DecisionTree::fit(&rows, &[Positive, Neutral, Neutral], &[0, 1, 2], 1, &p, &mut rng(0));
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn deterministic() {
        let rows: Vec<Row> = (0..40).map(|i| Row::dense(vec![(i * 7 % 11) as f64, (i % 5) as f64])).collect();
        let labels: Vec<LabelClass> = (0..40).map(|i| LabelClass::ALL[i % 3]).collect();
        let a = train_forest(&rows, &labels, 2, &params(4), 9).unwrap();
        let b = train_forest(&rows, &labels, 2, &params(4), 9).unwrap();
        assert_eq!(a, b);
        assert!(a.trees.iter().all(|t| t.depth() <= 4));
    }
}
