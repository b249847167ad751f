//! CART random forest classifier with mean-decrease-in-impurity importances.
//!
//! Trees are grown on bootstrap resamples with Gini splits over a random
//! feature subset per node. Each tree draws from its own stream derived from
//! the forest seed and the tree index, so fitting is order independent.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    /// `ceil(sqrt(n_features))`
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestSettings {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestSettings {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestSettings {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        label: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn split_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_features: usize,
    n_classes: usize,
    importances: Vec<f64>,
}

impl RandomForest {
    /// Fits the forest. Labels are arbitrary `usize` class ids.
    pub fn fit(features: &[Vec<f64>], labels: &[usize], settings: &ForestSettings) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("no training rows".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        if settings.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        let n_features = features[0].len();
        if n_features == 0 {
            return Err(Error::InvalidArgument("rows have no features".into()));
        }
        if let Some(row) = features.iter().find(|r| r.len() != n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                found: row.len(),
            });
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let data = Data {
            features,
            labels,
            n_classes,
        };
        let per_tree: Vec<(DecisionTree, Vec<f64>)> = (0..settings.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded(derive_seed(settings.seed, t as u64));
                grow_tree(&data, settings, &mut rng)
            })
            .collect();

        let mut importances = vec![0.0; n_features];
        for (_, imp) in &per_tree {
            for (acc, v) in importances.iter_mut().zip(imp) {
                *acc += v;
            }
        }
        let total: f64 = importances.iter().sum();
        if total > 0.0 {
            importances.iter_mut().for_each(|v| *v /= total);
        } else {
            importances.iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(Self {
            trees: per_tree.into_iter().map(|(t, _)| t).collect(),
            n_features,
            n_classes,
            importances,
        })
    }

    /// Majority vote; ties go to the smallest label.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let mut votes = vec![0usize; self.n_classes.max(1)];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        let best = votes.iter().copied().max().unwrap_or(0);
        Ok(votes.iter().position(|&v| v == best).unwrap_or(0))
    }

    /// Normalized impurity-decrease importances; all zero if no tree split.
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

struct Data<'a> {
    features: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn grow_tree(data: &Data, settings: &ForestSettings, rng: &mut SeededRng) -> (DecisionTree, Vec<f64>) {
    let n = data.features.len();
    let sample_idx: Vec<usize> = if settings.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let n_features = data.features[0].len();
    let mut importance = vec![0.0; n_features];
    let mut nodes = Vec::new();
    let root_n = sample_idx.len() as f64;
    // (node slot, samples, depth)
    let mut stack = vec![(0usize, sample_idx, 0usize)];
    nodes.push(Node::Leaf { label: 0 });
    while let Some((slot, idx, depth)) = stack.pop() {
        let counts = class_counts(data, &idx);
        let impurity = gini(&counts, idx.len());
        let depth_ok = settings.max_depth.is_none_or(|d| depth < d);
        let split = if impurity > 0.0 && depth_ok && idx.len() >= 2 * settings.min_samples_leaf {
            find_split(data, &idx, &counts, impurity, settings, rng)
        } else {
            None
        };
        match split {
            Some(s) => {
                importance[s.feature] += idx.len() as f64 / root_n * s.decrease;
                let left_slot = nodes.len();
                nodes.push(Node::Leaf { label: 0 });
                let right_slot = nodes.len();
                nodes.push(Node::Leaf { label: 0 });
                nodes[slot] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: left_slot,
                    right: right_slot,
                };
                stack.push((right_slot, s.right, depth + 1));
                stack.push((left_slot, s.left, depth + 1));
            }
            None => nodes[slot] = Node::Leaf { label: majority(&counts) },
        }
    }
    (DecisionTree { nodes }, importance)
}

fn class_counts(data: &Data, idx: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; data.n_classes];
    for &i in idx {
        counts[data.labels[i]] += 1;
    }
    counts
}

/// Best Gini split over a random feature subset. When no feature of the
/// subset admits a split, the remaining features are tried as well.
fn find_split(
    data: &Data,
    idx: &[usize],
    counts: &[usize],
    impurity: f64,
    settings: &ForestSettings,
    rng: &mut SeededRng,
) -> Option<BestSplit> {
    let n_features = data.features[0].len();
    let k = settings.max_features.resolve(n_features);
    let order = sample(rng, n_features, n_features).into_vec();
    let (first, rest) = order.split_at(k);
    let pick = |features: &[usize]| -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for &f in features {
            if let Some((thr, dec)) = best_threshold(data, idx, counts, impurity, f, settings.min_samples_leaf) {
                if best.is_none_or(|(_, _, d)| dec > d) {
                    best = Some((f, thr, dec));
                }
            }
        }
        best
    };
    let (feature, threshold, decrease) = pick(first).or_else(|| pick(rest))?;
    let (left, right): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| data.features[i][feature] <= threshold);
    Some(BestSplit {
        feature,
        threshold,
        decrease,
        left,
        right,
    })
}

/// Sweeps midpoints between consecutive distinct values of one feature.
fn best_threshold(
    data: &Data,
    idx: &[usize],
    counts: &[usize],
    impurity: f64,
    feature: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let mut sorted: Vec<(f64, usize)> = idx
        .iter()
        .map(|&i| (data.features[i][feature], data.labels[i]))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let mut left = vec![0usize; counts.len()];
    let mut best: Option<(f64, f64)> = None;
    for pos in 0..n - 1 {
        left[sorted[pos].1] += 1;
        let (v, next) = (sorted[pos].0, sorted[pos + 1].0);
        if v == next {
            continue;
        }
        let nl = pos + 1;
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
        let weighted = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
        let decrease = impurity - weighted;
        if decrease > 1e-12 && best.is_none_or(|(_, d)| decrease > d) {
            best = Some(((v + next) / 2.0, decrease));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_data(rows: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = seeded(seed);
        let x: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..5).map(|_| rng.random::<f64>()).collect())
            .collect();
        let y = x.iter().map(|r| usize::from(r[0] > 0.5)).collect();
        (x, y)
    }

    #[test]
    fn single_class_is_trivial() {
        let x = vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.9]];
        let y = vec![2, 2, 2];
        let f = RandomForest::fit(&x, &y, &ForestSettings::default()).unwrap();
        assert_eq!(f.importances(), &[0.0, 0.0]);
        assert!(f.trees().iter().all(|t| t.split_count() == 0));
        assert_eq!(f.predict(&[0.9, 0.9]).unwrap(), 2);
    }

    #[test]
    fn fits_threshold_data() {
        let (x, y) = threshold_data(500, 1);
        let f = RandomForest::fit(&x, &y, &ForestSettings::default().with_seed(3)).unwrap();
        let correct = x.iter().zip(&y).filter(|(r, l)| f.predict(r).unwrap() == **l).count();
        assert!(correct as f64 / 500.0 > 0.95);
        let imp = f.importances();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(imp[1..].iter().all(|&v| v < imp[0]), "{imp:?}");
    }

    #[test]
    fn one_tree_votes_like_its_tree() {
        let (x, y) = threshold_data(100, 2);
        let settings = ForestSettings { n_trees: 1, ..ForestSettings::default() };
        let f = RandomForest::fit(&x, &y, &settings).unwrap();
        for r in &x {
            assert_eq!(f.predict(r).unwrap(), f.trees()[0].predict(r));
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = threshold_data(80, 4);
        let a = RandomForest::fit(&x, &y, &ForestSettings::default().with_seed(9)).unwrap();
        let b = RandomForest::fit(&x, &y, &ForestSettings::default().with_seed(9)).unwrap();
        assert_eq!(a.importances(), b.importances());
        assert_eq!(a.trees(), b.trees());
    }

    #[test]
    fn errors() {
        assert!(RandomForest::fit(&[], &[], &ForestSettings::default()).is_err());
        let x = vec![vec![0.0], vec![1.0]];
        assert!(RandomForest::fit(&x, &[0], &ForestSettings::default()).is_err());
        let f = RandomForest::fit(&x, &[0, 1], &ForestSettings::default()).unwrap();
        assert!(f.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn respects_max_depth() {
        let (x, y) = threshold_data(200, 5);
        let settings = ForestSettings { max_depth: Some(0), ..ForestSettings::default() };
        let f = RandomForest::fit(&x, &y, &settings).unwrap();
        assert!(f.trees().iter().all(|t| t.split_count() == 0));
    }
}
