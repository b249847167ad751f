//! Feature-subset selection scored by k-nearest-neighbor cross-validation.
//!
//! Features are taken in consecutive groups of `group_size` (the last group
//! may be shorter). Each group is one categorical hyperparameter whose option
//! index is a little-endian bit mask: bit `j` keeps feature `j` of the group.
//! Option labels spell the mask feature by feature, so `"101"` keeps the
//! first and third feature of a three-feature group.

use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::driver::Objective;
use crate::error::{Error, ObjectiveError, Result};
use crate::objectives::dataset::TabularDataset;
use crate::rng::seeded;
use crate::space::{Configuration, HyperparameterDef, SearchSpace, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSubsetSettings {
    pub group_size: usize,
    pub k: usize,
    pub folds: usize,
    pub fold_seed: u64,
}

impl Default for FeatureSubsetSettings {
    fn default() -> Self {
        Self {
            group_size: 3,
            k: 5,
            folds: 3,
            fold_seed: 0,
        }
    }
}

/// Seeded stratified fold assignment. Each class is shuffled and dealt
/// round-robin, continuing where the previous class stopped, so per-class
/// and overall fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// Majority label among the `k` nearest training rows. Distance ties go to
/// the smaller training index, vote ties to the smaller label.
pub fn knn_predict(train: &[(&[f64], usize)], query: &[f64], k: usize, n_classes: usize) -> usize {
    let mut dist: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (x, _))| (x.iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum(), i))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in dist.iter().take(k) {
        votes[train[i].1] += 1;
    }
    let top = *votes.iter().max().expect("at least one class");
    votes.iter().position(|&v| v == top).expect("max exists")
}

#[derive(Debug, Clone)]
pub struct FeatureSubsetObjective {
    dataset: Arc<TabularDataset>,
    settings: FeatureSubsetSettings,
    space: SearchSpace,
    groups: Vec<std::ops::Range<usize>>,
    fold_of: Vec<usize>,
}

impl FeatureSubsetObjective {
    pub fn new(dataset: Arc<TabularDataset>, settings: FeatureSubsetSettings) -> Result<Self> {
        let FeatureSubsetSettings { group_size, k, folds, fold_seed } = settings;
        if group_size == 0 || group_size > 16 {
            return Err(Error::InvalidArgument(format!("group size {group_size} must be in 1..=16")));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if folds < 2 {
            return Err(Error::InvalidArgument("need at least 2 folds".into()));
        }
        if dataset.n_rows() < 2 * folds {
            return Err(Error::Dataset(format!(
                "`{}` has {} rows; {folds} folds need at least {}",
                dataset.name(),
                dataset.n_rows(),
                2 * folds
            )));
        }
        let n = dataset.n_features();
        let groups: Vec<_> = (0..n.div_ceil(group_size))
            .map(|g| g * group_size..((g + 1) * group_size).min(n))
            .collect();
        let params = groups
            .iter()
            .enumerate()
            .map(|(g, range)| {
                let width = range.len();
                let labels = (0..1usize << width)
                    .map(|mask| (0..width).map(|j| if mask >> j & 1 == 1 { '1' } else { '0' }).collect::<String>());
                HyperparameterDef::categorical(format!("g{g}"), labels)
            })
            .collect::<Result<Vec<_>>>()?;
        let fold_of = stratified_folds(dataset.labels(), folds, fold_seed);
        Ok(Self {
            space: SearchSpace::new(params)?,
            dataset,
            settings,
            groups,
            fold_of,
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn dataset(&self) -> &TabularDataset {
        &self.dataset
    }

    pub fn settings(&self) -> FeatureSubsetSettings {
        self.settings
    }

    pub fn fold_assignment(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn f_ideal(&self) -> f64 {
        1.0
    }

    /// Keeps every feature.
    pub fn default_config(&self) -> Configuration {
        Configuration::new(
            self.groups
                .iter()
                .map(|r| Value::Category((1usize << r.len()) - 1))
                .collect(),
        )
    }

    pub fn decode_mask(&self, cfg: &Configuration) -> Result<Vec<bool>> {
        self.space.validate(cfg)?;
        let mut mask = vec![false; self.dataset.n_features()];
        for (range, v) in self.groups.iter().zip(cfg.values()) {
            let Value::Category(bits) = *v else { unreachable!("validated categorical") };
            for (j, f) in range.clone().enumerate() {
                mask[f] = bits >> j & 1 == 1;
            }
        }
        Ok(mask)
    }

    /// Mean cross-validated accuracy using the masked features; 0 when the
    /// mask is empty.
    pub fn accuracy(&self, mask: &[bool]) -> f64 {
        let kept: Vec<usize> = (0..mask.len()).filter(|&f| mask[f]).collect();
        if kept.is_empty() {
            return 0.0;
        }
        let x = self.dataset.features();
        let y = self.dataset.labels();
        let n_classes = self.dataset.n_classes();
        let mut total = 0.0;
        for fold in 0..self.settings.folds {
            let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
                (0..x.len()).partition(|&i| self.fold_of[i] != fold);
            let (lo, hi): (Vec<f64>, Vec<f64>) = kept
                .iter()
                .map(|&f| {
                    train_idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(x[i][f]), hi.max(x[i][f]))
                    })
                })
                .unzip();
            let scale = |i: usize| -> Vec<f64> {
                kept.iter()
                    .enumerate()
                    .map(|(c, &f)| {
                        let span = hi[c] - lo[c];
                        if span > 0.0 {
                            (x[i][f] - lo[c]) / span
                        } else {
                            0.0
                        }
                    })
                    .collect()
            };
            let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| scale(i)).collect();
            let train: Vec<(&[f64], usize)> = train_rows
                .iter()
                .zip(&train_idx)
                .map(|(r, &i)| (r.as_slice(), y[i]))
                .collect();
            let correct = test_idx
                .iter()
                .filter(|&&i| knn_predict(&train, &scale(i), self.settings.k, n_classes) == y[i])
                .count();
            total += correct as f64 / test_idx.len() as f64;
        }
        total / self.settings.folds as f64
    }
}

impl Objective for FeatureSubsetObjective {
    fn evaluate(&self, cfg: &Configuration) -> std::result::Result<f64, ObjectiveError> {
        Ok(self.accuracy(&self.decode_mask(cfg)?))
    }
}
