//! Pruning-based proposals.
//!
//! Experience is ranked by score and cut into three performance classes
//! (1 = low, 2 = mid, 3 = high). A random forest trained on the normalized
//! configurations against those classes ranks hyperparameters by importance;
//! the most important ones, up to half of the total importance, are the key
//! parameters. Candidates re-draw the key parameters uniformly and copy every
//! other coordinate from the best configuration found so far.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::experience::ExperienceSet;
use crate::forest::{ForestSettings, RandomForest};
use crate::human_experience::pad_with_uniform;
use crate::rng::{derive_seed, seeded};
use crate::space::{Configuration, NormalizedConfiguration, SearchSpace};

/// Draw attempts per candidate before falling back to a full-space sample.
pub const MAX_RETRIES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyParams {
    /// Parameter indices, most important first.
    pub indices: Vec<usize>,
    pub cumulative_importance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParameterAnalysisSettings {
    pub forest: ForestSettings,
}

/// Indices of `exp` sorted by ascending score. Among equal scores the
/// earliest entry sorts last, so the final element is [`ExperienceSet::best`].
fn ascending_order(exp: &ExperienceSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..exp.len()).collect();
    let e = exp.entries();
    order.sort_by(|&a, &b| e[a].score.total_cmp(&e[b].score).then(b.cmp(&a)));
    order
}

/// Labels the experience with performance classes 1..=3, returned in
/// ascending-score order.
pub fn label_experience(
    exp: &ExperienceSet,
    space: &SearchSpace,
) -> Result<Vec<(NormalizedConfiguration, usize)>> {
    if exp.len() < 3 {
        return Err(Error::InsufficientExperience {
            needed: 3,
            found: exp.len(),
        });
    }
    let t = exp.len();
    let psize = t.div_ceil(3);
    ascending_order(exp)
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let label = (rank + 1).div_ceil(psize);
            Ok((space.normalize(&exp.entries()[i].config)?, label))
        })
        .collect()
}

/// Greedily accumulates parameters by descending importance until half of
/// the importance mass is covered. All-zero importances select everything.
pub fn select_key_params(importances: &[f64]) -> KeyParams {
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    let total: f64 = importances.iter().sum();
    if total <= 0.0 {
        return KeyParams {
            indices: order,
            cumulative_importance: 0.0,
        };
    }
    let mut indices = Vec::new();
    let mut sum = 0.0;
    for i in order {
        if sum >= 0.5 {
            break;
        }
        indices.push(i);
        sum += importances[i];
    }
    KeyParams {
        indices,
        cumulative_importance: sum,
    }
}

/// Fits the importance forest on labeled experience.
pub fn importances(
    exp: &ExperienceSet,
    space: &SearchSpace,
    settings: &ForestSettings,
) -> Result<Vec<f64>> {
    let labeled = label_experience(exp, space)?;
    let (x, y): (Vec<Vec<f64>>, Vec<usize>) = labeled
        .into_iter()
        .map(|(c, l)| (c.into_inner(), l))
        .unzip();
    Ok(RandomForest::fit(&x, &y, settings)?.importances().to_vec())
}

/// Replaces the key coordinates of `best` with those of `draw`.
pub fn compose(best: &Configuration, draw: &Configuration, key: &[usize]) -> Configuration {
    let mut values = best.values().to_vec();
    for &i in key {
        values[i] = draw.values()[i];
    }
    Configuration::new(values)
}

pub fn propose_with_settings(
    exp: &ExperienceSet,
    space: &SearchSpace,
    num: usize,
    settings: &ParameterAnalysisSettings,
    seed: u64,
) -> Result<Vec<Configuration>> {
    if num == 0 {
        return Err(Error::InvalidArgument("num must be at least 1".into()));
    }
    let forest = settings.forest.with_seed(derive_seed(seed, 1));
    let key = select_key_params(&importances(exp, space, &forest)?);
    let order = ascending_order(exp);
    let best = &exp.entries()[*order.last().expect("non-empty")].config;

    let mut rng = seeded(derive_seed(seed, 2));
    let mut taken: HashSet<Configuration> = HashSet::new();
    let mut out = Vec::with_capacity(num);
    for _ in 0..num {
        for _ in 0..MAX_RETRIES {
            let cand = compose(best, &space.sample_uniform(&mut rng), &key.indices);
            if !exp.contains(&cand) && !taken.contains(&cand) {
                taken.insert(cand.clone());
                out.push(cand);
                break;
            }
        }
    }
    pad_with_uniform(space, exp, &mut out, num, &mut rng);
    Ok(out)
}

/// Proposes `num` configurations that vary only the key parameters.
pub fn propose(
    exp: &ExperienceSet,
    space: &SearchSpace,
    num: usize,
    seed: u64,
) -> Result<Vec<Configuration>> {
    propose_with_settings(exp, space, num, &ParameterAnalysisSettings::default(), seed)
}
