use rand::seq::index;
use rand::Rng;

use crate::driver::Problem;
use crate::error::Result;
use crate::rng::{seeded, SeededRng};
use crate::run::{Ledger, Phase, RunResult};
use crate::space::{Configuration, Domain, HyperparameterDef, SearchSpace, Value};

/// Largest `k` with `k^n <= value`.
pub fn integer_root(value: usize, n: usize) -> usize {
    if n == 0 || value == 0 {
        return 0;
    }
    let fits = |k: usize| (k as u128).checked_pow(n as u32).is_some_and(|p| p <= value as u128);
    let mut k = (value as f64).powf(1.0 / n as f64).floor() as usize;
    while k > 0 && !fits(k) {
        k -= 1;
    }
    while fits(k + 1) {
        k += 1;
    }
    k
}

/// Per-dimension level counts for a budget of `budget` points.
///
/// Every dimension starts at the floor root (at least 1) and is upgraded by
/// one in ascending index order whenever the product stays within budget.
/// Levels never exceed a dimension's cardinality.
pub fn grid_levels(budget: usize, caps: &[Option<u128>]) -> Vec<usize> {
    let n = caps.len();
    let cap = |i: usize, k: usize| match caps[i] {
        Some(c) => k.min(c.min(usize::MAX as u128) as usize),
        None => k,
    };
    let lo = integer_root(budget, n).max(1);
    let mut levels: Vec<usize> = (0..n).map(|i| cap(i, lo)).collect();
    let product = |l: &[usize]| l.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k));
    for i in 0..n {
        let up = cap(i, lo + 1);
        if up <= levels[i] {
            continue;
        }
        let old = levels[i];
        levels[i] = up;
        if product(&levels).is_none_or(|p| p > budget) {
            levels[i] = old;
        }
    }
    levels
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPlan {
    pub levels: Vec<usize>,
    pub chosen_values: Vec<Vec<Value>>,
}

impl GridPlan {
    pub fn new(space: &SearchSpace, budget: usize, rng: &mut SeededRng) -> Self {
        let caps: Vec<Option<u128>> = space.params().iter().map(HyperparameterDef::cardinality).collect();
        let levels = grid_levels(budget, &caps);
        let chosen_values = space
            .params()
            .iter()
            .zip(&levels)
            .map(|(p, &k)| choose_values(p, k, rng))
            .collect();
        Self { levels, chosen_values }
    }

    pub fn size(&self) -> usize {
        self.levels.iter().product()
    }

    /// Cartesian product, last dimension varying fastest.
    pub fn configurations(&self) -> Vec<Configuration> {
        let mut out = vec![Vec::new()];
        for values in &self.chosen_values {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(*v);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(Configuration::new).collect()
    }
}

fn choose_values(p: &HyperparameterDef, k: usize, rng: &mut SeededRng) -> Vec<Value> {
    match p.domain() {
        Domain::Categorical { options } => index::sample(rng, options.len(), k)
            .into_iter()
            .map(Value::Category)
            .collect(),
        Domain::Integer { lo, hi } => {
            let span = (*hi - *lo) as u128 + 1;
            if span <= usize::MAX as u128 && span <= 1 << 24 {
                index::sample(rng, span as usize, k)
                    .into_iter()
                    .map(|i| Value::Int(*lo + i as i64))
                    .collect()
            } else {
                let mut out: Vec<Value> = Vec::with_capacity(k);
                while out.len() < k {
                    let v = Value::Int(rng.random_range(*lo..=*hi));
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
                out
            }
        }
        Domain::Real { lo, hi } => {
            let mut out: Vec<Value> = Vec::with_capacity(k);
            while out.len() < k {
                let v = if lo == hi {
                    Value::real(*lo)
                } else {
                    Value::real(rng.random_range(*lo..=*hi))
                };
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            out
        }
    }
}

/// Evaluates a randomized grid of at most `budget` points. Any budget left
/// over by the level product stays unspent.
pub fn grid_search(problem: &Problem, seed: u64) -> Result<RunResult> {
    let mut rng = seeded(seed);
    let plan = GridPlan::new(problem.space(), problem.budget(), &mut rng);
    let mut ledger = Ledger::new(problem);
    for cfg in plan.configurations() {
        ledger.evaluate(cfg, Phase::Grid, 0)?;
    }
    ledger.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(128, 7), 2);
        assert_eq!(integer_root(100, 3), 4);
        assert_eq!(integer_root(127, 7), 1);
        assert_eq!(integer_root(64, 3), 4);
        assert_eq!(integer_root(1, 5), 1);
        assert_eq!(integer_root(1000, 1), 1000);
        for v in 1..500 {
            for n in 1..6 {
                let k = integer_root(v, n);
                assert!(k.pow(n as u32) <= v && (k + 1).pow(n as u32) > v);
            }
        }
    }

    #[test]
    fn level_examples() {
        assert_eq!(grid_levels(128, &[None; 7]), vec![2; 7]);
        assert_eq!(grid_levels(100, &[None; 3]), vec![5, 5, 4]);
        assert_eq!(grid_levels(1, &[None; 4]), vec![1; 4]);
        // binary dimension cannot hold three levels
        assert_eq!(grid_levels(9, &[Some(2), None]), vec![2, 4]);
    }

    #[test]
    fn levels_respect_budget() {
        for budget in 1..300 {
            for n in 1..6 {
                let levels = grid_levels(budget, &vec![None; n]);
                let p: usize = levels.iter().product();
                assert!(p <= budget);
                let lo = integer_root(budget, n).max(1);
                assert!(levels.iter().all(|&k| k == lo || k == lo + 1));
            }
        }
    }

    #[test]
    fn grid_evaluates_its_product() {
        let space = SearchSpace::new(vec![
            HyperparameterDef::real("a", 0.0, 1.0).unwrap(),
            HyperparameterDef::integer("b", 1, 50).unwrap(),
            HyperparameterDef::categorical("c", ["x", "y", "z", "w", "v", "u"]).unwrap(),
        ])
        .unwrap();
        let problem = Problem::new(space, Arc::new(|_: &Configuration| 0.0), 1.0, 100).unwrap();
        let r = grid_search(&problem, 1).unwrap();
        assert_eq!(r.evaluations_used, 100);
        let single = grid_search(&problem.with_budget(1).unwrap(), 1).unwrap();
        assert_eq!(single.evaluations_used, 1);
    }
}
