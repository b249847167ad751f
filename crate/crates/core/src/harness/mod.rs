//! Repeated, seeded comparisons.
//!
//! Repetition `r` of every algorithm runs with seed `base_seed + r`, so
//! algorithms are paired run by run and a run's seed does not depend on
//! which other algorithms are configured. Runs execute on a worker pool and
//! are gathered back in (entry, repetition) order, so reports do not depend
//! on scheduling.

mod report;
mod spec;

use rayon::prelude::*;

pub use report::{Metric, Report, ReportRow, RowStats, RunRecord, SUMMARY_COLUMNS, TIMING_COLUMNS};
pub use spec::{
    AblationSpec, Algorithm, AlgorithmKind, AlgorithmSpec, Axis, ExperimentSpec, ProblemSpec,
    SensitivitySpec, VariantName, SCHEMA,
};

use crate::baselines::{bayes_opt_with_settings, grid_search, random_search};
use crate::driver::{pirate_value, solve, EtSettings, Problem, Variant};
use crate::error::{Error, Result};
use crate::run::RunResult;

pub fn run_algorithm(algorithm: &Algorithm, problem: &Problem, seed: u64) -> Result<RunResult> {
    match algorithm {
        Algorithm::RandomSearch => random_search(problem, seed),
        Algorithm::GridSearch => grid_search(problem, seed),
        Algorithm::Bayes(s) => bayes_opt_with_settings(problem, s, seed),
        Algorithm::ExperienceThinking(s) => solve(problem, &s.with_seed(seed)),
    }
}

/// A labeled report row to produce. `Err` entries become error rows
/// without running anything.
pub type Entry = (String, std::result::Result<Algorithm, String>);

/// Runs every valid entry `repetitions` times and summarizes.
pub fn run_entries(
    problem: &Problem,
    entries: &[Entry],
    repetitions: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Report> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    let (metric, f_def) = match problem.default_config() {
        Some(_) => (Metric::Pirate, Some(problem.default_score()?)),
        None => (Metric::BestScore, None),
    };
    let jobs: Vec<(usize, usize)> = entries
        .iter()
        .enumerate()
        .filter(|(_, (_, a))| a.is_ok())
        .flat_map(|(e, _)| (0..repetitions).map(move |r| (e, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let results: Vec<Result<RunResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(e, r)| {
                let algorithm = entries[e].1.as_ref().expect("filtered to valid entries");
                run_algorithm(algorithm, problem, base_seed.wrapping_add(r as u64))
            })
            .collect()
    });

    let mut runs = Vec::with_capacity(jobs.len());
    for (&(e, r), result) in jobs.iter().zip(results) {
        let result = result?;
        let metric_value = match f_def {
            Some(f_def) => pirate_value(result.best_score, f_def),
            None => result.best_score,
        };
        runs.push(RunRecord {
            label: entries[e].0.clone(),
            repetition: r,
            seed: base_seed.wrapping_add(r as u64),
            result,
            metric_value,
        });
    }
    let rows = entries
        .iter()
        .map(|(label, algorithm)| match algorithm {
            Ok(a) => {
                let mine: Vec<&RunRecord> = runs.iter().filter(|r| &r.label == label).collect();
                ReportRow::from_runs(label, a.kind().tag(), problem.budget(), metric, &mine)
            }
            Err(reason) => ReportRow::failed(label, "et", problem.budget(), repetitions, metric, reason.clone()),
        })
        .collect();
    Ok(Report {
        space: problem.space().clone(),
        rows,
        runs,
    })
}

fn default_workers(spec: &ExperimentSpec, workers: Option<usize>) -> usize {
    workers
        .or(spec.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// One row per configured algorithm.
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Report> {
    if spec.algorithms.is_empty() {
        return Err(Error::spec(&spec.base_dir, "no [[algorithm]] entries to run"));
    }
    let problem = spec.build_problem()?;
    let entries: Vec<Entry> = spec
        .algorithms()?
        .into_iter()
        .map(|(name, a)| (name, Ok(a)))
        .collect();
    run_entries(&problem, &entries, spec.repetitions, spec.seed, default_workers(spec, workers))
}

/// One ExperienceThinking row per value of `axis`; the other setting comes
/// from the `[sensitivity]` section (default p = 0.5, m = 5). Values that
/// leave no evaluations per batch produce an error row.
pub fn run_sensitivity(
    spec: &ExperimentSpec,
    axis: Axis,
    values: &[f64],
    workers: Option<usize>,
) -> Result<Report> {
    if values.is_empty() {
        return Err(Error::spec(&spec.base_dir, "sensitivity sweep has no values"));
    }
    let problem = spec.build_problem()?;
    let fixed = spec.sensitivity.as_ref();
    let base = EtSettings::default();
    let base = base
        .with_p(fixed.and_then(|s| s.p).unwrap_or(base.p))
        .with_m(fixed.and_then(|s| s.m).unwrap_or(base.m));
    let entries: Vec<Entry> = values
        .iter()
        .map(|&v| {
            let (label, settings) = match axis {
                Axis::P => (format!("p={v}"), Ok(base.with_p(v))),
                Axis::M if v >= 1.0 && v.fract() == 0.0 => (format!("m={v}"), Ok(base.with_m(v as usize))),
                Axis::M => (format!("m={v}"), Err(format!("m = {v} is not a positive integer"))),
            };
            let algorithm = settings.and_then(|s| {
                let a = Algorithm::ExperienceThinking(s);
                a.check(problem.budget()).map(|_| a).map_err(|e| e.to_string())
            });
            (label, algorithm)
        })
        .collect();
    run_entries(&problem, &entries, spec.repetitions, spec.seed, default_workers(spec, workers))
}

/// Rows `full`, `he-only` and `pa-only` under identical seeds and budget.
pub fn run_ablation(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Report> {
    let problem = spec.build_problem()?;
    let fixed = spec.ablation.clone().unwrap_or_default();
    let base = EtSettings::default();
    let base = base.with_p(fixed.p.unwrap_or(base.p)).with_m(fixed.m.unwrap_or(base.m));
    let entries: Vec<Entry> = [Variant::Full, Variant::HeOnly, Variant::PaOnly]
        .into_iter()
        .map(|v| {
            let a = Algorithm::ExperienceThinking(base.with_variant(v));
            (v.name().to_string(), a.check(problem.budget()).map(|_| a).map_err(|e| e.to_string()))
        })
        .collect();
    run_entries(&problem, &entries, spec.repetitions, spec.seed, default_workers(spec, workers))
}
