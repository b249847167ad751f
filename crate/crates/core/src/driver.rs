//! The ExperienceThinking loop.
//!
//! A run spends roughly a fraction `p` of the budget on uniform random
//! initialization, then alternates `m` times between the knowledge-driven
//! proposer ([`crate::human_experience`]) and the pruning proposer
//! ([`crate::parameter_analysis`]), each contributing a fixed batch per
//! iteration. Every proposal is evaluated and fed back into the shared
//! experience before the next iteration.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{Error, ObjectiveError, Result};
use crate::experience::{pdiffer, ExperienceSet};
use crate::human_experience::{self, HumanExperienceSettings};
use crate::parameter_analysis::{self, ParameterAnalysisSettings};
use crate::rng::{derive_seed, seeded, SeededRng};
use crate::run::{Ledger, Phase, RunResult};
use crate::space::{Configuration, SearchSpace};

/// A scoring function; higher is better.
pub trait Objective: Send + Sync {
    fn evaluate(&self, cfg: &Configuration) -> std::result::Result<f64, ObjectiveError>;
}

impl<F> Objective for F
where
    F: Fn(&Configuration) -> f64 + Send + Sync,
{
    fn evaluate(&self, cfg: &Configuration) -> std::result::Result<f64, ObjectiveError> {
        Ok(self(cfg))
    }
}

/// Wraps an objective and counts its calls.
pub struct CountingObjective<O: ?Sized> {
    calls: AtomicUsize,
    inner: Arc<O>,
}

impl<O: Objective + ?Sized> CountingObjective<O> {
    pub fn new(inner: Arc<O>) -> Self {
        Self {
            calls: AtomicUsize::new(0),
            inner,
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }
}

impl<O: Objective + ?Sized> Objective for CountingObjective<O> {
    fn evaluate(&self, cfg: &Configuration) -> std::result::Result<f64, ObjectiveError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(cfg)
    }
}

/// A budget-constrained optimization problem.
#[derive(Clone)]
pub struct Problem {
    space: SearchSpace,
    objective: Arc<dyn Objective>,
    f_ideal: f64,
    budget: usize,
    default_config: Option<Configuration>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("space", &self.space)
            .field("f_ideal", &self.f_ideal)
            .field("budget", &self.budget)
            .field("default_config", &self.default_config)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        space: SearchSpace,
        objective: Arc<dyn Objective>,
        f_ideal: f64,
        budget: usize,
    ) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidBudget("budget must be at least 1".into()));
        }
        if !f_ideal.is_finite() {
            return Err(Error::InvalidArgument(format!("ideal score {f_ideal} is not finite")));
        }
        Ok(Self {
            space,
            objective,
            f_ideal,
            budget,
            default_config: None,
        })
    }

    pub fn with_default_config(mut self, cfg: Configuration) -> Result<Self> {
        self.space.validate(&cfg)?;
        self.default_config = Some(cfg);
        Ok(self)
    }

    pub fn with_budget(&self, budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidBudget("budget must be at least 1".into()));
        }
        Ok(Self {
            budget,
            ..self.clone()
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn f_ideal(&self) -> f64 {
        self.f_ideal
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn default_config(&self) -> Option<&Configuration> {
        self.default_config.as_ref()
    }

    /// Scores the default configuration. This call is outside the budget.
    pub fn default_score(&self) -> Result<f64> {
        let cfg = self
            .default_config
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("problem has no default configuration".into()))?;
        self.objective
            .evaluate(cfg)
            .map_err(|source| Error::Objective {
                completed: 0,
                budget: self.budget,
                source,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Full,
    /// Only the knowledge-driven proposer (its batch doubles).
    HeOnly,
    /// Only the pruning proposer (its batch doubles).
    PaOnly,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::HeOnly => "he-only",
            Variant::PaOnly => "pa-only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtSettings {
    /// Approximate fraction of the budget spent on initialization, in (0, 1).
    pub p: f64,
    /// Number of proposal rounds.
    pub m: usize,
    pub seed: u64,
    pub variant: Variant,
    pub human_experience: HumanExperienceSettings,
    pub parameter_analysis: ParameterAnalysisSettings,
}

impl Default for EtSettings {
    fn default() -> Self {
        Self {
            p: 0.5,
            m: 5,
            seed: 0,
            variant: Variant::Full,
            human_experience: HumanExperienceSettings::default(),
            parameter_analysis: ParameterAnalysisSettings::default(),
        }
    }
}

impl EtSettings {
    pub fn with_p(self, p: f64) -> Self {
        Self { p, ..self }
    }

    pub fn with_m(self, m: usize) -> Self {
        Self { m, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        Self { variant, ..self }
    }
}

/// Splits a budget of `n` into `(initial_count, per_method_batch)`.
///
/// `per_method_batch = floor(n (1 - p) / (2 m))`; the remainder goes to
/// initialization so `initial_count + 2 m per_method_batch == n`.
pub fn budget_plan(n: usize, p: f64, m: usize) -> Result<(usize, usize)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidBudget(format!("p = {p} must lie in (0, 1)")));
    }
    if m == 0 {
        return Err(Error::InvalidBudget("m must be at least 1".into()));
    }
    let batch = (n as f64 * (1.0 - p) / (2 * m) as f64).floor() as usize;
    if batch == 0 {
        return Err(Error::InvalidBudget(format!(
            "n = {n}, p = {p}, m = {m} leaves no evaluations per proposal batch"
        )));
    }
    let initial = n - 2 * m * batch;
    if initial == 0 {
        return Err(Error::InvalidBudget(format!(
            "n = {n}, p = {p}, m = {m} leaves nothing for initialization"
        )));
    }
    Ok((initial, batch))
}

/// Runs ExperienceThinking. The objective is called exactly `problem.budget()`
/// times unless the space has fewer distinct configurations.
pub fn solve(problem: &Problem, settings: &EtSettings) -> Result<RunResult> {
    let (initial, batch) = budget_plan(problem.budget(), settings.p, settings.m)?;
    let space = problem.space();
    let mut ledger = Ledger::new(problem);
    let mut rng = seeded(derive_seed(settings.seed, 0));

    for _ in 0..initial {
        let Some(cfg) = space.sample_novel(ledger.experience().configurations(), &mut rng) else {
            return ledger.finish();
        };
        ledger.evaluate(cfg, Phase::Init, 0)?;
    }

    let (he_batch, pa_batch) = match settings.variant {
        Variant::Full => (batch, batch),
        Variant::HeOnly => (2 * batch, 0),
        Variant::PaOnly => (0, 2 * batch),
    };

    for iteration in 1..=settings.m {
        let exp = ledger.experience().clone();
        let he_seed = derive_seed(settings.seed, 2 * iteration as u64);
        let pa_seed = derive_seed(settings.seed, 2 * iteration as u64 + 1);
        let he = if he_batch > 0 {
            propose_or_sample(&exp, space, he_batch, &mut rng, 2, |exp| {
                human_experience::propose_with_settings(
                    exp,
                    space,
                    he_batch,
                    problem.f_ideal(),
                    &settings.human_experience,
                    he_seed,
                )
            })?
        } else {
            Vec::new()
        };
        let pa = if pa_batch > 0 {
            propose_or_sample(&exp, space, pa_batch, &mut rng, 3, |exp| {
                parameter_analysis::propose_with_settings(
                    exp,
                    space,
                    pa_batch,
                    &settings.parameter_analysis,
                    pa_seed,
                )
            })?
        } else {
            Vec::new()
        };

        for (phase, proposals, want) in [
            (Phase::HumanExperience, he, he_batch),
            (Phase::ParameterAnalysis, pa, pa_batch),
        ] {
            let mut proposals = proposals.into_iter();
            for _ in 0..want {
                let cfg = match proposals.next() {
                    Some(c) if !ledger.experience().contains(&c) => c,
                    // duplicate or missing proposal: substitute a fresh sample
                    _ => match space.sample_novel(ledger.experience().configurations(), &mut rng) {
                        Some(c) => c,
                        None => return ledger.finish(),
                    },
                };
                ledger.evaluate(cfg, phase, iteration)?;
            }
        }
    }
    debug_assert_eq!(ledger.used(), problem.budget());
    ledger.finish()
}

/// Calls a proposer when the experience is large enough for it, otherwise
/// falls back to fresh uniform samples.
fn propose_or_sample(
    exp: &ExperienceSet,
    space: &SearchSpace,
    num: usize,
    rng: &mut SeededRng,
    min_experience: usize,
    proposer: impl FnOnce(&ExperienceSet) -> Result<Vec<Configuration>>,
) -> Result<Vec<Configuration>> {
    if exp.len() >= min_experience {
        return proposer(exp);
    }
    let mut seen = exp.configurations().clone();
    let mut out = Vec::with_capacity(num);
    while out.len() < num {
        let Some(cfg) = space.sample_novel(&seen, rng) else { break };
        seen.insert(cfg.clone());
        out.push(cfg);
    }
    Ok(out)
}

/// Relative improvement of the found configuration over the default one,
/// in percent. May be negative.
pub fn pirate_value(f_opt: f64, f_def: f64) -> f64 {
    pdiffer(f_def, f_opt)
}

/// PIRate of a finished run. Scores the default configuration with one
/// call outside the budget.
pub fn pirate(result: &RunResult, problem: &Problem) -> Result<f64> {
    Ok(pirate_value(result.best_score, problem.default_score()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{HyperparameterDef, Value};

    fn unit(n: usize) -> SearchSpace {
        SearchSpace::new(
            (0..n)
                .map(|i| HyperparameterDef::real(format!("x{i}"), 0.0, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn budget_plan_examples() {
        assert_eq!(budget_plan(128, 0.5, 5).unwrap(), (68, 6));
        assert_eq!(budget_plan(10, 0.5, 1).unwrap(), (6, 2));
        assert!(matches!(budget_plan(8, 0.9, 5), Err(Error::InvalidBudget(_))));
        assert!(budget_plan(10, 0.0, 1).is_err());
        assert!(budget_plan(10, 1.0, 1).is_err());
        assert!(budget_plan(10, 0.5, 0).is_err());
        for n in 2..200 {
            for m in 1..6 {
                for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
                    if let Ok((init, batch)) = budget_plan(n, p, m) {
                        assert_eq!(init + 2 * m * batch, n);
                        assert!(init >= 1 && batch >= 1);
                    }
                }
            }
        }
    }

    #[test]
    fn pirate_examples() {
        assert!((pirate_value(0.6, 0.5) - 20.0).abs() < 1e-12);
        assert_eq!(pirate_value(0.5, 0.5), 0.0);
        assert!((pirate_value(0.45, 0.5) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn pirate_requires_default() {
        let problem = Problem::new(unit(1), Arc::new(|_: &Configuration| 1.0), 1.0, 4).unwrap();
        let r = solve(&problem, &EtSettings::default().with_m(1)).unwrap();
        assert!(pirate(&r, &problem).is_err());
        let with_default = problem
            .with_default_config(Configuration::new(vec![Value::real(0.5)]))
            .unwrap();
        assert_eq!(pirate(&r, &with_default).unwrap(), 0.0);
    }

    #[test]
    fn phase_layout() {
        let problem = Problem::new(
            unit(2),
            Arc::new(|c: &Configuration| match c.values()[0] {
                Value::Real(x) => x,
                _ => 0.0,
            }),
            1.0,
            16,
        )
        .unwrap();
        let r = solve(&problem, &EtSettings::default().with_m(2).with_seed(3)).unwrap();
        use Phase::*;
        let mut expected = vec![Init; 8];
        expected.extend([HumanExperience, HumanExperience, ParameterAnalysis, ParameterAnalysis]);
        expected.extend([HumanExperience, HumanExperience, ParameterAnalysis, ParameterAnalysis]);
        assert_eq!(r.phases(), expected);
        assert_eq!(r.log.len(), 16);
        assert_eq!(r.evaluations_used, 16);
    }

    #[test]
    fn constant_objective_keeps_first() {
        let problem = Problem::new(unit(3), Arc::new(|_: &Configuration| 0.7), 1.0, 16).unwrap();
        let r = solve(&problem, &EtSettings::default().with_m(2)).unwrap();
        assert_eq!(r.best_score, 0.7);
        assert_eq!(r.best_config, r.log[0].config);
    }

    #[test]
    fn ablation_variants_balance_the_ledger() {
        let problem = Problem::new(unit(2), Arc::new(|_: &Configuration| 0.5), 1.0, 20).unwrap();
        for variant in [Variant::HeOnly, Variant::PaOnly] {
            let r = solve(&problem, &EtSettings::default().with_m(2).with_variant(variant)).unwrap();
            assert_eq!(r.log.len(), 20);
            let other = match variant {
                Variant::HeOnly => Phase::ParameterAnalysis,
                _ => Phase::HumanExperience,
            };
            assert!(!r.phases().contains(&other));
        }
    }

    #[test]
    fn tiny_initialization_falls_back_to_sampling() {
        // n = 8, p = 0.1, m = 1: batch 3, initial 2 (too few for pruning)
        let problem = Problem::new(unit(2), Arc::new(|_: &Configuration| 0.5), 1.0, 8).unwrap();
        let r = solve(&problem, &EtSettings::default().with_p(0.1).with_m(1)).unwrap();
        assert_eq!(r.log.len(), 8);
    }

    #[test]
    fn exhausted_space_stops_early() {
        let space = SearchSpace::new(vec![HyperparameterDef::categorical("c", ["a", "b", "c"]).unwrap()]).unwrap();
        let problem = Problem::new(space, Arc::new(|_: &Configuration| 0.5), 1.0, 10).unwrap();
        let r = solve(&problem, &EtSettings::default().with_m(1)).unwrap();
        assert_eq!(r.evaluations_used, 3);
    }

    struct Failing;
    impl Objective for Failing {
        fn evaluate(&self, cfg: &Configuration) -> std::result::Result<f64, ObjectiveError> {
            match cfg.values()[0] {
                Value::Real(x) if x > 0.9 => Err("boom".into()),
                _ => Ok(0.5),
            }
        }
    }

    #[test]
    fn objective_errors_carry_progress() {
        let problem = Problem::new(unit(1), Arc::new(Failing), 1.0, 200).unwrap();
        match solve(&problem, &EtSettings::default()) {
            Err(Error::Objective { completed, budget, .. }) => {
                assert_eq!(budget, 200);
                assert!(completed < 200);
            }
            other => panic!("expected objective error, got {other:?}"),
        }
    }
}
