//! Evaluation ledger shared by every algorithm.
//!
//! All objective calls go through [`Ledger::evaluate`], which enforces the hard
//! budget, rejects repeated configurations and keeps objective time apart from
//! the solver's own analysis time.

use std::fmt;
use std::time::{Duration, Instant};

use crate::driver::Problem;
use crate::error::{Error, Result};
use crate::experience::ExperienceSet;
use crate::space::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Init,
    HumanExperience,
    ParameterAnalysis,
    Random,
    Grid,
    WarmStart,
    Acquisition,
}

impl Phase {
    pub fn tag(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::HumanExperience => "he",
            Phase::ParameterAnalysis => "pa",
            Phase::Random => "rs",
            Phase::Grid => "gs",
            Phase::WarmStart => "bo-init",
            Phase::Acquisition => "bo",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub config: Configuration,
    pub score: f64,
    pub phase: Phase,
    pub iteration: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_config: Configuration,
    pub best_score: f64,
    pub log: Vec<Evaluation>,
    /// Wall time spent outside objective calls.
    pub analysis_time: Duration,
    pub evaluations_used: usize,
    pub budget: usize,
}

impl RunResult {
    /// Running maximum of the logged scores.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.log
            .iter()
            .scan(f64::NEG_INFINITY, |best, e| {
                *best = best.max(e.score);
                Some(*best)
            })
            .collect()
    }

    pub fn phases(&self) -> Vec<Phase> {
        self.log.iter().map(|e| e.phase).collect()
    }
}

pub(crate) struct Ledger<'a> {
    problem: &'a Problem,
    experience: ExperienceSet,
    log: Vec<Evaluation>,
    objective_time: Duration,
    started: Instant,
}

impl<'a> Ledger<'a> {
    pub(crate) fn new(problem: &'a Problem) -> Self {
        Self {
            problem,
            experience: ExperienceSet::new(),
            log: Vec::with_capacity(problem.budget()),
            objective_time: Duration::ZERO,
            started: Instant::now(),
        }
    }

    pub(crate) fn experience(&self) -> &ExperienceSet {
        &self.experience
    }

    pub(crate) fn used(&self) -> usize {
        self.log.len()
    }

    pub(crate) fn remaining(&self) -> usize {
        self.problem.budget() - self.log.len()
    }

    pub(crate) fn evaluate(&mut self, cfg: Configuration, phase: Phase, iteration: usize) -> Result<f64> {
        if self.remaining() == 0 {
            return Err(Error::InvalidBudget(format!(
                "evaluation budget of {} already spent",
                self.problem.budget()
            )));
        }
        self.problem.space().validate(&cfg)?;
        if self.experience.contains(&cfg) {
            return Err(Error::DuplicateConfiguration);
        }
        let t0 = Instant::now();
        let outcome = self.problem.objective().evaluate(&cfg);
        self.objective_time += t0.elapsed();
        let objective_error = |source| Error::Objective {
            completed: self.log.len(),
            budget: self.problem.budget(),
            source,
        };
        let score = outcome.map_err(objective_error)?;
        if !score.is_finite() {
            return Err(objective_error(format!("non-finite score {score}").into()));
        }
        self.experience.push(cfg.clone(), score)?;
        self.log.push(Evaluation {
            config: cfg,
            score,
            phase,
            iteration,
        });
        Ok(score)
    }

    pub(crate) fn finish(self) -> Result<RunResult> {
        let total = self.started.elapsed();
        let best = self
            .experience
            .best()
            .ok_or_else(|| Error::InvalidBudget("no configuration was evaluated".into()))?;
        Ok(RunResult {
            best_config: best.config.clone(),
            best_score: best.score,
            evaluations_used: self.log.len(),
            budget: self.problem.budget(),
            analysis_time: total.saturating_sub(self.objective_time),
            log: self.log,
        })
    }
}
