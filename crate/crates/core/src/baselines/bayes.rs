//! Gaussian-process Bayesian optimization.
//!
//! The surrogate uses a squared-exponential kernel over normalized
//! coordinates with fixed hyperparameters and standardized scores. Each
//! acquisition step maximizes expected improvement over uniform draws plus
//! Gaussian perturbations of the incumbent.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, Normal as NormalSampler};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::driver::Problem;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::run::{Ledger, Phase, RunResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoSettings {
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub uniform_candidates: usize,
    pub local_candidates: usize,
    /// Standard deviation of incumbent perturbations in normalized units.
    pub local_sd: f64,
}

impl Default for BoSettings {
    fn default() -> Self {
        Self {
            length_scale: 0.2,
            signal_variance: 1.0,
            noise_variance: 1e-6,
            uniform_candidates: 1000,
            local_candidates: 100,
            local_sd: 0.05,
        }
    }
}

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GpSurrogate {
    points: Vec<Vec<f64>>,
    targets: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    length_scale: f64,
    signal_variance: f64,
}

impl GpSurrogate {
    /// Fits on raw scores, which are standardized internally (a constant
    /// score vector is only centered).
    pub fn fit(points: &[Vec<f64>], scores: &[f64], settings: &BoSettings) -> Result<Self> {
        if points.is_empty() || points.len() != scores.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points for {} scores",
                points.len(),
                scores.len()
            )));
        }
        let n = points.len();
        let mean = scores.iter().sum::<f64>() / n as f64;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        let targets: Vec<f64> = scores.iter().map(|s| (s - mean) / sd).collect();

        let k = |a: &[f64], b: &[f64]| kernel(a, b, settings.length_scale, settings.signal_variance);
        let gram = DMatrix::from_fn(n, n, |i, j| k(&points[i], &points[j]));
        let mut jitter = 0.0;
        let chol = loop {
            let mut m = gram.clone();
            for i in 0..n {
                m[(i, i)] += settings.noise_variance + jitter;
            }
            if let Some(c) = Cholesky::new(m) {
                break c;
            }
            jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
            if jitter > JITTER_MAX * (1.0 + 1e-9) {
                return Err(Error::Numerical("covariance matrix is not positive definite".into()));
            }
        };
        let alpha = chol.solve(&DVector::from_column_slice(&targets));
        Ok(Self {
            points: points.to_vec(),
            targets,
            chol,
            alpha,
            length_scale: settings.length_scale,
            signal_variance: settings.signal_variance,
        })
    }

    pub fn standardized_targets(&self) -> &[f64] {
        &self.targets
    }

    /// Posterior mean and variance in standardized units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let ks = DVector::from_iterator(
            self.points.len(),
            self.points
                .iter()
                .map(|p| kernel(p, x, self.length_scale, self.signal_variance)),
        );
        let mean = ks.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&ks)
            .expect("cholesky factor has a positive diagonal");
        let var = (self.signal_variance - v.norm_squared()).max(0.0);
        (mean, var)
    }
}

fn kernel(a: &[f64], b: &[f64], length_scale: f64, signal_variance: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    signal_variance * (-d2 / (2.0 * length_scale * length_scale)).exp()
}

/// Expected improvement of a maximization target over `best`. With zero
/// spread it reduces to `max(mean - best, 0)`.
pub fn expected_improvement(mean: f64, sd: f64, best: f64) -> f64 {
    if sd.is_nan() || sd <= 0.0 {
        return (mean - best).max(0.0);
    }
    let z = (mean - best) / sd;
    let n = Normal::standard();
    ((mean - best) * n.cdf(z) + sd * n.pdf(z)).max(0.0)
}

pub fn bayes_opt(problem: &Problem, seed: u64) -> Result<RunResult> {
    bayes_opt_with_settings(problem, &BoSettings::default(), seed)
}

/// Spends `floor(N / 2)` evaluations on uniform samples, then one
/// EI-maximizing configuration per remaining evaluation.
pub fn bayes_opt_with_settings(problem: &Problem, settings: &BoSettings, seed: u64) -> Result<RunResult> {
    if problem.budget() < 2 {
        return Err(Error::InvalidBudget("Bayesian optimization needs a budget of at least 2".into()));
    }
    let space = problem.space();
    let warm = problem.budget() / 2;
    let mut rng = seeded(derive_seed(seed, 0));
    let mut ledger = Ledger::new(problem);
    for _ in 0..warm {
        let Some(cfg) = space.sample_novel(ledger.experience().configurations(), &mut rng) else {
            return ledger.finish();
        };
        ledger.evaluate(cfg, Phase::WarmStart, 0)?;
    }

    let perturb = NormalSampler::new(0.0, settings.local_sd)
        .map_err(|e| Error::InvalidArgument(format!("local_sd: {e}")))?;
    let mut iteration = 0;
    while ledger.remaining() > 0 {
        iteration += 1;
        let exp = ledger.experience();
        let points = exp
            .entries()
            .iter()
            .map(|e| space.normalize(&e.config).map(|c| c.into_inner()))
            .collect::<Result<Vec<_>>>()?;
        let scores: Vec<f64> = exp.entries().iter().map(|e| e.score).collect();
        let gp = GpSurrogate::fit(&points, &scores, settings)?;
        let best_std = gp.standardized_targets().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let incumbent = space.normalize(&exp.best().expect("warm start is non-empty").config)?;

        let mut pick = None;
        let mut pick_ei = f64::NEG_INFINITY;
        let mut consider = |cfg: crate::space::Configuration| -> Result<()> {
            if exp.contains(&cfg) {
                return Ok(());
            }
            let (mean, var) = gp.predict(space.normalize(&cfg)?.coords());
            let ei = expected_improvement(mean, var.sqrt(), best_std);
            if ei > pick_ei {
                pick_ei = ei;
                pick = Some(cfg);
            }
            Ok(())
        };
        for _ in 0..settings.uniform_candidates {
            consider(space.sample_uniform(&mut rng))?;
        }
        for _ in 0..settings.local_candidates {
            let coords: Vec<f64> = incumbent
                .coords()
                .iter()
                .map(|u| u + perturb.sample(&mut rng))
                .collect();
            consider(space.denormalize(&coords)?)?;
        }
        let cfg = match pick {
            Some(c) => c,
            None => match space.sample_novel(exp.configurations(), &mut rng) {
                Some(c) => c,
                None => break,
            },
        };
        ledger.evaluate(cfg, Phase::Acquisition, iteration)?;
    }
    ledger.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Configuration, HyperparameterDef, SearchSpace, Value};
    use std::sync::Arc;

    #[test]
    fn interpolates_observations() {
        let settings = BoSettings {
            noise_variance: 1e-8,
            ..BoSettings::default()
        };
        let pts = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.8, 0.4], vec![0.3, 0.6]];
        let ys = [1.0, 3.0, -2.0, 0.5];
        let gp = GpSurrogate::fit(&pts, &ys, &settings).unwrap();
        for (p, t) in pts.iter().zip(gp.standardized_targets()) {
            let (m, v) = gp.predict(p);
            assert!((m - t).abs() < 1e-6, "{m} vs {t}");
            assert!(v < 1e-6);
        }
        let mean: f64 = gp.standardized_targets().iter().sum();
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn ei_properties() {
        assert_eq!(expected_improvement(0.3, 0.0, 0.5), 0.0);
        assert_eq!(expected_improvement(0.5, 0.0, 0.5), 0.0);
        assert!((expected_improvement(0.7, 0.0, 0.5) - 0.2).abs() < 1e-15);
        // closed form at mean == best: sd / sqrt(2 pi)
        let v = expected_improvement(1.0, 2.0, 1.0);
        assert!((v - 2.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        for m in [-3.0, -0.5, 0.0, 0.4, 2.0] {
            for s in [1e-9, 0.1, 1.0, 5.0] {
                assert!(expected_improvement(m, s, 0.5) >= 0.0);
            }
        }
    }

    #[test]
    fn duplicate_points_need_jitter_or_fail() {
        let pts = vec![vec![0.5], vec![0.5]];
        let tight = BoSettings {
            noise_variance: 0.0,
            ..BoSettings::default()
        };
        // jitter rescues an exactly singular matrix
        assert!(GpSurrogate::fit(&pts, &[0.0, 1.0], &tight).is_ok());
    }

    #[test]
    fn ledger_split() {
        let space = SearchSpace::new(vec![HyperparameterDef::real("x", 0.0, 1.0).unwrap()]).unwrap();
        let f = |c: &Configuration| match c.values()[0] {
            Value::Real(x) => 1.0 - (x - 0.3).powi(2),
            _ => 0.0,
        };
        let problem = Problem::new(space, Arc::new(f), 1.0, 4).unwrap();
        let r = bayes_opt(&problem, 9).unwrap();
        let phases: Vec<_> = r.phases();
        assert_eq!(phases, vec![Phase::WarmStart, Phase::WarmStart, Phase::Acquisition, Phase::Acquisition]);
        assert!(bayes_opt(&problem.with_budget(1).unwrap(), 0).is_err());
    }
}
