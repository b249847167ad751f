//! Report tables.
//!
//! The report body is `summary.csv` plus `runs.csv`; both are a pure function
//! of the experiment and its seeds. Wall-clock analysis time goes to
//! `timing.csv` so the body stays byte-stable across reruns.

use std::path::Path;

use crate::error::{Error, Result};
use crate::run::RunResult;
use crate::space::SearchSpace;

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "label",
    "algorithm",
    "budget",
    "repetitions",
    "metric",
    "mean",
    "stddev",
    "mean_best_score",
    "mean_evaluations",
    "status",
];

pub const TIMING_COLUMNS: [&str; 4] = ["label", "repetitions", "mean_analysis_s", "total_analysis_s"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Percent improvement over the default configuration.
    Pirate,
    /// Best score found, used when there is no default configuration.
    BestScore,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::Pirate => "pirate",
            Metric::BestScore => "best_score",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub label: String,
    pub repetition: usize,
    pub seed: u64,
    pub result: RunResult,
    pub metric_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowStats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub stddev: f64,
    pub mean_best_score: f64,
    pub mean_evaluations: f64,
    pub mean_analysis_secs: f64,
    pub total_analysis_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub algorithm: String,
    pub budget: usize,
    pub repetitions: usize,
    pub metric: Metric,
    /// `Err` holds the reason the row could not run.
    pub outcome: std::result::Result<RowStats, String>,
}

impl ReportRow {
    pub fn from_runs(label: &str, algorithm: &str, budget: usize, metric: Metric, runs: &[&RunRecord]) -> Self {
        let n = runs.len() as f64;
        let mean_of = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
        let mean = mean_of(&|r| r.metric_value);
        let stddev = if runs.len() > 1 {
            (runs.iter().map(|r| (r.metric_value - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let total_analysis_secs: f64 = runs.iter().map(|r| r.result.analysis_time.as_secs_f64()).sum();
        Self {
            label: label.to_string(),
            algorithm: algorithm.to_string(),
            budget,
            repetitions: runs.len(),
            metric,
            outcome: Ok(RowStats {
                mean,
                stddev,
                mean_best_score: mean_of(&|r| r.result.best_score),
                mean_evaluations: mean_of(&|r| r.result.evaluations_used as f64),
                mean_analysis_secs: total_analysis_secs / n,
                total_analysis_secs,
            }),
        }
    }

    pub fn failed(label: &str, algorithm: &str, budget: usize, repetitions: usize, metric: Metric, reason: String) -> Self {
        Self {
            label: label.to_string(),
            algorithm: algorithm.to_string(),
            budget,
            repetitions,
            metric,
            outcome: Err(reason),
        }
    }

    pub fn stats(&self) -> Option<&RowStats> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub space: SearchSpace,
    pub rows: Vec<ReportRow>,
    pub runs: Vec<RunRecord>,
}

fn to_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

impl Report {
    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn runs_for<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.label == label)
    }

    pub fn total_evaluations(&self) -> usize {
        self.runs.iter().map(|r| r.result.evaluations_used).sum()
    }

    pub fn summary_csv(&self) -> String {
        to_string(|w| {
            w.write_record(SUMMARY_COLUMNS)?;
            for row in &self.rows {
                let head = [
                    row.label.clone(),
                    row.algorithm.clone(),
                    row.budget.to_string(),
                    row.repetitions.to_string(),
                    row.metric.tag().to_string(),
                ];
                let tail = match &row.outcome {
                    Ok(s) => [
                        fixed(s.mean),
                        fixed(s.stddev),
                        fixed(s.mean_best_score),
                        fixed(s.mean_evaluations),
                        "ok".to_string(),
                    ],
                    Err(reason) => [
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        format!("error: {reason}"),
                    ],
                };
                w.write_record(head.iter().chain(&tail))?;
            }
            Ok(())
        })
    }

    /// One record per evaluation with the configuration spelled out per
    /// parameter and the running best.
    pub fn runs_csv(&self) -> String {
        to_string(|w| {
            let mut header: Vec<String> = ["label", "repetition", "seed", "eval", "iteration", "phase"]
                .map(String::from)
                .to_vec();
            header.extend(self.space.params().iter().map(|p| p.name().to_string()));
            header.extend(["score".to_string(), "best_so_far".to_string()]);
            w.write_record(&header)?;
            for run in &self.runs {
                for (i, (e, best)) in run.result.log.iter().zip(run.result.best_so_far()).enumerate() {
                    let mut rec = vec![
                        run.label.clone(),
                        run.repetition.to_string(),
                        run.seed.to_string(),
                        i.to_string(),
                        e.iteration.to_string(),
                        e.phase.tag().to_string(),
                    ];
                    rec.extend(
                        e.config
                            .values()
                            .iter()
                            .enumerate()
                            .map(|(k, v)| self.space.format_value(k, v)),
                    );
                    rec.push(e.score.to_string());
                    rec.push(best.to_string());
                    w.write_record(&rec)?;
                }
            }
            Ok(())
        })
    }

    pub fn timing_csv(&self) -> String {
        to_string(|w| {
            w.write_record(TIMING_COLUMNS)?;
            for row in &self.rows {
                if let Ok(s) = &row.outcome {
                    w.write_record([
                        row.label.clone(),
                        row.repetitions.to_string(),
                        format!("{:.3}", s.mean_analysis_secs),
                        format!("{:.3}", s.total_analysis_secs),
                    ])?;
                }
            }
            Ok(())
        })
    }

    /// Writes `summary.csv`, `runs.csv` and `timing.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, body) in [
            ("summary.csv", self.summary_csv()),
            ("runs.csv", self.runs_csv()),
            ("timing.csv", self.timing_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(&path))?;
        }
        Ok(())
    }
}
