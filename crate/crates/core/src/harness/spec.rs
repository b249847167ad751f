//! Experiment documents.
//!
//! ```toml
//! schema = "chpo-experiment/1"
//! budget = 128
//! repetitions = 30        # default 50
//! seed = 0
//!
//! [problem]
//! kind = "feature-subset"
//! registry = "../data/datasets.toml"
//! dataset = "zoo"
//!
//! [[algorithm]]
//! name = "et"
//! kind = "et"
//! p = 0.5
//! m = 5
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::baselines::BoSettings;
use crate::driver::{budget_plan, EtSettings, Problem, Variant};
use crate::error::{Error, Result};
use crate::objectives::{
    load_csv, DatasetRegistry, FeatureSubsetObjective, FeatureSubsetSettings, SyntheticFunction,
    SyntheticObjective,
};
use crate::space::{Configuration, ParamSpec, SearchSpace};

pub const SCHEMA: &str = "chpo-experiment/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: String,
    pub name: Option<String>,
    pub budget: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub problem: ProblemSpec,
    #[serde(default, rename = "algorithm")]
    pub algorithms: Vec<AlgorithmSpec>,
    pub sensitivity: Option<SensitivitySpec>,
    pub ablation: Option<AblationSpec>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_repetitions() -> usize {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Synthetic {
        function: String,
        dims: Option<usize>,
        #[serde(default)]
        dummy_dims: usize,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        noise_seed: u64,
        /// Default configuration, one value per parameter.
        default: Option<Vec<toml::Value>>,
        /// Replaces the generated unit-cube space.
        #[serde(rename = "param")]
        params: Option<Vec<ParamSpec>>,
    },
    FeatureSubset {
        dataset: Option<String>,
        registry: Option<PathBuf>,
        path: Option<PathBuf>,
        label: Option<String>,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_folds")]
        folds: usize,
        #[serde(default = "default_group_size")]
        group_size: usize,
        #[serde(default)]
        fold_seed: u64,
    },
}

fn default_k() -> usize {
    5
}
fn default_folds() -> usize {
    3
}
fn default_group_size() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Rs,
    Gs,
    Bo,
    Et,
}

impl AlgorithmKind {
    pub fn tag(self) -> &'static str {
        match self {
            AlgorithmKind::Rs => "rs",
            AlgorithmKind::Gs => "gs",
            AlgorithmKind::Bo => "bo",
            AlgorithmKind::Et => "et",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    Full,
    HeOnly,
    PaOnly,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::Full => Variant::Full,
            VariantName::HeOnly => Variant::HeOnly,
            VariantName::PaOnly => Variant::PaOnly,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    pub kind: AlgorithmKind,
    pub p: Option<f64>,
    pub m: Option<usize>,
    pub variant: Option<VariantName>,
    pub length_scale: Option<f64>,
    pub candidates: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    P,
    M,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "p" => Some(Axis::P),
            "m" => Some(Axis::M),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::M => "m",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub p: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationSpec {
    pub p: Option<f64>,
    pub m: Option<usize>,
}

/// A runnable algorithm with its settings; the seed is supplied per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    RandomSearch,
    GridSearch,
    Bayes(BoSettings),
    ExperienceThinking(EtSettings),
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::RandomSearch => AlgorithmKind::Rs,
            Algorithm::GridSearch => AlgorithmKind::Gs,
            Algorithm::Bayes(_) => AlgorithmKind::Bo,
            Algorithm::ExperienceThinking(_) => AlgorithmKind::Et,
        }
    }

    /// Budget-dependent validity, checked before any objective call.
    pub fn check(&self, budget: usize) -> Result<()> {
        match self {
            Algorithm::ExperienceThinking(s) => budget_plan(budget, s.p, s.m).map(|_| ()),
            Algorithm::Bayes(_) if budget < 2 => {
                Err(Error::InvalidBudget("Bayesian optimization needs a budget of at least 2".into()))
            }
            _ => Ok(()),
        }
    }
}

impl AlgorithmSpec {
    pub fn build(&self) -> Result<Algorithm> {
        let et_only = |field: &str, present: bool| {
            if present && self.kind != AlgorithmKind::Et {
                Err(Error::InvalidArgument(format!(
                    "algorithm `{}`: `{field}` applies only to kind \"et\"",
                    self.name
                )))
            } else {
                Ok(())
            }
        };
        et_only("p", self.p.is_some())?;
        et_only("m", self.m.is_some())?;
        et_only("variant", self.variant.is_some())?;
        if self.kind != AlgorithmKind::Bo && (self.length_scale.is_some() || self.candidates.is_some()) {
            return Err(Error::InvalidArgument(format!(
                "algorithm `{}`: `length_scale` and `candidates` apply only to kind \"bo\"",
                self.name
            )));
        }
        Ok(match self.kind {
            AlgorithmKind::Rs => Algorithm::RandomSearch,
            AlgorithmKind::Gs => Algorithm::GridSearch,
            AlgorithmKind::Bo => {
                let d = BoSettings::default();
                Algorithm::Bayes(BoSettings {
                    length_scale: self.length_scale.unwrap_or(d.length_scale),
                    uniform_candidates: self.candidates.unwrap_or(d.uniform_candidates),
                    ..d
                })
            }
            AlgorithmKind::Et => {
                let d = EtSettings::default();
                Algorithm::ExperienceThinking(EtSettings {
                    p: self.p.unwrap_or(d.p),
                    m: self.m.unwrap_or(d.m),
                    variant: self.variant.map_or(Variant::Full, Variant::from),
                    ..d
                })
            }
        })
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let origin = base_dir.join("<spec>");
        let mut spec: Self = toml::from_str(text).map_err(|e| Error::spec(&origin, e.to_string()))?;
        spec.base_dir = base_dir.to_path_buf();
        spec.validate().map_err(|e| Error::spec(&origin, e.to_string()))?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::spec(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Spec { message, .. } => Error::spec(path, message),
            other => other,
        })
    }

    /// Structural checks that need no data.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema `{}` (expected `{SCHEMA}`)",
                self.schema
            )));
        }
        if self.budget < 2 {
            return Err(Error::InvalidArgument("budget must be at least 2".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        let mut names = HashSet::new();
        for a in &self.algorithms {
            if !names.insert(a.name.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate algorithm name `{}`", a.name)));
            }
            a.build()?.check(self.budget)?;
        }
        if let ProblemSpec::FeatureSubset { dataset, path, label, .. } = &self.problem {
            match (dataset, path) {
                (Some(_), None) if label.is_none() => {}
                (None, Some(_)) if label.is_some() => {}
                _ => {
                    return Err(Error::InvalidArgument(
                        "feature-subset problems name either `dataset` (with `registry`) or `path` with `label`"
                            .into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn algorithms(&self) -> Result<Vec<(String, Algorithm)>> {
        self.algorithms.iter().map(|a| Ok((a.name.clone(), a.build()?))).collect()
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_relative() {
            self.base_dir.join(p)
        } else {
            p.to_path_buf()
        }
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|p| self.resolve(p))
    }

    /// Builds the problem. Data problems fail with [`Error::Dataset`]; every
    /// other failure is a spec error.
    pub fn build_problem(&self) -> Result<Problem> {
        let spec_err = |e: Error| match e {
            Error::Dataset(_) => e,
            other => Error::spec(self.base_dir.join("<spec>"), other.to_string()),
        };
        self.build_problem_inner().map_err(spec_err)
    }

    fn build_problem_inner(&self) -> Result<Problem> {
        match &self.problem {
            ProblemSpec::Synthetic {
                function,
                dims,
                dummy_dims,
                noise_sd,
                noise_seed,
                default,
                params,
            } => {
                let f = SyntheticFunction::parse(function, *dims)?;
                let obj = match params {
                    Some(p) => SyntheticObjective::with_space(f, SearchSpace::from_param_specs(p)?)?,
                    None => SyntheticObjective::new(f, *dummy_dims),
                }
                .with_noise(*noise_sd, *noise_seed)?;
                let space = obj.space().clone();
                let f_ideal = obj.f_ideal();
                let problem = Problem::new(space.clone(), Arc::new(obj), f_ideal, self.budget)?;
                match default {
                    Some(values) => problem.with_default_config(parse_config(&space, values)?),
                    None => Ok(problem),
                }
            }
            ProblemSpec::FeatureSubset {
                dataset,
                registry,
                path,
                label,
                k,
                folds,
                group_size,
                fold_seed,
            } => {
                let ds = match (dataset, path, label) {
                    (Some(name), _, _) => {
                        let reg = registry
                            .as_deref()
                            .ok_or_else(|| Error::InvalidArgument("`dataset` needs a `registry` file".into()))?;
                        DatasetRegistry::from_file(&self.resolve(reg))?.load(name)?
                    }
                    (None, Some(p), Some(l)) => load_csv(&self.resolve(p), l)?,
                    _ => unreachable!("validated"),
                };
                let obj = FeatureSubsetObjective::new(
                    Arc::new(ds),
                    FeatureSubsetSettings {
                        group_size: *group_size,
                        k: *k,
                        folds: *folds,
                        fold_seed: *fold_seed,
                    },
                )?;
                let default = obj.default_config();
                let space = obj.space().clone();
                let f_ideal = obj.f_ideal();
                Problem::new(space, Arc::new(obj), f_ideal, self.budget)?.with_default_config(default)
            }
        }
    }
}

fn parse_config(space: &SearchSpace, values: &[toml::Value]) -> Result<Configuration> {
    if values.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: values.len(),
        });
    }
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let text = match v {
                toml::Value::String(s) => s.clone(),
                toml::Value::Integer(n) => n.to_string(),
                toml::Value::Float(x) => x.to_string(),
                other => {
                    return Err(Error::InvalidArgument(format!("unsupported default value {other}")));
                }
            };
            space.parse_value(i, &text)
        })
        .collect::<Result<Vec<_>>>()
        .map(Configuration::new)
}
