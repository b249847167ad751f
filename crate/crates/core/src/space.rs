//! Hyperparameter domains, configurations and the min-max normalization that
//! maps every configuration into the unit cube.
//!
//! Range parameters normalize as `(v - lo) / (hi - lo)`. Categorical parameters
//! normalize their 0-based option index over `m - 1`, so the first option sits
//! at 0 and the last at 1. Degenerate domains (`lo == hi`, a single option)
//! normalize to 0. Denormalization rounds integer and categorical coordinates
//! to the nearest admissible value, ties to even.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;

use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Integer { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
    Categorical { options: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperparameterDef {
    name: String,
    domain: Domain,
}

impl HyperparameterDef {
    pub fn integer(name: impl Into<String>, lo: i64, hi: i64) -> Result<Self> {
        let name = name.into();
        if lo > hi {
            return Err(Error::InvalidSpace(format!("`{name}`: lo {lo} > hi {hi}")));
        }
        Ok(Self {
            name,
            domain: Domain::Integer { lo, hi },
        })
    }

    pub fn real(name: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        let name = name.into();
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidSpace(format!("`{name}`: bad bounds [{lo}, {hi}]")));
        }
        Ok(Self {
            name,
            domain: Domain::Real { lo, hi },
        })
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        options: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let options: Vec<String> = options.into_iter().map(Into::into).collect();
        if options.is_empty() {
            return Err(Error::InvalidSpace(format!("`{name}`: no options")));
        }
        let mut seen = HashSet::new();
        for o in &options {
            if !seen.insert(o.as_str()) {
                return Err(Error::InvalidSpace(format!("`{name}`: duplicate option `{o}`")));
            }
        }
        Ok(Self {
            name,
            domain: Domain::Categorical { options },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of admissible values, `None` for a non-degenerate real range.
    pub fn cardinality(&self) -> Option<u128> {
        match &self.domain {
            Domain::Integer { lo, hi } => Some((*hi as i128 - *lo as i128 + 1) as u128),
            Domain::Real { lo, hi } => (lo == hi).then_some(1),
            Domain::Categorical { options } => Some(options.len() as u128),
        }
    }

    fn contains(&self, value: &Value) -> bool {
        match (&self.domain, value) {
            (Domain::Integer { lo, hi }, Value::Int(v)) => lo <= v && v <= hi,
            (Domain::Real { lo, hi }, Value::Real(v)) => v.is_finite() && *lo <= *v && *v <= *hi,
            (Domain::Categorical { options }, Value::Category(k)) => *k < options.len(),
            _ => false,
        }
    }

    fn normalize_value(&self, value: &Value) -> f64 {
        match (&self.domain, value) {
            (Domain::Integer { lo, hi }, Value::Int(v)) if hi > lo => {
                (*v - *lo) as f64 / (*hi - *lo) as f64
            }
            (Domain::Real { lo, hi }, Value::Real(v)) if hi > lo => {
                ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
            (Domain::Categorical { options }, Value::Category(k)) if options.len() > 1 => {
                *k as f64 / (options.len() - 1) as f64
            }
            _ => 0.0,
        }
    }

    fn denormalize_value(&self, u: f64) -> Value {
        let u = if u.is_nan() { 0.0 } else { u.clamp(0.0, 1.0) };
        match &self.domain {
            Domain::Integer { lo, hi } => {
                let span = (*hi - *lo) as f64;
                let v = *lo + (u * span).round_ties_even() as i64;
                Value::Int(v.clamp(*lo, *hi))
            }
            Domain::Real { lo, hi } => Value::real((lo + u * (hi - lo)).clamp(*lo, *hi)),
            Domain::Categorical { options } => {
                let k = (u * (options.len() - 1) as f64).round_ties_even() as usize;
                Value::Category(k.min(options.len() - 1))
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match &self.domain {
            Domain::Integer { lo, hi } => Value::Int(rng.random_range(*lo..=*hi)),
            Domain::Real { lo, hi } => {
                if lo == hi {
                    Value::real(*lo)
                } else {
                    Value::real(rng.random_range(*lo..=*hi))
                }
            }
            Domain::Categorical { options } => Value::Category(rng.random_range(0..options.len())),
        }
    }

    fn format_value(&self, value: &Value) -> String {
        match (&self.domain, value) {
            (Domain::Categorical { options }, Value::Category(k)) => options
                .get(*k)
                .cloned()
                .unwrap_or_else(|| format!("#{k}")),
            (_, Value::Int(v)) => v.to_string(),
            (_, Value::Real(v)) => v.to_string(),
            (_, Value::Category(k)) => format!("#{k}"),
        }
    }

    fn parse_value(&self, text: &str) -> Result<Value> {
        let text = text.trim();
        let bad = || Error::OutOfDomain {
            param: self.name.clone(),
            value: text.to_string(),
        };
        let value = match &self.domain {
            Domain::Integer { .. } => Value::Int(text.parse().map_err(|_| bad())?),
            Domain::Real { .. } => Value::real(text.parse().map_err(|_| bad())?),
            Domain::Categorical { options } => {
                Value::Category(options.iter().position(|o| o == text).ok_or_else(bad)?)
            }
        };
        if self.contains(&value) {
            Ok(value)
        } else {
            Err(bad())
        }
    }
}

/// One coordinate of a configuration. Categorical values hold the option index.
#[derive(Debug, Clone, Copy)]
pub enum Value {
    Int(i64),
    Real(f64),
    Category(usize),
}

impl Value {
    /// Real value with `-0.0` folded into `0.0` so equality and hashing agree.
    pub fn real(v: f64) -> Self {
        Value::Real(if v == 0.0 { 0.0 } else { v })
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Category(a), Value::Category(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Int(v) => (0u8, *v).hash(state),
            Value::Real(v) => (1u8, v.to_bits()).hash(state),
            Value::Category(k) => (2u8, *k).hash(state),
        }
    }
}

/// A point of the search space, one value per hyperparameter in space order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<Value>);

impl Configuration {
    pub fn new(values: Vec<Value>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A configuration mapped into `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedConfiguration(Vec<f64>);

impl NormalizedConfiguration {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    params: Vec<HyperparameterDef>,
}

impl SearchSpace {
    pub fn new(params: Vec<HyperparameterDef>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("space has no hyperparameters".into()));
        }
        let mut names = HashSet::new();
        for p in &params {
            if !names.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate name `{}`", p.name)));
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[HyperparameterDef] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    /// Total number of distinct configurations, `None` if any real range is
    /// non-degenerate or the count overflows.
    pub fn cardinality(&self) -> Option<u128> {
        self.params
            .iter()
            .try_fold(1u128, |acc, p| p.cardinality().and_then(|c| acc.checked_mul(c)))
    }

    pub fn validate(&self, cfg: &Configuration) -> Result<()> {
        if cfg.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: cfg.len(),
            });
        }
        for (p, v) in self.params.iter().zip(cfg.values()) {
            if !p.contains(v) {
                return Err(Error::OutOfDomain {
                    param: p.name.clone(),
                    value: format!("{v:?}"),
                });
            }
        }
        Ok(())
    }

    pub fn normalize(&self, cfg: &Configuration) -> Result<NormalizedConfiguration> {
        self.validate(cfg)?;
        Ok(NormalizedConfiguration(
            self.params
                .iter()
                .zip(cfg.values())
                .map(|(p, v)| p.normalize_value(v))
                .collect(),
        ))
    }

    /// Maps unit-cube coordinates back to a configuration. Coordinates are
    /// clipped to `[0, 1]` first (NaN reads as 0), so this is total.
    pub fn denormalize(&self, coords: &[f64]) -> Result<Configuration> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        Ok(Configuration(
            self.params
                .iter()
                .zip(coords)
                .map(|(p, &u)| p.denormalize_value(u))
                .collect(),
        ))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        Configuration(self.params.iter().map(|p| p.sample(rng)).collect())
    }

    /// Draws a configuration not contained in `seen`.
    ///
    /// Rejection sampling first; if that stalls on a small finite space the
    /// remaining points are enumerated. Returns `None` once the space is
    /// exhausted.
    pub fn sample_novel<R: Rng + ?Sized>(
        &self,
        seen: &HashSet<Configuration>,
        rng: &mut R,
    ) -> Option<Configuration> {
        const REJECTION_TRIES: usize = 1000;
        const ENUMERATION_LIMIT: u128 = 1 << 20;
        for _ in 0..REJECTION_TRIES {
            let cfg = self.sample_uniform(rng);
            if !seen.contains(&cfg) {
                return Some(cfg);
            }
        }
        let total = self.cardinality()?;
        if total > ENUMERATION_LIMIT {
            return None;
        }
        let unseen: Vec<u128> = (0..total)
            .filter(|&i| !seen.contains(&self.nth_point(i)))
            .collect();
        if unseen.is_empty() {
            return None;
        }
        Some(self.nth_point(unseen[rng.random_range(0..unseen.len())]))
    }

    /// Mixed-radix enumeration of a finite space, first parameter fastest.
    fn nth_point(&self, mut index: u128) -> Configuration {
        let values = self
            .params
            .iter()
            .map(|p| {
                let card = p.cardinality().unwrap_or(1);
                let k = index % card;
                index /= card;
                match &p.domain {
                    Domain::Integer { lo, .. } => Value::Int(*lo + k as i64),
                    Domain::Real { lo, .. } => Value::real(*lo),
                    Domain::Categorical { .. } => Value::Category(k as usize),
                }
            })
            .collect();
        Configuration(values)
    }

    pub fn format_value(&self, index: usize, value: &Value) -> String {
        self.params[index].format_value(value)
    }

    pub fn parse_value(&self, index: usize, text: &str) -> Result<Value> {
        self.params[index].parse_value(text)
    }

    /// `name=value` pairs, comma separated.
    pub fn display<'a>(&'a self, cfg: &'a Configuration) -> impl fmt::Display + 'a {
        DisplayConfig { space: self, cfg }
    }

    /// Parses the declarative `[[param]]` document (see README for the grammar).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            param: Vec<ParamSpec>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::InvalidSpace(e.to_string()))?;
        Self::from_param_specs(&doc.param)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_param_specs(specs: &[ParamSpec]) -> Result<Self> {
        Self::new(specs.iter().map(ParamSpec::build).collect::<Result<_>>()?)
    }
}

struct DisplayConfig<'a> {
    space: &'a SearchSpace,
    cfg: &'a Configuration,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, v)) in self.space.params.iter().zip(self.cfg.values()).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", p.name, p.format_value(v))?;
        }
        Ok(())
    }
}

/// One entry of a declarative space document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub options: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Integer,
    Real,
    Categorical,
}

impl ParamSpec {
    fn build(&self) -> Result<HyperparameterDef> {
        let bounds = || match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::InvalidSpace(format!("`{}`: lo and hi are required", self.name))),
        };
        match self.kind {
            ParamKind::Integer => {
                let (lo, hi) = bounds()?;
                if lo.fract() != 0.0 || hi.fract() != 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "`{}`: integer bounds must be whole numbers",
                        self.name
                    )));
                }
                HyperparameterDef::integer(&self.name, lo as i64, hi as i64)
            }
            ParamKind::Real => {
                let (lo, hi) = bounds()?;
                HyperparameterDef::real(&self.name, lo, hi)
            }
            ParamKind::Categorical => match &self.options {
                Some(options) => HyperparameterDef::categorical(&self.name, options.clone()),
                None => Err(Error::InvalidSpace(format!("`{}`: options are required", self.name))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn mlp_like() -> SearchSpace {
        SearchSpace::new(vec![
            HyperparameterDef::integer("n", 10, 200).unwrap(),
            HyperparameterDef::categorical("act", ["relu", "tanh", "logistic", "identity"]).unwrap(),
            HyperparameterDef::real("lr", 0.01, 0.3).unwrap(),
            HyperparameterDef::integer("depth", 1, 20).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn normalize_bounds_and_categories() {
        let s = mlp_like();
        let lo = Configuration::new(vec![
            Value::Int(10),
            Value::Category(1),
            Value::real(0.01),
            Value::Int(1),
        ]);
        let n = s.normalize(&lo).unwrap();
        assert_eq!(n.coords()[0], 0.0);
        assert_eq!(n.coords()[1], 1.0 / 3.0);
        assert_eq!(n.coords()[2], 0.0);
        let hi = Configuration::new(vec![
            Value::Int(200),
            Value::Category(3),
            Value::real(0.3),
            Value::Int(20),
        ]);
        assert_eq!(s.normalize(&hi).unwrap().coords(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn denormalize_examples() {
        let s = mlp_like();
        let c = s.denormalize(&[0.0, 0.40, 0.0, 0.34]).unwrap();
        assert_eq!(c.values()[0], Value::Int(10));
        assert_eq!(c.values()[1], Value::Category(1));
        assert_eq!(c.values()[2], Value::real(0.01));
        assert_eq!(c.values()[3], Value::Int(7));
    }

    #[test]
    fn denormalize_clips_and_rounds_ties_to_even() {
        let s = SearchSpace::new(vec![HyperparameterDef::integer("k", 0, 4).unwrap()]).unwrap();
        // 0.625 * 4 = 2.5 -> 2
        assert_eq!(s.denormalize(&[0.625]).unwrap().values()[0], Value::Int(2));
        // 0.875 * 4 = 3.5 -> 4
        assert_eq!(s.denormalize(&[0.875]).unwrap().values()[0], Value::Int(4));
        assert_eq!(s.denormalize(&[-3.0]).unwrap().values()[0], Value::Int(0));
        assert_eq!(s.denormalize(&[7.0]).unwrap().values()[0], Value::Int(4));
        assert_eq!(s.denormalize(&[f64::NAN]).unwrap().values()[0], Value::Int(0));
    }

    #[test]
    fn degenerate_domains() {
        let s = SearchSpace::new(vec![
            HyperparameterDef::integer("a", 5, 5).unwrap(),
            HyperparameterDef::categorical("b", ["only"]).unwrap(),
            HyperparameterDef::real("c", 2.0, 2.0).unwrap(),
        ])
        .unwrap();
        let mut rng = seeded(1);
        for _ in 0..20 {
            let c = s.sample_uniform(&mut rng);
            assert_eq!(c.values()[0], Value::Int(5));
            assert_eq!(s.normalize(&c).unwrap().coords(), &[0.0, 0.0, 0.0]);
        }
        assert_eq!(s.cardinality(), Some(1));
    }

    #[test]
    fn errors() {
        let s = mlp_like();
        assert!(matches!(
            s.normalize(&Configuration::new(vec![Value::Int(10)])),
            Err(Error::DimensionMismatch { expected: 4, found: 1 })
        ));
        let bad = Configuration::new(vec![
            Value::Int(500),
            Value::Category(0),
            Value::real(0.1),
            Value::Int(1),
        ]);
        assert!(matches!(s.normalize(&bad), Err(Error::OutOfDomain { .. })));
        assert!(HyperparameterDef::integer("x", 3, 2).is_err());
        assert!(HyperparameterDef::categorical("x", ["a", "a"]).is_err());
        assert!(HyperparameterDef::categorical("x", Vec::<String>::new()).is_err());
        assert!(SearchSpace::new(vec![]).is_err());
        assert!(SearchSpace::new(vec![
            HyperparameterDef::real("x", 0.0, 1.0).unwrap(),
            HyperparameterDef::real("x", 0.0, 1.0).unwrap(),
        ])
        .is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = mlp_like();
        let a = s.sample_uniform(&mut seeded(42));
        let b = s.sample_uniform(&mut seeded(42));
        assert_eq!(a, b);
    }

    #[test]
    fn categorical_frequencies_are_uniform() {
        let s = SearchSpace::new(vec![
            HyperparameterDef::categorical("c", ["a", "b", "c", "d"]).unwrap()
        ])
        .unwrap();
        let mut rng = seeded(3);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            if let Value::Category(k) = s.sample_uniform(&mut rng).values()[0] {
                counts[k] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / 10_000.0;
            assert!((0.20..=0.30).contains(&f), "{counts:?}");
        }
        // chi-square with 3 dof, 0.999 quantile 16.27
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 2500.0).powi(2) / 2500.0)
            .sum();
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn novel_sampling_exhausts_small_space() {
        let s = SearchSpace::new(vec![
            HyperparameterDef::integer("a", 0, 1).unwrap(),
            HyperparameterDef::categorical("b", ["x", "y", "z"]).unwrap(),
        ])
        .unwrap();
        let mut rng = seeded(0);
        let mut seen = HashSet::new();
        for _ in 0..6 {
            let c = s.sample_novel(&seen, &mut rng).unwrap();
            assert!(seen.insert(c));
        }
        assert!(s.sample_novel(&seen, &mut rng).is_none());
    }

    #[test]
    fn toml_document() {
        let s = SearchSpace::from_toml_str(
            r#"
            [[param]]
            name = "n_estimators"
            kind = "integer"
            lo = 10
            hi = 200

            [[param]]
            name = "gamma"
            kind = "real"
            lo = 0.01
            hi = 0.6

            [[param]]
            name = "activation"
            kind = "categorical"
            options = ["relu", "tanh"]
            "#,
        )
        .unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.params()[2].domain(), &Domain::Categorical {
            options: vec!["relu".into(), "tanh".into()]
        });
        assert!(SearchSpace::from_toml_str("[[param]]\nname='a'\nkind='integer'\nlo=1.5\nhi=3")
            .is_err());
        assert!(SearchSpace::from_toml_str("[[param]]\nname='a'\nkind='categorical'").is_err());
    }

    #[test]
    fn parse_and_format_round_trip() {
        let s = mlp_like();
        let c = s.sample_uniform(&mut seeded(5));
        for (i, v) in c.values().iter().enumerate() {
            let text = s.format_value(i, v);
            assert_eq!(&s.parse_value(i, &text).unwrap(), v);
        }
        assert!(s.parse_value(1, "softmax").is_err());
    }

    fn arb_space() -> impl Strategy<Value = SearchSpace> {
        let param = prop_oneof![
            (-50i64..50, 0i64..40).prop_map(|(lo, w)| Domain::Integer { lo, hi: lo + w }),
            (-10.0f64..10.0, 0.0f64..5.0).prop_map(|(lo, w)| Domain::Real { lo, hi: lo + w }),
            (1usize..7).prop_map(|m| Domain::Categorical {
                options: (0..m).map(|i| format!("o{i}")).collect()
            }),
        ];
        prop::collection::vec(param, 1..6).prop_map(|domains| {
            SearchSpace::new(
                domains
                    .into_iter()
                    .enumerate()
                    .map(|(i, domain)| HyperparameterDef {
                        name: format!("p{i}"),
                        domain,
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn samples_are_valid_and_normalize_into_unit_cube(space in arb_space(), seed in any::<u64>()) {
            let cfg = space.sample_uniform(&mut seeded(seed));
            space.validate(&cfg).unwrap();
            let n = space.normalize(&cfg).unwrap();
            prop_assert!(n.coords().iter().all(|u| (0.0..=1.0).contains(u)));
        }

        #[test]
        fn denormalize_is_idempotent_through_normalize(
            space in arb_space(),
            coords in prop::collection::vec(0.0f64..=1.0, 6),
        ) {
            let u = &coords[..space.dim()];
            let once = space.denormalize(u).unwrap();
            let twice = space.denormalize(space.normalize(&once).unwrap().coords()).unwrap();
            // discrete coordinates are exact; reals may move by float rounding
            for (a, b) in once.values().iter().zip(twice.values()) {
                match (a, b) {
                    (Value::Real(x), Value::Real(y)) => prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs())),
                    _ => prop_assert_eq!(a, b),
                }
            }
        }
    }
}
