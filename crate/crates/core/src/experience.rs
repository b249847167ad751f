//! Evaluated configurations and the difference quantities derived from them.
//!
//! All performance differences are relative and expressed in percent. The
//! denominator `|f|` is guarded by [`EPSILON`] because accuracy-style scores
//! can be exactly zero.

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::space::{Configuration, NormalizedConfiguration, SearchSpace};

pub const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperienceEntry {
    pub config: Configuration,
    pub score: f64,
}

/// Append-only set of evaluated configurations, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct ExperienceSet {
    entries: Vec<ExperienceEntry>,
    index: HashSet<Configuration>,
}

impl ExperienceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, config: Configuration, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite score {score}")));
        }
        if !self.index.insert(config.clone()) {
            return Err(Error::DuplicateConfiguration);
        }
        self.entries.push(ExperienceEntry { config, score });
        Ok(())
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.index.contains(config)
    }

    pub fn configurations(&self) -> &HashSet<Configuration> {
        &self.index
    }

    pub fn entries(&self) -> &[ExperienceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest-scoring entry; the earliest one wins ties.
    pub fn best(&self) -> Option<&ExperienceEntry> {
        self.entries
            .iter()
            .fold(None, |best: Option<&ExperienceEntry>, e| match best {
                Some(b) if b.score >= e.score => Some(b),
                _ => Some(e),
            })
    }

    /// Writes one row per entry: the configuration values in space order,
    /// then `score`. Header row carries the parameter names.
    pub fn write_csv<W: Write>(&self, space: &SearchSpace, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = space.params().iter().map(|p| p.name()).collect();
        header.push("score");
        w.write_record(&header)?;
        for e in &self.entries {
            let mut row: Vec<String> = e
                .config
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| space.format_value(i, v))
                .collect();
            row.push(e.score.to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<experience log>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn read_csv<R: Read>(space: &SearchSpace, reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let expected = space.dim() + 1;
        if header.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: header.len(),
            });
        }
        let mut set = Self::new();
        for record in r.records() {
            let record = record?;
            let values = (0..space.dim())
                .map(|i| space.parse_value(i, &record[i]))
                .collect::<Result<Vec<_>>>()?;
            let score: f64 = record[space.dim()]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad score `{}`", &record[space.dim()])))?;
            set.push(Configuration::new(values), score)?;
        }
        Ok(set)
    }
}

/// Normalized configuration difference `norm(b) - norm(a)`.
pub fn cdiffer(space: &SearchSpace, a: &Configuration, b: &Configuration) -> Result<Vec<f64>> {
    let na = space.normalize(a)?;
    let nb = space.normalize(b)?;
    Ok(normalized_difference(na.coords(), nb.coords()))
}

fn normalized_difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| y - x).collect()
}

/// Relative change from `fa` to `fb`, in percent.
pub fn pdiffer(fa: f64, fb: f64) -> f64 {
    (fb - fa) / fa.abs().max(EPSILON) * 100.0
}

/// Relative headroom between `f` and the ideal score, in percent. Scores that
/// overshoot the ideal (noise) have zero headroom.
pub fn pspace(f: f64, f_ideal: f64) -> f64 {
    (f_ideal - f).max(0.0) / f.abs().max(EPSILON) * 100.0
}

/// A training row for the adjustment/verification network pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentTriple {
    /// Normalized configuration the adjustment starts from.
    pub base: NormalizedConfiguration,
    /// Performance change in percent.
    pub pdiff: f64,
    /// Normalized adjustment, each coordinate in `[-1, 1]`.
    pub adjust: Vec<f64>,
}

/// Which configuration of an ordered pair `(j -> i)` becomes the triple base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TripleOrientation {
    /// `base = norm(λ_j)`: base + adjust lands on λ_i with change pdiff.
    #[default]
    Source,
    /// `base = norm(λ_i)`, the literal column order of the pseudocode.
    Destination,
}

/// All `t(t-1)` ordered-pair triples, before deduplication.
pub fn ordered_pair_triples(
    exp: &ExperienceSet,
    space: &SearchSpace,
    orientation: TripleOrientation,
) -> Result<Vec<AdjustmentTriple>> {
    if exp.len() < 2 {
        return Err(Error::InsufficientExperience {
            needed: 2,
            found: exp.len(),
        });
    }
    let normalized = exp
        .entries()
        .iter()
        .map(|e| space.normalize(&e.config))
        .collect::<Result<Vec<_>>>()?;
    let t = exp.len();
    let mut out = Vec::with_capacity(t * (t - 1));
    for i in 0..t {
        for j in 0..t {
            if i == j {
                continue;
            }
            let (src, dst) = (&exp.entries()[j], &exp.entries()[i]);
            let base = match orientation {
                TripleOrientation::Source => normalized[j].clone(),
                TripleOrientation::Destination => normalized[i].clone(),
            };
            out.push(AdjustmentTriple {
                base,
                pdiff: pdiffer(src.score, dst.score),
                adjust: normalized_difference(normalized[j].coords(), normalized[i].coords()),
            });
        }
    }
    Ok(out)
}

/// Keeps the first triple of every group sharing an identical `(base, pdiff)`.
pub fn dedup_triples(triples: Vec<AdjustmentTriple>) -> Vec<AdjustmentTriple> {
    let mut seen = HashSet::new();
    triples
        .into_iter()
        .filter(|t| {
            let key: (Vec<u64>, u64) = (
                t.base.coords().iter().map(|x| x.to_bits()).collect(),
                t.pdiff.to_bits(),
            );
            seen.insert(key)
        })
        .collect()
}

/// Training triples with the default (source) orientation, deduplicated.
pub fn build_triples(exp: &ExperienceSet, space: &SearchSpace) -> Result<Vec<AdjustmentTriple>> {
    Ok(dedup_triples(ordered_pair_triples(
        exp,
        space,
        TripleOrientation::Source,
    )?))
}
