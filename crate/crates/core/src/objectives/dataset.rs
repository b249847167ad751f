//! CSV ingestion for labeled tabular data.
//!
//! Numeric cells parse as reals. A feature column with any non-numeric cell
//! is coded by order of first appearance (0, 1, ...); the label column is
//! always coded that way. Empty cells and `?` are rejected.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    name: String,
    feature_names: Vec<String>,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl TabularDataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let name = name.into();
        if features.is_empty() {
            return Err(Error::Dataset(format!("`{name}` has no rows")));
        }
        if features.len() != labels.len() {
            return Err(Error::Dataset(format!(
                "`{name}`: {} rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(r) = features.iter().position(|row| row.len() != feature_names.len()) {
            return Err(Error::Dataset(format!("`{name}`: row {r} has the wrong width")));
        }
        if feature_names.is_empty() {
            return Err(Error::Dataset(format!("`{name}` has no feature columns")));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let class_names = (0..n_classes).map(|c| c.to_string()).collect();
        let ds = Self {
            name,
            feature_names,
            features,
            labels,
            class_names,
        };
        ds.check_classes()?;
        Ok(ds)
    }

    fn check_classes(&self) -> Result<()> {
        let distinct: std::collections::HashSet<_> = self.labels.iter().collect();
        if distinct.len() < 2 {
            return Err(Error::Dataset(format!("`{}` needs at least 2 classes", self.name)));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

struct Coder {
    codes: HashMap<String, usize>,
    names: Vec<String>,
}

impl Coder {
    fn new() -> Self {
        Self {
            codes: HashMap::new(),
            names: Vec::new(),
        }
    }

    fn code(&mut self, s: &str) -> usize {
        if let Some(&c) = self.codes.get(s) {
            return c;
        }
        self.names.push(s.to_string());
        self.codes.insert(s.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

/// Reads a headed CSV from `reader`.
pub fn read_csv<R: Read>(name: &str, reader: R, label_column: &str) -> Result<TabularDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Dataset(format!("`{name}`: label column `{label_column}` not found")))?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row: Vec<String> = record.iter().map(str::to_string).collect();
        for (c, cell) in row.iter().enumerate() {
            if cell.is_empty() || cell == "?" {
                return Err(Error::Dataset(format!(
                    "`{name}`: missing value at row {r}, column `{}`",
                    header[c]
                )));
            }
        }
        cells.push(row);
    }
    if cells.is_empty() {
        return Err(Error::Dataset(format!("`{name}` is empty")));
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_idx).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(feature_cols.len());
    for &c in &feature_cols {
        let parsed: Option<Vec<f64>> = cells
            .iter()
            .map(|row| row[c].parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        columns.push(match parsed {
            Some(v) => v,
            None => {
                let mut coder = Coder::new();
                cells.iter().map(|row| coder.code(&row[c]) as f64).collect()
            }
        });
    }
    let mut label_coder = Coder::new();
    let labels: Vec<usize> = cells.iter().map(|row| label_coder.code(&row[label_idx])).collect();
    let features: Vec<Vec<f64>> = (0..cells.len())
        .map(|r| columns.iter().map(|col| col[r]).collect())
        .collect();
    let mut ds = TabularDataset::new(
        name,
        feature_cols.iter().map(|&c| header[c].clone()).collect(),
        features,
        labels,
    )?;
    ds.class_names = label_coder.names;
    Ok(ds)
}

pub fn load_csv(path: &Path, label_column: &str) -> Result<TabularDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    read_csv(&name, file, label_column)
}

/// Named datasets: a TOML table of `name = { path = "...", label = "..." }`
/// entries under `[datasets]`. Relative paths resolve against the registry
/// file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRegistry {
    entries: BTreeMap<String, RegistryEntry>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    pub path: PathBuf,
    pub label: String,
}

impl DatasetRegistry {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            datasets: BTreeMap<String, RegistryEntry>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Dataset(format!("registry: {e}")))?;
        let entries = doc
            .datasets
            .into_iter()
            .map(|(k, mut e)| {
                if e.path.is_relative() {
                    e.path = base_dir.join(&e.path);
                }
                (k, e)
            })
            .collect();
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entry(&self, name: &str) -> Option<&RegistryEntry> {
        self.entries.get(name)
    }

    pub fn load(&self, name: &str) -> Result<TabularDataset> {
        let e = self
            .entry(name)
            .ok_or_else(|| Error::Dataset(format!("dataset `{name}` is not registered")))?;
        let mut ds = load_csv(&e.path, &e.label)?;
        ds.name = name.to_string();
        Ok(ds)
    }
}
