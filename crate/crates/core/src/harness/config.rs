//! Experiment configuration and dataset loading.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ctdg::{load_ctdg, load_jodie, Ctdg, GridSpec};
use crate::error::{Error, Result};
use crate::harness::metrics::{MetricId, MetricSettings};
use crate::perturb::PerturbKind;

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Grid(GridSpec),
    /// `src,dst,t[,features...]` event CSV.
    Csv { path: PathBuf },
    /// Jodie-style `user,item,timestamp,label,features...` CSV.
    Jodie { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: DatasetSource,
}

impl DatasetSpec {
    pub fn grid(name: impl Into<String>, spec: GridSpec) -> Self {
        DatasetSpec {
            name: name.into(),
            source: DatasetSource::Grid(spec),
        }
    }

    /// Loads the raw graph, without truncation or feature augmentation.
    pub fn load_raw(&self) -> Result<Ctdg> {
        match &self.source {
            DatasetSource::Grid(spec) => spec.generate(),
            DatasetSource::Csv { path } => load_ctdg(path),
            DatasetSource::Jodie { path } => load_jodie(path),
        }
    }
}

/// A loaded dataset, ready for experiments.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graph: Ctdg,
}

/// The default perturbation strength grid `0.0, 0.1, ..., 1.0`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub metrics: Vec<MetricId>,
    pub perturbations: Vec<PerturbKind>,
    pub p_grid: Vec<f64>,
    /// Number of repetitions.
    pub seeds: usize,
    /// Base seed all random streams are derived from.
    pub seed: u64,
    #[serde(flatten)]
    pub settings: MetricSettings,
    /// Keep only the first `truncate` events of each dataset.
    pub truncate: Option<usize>,
    /// Give featureless datasets a constant feature of 1 per event.
    pub augment_features: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: vec![DatasetSpec::grid("grid", GridSpec::default())],
            metrics: MetricId::all(),
            perturbations: PerturbKind::ALL.to_vec(),
            p_grid: default_p_grid(),
            seeds: 10,
            seed: 0,
            settings: MetricSettings::default(),
            truncate: None,
            augment_features: true,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML or JSON file, chosen by extension (TOML otherwise).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)?,
            _ => toml::from_str(&text)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.p_grid;
        if g.len() < 2 {
            return Err(Error::invalid(">=2 grid points required"));
        }
        if g.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("p-grid values must lie in [0, 1]"));
        }
        if g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("p-grid must be strictly increasing"));
        }
        if g[0] != 0.0 {
            return Err(Error::invalid("p-grid must contain 0"));
        }
        if self.seeds == 0 {
            return Err(Error::invalid("at least one seed required"));
        }
        if self.datasets.is_empty() || self.metrics.is_empty() || self.perturbations.is_empty() {
            return Err(Error::invalid("datasets, metrics and perturbations must be non-empty"));
        }
        if self.settings.bins == 0 {
            return Err(Error::invalid("bins must be positive"));
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("dataset names must be unique"));
        }
        let mut metrics = self.metrics.clone();
        metrics.sort_unstable();
        let mut kinds = self.perturbations.clone();
        kinds.sort_unstable();
        if metrics.windows(2).any(|w| w[0] == w[1]) || kinds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("metrics and perturbations must not repeat"));
        }
        Ok(())
    }

    /// Loads every dataset and applies truncation and feature augmentation.
    pub fn load_datasets(&self) -> Result<Vec<Dataset>> {
        self.datasets.iter().map(|d| self.prepare(d)).collect()
    }

    pub fn prepare(&self, spec: &DatasetSpec) -> Result<Dataset> {
        let mut g = spec.load_raw()?;
        if let Some(n) = self.truncate {
            g = g.truncated(n);
        }
        if self.augment_features {
            g = g.with_constant_feature();
        }
        if g.is_empty() {
            return Err(Error::Empty("dataset has no events"));
        }
        Ok(Dataset {
            name: spec.name.clone(),
            graph: g,
        })
    }
}
