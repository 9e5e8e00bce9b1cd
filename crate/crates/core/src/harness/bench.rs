//! Wall-clock cost of each metric, in seconds per 100 events.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classical::SeriesStrategy;
use crate::ctdg::Ctdg;
use crate::error::{Error, Result};
use crate::harness::config::{Dataset, DatasetSpec, ExperimentConfig};
use crate::harness::metrics::{comparison_resolution, evaluate, MetricId, MetricSettings};
use crate::perturb::edge_rewire;
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetSpec>,
    pub metrics: Vec<MetricId>,
    /// Timed repetitions per metric (at least 3).
    pub reps: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub settings: MetricSettings,
    pub truncate: Option<usize>,
    pub augment_features: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let base = ExperimentConfig::default();
        BenchConfig {
            datasets: base.datasets,
            metrics: MetricId::all(),
            reps: 5,
            seed: 0,
            // Snapshot baselines instantiate every snapshot, as a snapshot
            // pipeline would.
            settings: MetricSettings {
                strategy: SeriesStrategy::Materialized,
                ..MetricSettings::default()
            },
            truncate: None,
            augment_features: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub metric: MetricId,
    pub events: usize,
    pub reps: usize,
    /// Median wall-clock seconds for one comparison.
    pub median_seconds: f64,
    pub seconds_per_100_events: f64,
}

/// One full comparison of `reference` with `generated`, from raw graphs to
/// the final score: discretization for snapshot metrics and projection setup
/// for JL are included.
fn time_once(metric: MetricId, settings: &MetricSettings, reference: &Ctdg, generated: &Ctdg) -> Result<f64> {
    let start = Instant::now();
    let phi = if metric.is_snapshot_based() {
        comparison_resolution(reference, [generated])
    } else {
        1.0
    };
    let score = evaluate(metric, settings, reference, generated, phi, None)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(score);
    Ok(elapsed)
}

/// Times every metric on every dataset against a half-rewired copy of it.
/// Loading is not timed. Runs sequentially so timings do not compete for
/// cores.
pub fn run_bench_on(cfg: &BenchConfig, datasets: &[Dataset]) -> Result<Vec<BenchRow>> {
    if cfg.reps < 3 {
        return Err(Error::invalid("benchmark needs at least 3 repetitions"));
    }
    let mut rows = Vec::new();
    for (d, data) in datasets.iter().enumerate() {
        let g = &data.graph;
        let generated = edge_rewire(g, 0.5, derive_seed(cfg.seed, &[d as u64]))?;
        for &metric in &cfg.metrics {
            let mut times = (0..cfg.reps)
                .map(|_| time_once(metric, &cfg.settings, g, &generated))
                .collect::<Result<Vec<f64>>>()?;
            times.sort_by(f64::total_cmp);
            let median = crate::harness::sensitivity::quantile(&times, 0.5);
            rows.push(BenchRow {
                dataset: data.name.clone(),
                metric,
                events: g.num_events(),
                reps: cfg.reps,
                median_seconds: median,
                seconds_per_100_events: median * 100.0 / g.num_events() as f64,
            });
        }
    }
    Ok(rows)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let prep = ExperimentConfig {
        truncate: cfg.truncate,
        augment_features: cfg.augment_features,
        ..Default::default()
    };
    let datasets = cfg
        .datasets
        .iter()
        .map(|d| prep.prepare(d))
        .collect::<Result<Vec<_>>>()?;
    run_bench_on(cfg, &datasets)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["dataset", "metric", "events", "reps", "median_seconds", "s_per_100_events"])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.metric.to_string(),
            r.events.to_string(),
            r.reps.to_string(),
            format!("{:e}", r.median_seconds),
            format!("{:e}", r.seconds_per_100_events),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
