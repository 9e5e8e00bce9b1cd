//! Sensitivity runs: how each metric's score tracks perturbation strength.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::spearman;
use crate::error::{Error, Result};
use crate::harness::config::{Dataset, ExperimentConfig};
use crate::harness::metrics::{comparison_resolution, evaluate, MetricId};
use crate::jl::{JlConfig, JlProjector};
use crate::perturb::{cluster_modes, PerturbKind, Perturbation};
use crate::rng::derive_seed;

/// Aggregated Spearman correlations for one (dataset, metric, perturbation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub metric: MetricId,
    pub perturbation: PerturbKind,
    /// Median over the seeds that responded.
    pub median: Option<f64>,
    pub iqr: Option<f64>,
    /// `None` where the score did not vary with `p`.
    pub per_seed: Vec<Option<f64>>,
    /// Set when more than half of the seeds gave no response.
    pub no_response: bool,
}

/// One point of a sensitivity curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub dataset: String,
    pub metric: MetricId,
    pub perturbation: PerturbKind,
    pub seed: usize,
    pub p: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub curves: Vec<CurvePoint>,
}

impl ResultTable {
    pub fn row(&self, dataset: &str, metric: MetricId, perturbation: PerturbKind) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.metric == metric && r.perturbation == perturbation)
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and interquartile range of the responding seeds, plus the
/// no-response flag.
pub fn aggregate(per_seed: &[Option<f64>]) -> (Option<f64>, Option<f64>, bool) {
    let mut xs: Vec<f64> = per_seed.iter().flatten().copied().collect();
    let missing = per_seed.len() - xs.len();
    let no_response = 2 * missing > per_seed.len();
    if xs.is_empty() {
        return (None, None, no_response);
    }
    xs.sort_by(f64::total_cmp);
    let iqr = quantile(&xs, 0.75) - quantile(&xs, 0.25);
    (Some(quantile(&xs, 0.5)), Some(iqr), no_response)
}

/// JL configuration used for repetition `seed` of dataset `dataset`; the
/// configured JL seed is mixed into the derived one.
pub fn jl_for_seed(cfg: &ExperimentConfig, dataset: usize, seed: usize) -> JlConfig {
    let jl = cfg.settings.jl;
    jl.with_seed(derive_seed(cfg.seed, &[dataset as u64, seed as u64, 1, jl.seed]))
}

/// Seed for the perturbation stream of one task.
pub fn perturbation_seed(cfg: &ExperimentConfig, dataset: usize, kind: PerturbKind, seed: usize) -> u64 {
    let k = PerturbKind::ALL.iter().position(|&x| x == kind).unwrap() as u64;
    derive_seed(cfg.seed, &[dataset as u64, seed as u64, 2, k])
}

struct TaskOutput {
    /// Spearman per configured metric.
    rho: Vec<Option<f64>>,
    /// Score per configured metric and p.
    scores: Vec<Vec<f64>>,
}

fn run_task(
    cfg: &ExperimentConfig,
    data: &Dataset,
    d: usize,
    kind: PerturbKind,
    s: usize,
) -> Result<TaskOutput> {
    let reference = &data.graph;
    let jl = jl_for_seed(cfg, d, s);
    let modes = if kind.needs_modes() {
        Some(cluster_modes(reference, &jl)?)
    } else {
        None
    };
    let pseed = perturbation_seed(cfg, d, kind, s);
    let generated = cfg
        .p_grid
        .iter()
        .map(|&p| Perturbation::new(kind, p, pseed)?.apply(reference, modes.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    let projector = if cfg.metrics.contains(&MetricId::Jl) {
        Some(JlProjector::for_graphs(jl, std::iter::once(reference).chain(&generated))?)
    } else {
        None
    };
    let phi = comparison_resolution(reference, &generated);
    let settings = crate::harness::metrics::MetricSettings { jl, ..cfg.settings };

    let mut out = TaskOutput {
        rho: Vec::with_capacity(cfg.metrics.len()),
        scores: Vec::with_capacity(cfg.metrics.len()),
    };
    for &metric in &cfg.metrics {
        let scores = generated
            .iter()
            .map(|g| evaluate(metric, &settings, reference, g, phi, projector.as_ref()))
            .collect::<Result<Vec<f64>>>()?;
        let rho = match spearman(&cfg.p_grid, &scores) {
            Ok(r) => Some(r),
            Err(Error::ConstantSeries) => None,
            Err(e) => return Err(e),
        };
        out.rho.push(rho);
        out.scores.push(scores);
    }
    Ok(out)
}

/// Runs every (dataset, perturbation, seed) task in parallel and aggregates
/// the Spearman correlations between `p` and each metric's score.
pub fn run_sensitivity(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let datasets = cfg.load_datasets()?;
    run_sensitivity_on(cfg, &datasets)
}

/// As [`run_sensitivity`], on already loaded datasets.
pub fn run_sensitivity_on(cfg: &ExperimentConfig, datasets: &[Dataset]) -> Result<ResultTable> {
    cfg.validate()?;
    let mut tasks = Vec::new();
    for d in 0..datasets.len() {
        for &kind in &cfg.perturbations {
            for s in 0..cfg.seeds {
                tasks.push((d, kind, s));
            }
        }
    }
    let outputs = tasks
        .par_iter()
        .map(|&(d, kind, s)| run_task(cfg, &datasets[d], d, kind, s))
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::default();
    let per_group = cfg.seeds;
    for (group, chunk) in outputs.chunks(per_group).enumerate() {
        let (d, kind, _) = tasks[group * per_group];
        let name = &datasets[d].name;
        for (m, &metric) in cfg.metrics.iter().enumerate() {
            let per_seed: Vec<Option<f64>> = chunk.iter().map(|o| o.rho[m]).collect();
            let (median, iqr, no_response) = aggregate(&per_seed);
            table.rows.push(ResultRow {
                dataset: name.clone(),
                metric,
                perturbation: kind,
                median,
                iqr,
                per_seed,
                no_response,
            });
            for (s, o) in chunk.iter().enumerate() {
                for (&p, &score) in cfg.p_grid.iter().zip(&o.scores[m]) {
                    table.curves.push(CurvePoint {
                        dataset: name.clone(),
                        metric,
                        perturbation: kind,
                        seed: s,
                        p,
                        score,
                    });
                }
            }
        }
    }
    // Rows grouped by dataset, then metric, then perturbation.
    let metric_pos = |m: MetricId| cfg.metrics.iter().position(|&x| x == m).unwrap();
    let kind_pos = |k: PerturbKind| cfg.perturbations.iter().position(|&x| x == k).unwrap();
    let data_pos = |n: &str| datasets.iter().position(|d| d.name == n).unwrap();
    table.rows.sort_by_key(|r| (data_pos(&r.dataset), metric_pos(r.metric), kind_pos(r.perturbation)));
    table.curves.sort_by_key(|c| {
        (data_pos(&c.dataset), metric_pos(c.metric), kind_pos(c.perturbation), c.seed)
    });
    Ok(table)
}
