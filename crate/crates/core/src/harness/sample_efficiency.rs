//! Sample efficiency: the smallest window size at which a metric tells two
//! samples of the same data apart from a sample of other data.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctdg::{Ctdg, GridSpec};
use crate::error::{Error, Result};
use crate::harness::config::{DatasetSpec, ExperimentConfig};
use crate::harness::metrics::{comparison_resolution, evaluate, MetricId, MetricSettings};
use crate::jl::JlProjector;
use crate::perturb::edge_rewire;
use crate::rng::{derive_seed, stream};

/// Smallest window size tried.
pub const MIN_LAMBDA: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleEfficiencyConfig {
    /// Real dataset. Without one, the grid is compared against a fully
    /// edge-rewired copy of itself.
    pub real: Option<DatasetSpec>,
    pub grid: GridSpec,
    pub metrics: Vec<MetricId>,
    pub seeds: usize,
    pub seed: u64,
    /// Largest window size tried; `None` goes as far as the data allows.
    pub max_lambda: Option<usize>,
    #[serde(flatten)]
    pub settings: MetricSettings,
    pub truncate: Option<usize>,
    pub augment_features: bool,
}

impl Default for SampleEfficiencyConfig {
    fn default() -> Self {
        SampleEfficiencyConfig {
            real: None,
            grid: GridSpec::default(),
            metrics: MetricId::all(),
            seeds: 10,
            seed: 0,
            max_lambda: None,
            settings: MetricSettings::default(),
            truncate: None,
            augment_features: true,
        }
    }
}

impl SampleEfficiencyConfig {
    /// Seeds that must succeed for a window size to count.
    pub fn majority(&self) -> usize {
        self.seeds / 2 + 1
    }

    /// The (real, generated) pair of graphs to compare.
    pub fn load_pair(&self) -> Result<(Ctdg, Ctdg)> {
        if self.seeds == 0 {
            return Err(Error::invalid("at least one seed required"));
        }
        let prep = ExperimentConfig {
            truncate: self.truncate,
            augment_features: self.augment_features,
            ..Default::default()
        };
        let grid = prep.prepare(&DatasetSpec::grid("grid", self.grid))?.graph;
        match &self.real {
            Some(spec) => Ok((prep.prepare(spec)?.graph, grid)),
            None => {
                let variant = edge_rewire(&grid, 1.0, derive_seed(self.seed, &[0x7661_7269]))?;
                Ok((grid, variant))
            }
        }
    }
}

/// Outcome for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyResult {
    pub metric: MetricId,
    /// `None` when no window size up to the limit succeeded.
    pub lambda: Option<usize>,
    /// `(lambda, successful seeds)` for every window size tried.
    pub trials: Vec<(usize, usize)>,
}

/// Windows for one trial: two disjoint windows of `real` and one of
/// `generated`, all of `lambda` events and rebased to start at t = 0.
pub fn draw_windows(real: &Ctdg, generated: &Ctdg, lambda: usize, seed: u64) -> Result<[Ctdg; 3]> {
    let (n, m) = (real.num_events(), generated.num_events());
    if 2 * lambda > n || lambda > m {
        return Err(Error::invalid(format!("window size {lambda} exceeds available events")));
    }
    let mut rng = stream(seed, &[]);
    let first = rng.random_range(0..=n - 2 * lambda);
    let second = rng.random_range(first + lambda..=n - lambda);
    let (a, b) = if rng.random::<bool>() { (first, second) } else { (second, first) };
    let g = rng.random_range(0..=m - lambda);
    Ok([real.window(a, lambda)?, real.window(b, lambda)?, generated.window(g, lambda)?])
}

/// Whether `metric` ranks the real-real pair strictly closer than the
/// real-generated pair. Evaluation failures count as a miss.
fn trial(metric: MetricId, settings: &MetricSettings, w: &[Ctdg; 3], jl_seed: u64) -> bool {
    let [r1, r2, g] = w;
    let settings = MetricSettings {
        jl: settings.jl.with_seed(jl_seed),
        ..*settings
    };
    let projector = match metric {
        MetricId::Jl => match JlProjector::for_graphs(settings.jl, [r1, r2, g]) {
            Ok(p) => Some(p),
            Err(_) => return false,
        },
        _ => None,
    };
    let phi = comparison_resolution(r1, [r2, g]);
    let same = evaluate(metric, &settings, r1, r2, phi, projector.as_ref());
    let other = evaluate(metric, &settings, r1, g, phi, projector.as_ref());
    matches!((same, other), (Ok(s), Ok(o)) if s < o)
}

/// Smallest window size `3, 4, 5, ...` at which a majority of seeds rank the
/// real-real pair closer, per metric.
pub fn run_sample_efficiency_on(
    cfg: &SampleEfficiencyConfig,
    real: &Ctdg,
    generated: &Ctdg,
) -> Result<Vec<EfficiencyResult>> {
    if cfg.seeds == 0 {
        return Err(Error::invalid("at least one seed required"));
    }
    let available = (real.num_events() / 2).min(generated.num_events());
    let limit = cfg.max_lambda.map_or(available, |m| m.min(available));
    cfg.metrics
        .par_iter()
        .map(|&metric| {
            let mut trials = Vec::new();
            for lambda in MIN_LAMBDA..=limit {
                let mut hits = 0;
                for s in 0..cfg.seeds {
                    let wseed = derive_seed(cfg.seed, &[lambda as u64, s as u64, 0]);
                    let jl_seed = derive_seed(cfg.seed, &[lambda as u64, s as u64, 1]);
                    let w = draw_windows(real, generated, lambda, wseed)?;
                    if trial(metric, &cfg.settings, &w, jl_seed) {
                        hits += 1;
                    }
                }
                trials.push((lambda, hits));
                if hits >= cfg.majority() {
                    return Ok(EfficiencyResult {
                        metric,
                        lambda: Some(lambda),
                        trials,
                    });
                }
            }
            Ok(EfficiencyResult {
                metric,
                lambda: None,
                trials,
            })
        })
        .collect()
}

pub fn run_sample_efficiency(cfg: &SampleEfficiencyConfig) -> Result<Vec<EfficiencyResult>> {
    let (real, generated) = cfg.load_pair()?;
    run_sample_efficiency_on(cfg, &real, &generated)
}

/// `metric,lambda` rows; unreached metrics read `not reached`.
pub fn write_efficiency_csv<W: Write>(results: &[EfficiencyResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "lambda"])?;
    for r in results {
        let lambda = r.lambda.map_or_else(|| "not reached".to_string(), |l| l.to_string());
        w.write_record([r.metric.to_string(), lambda])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
