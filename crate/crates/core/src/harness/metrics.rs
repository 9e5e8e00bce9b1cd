//! The catalogue of metrics the harness can score, and pairwise evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{activity_rate, snapshot_series_with, Descriptor, SeriesStrategy};
use crate::ctdg::{nyquist_resolution, Ctdg};
use crate::distances::{
    js_divergence, kl_divergence, ks_channels, ks_distance, mmd_distance, mmd_vectors, Bandwidth,
    DistanceKind, DEFAULT_BINS,
};
use crate::error::{Error, Result};
use crate::jl::{JlConfig, JlProjector};

/// A (descriptor, estimator) combination, the JL metric, or a distance over
/// raw event features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricId {
    Jl,
    /// Scalar descriptor series compared with KS or MMD.
    Classical(Descriptor, DistanceKind),
    /// Event feature vectors compared with KS, MMD, KL or JS.
    Feature(DistanceKind),
}

impl MetricId {
    /// JL, every classical descriptor with KS and MMD, and every feature
    /// distance.
    pub fn all() -> Vec<MetricId> {
        let mut out = vec![MetricId::Jl];
        for d in Descriptor::SNAPSHOT.into_iter().chain([Descriptor::ActivityRate]) {
            for k in [DistanceKind::Ks, DistanceKind::Mmd] {
                out.push(MetricId::Classical(d, k));
            }
        }
        for k in [DistanceKind::Kl, DistanceKind::Js, DistanceKind::Ks, DistanceKind::Mmd] {
            out.push(MetricId::Feature(k));
        }
        out
    }

    /// Metrics built from per-snapshot statistics.
    pub fn is_snapshot_based(self) -> bool {
        matches!(self, MetricId::Classical(d, _) if d.is_per_snapshot())
    }

    pub fn name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::Jl => f.write_str("jl"),
            MetricId::Classical(d, k) => write!(f, "{}_{}", d.name(), k.name()),
            MetricId::Feature(k) => write!(f, "feat_{}", k.name()),
        }
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::Unknown {
            kind: "metric",
            name: s.to_string(),
        };
        if s == "jl" {
            return Ok(MetricId::Jl);
        }
        let (head, tail) = s.rsplit_once('_').ok_or_else(unknown)?;
        let kind = match tail {
            "ks" => DistanceKind::Ks,
            "mmd" => DistanceKind::Mmd,
            "kl" => DistanceKind::Kl,
            "js" => DistanceKind::Js,
            _ => return Err(unknown()),
        };
        if head == "feat" {
            return Ok(MetricId::Feature(kind));
        }
        let d: Descriptor = head.parse().map_err(|_| unknown())?;
        if !matches!(kind, DistanceKind::Ks | DistanceKind::Mmd) {
            return Err(unknown());
        }
        Ok(MetricId::Classical(d, kind))
    }
}

impl TryFrom<String> for MetricId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MetricId> for String {
    fn from(m: MetricId) -> String {
        m.to_string()
    }
}

/// Settings shared by every metric evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub jl: JlConfig,
    pub bins: usize,
    pub bandwidth: Bandwidth,
    pub strategy: SeriesStrategy,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            jl: JlConfig::default(),
            bins: DEFAULT_BINS,
            bandwidth: Bandwidth::Auto,
            strategy: SeriesStrategy::Incremental,
        }
    }
}

/// Snapshot resolution used to compare `reference` with other graphs: the
/// reference's Nyquist resolution, falling back to the smallest positive gap
/// among `others`, then to 1.
pub fn comparison_resolution<'a>(reference: &Ctdg, others: impl IntoIterator<Item = &'a Ctdg>) -> f64 {
    if let Ok(phi) = nyquist_resolution(reference) {
        return phi;
    }
    others
        .into_iter()
        .filter_map(|g| nyquist_resolution(g).ok())
        .fold(None, |acc: Option<f64>, phi| Some(acc.map_or(phi, |a| a.min(phi))))
        .unwrap_or(1.0)
}

fn feature_rows(g: &Ctdg) -> Result<Vec<Vec<f64>>> {
    if g.feature_dim() == 0 {
        return Err(Error::NoFeatures);
    }
    Ok(g.events().iter().map(|e| e.features.clone()).collect())
}

fn scalar_distance(kind: DistanceKind, a: &[f64], b: &[f64], bandwidth: Bandwidth) -> Result<f64> {
    match kind {
        DistanceKind::Ks => ks_distance(a, b),
        DistanceKind::Mmd => mmd_distance(a, b, bandwidth),
        _ => Err(Error::invalid(format!("{} is not a scalar estimator", kind.name()))),
    }
}

/// Scores `generated` against `reference`.
///
/// `phi` is the snapshot resolution for snapshot-based metrics and
/// `projector` the shared JL projections; each is only consulted by the
/// metrics that need it.
pub fn evaluate(
    metric: MetricId,
    settings: &MetricSettings,
    reference: &Ctdg,
    generated: &Ctdg,
    phi: f64,
    projector: Option<&JlProjector>,
) -> Result<f64> {
    match metric {
        MetricId::Jl => match projector {
            Some(p) => p.distance(reference, generated),
            None => JlProjector::for_graphs(settings.jl, [reference, generated])?
                .distance(reference, generated),
        },
        MetricId::Classical(Descriptor::ActivityRate, kind) => scalar_distance(
            kind,
            &activity_rate(reference).masked(),
            &activity_rate(generated).masked(),
            settings.bandwidth,
        ),
        MetricId::Classical(d, kind) => {
            let a = snapshot_series_with(reference, d, phi, settings.strategy)?.masked();
            let b = snapshot_series_with(generated, d, phi, settings.strategy)?.masked();
            scalar_distance(kind, &a, &b, settings.bandwidth)
        }
        MetricId::Feature(kind) => {
            let a = feature_rows(reference)?;
            let b = feature_rows(generated)?;
            match kind {
                DistanceKind::Ks => ks_channels(&a, &b),
                DistanceKind::Mmd => mmd_vectors(&a, &b, settings.bandwidth),
                DistanceKind::Kl => kl_divergence(&a, &b, settings.bins),
                DistanceKind::Js => js_divergence(&a, &b, settings.bins),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctdg::generate_grid;
    use crate::perturb::edge_rewire;

    #[test]
    fn names_round_trip() {
        let all = MetricId::all();
        assert_eq!(all.len(), 1 + 10 + 4);
        for m in &all {
            assert_eq!(m.name().parse::<MetricId>().unwrap(), *m);
        }
        assert_eq!("degree_ks".parse::<MetricId>().unwrap().name(), "mean_degree_ks");
        assert!("lcc_kl".parse::<MetricId>().is_err());
        assert!("bogus".parse::<MetricId>().is_err());
        let json = serde_json::to_string(&MetricId::Feature(DistanceKind::Js)).unwrap();
        assert_eq!(json, "\"feat_js\"");
    }

    #[test]
    fn snapshot_flag() {
        assert!("ple_mmd".parse::<MetricId>().unwrap().is_snapshot_based());
        assert!(!"activity_rate_ks".parse::<MetricId>().unwrap().is_snapshot_based());
        assert!(!MetricId::Jl.is_snapshot_based());
    }

    #[test]
    fn self_distance_is_zero() {
        let g = generate_grid(5, 60, 1.0, 0).unwrap();
        let settings = MetricSettings::default();
        let phi = comparison_resolution(&g, []);
        for m in MetricId::all() {
            let d = evaluate(m, &settings, &g, &g, phi, None).unwrap();
            assert!(d.abs() <= 1e-9, "{m}: {d}");
        }
    }

    #[test]
    fn rewiring_moves_topology_not_features() {
        let g = generate_grid(5, 60, 1.0, 0).unwrap();
        let r = edge_rewire(&g, 1.0, 1).unwrap();
        let settings = MetricSettings::default();
        let phi = comparison_resolution(&g, [&r]);
        assert!(evaluate("lcc_ks".parse().unwrap(), &settings, &g, &r, phi, None).unwrap() > 0.0);
        for k in ["feat_kl", "feat_js", "feat_ks", "feat_mmd"] {
            assert_eq!(evaluate(k.parse().unwrap(), &settings, &g, &r, phi, None).unwrap(), 0.0);
        }
    }

    #[test]
    fn resolution_fallbacks() {
        let flat = Ctdg::new(vec![crate::Event::new(0, 1, 5.0, vec![])], 0).unwrap();
        let g = generate_grid(3, 10, 0.5, 0).unwrap();
        assert_eq!(comparison_resolution(&g, [&flat]), 0.5);
        assert_eq!(comparison_resolution(&flat, [&g]), 0.5);
        assert_eq!(comparison_resolution(&flat, [&flat]), 1.0);
    }
}
