//! Baseline function descriptors: per-snapshot topology statistics (mean
//! degree, largest component, component count, power-law exponent) and the
//! per-node activity rate.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ctdg::{Ctdg, NodeId, Snapshot, SnapshotIter, SnapshotSchedule};
use crate::error::{Error, Result};

/// Value reported by [`ple`] when every degree equals the minimum degree and
/// the Hill estimator diverges.
pub const PLE_CAP: f64 = 1.0 + 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    MeanDegree,
    Lcc,
    Nc,
    Ple,
    ActivityRate,
}

impl Descriptor {
    pub const SNAPSHOT: [Descriptor; 4] = [
        Descriptor::MeanDegree,
        Descriptor::Lcc,
        Descriptor::Nc,
        Descriptor::Ple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::MeanDegree => "mean_degree",
            Descriptor::Lcc => "lcc",
            Descriptor::Nc => "nc",
            Descriptor::Ple => "ple",
            Descriptor::ActivityRate => "activity_rate",
        }
    }

    pub fn is_per_snapshot(self) -> bool {
        self != Descriptor::ActivityRate
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mean_degree" | "degree" => Descriptor::MeanDegree,
            "lcc" => Descriptor::Lcc,
            "nc" => Descriptor::Nc,
            "ple" => Descriptor::Ple,
            "activity_rate" | "activity" => Descriptor::ActivityRate,
            _ => {
                return Err(Error::Unknown {
                    kind: "descriptor",
                    name: s.to_string(),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    PerSnapshot,
    PerNode,
}

/// Scalar descriptors for one graph. Entries with `valid[i] == false` are
/// undefined (PLE of an empty snapshot) and skipped by distance estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSeries {
    pub descriptor: Descriptor,
    pub kind: SeriesKind,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// Number of entries clamped to [`PLE_CAP`].
    pub capped: usize,
}

impl DescriptorSeries {
    fn new(descriptor: Descriptor, kind: SeriesKind) -> Self {
        DescriptorSeries {
            descriptor,
            kind,
            values: Vec::new(),
            valid: Vec::new(),
            capped: 0,
        }
    }

    fn push(&mut self, value: Option<f64>) {
        self.values.push(value.unwrap_or(f64::NAN));
        self.valid.push(value.is_some());
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The defined entries, in order.
    pub fn masked(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
            .collect()
    }

    /// One value per row; undefined entries are written as empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([self.descriptor.name()])?;
        for (v, ok) in self.values.iter().zip(&self.valid) {
            if *ok {
                wtr.write_record([format!("{v:?}")])?;
            } else {
                wtr.write_record([""])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Average degree over nodes present in the snapshot; 0 when empty.
pub fn mean_degree(s: &Snapshot) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let total: u64 = s.degrees().map(|(_, d)| d as u64).sum();
    total as f64 / s.num_nodes() as f64
}

/// Node count of the largest connected component; 0 when empty.
pub fn lcc(s: &Snapshot) -> f64 {
    components(s).1 as f64
}

/// Number of connected components among referenced nodes; 0 when empty.
pub fn num_components(s: &Snapshot) -> f64 {
    components(s).0 as f64
}

/// Hill estimator `1 + N / sum(ln(d / d_min))` over nodes with positive
/// degree. `None` for a snapshot without edges; [`PLE_CAP`] when all degrees
/// are equal.
pub fn ple(s: &Snapshot) -> Option<f64> {
    let mut hist = BTreeMap::new();
    for (_, d) in s.degrees() {
        *hist.entry(d).or_insert(0usize) += 1;
    }
    ple_from_histogram(&hist).map(|(v, _)| v)
}

/// `(value, capped)` from a degree -> node-count histogram.
fn ple_from_histogram(hist: &BTreeMap<u32, usize>) -> Option<(f64, bool)> {
    let mut positive = hist.iter().filter(|(&d, &c)| d > 0 && c > 0);
    let (&d_min, _) = positive.clone().next()?;
    let mut nodes = 0usize;
    let mut sum = 0.0;
    for (&d, &c) in positive.by_ref() {
        nodes += c;
        sum += c as f64 * (d as f64 / d_min as f64).ln();
    }
    if sum > 0.0 {
        Some((1.0 + nodes as f64 / sum, false))
    } else {
        Some((PLE_CAP, true))
    }
}

/// `(component count, largest component size)` computed from scratch.
fn components(s: &Snapshot) -> (usize, usize) {
    let index: HashMap<NodeId, usize> = s.degrees().enumerate().map(|(i, (v, _))| (v, i)).collect();
    let mut sets = DisjointSets::new();
    for _ in 0..index.len() {
        sets.add();
    }
    for (u, v) in s.edges() {
        sets.union(index[&u], index[&v]);
    }
    (sets.components, sets.largest)
}

/// Union–find with union by size and path halving, tracking the component
/// count and the largest component size.
#[derive(Debug, Default)]
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
    largest: usize,
}

impl DisjointSets {
    fn new() -> Self {
        Self::default()
    }

    fn add(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.size.push(1);
        self.components += 1;
        self.largest = self.largest.max(1);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        self.largest = self.largest.max(self.size[ra]);
    }
}

/// Per-node count of event participations, in ascending node-id order. A
/// self-loop counts twice.
pub fn activity_rate(g: &Ctdg) -> DescriptorSeries {
    let mut counts: BTreeMap<NodeId, u64> = g.node_ids().iter().map(|&v| (v, 0)).collect();
    for e in g.events() {
        *counts.get_mut(&e.src).unwrap() += 1;
        *counts.get_mut(&e.dst).unwrap() += 1;
    }
    let mut series = DescriptorSeries::new(Descriptor::ActivityRate, SeriesKind::PerNode);
    for c in counts.into_values() {
        series.push(Some(c as f64));
    }
    series
}

/// How per-snapshot statistics are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStrategy {
    /// Maintain degree/component state across snapshots without building them.
    #[default]
    Incremental,
    /// Instantiate every snapshot and compute the statistic from scratch.
    Materialized,
}

/// Applies `descriptor` to every snapshot of `g` at resolution `phi`, using
/// incremental state.
pub fn snapshot_series(g: &Ctdg, descriptor: Descriptor, phi: f64) -> Result<DescriptorSeries> {
    snapshot_series_with(g, descriptor, phi, SeriesStrategy::Incremental)
}

pub fn snapshot_series_with(
    g: &Ctdg,
    descriptor: Descriptor,
    phi: f64,
    strategy: SeriesStrategy,
) -> Result<DescriptorSeries> {
    if !descriptor.is_per_snapshot() {
        return Err(Error::Unknown {
            kind: "snapshot descriptor",
            name: descriptor.name().to_string(),
        });
    }
    match strategy {
        SeriesStrategy::Incremental => incremental_series(g, descriptor, phi),
        SeriesStrategy::Materialized => materialized_series(g, descriptor, phi),
    }
}

fn materialized_series(g: &Ctdg, descriptor: Descriptor, phi: f64) -> Result<DescriptorSeries> {
    let mut series = DescriptorSeries::new(descriptor, SeriesKind::PerSnapshot);
    for s in SnapshotIter::new(g, phi)? {
        let value = match descriptor {
            Descriptor::MeanDegree => Some(mean_degree(&s)),
            Descriptor::Lcc => Some(lcc(&s)),
            Descriptor::Nc => Some(num_components(&s)),
            Descriptor::Ple => {
                let v = ple(&s);
                if v == Some(PLE_CAP) {
                    series.capped += 1;
                }
                v
            }
            Descriptor::ActivityRate => unreachable!(),
        };
        series.push(value);
    }
    Ok(series)
}

#[derive(Default)]
struct IncrementalState {
    index: HashMap<NodeId, usize>,
    degree: Vec<u32>,
    edges: HashSet<(NodeId, NodeId)>,
    histogram: BTreeMap<u32, usize>,
    degree_sum: u64,
    sets: DisjointSets,
}

impl IncrementalState {
    fn node(&mut self, v: NodeId) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.sets.add();
        self.index.insert(v, i);
        self.degree.push(0);
        *self.histogram.entry(0).or_insert(0) += 1;
        i
    }

    fn bump(&mut self, i: usize) {
        let d = self.degree[i];
        let slot = self.histogram.get_mut(&d).unwrap();
        *slot -= 1;
        if *slot == 0 {
            self.histogram.remove(&d);
        }
        self.degree[i] = d + 1;
        *self.histogram.entry(d + 1).or_insert(0) += 1;
        self.degree_sum += 1;
    }

    fn insert(&mut self, u: NodeId, v: NodeId) {
        let iu = self.node(u);
        let iv = self.node(v);
        if !self.edges.insert((u.min(v), u.max(v))) {
            return;
        }
        self.bump(iu);
        self.bump(iv);
        self.sets.union(iu, iv);
    }

    fn value(&self, descriptor: Descriptor) -> Option<(f64, bool)> {
        let nodes = self.degree.len();
        match descriptor {
            Descriptor::MeanDegree if nodes == 0 => Some((0.0, false)),
            Descriptor::MeanDegree => Some((self.degree_sum as f64 / nodes as f64, false)),
            Descriptor::Lcc => Some((self.sets.largest as f64, false)),
            Descriptor::Nc => Some((self.sets.components as f64, false)),
            Descriptor::Ple => ple_from_histogram(&self.histogram),
            Descriptor::ActivityRate => unreachable!(),
        }
    }
}

fn incremental_series(g: &Ctdg, descriptor: Descriptor, phi: f64) -> Result<DescriptorSeries> {
    let schedule = SnapshotSchedule::new(g, phi)?;
    let mut series = DescriptorSeries::new(descriptor, SeriesKind::PerSnapshot);
    series.values.reserve(schedule.count);
    series.valid.reserve(schedule.count);

    let mut state = IncrementalState::default();
    let events = g.events();
    let mut next = 0;
    let mut current = state.value(descriptor);
    for i in 0..schedule.count {
        let before = next;
        while next < events.len() && schedule.index_of(events[next].t) <= i {
            state.insert(events[next].src, events[next].dst);
            next += 1;
        }
        if next != before {
            current = state.value(descriptor);
        }
        if let Some((_, true)) = current {
            series.capped += 1;
        }
        series.push(current.map(|(v, _)| v));
    }
    Ok(series)
}
