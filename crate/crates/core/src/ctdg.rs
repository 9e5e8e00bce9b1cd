//! Continuous-time dynamic graphs: the event model, CSV I/O, snapshot
//! discretization and the synthetic grid generator.
//!
//! A [`Ctdg`] is an immutable, time-ordered list of [`Event`]s. Static views of
//! the graph are produced on demand by [`SnapshotIter`], which derives each
//! [`Snapshot`] from the previous one by applying the events that fall inside
//! the next resolution step.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Slack, in units of the resolution, used when mapping a timestamp to a
/// snapshot index. Absorbs rounding in `t / phi` for timestamps that are exact
/// multiples of `phi`.
const INDEX_EPS: f64 = 1e-9;

/// Upper bound on the number of snapshots a schedule may describe.
pub const MAX_SNAPSHOTS: usize = 100_000_000;

/// One timestamped interaction `(src, dst, t, features)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub src: NodeId,
    pub dst: NodeId,
    pub t: f64,
    pub features: Vec<f64>,
}

impl Event {
    pub fn new(src: NodeId, dst: NodeId, t: f64, features: Vec<f64>) -> Self {
        Event {
            src,
            dst,
            t,
            features,
        }
    }
}

/// A continuous-time dynamic graph.
///
/// Events are kept sorted by timestamp; ties keep their insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ctdg {
    events: Vec<Event>,
    nodes: Vec<NodeId>,
    feature_dim: usize,
}

impl Ctdg {
    /// Builds a graph from events in any order. Every event must carry exactly
    /// `feature_dim` features and a finite, non-negative timestamp.
    pub fn new(mut events: Vec<Event>, feature_dim: usize) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if e.features.len() != feature_dim {
                return Err(Error::InconsistentFeatureDim {
                    line: i as u64 + 1,
                    expected: feature_dim,
                    found: e.features.len(),
                });
            }
            if !e.t.is_finite() || e.t < 0.0 {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: format!("timestamp must be finite and non-negative, got {}", e.t),
                });
            }
            if e.features.iter().any(|f| !f.is_finite()) {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: "non-finite feature value".into(),
                });
            }
        }
        // `sort_by` is stable, so simultaneous events keep file order.
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self::from_sorted(events, feature_dim))
    }

    /// Internal constructor for callers that already hold sorted, validated
    /// events (perturbations keep the time axis sorted).
    pub(crate) fn from_sorted(events: Vec<Event>, feature_dim: usize) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].t <= w[1].t));
        let nodes: BTreeSet<NodeId> = events.iter().flat_map(|e| [e.src, e.dst]).collect();
        Ctdg {
            events,
            nodes: nodes.into_iter().collect(),
            feature_dim,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Distinct node ids appearing as `src` or `dst`, ascending.
    pub fn node_ids(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Timestamp of the last event, or 0 for an empty graph.
    pub fn t_max(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.t)
    }

    /// Keeps only the first `n` events.
    pub fn truncated(&self, n: usize) -> Ctdg {
        let events = self.events.iter().take(n).cloned().collect();
        Ctdg::from_sorted(events, self.feature_dim)
    }

    /// Gives featureless graphs a single constant feature of 1 per event, so
    /// feature-sensitive metrics have a channel to work with. Graphs that
    /// already carry features are returned unchanged.
    pub fn with_constant_feature(&self) -> Ctdg {
        if self.feature_dim > 0 {
            return self.clone();
        }
        let events = self
            .events
            .iter()
            .map(|e| Event::new(e.src, e.dst, e.t, vec![1.0]))
            .collect();
        Ctdg::from_sorted(events, 1)
    }

    /// A contiguous window of `len` events starting at `start`, with
    /// timestamps shifted so the window begins at t = 0.
    pub fn window(&self, start: usize, len: usize) -> Result<Ctdg> {
        let end = start
            .checked_add(len)
            .filter(|&end| end <= self.events.len())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "window [{start}, {start}+{len}) exceeds {} events",
                    self.events.len()
                ))
            })?;
        let slice = &self.events[start..end];
        let t0 = slice.first().map_or(0.0, |e| e.t);
        let events = slice
            .iter()
            .map(|e| Event::new(e.src, e.dst, (e.t - t0).max(0.0), e.features.clone()))
            .collect();
        Ok(Ctdg::from_sorted(events, self.feature_dim))
    }

    /// Summary used for bookkeeping by the experiment harness.
    pub fn manifest(&self) -> CtdgManifest {
        let mut hasher = Sha256::new();
        hasher.update((self.feature_dim as u64).to_le_bytes());
        for e in &self.events {
            hasher.update(e.src.to_le_bytes());
            hasher.update(e.dst.to_le_bytes());
            hasher.update(e.t.to_bits().to_le_bytes());
            for f in &e.features {
                hasher.update(f.to_bits().to_le_bytes());
            }
        }
        CtdgManifest {
            num_nodes: self.num_nodes(),
            feature_dim: self.feature_dim,
            num_events: self.num_events(),
            checksum: hex::encode(hasher.finalize()),
        }
    }
}

/// Node count, feature dimension, event count and a SHA-256 over the
/// canonical little-endian event encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtdgManifest {
    pub num_nodes: usize,
    pub feature_dim: usize,
    pub num_events: usize,
    pub checksum: String,
}

/// Loads an event CSV: optional header, rows `src,dst,t,f1,...,fk`.
pub fn load_ctdg(path: impl AsRef<Path>) -> Result<Ctdg> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ctdg(BufReader::new(file))
}

pub fn read_ctdg<R: Read>(reader: R) -> Result<Ctdg> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut events = Vec::new();
    let mut feature_dim: Option<usize> = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        // A first row whose leading field is not numeric is a header.
        if i == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() < 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected at least 3 columns (src,dst,t), found {}", record.len()),
            });
        }
        let k = record.len() - 3;
        match feature_dim {
            None => feature_dim = Some(k),
            Some(expected) if expected != k => {
                return Err(Error::InconsistentFeatureDim {
                    line,
                    expected,
                    found: k,
                })
            }
            _ => {}
        }
        let src = parse_node(&record[0], line, "src")?;
        let dst = parse_node(&record[1], line, "dst")?;
        let t = parse_real(&record[2], line, "t")?;
        let features = (3..record.len())
            .map(|c| parse_real(&record[c], line, "feature"))
            .collect::<Result<Vec<_>>>()?;
        events.push(Event::new(src, dst, t, features));
    }
    if events.is_empty() {
        return Err(Error::Empty("event file has no rows"));
    }
    Ctdg::new(events, feature_dim.unwrap_or(0))
}

/// Loads a JODIE-format interaction file
/// (`user_id,item_id,timestamp,state_label,f1,...,fk` with a header row).
///
/// Item ids are offset past the largest user id so the bipartite node sets do
/// not collide, and the state label column is dropped.
pub fn load_jodie(path: impl AsRef<Path>) -> Result<Ctdg> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let mut rows = Vec::new();
    let mut feature_dim: Option<usize> = None;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 4 {
            return Err(Error::Parse {
                line,
                message: "expected user,item,timestamp,label[,features]".into(),
            });
        }
        let k = record.len() - 4;
        match feature_dim {
            None => feature_dim = Some(k),
            Some(expected) if expected != k => {
                return Err(Error::InconsistentFeatureDim {
                    line,
                    expected,
                    found: k,
                })
            }
            _ => {}
        }
        let user = parse_node(&record[0], line, "user")?;
        let item = parse_node(&record[1], line, "item")?;
        let t = parse_real(&record[2], line, "timestamp")?;
        let features = (4..record.len())
            .map(|c| parse_real(&record[c], line, "feature"))
            .collect::<Result<Vec<_>>>()?;
        rows.push((user, item, t, features));
    }
    if rows.is_empty() {
        return Err(Error::Empty("event file has no rows"));
    }
    let offset = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
    let events = rows
        .into_iter()
        .map(|(u, i, t, f)| Event::new(u, i + offset, t, f))
        .collect();
    Ctdg::new(events, feature_dim.unwrap_or(0))
}

fn parse_node(field: &str, line: u64, what: &str) -> Result<NodeId> {
    field.parse::<NodeId>().map_err(|e| Error::Parse {
        line,
        message: format!("bad {what} `{field}`: {e}"),
    })
}

fn parse_real(field: &str, line: u64, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("bad {what} `{field}`: {e}"),
    })
}

/// Writes `g` as a headerless event CSV readable by [`read_ctdg`].
pub fn write_ctdg<W: Write>(g: &Ctdg, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for e in g.events() {
        let mut row = Vec::with_capacity(3 + e.features.len());
        row.push(e.src.to_string());
        row.push(e.dst.to_string());
        row.push(format_real(e.t));
        row.extend(e.features.iter().map(|&f| format_real(f)));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_ctdg(g: &Ctdg, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ctdg(g, std::io::BufWriter::new(file))
}

/// Shortest representation that parses back to the same `f64`.
fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// Minimum positive gap between consecutive timestamps: the coarsest
/// resolution at which every pair of distinct-timestamp events lands in
/// distinct snapshots.
pub fn nyquist_resolution(g: &Ctdg) -> Result<f64> {
    if g.num_events() < 2 {
        return Err(Error::DegenerateTimeAxis);
    }
    g.events()
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .filter(|&gap| gap > 0.0)
        .min_by(f64::total_cmp)
        .ok_or(Error::DegenerateTimeAxis)
}

/// Number and spacing of snapshots covering `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotSchedule {
    pub phi: f64,
    pub count: usize,
}

impl SnapshotSchedule {
    /// Snapshot `i` sits at time `i * phi`; the last one is the first grid
    /// point at or after `t_max`, so the final snapshot holds every event.
    pub fn new(g: &Ctdg, phi: f64) -> Result<Self> {
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::invalid(format!("resolution must be positive, got {phi}")));
        }
        let last = g.t_max() / phi;
        if last >= MAX_SNAPSHOTS as f64 {
            return Err(Error::invalid(format!(
                "resolution {phi} yields more than {MAX_SNAPSHOTS} snapshots"
            )));
        }
        Ok(SnapshotSchedule {
            phi,
            count: snapshot_index(g.t_max(), phi) + 1,
        })
    }

    pub fn index_of(&self, t: f64) -> usize {
        snapshot_index(t, self.phi)
    }
}

/// First snapshot index `i` with `t <= i * phi` (up to [`INDEX_EPS`]).
fn snapshot_index(t: f64, phi: f64) -> usize {
    let x = (t / phi - INDEX_EPS).ceil();
    if x <= 0.0 {
        0
    } else {
        x as usize
    }
}

/// Static undirected graph induced by all events up to some time.
///
/// Repeated interactions between the same pair are idempotent; a self-loop
/// contributes 2 to its node's degree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    time: f64,
    edges: BTreeSet<(NodeId, NodeId)>,
    degree: BTreeMap<NodeId, u32>,
}

impl Snapshot {
    pub fn empty() -> Self {
        Snapshot::default()
    }

    /// Builds a snapshot from scratch out of an explicit edge list.
    pub fn from_edges(edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut s = Snapshot::empty();
        for (u, v) in edges {
            s.insert_edge(u, v);
        }
        s
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Adds the undirected edge `{u, v}`. Returns false if it was present.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        let key = (u.min(v), u.max(v));
        self.degree.entry(u).or_insert(0);
        self.degree.entry(v).or_insert(0);
        if !self.edges.insert(key) {
            return false;
        }
        *self.degree.get_mut(&u).unwrap() += 1;
        *self.degree.get_mut(&v).unwrap() += 1;
        true
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Nodes referenced so far, ascending, with their degrees.
    pub fn degrees(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.degree.iter().map(|(&v, &d)| (v, d))
    }

    pub fn degree(&self, v: NodeId) -> Option<u32> {
        self.degree.get(&v).copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.degree.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }
}

/// Yields the snapshots of a schedule in order. Each snapshot is a fresh,
/// owned copy of its predecessor with the newly covered events applied.
pub struct SnapshotIter<'a> {
    events: &'a [Event],
    schedule: SnapshotSchedule,
    next_event: usize,
    next_index: usize,
    current: Snapshot,
}

impl<'a> SnapshotIter<'a> {
    pub fn new(g: &'a Ctdg, phi: f64) -> Result<Self> {
        Ok(SnapshotIter {
            events: g.events(),
            schedule: SnapshotSchedule::new(g, phi)?,
            next_event: 0,
            next_index: 0,
            current: Snapshot::empty(),
        })
    }

    pub fn schedule(&self) -> SnapshotSchedule {
        self.schedule
    }
}

impl Iterator for SnapshotIter<'_> {
    type Item = Snapshot;

    fn next(&mut self) -> Option<Snapshot> {
        if self.next_index >= self.schedule.count {
            return None;
        }
        let i = self.next_index;
        while let Some(e) = self.events.get(self.next_event) {
            if self.schedule.index_of(e.t) > i {
                break;
            }
            self.current.insert_edge(e.src, e.dst);
            self.next_event += 1;
        }
        self.current.time = i as f64 * self.schedule.phi;
        self.next_index += 1;
        Some(self.current.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.schedule.count - self.next_index;
        (left, Some(left))
    }
}

/// Materializes every snapshot of `g` at resolution `phi`.
pub fn discretize(g: &Ctdg, phi: f64) -> Result<Vec<Snapshot>> {
    Ok(SnapshotIter::new(g, phi)?.collect())
}

/// Parameters of the synthetic lattice dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub side: usize,
    pub num_events: usize,
    pub interval: f64,
    pub seed: u64,
}

impl Default for GridSpec {
    /// A 23x23 lattice has 529 nodes and 1012 edges, so 1000 events cover
    /// nearly one full sweep.
    fn default() -> Self {
        GridSpec {
            side: 23,
            num_events: 1000,
            interval: 1.0,
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn generate(&self) -> Result<Ctdg> {
        generate_grid(self.side, self.num_events, self.interval, self.seed)
    }
}

/// Event features of the grid dataset: `(src * t, dst + t)`.
pub fn grid_features(src: NodeId, dst: NodeId, t: f64) -> [f64; 2] {
    [src as f64 * t, dst as f64 + t]
}

/// Lattice CTDG on `side x side` nodes (id = `row * side + col`).
///
/// Lattice edges are swept in row-major order (right neighbour, then the one
/// below) and the sweep repeats until `num_events` events exist. Event `j`
/// happens at `(j + 1) * interval`; the seed picks each event's orientation.
pub fn generate_grid(side: usize, num_events: usize, interval: f64, seed: u64) -> Result<Ctdg> {
    if side < 2 {
        return Err(Error::invalid("grid side must be at least 2"));
    }
    if num_events == 0 {
        return Err(Error::invalid("grid needs at least one event"));
    }
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::invalid("grid interval must be positive"));
    }
    if side.checked_mul(side).is_none_or(|n| n > NodeId::MAX as usize) {
        return Err(Error::invalid("grid side too large"));
    }

    let mut lattice = Vec::with_capacity(2 * side * (side - 1));
    for r in 0..side {
        for c in 0..side {
            let v = (r * side + c) as NodeId;
            if c + 1 < side {
                lattice.push((v, v + 1));
            }
            if r + 1 < side {
                lattice.push((v, v + side as NodeId));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = (0..num_events)
        .map(|j| {
            let (a, b) = lattice[j % lattice.len()];
            let (src, dst) = if rng.random::<bool>() { (a, b) } else { (b, a) };
            let t = (j + 1) as f64 * interval;
            Event::new(src, dst, t, grid_features(src, dst, t).to_vec())
        })
        .collect();
    Ok(Ctdg::from_sorted(events, 2))
}
