//! Random-projection descriptors for whole dynamic graphs.
//!
//! Each node is described by the time-ordered concatenation of the
//! (normalized timestamp, normalized features) pairs of every event it touches.
//! A shared projection `W1` maps these variable-length sequences to `n`-dim
//! node embeddings; a second shared projection `W2` mixes the embeddings
//! across node slots (ordered by first appearance) into `o` descriptors,
//! giving an `n x o` matrix per graph. Two graphs are compared with the cosine
//! distance of their matrices under the Frobenius inner product.
//!
//! Both projections depend on the largest payload length `M` and node count
//! `Z` over *every* graph being compared, so descriptors are only comparable
//! when built by the same [`JlProjector`] (or with equal parameters).

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::ctdg::{Ctdg, NodeId};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::srm::{MatrixKind, RandomProjection};

/// Which min-max statistics normalize the graph being embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each graph is normalized with its own statistics.
    #[default]
    PerGraph,
    /// Generated graphs reuse the reference graph's statistics.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JlConfig {
    /// Node embedding dimension.
    pub n: usize,
    /// Number of graph-level descriptors.
    pub o: usize,
    pub seed: u64,
    pub matrix_kind: MatrixKind,
    pub normalization: Normalization,
}

impl Default for JlConfig {
    fn default() -> Self {
        JlConfig {
            n: 100,
            o: 100,
            seed: 0,
            matrix_kind: MatrixKind::Structured,
            normalization: Normalization::PerGraph,
        }
    }
}

impl JlConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        JlConfig { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.o == 0 {
            return Err(Error::invalid("JL dimensions n and o must be positive"));
        }
        Ok(())
    }
}

/// Per-channel min/max used for min-max normalization. Channel 0 is time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    pub fn from_graph(g: &Ctdg) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::Empty("cannot normalize an empty graph"));
        }
        let channels = 1 + g.feature_dim();
        let mut min = vec![f64::INFINITY; channels];
        let mut max = vec![f64::NEG_INFINITY; channels];
        for e in g.events() {
            for (c, x) in std::iter::once(e.t).chain(e.features.iter().copied()).enumerate() {
                min[c] = min[c].min(x);
                max[c] = max[c].max(x);
            }
        }
        Ok(NormStats { min, max })
    }

    pub fn channels(&self) -> usize {
        self.min.len()
    }

    /// Constant channels map to 0. Values outside the recorded range (when
    /// normalizing with another graph's statistics) are not clamped.
    pub fn scale(&self, channel: usize, x: f64) -> f64 {
        let span = self.max[channel] - self.min[channel];
        if span > 0.0 {
            (x - self.min[channel]) / span
        } else {
            0.0
        }
    }
}

/// An event with node identity dropped: `(t_norm, features_norm...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEvent(pub Vec<f64>);

impl ReducedEvent {
    pub fn t_norm(&self) -> f64 {
        self.0[0]
    }

    pub fn features_norm(&self) -> &[f64] {
        &self.0[1..]
    }
}

/// Min-max normalizes the time channel and each feature channel of `g` with
/// statistics collected over `g` itself.
pub fn normalize_events(g: &Ctdg) -> Result<(Vec<ReducedEvent>, NormStats)> {
    let stats = NormStats::from_graph(g)?;
    let reduced = normalize_with(g, &stats)?;
    Ok((reduced, stats))
}

pub fn normalize_with(g: &Ctdg, stats: &NormStats) -> Result<Vec<ReducedEvent>> {
    if stats.channels() != 1 + g.feature_dim() {
        return Err(Error::DescriptorMismatch(format!(
            "normalization stats have {} channels, graph has {}",
            stats.channels(),
            1 + g.feature_dim()
        )));
    }
    Ok(g.events()
        .iter()
        .map(|e| {
            ReducedEvent(
                std::iter::once(e.t)
                    .chain(e.features.iter().copied())
                    .enumerate()
                    .map(|(c, x)| stats.scale(c, x))
                    .collect(),
            )
        })
        .collect())
}

/// All reduced events touching one node, concatenated in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSequence {
    pub node: NodeId,
    pub first_seen: f64,
    pub payload: Vec<f64>,
}

/// One sequence per node, ordered by first appearance and then by node id.
/// Each event is appended to both endpoints (once for a self-loop).
pub fn build_node_sequences(g: &Ctdg, reduced: &[ReducedEvent]) -> Vec<NodeSequence> {
    let mut index: HashMap<NodeId, usize> = HashMap::with_capacity(g.num_nodes());
    let mut seqs: Vec<NodeSequence> = Vec::with_capacity(g.num_nodes());
    for (e, r) in g.events().iter().zip(reduced) {
        let endpoints: &[NodeId] = if e.src == e.dst {
            &[e.src]
        } else {
            &[e.src, e.dst]
        };
        for &v in endpoints {
            let slot = *index.entry(v).or_insert_with(|| {
                seqs.push(NodeSequence {
                    node: v,
                    first_seen: e.t,
                    payload: Vec::new(),
                });
                seqs.len() - 1
            });
            seqs[slot].payload.extend_from_slice(&r.0);
        }
    }
    seqs.sort_by(|a, b| a.first_seen.total_cmp(&b.first_seen).then(a.node.cmp(&b.node)));
    seqs
}

/// Everything that must match for two descriptors to be comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DescriptorParams {
    pub n: usize,
    pub o: usize,
    pub seed: u64,
    pub matrix_kind: MatrixKind,
    /// Largest node payload length `M`.
    pub max_payload: usize,
    /// Largest node count `Z`.
    pub max_nodes: usize,
}

/// `n x o` graph descriptor, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    pub params: DescriptorParams,
    matrix: Vec<f64>,
}

const BLOB_MAGIC: &[u8; 4] = b"JLGD";
const BLOB_VERSION: u32 = 1;

impl GraphDescriptor {
    pub fn new(params: DescriptorParams, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != params.n * params.o {
            return Err(Error::DescriptorMismatch(format!(
                "matrix has {} entries, expected {}x{}",
                matrix.len(),
                params.n,
                params.o
            )));
        }
        Ok(GraphDescriptor { params, matrix })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.params.n, self.params.o)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.params.o + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: GraphDescriptor = serde_json::from_str(s)?;
        GraphDescriptor::new(d.params, d.matrix)
    }

    /// Little-endian blob: magic, version, params header, then the entries.
    pub fn write_blob<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        let kind: u64 = match p.matrix_kind {
            MatrixKind::Structured => 0,
            MatrixKind::Dense => 1,
        };
        let mut buf = Vec::with_capacity(56 + 8 * self.matrix.len());
        buf.extend_from_slice(BLOB_MAGIC);
        buf.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        for field in [p.n as u64, p.o as u64, p.seed, kind, p.max_payload as u64, p.max_nodes as u64] {
            buf.extend_from_slice(&field.to_le_bytes());
        }
        for x in &self.matrix {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf).map_err(|e| Error::io("<descriptor blob>", e))
    }

    pub fn read_blob<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)
            .map_err(|e| Error::io("<descriptor blob>", e))?;
        let bad = |msg: &str| Error::DescriptorMismatch(format!("bad descriptor blob: {msg}"));
        if buf.len() < 56 || &buf[..4] != BLOB_MAGIC {
            return Err(bad("missing header"));
        }
        if u32::from_le_bytes(buf[4..8].try_into().unwrap()) != BLOB_VERSION {
            return Err(bad("unsupported version"));
        }
        let field = |i: usize| u64::from_le_bytes(buf[8 + 8 * i..16 + 8 * i].try_into().unwrap());
        let matrix_kind = match field(3) {
            0 => MatrixKind::Structured,
            1 => MatrixKind::Dense,
            _ => return Err(bad("unknown matrix kind")),
        };
        let params = DescriptorParams {
            n: field(0) as usize,
            o: field(1) as usize,
            seed: field(2),
            matrix_kind,
            max_payload: field(4) as usize,
            max_nodes: field(5) as usize,
        };
        let body = &buf[56..];
        if body.len() != 8 * params.n * params.o {
            return Err(bad("body length does not match shape"));
        }
        let matrix = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        GraphDescriptor::new(params, matrix)
    }
}

/// Shared `M` (largest payload) and `Z` (largest node count) over a set of
/// graphs that will be compared with each other.
pub fn required_dims<'a>(graphs: impl IntoIterator<Item = &'a Ctdg>) -> (usize, usize) {
    let mut max_payload = 1;
    let mut max_nodes = 1;
    for g in graphs {
        let mut touches: HashMap<NodeId, usize> = HashMap::new();
        for e in g.events() {
            *touches.entry(e.src).or_insert(0) += 1;
            if e.dst != e.src {
                *touches.entry(e.dst).or_insert(0) += 1;
            }
        }
        let width = 1 + g.feature_dim();
        let longest = touches.values().copied().max().unwrap_or(0) * width;
        max_payload = max_payload.max(longest);
        max_nodes = max_nodes.max(g.num_nodes());
    }
    (max_payload, max_nodes)
}

/// The two shared projections for one comparison configuration.
#[derive(Debug, Clone)]
pub struct JlProjector {
    config: JlConfig,
    params: DescriptorParams,
    w1: RandomProjection,
    w2: RandomProjection,
}

impl JlProjector {
    pub fn new(config: JlConfig, max_payload: usize, max_nodes: usize) -> Result<Self> {
        config.validate()?;
        if max_payload == 0 || max_nodes == 0 {
            return Err(Error::invalid("M and Z must be positive"));
        }
        let w1 = RandomProjection::new(
            config.matrix_kind,
            max_payload,
            config.n,
            derive_seed(config.seed, &[1]),
        )?;
        let w2 = RandomProjection::new(
            config.matrix_kind,
            max_nodes,
            config.o,
            derive_seed(config.seed, &[2]),
        )?;
        Ok(JlProjector {
            config,
            params: DescriptorParams {
                n: config.n,
                o: config.o,
                seed: config.seed,
                matrix_kind: config.matrix_kind,
                max_payload,
                max_nodes,
            },
            w1,
            w2,
        })
    }

    /// Sizes the projections to cover every graph in `graphs`.
    pub fn for_graphs<'a>(config: JlConfig, graphs: impl IntoIterator<Item = &'a Ctdg>) -> Result<Self> {
        let (m, z) = required_dims(graphs);
        Self::new(config, m, z)
    }

    pub fn params(&self) -> DescriptorParams {
        self.params
    }

    pub fn config(&self) -> JlConfig {
        self.config
    }

    pub fn w1(&self) -> &RandomProjection {
        &self.w1
    }

    pub fn w2(&self) -> &RandomProjection {
        &self.w2
    }

    /// Stage 1: one `n`-dim embedding per node sequence, in sequence order.
    pub fn node_embeddings(&self, seqs: &[NodeSequence]) -> Result<Vec<Vec<f64>>> {
        let mut scratch = Vec::new();
        seqs.iter()
            .map(|s| {
                let mut out = vec![0.0; self.config.n];
                self.w1.apply_into(&s.payload, &mut out, &mut scratch)?;
                Ok(out)
            })
            .collect()
    }

    /// Stage 1 followed by stage 2.
    pub fn embed_sequences(&self, seqs: &[NodeSequence]) -> Result<GraphDescriptor> {
        if seqs.len() > self.params.max_nodes {
            return Err(Error::DimensionMismatch {
                expected: self.params.max_nodes,
                found: seqs.len(),
            });
        }
        let nodes = self.node_embeddings(seqs)?;
        let (n, o) = (self.config.n, self.config.o);
        let mut matrix = vec![0.0; n * o];
        let mut column = vec![0.0; nodes.len()];
        let mut scratch = Vec::new();
        for c in 0..n {
            for (slot, emb) in column.iter_mut().zip(&nodes) {
                *slot = emb[c];
            }
            self.w2
                .apply_into(&column, &mut matrix[c * o..(c + 1) * o], &mut scratch)?;
        }
        GraphDescriptor::new(self.params, matrix)
    }

    /// Embeds `g` normalized with its own statistics.
    pub fn embed(&self, g: &Ctdg) -> Result<GraphDescriptor> {
        let (reduced, _) = normalize_events(g)?;
        self.embed_sequences(&build_node_sequences(g, &reduced))
    }

    /// Embeds `g` normalized with externally supplied statistics.
    pub fn embed_with_stats(&self, g: &Ctdg, stats: &NormStats) -> Result<GraphDescriptor> {
        let reduced = normalize_with(g, stats)?;
        self.embed_sequences(&build_node_sequences(g, &reduced))
    }

    /// Embeds a generated graph according to the configured normalization
    /// mode, using `reference` for statistics when asked to.
    pub fn embed_generated(&self, g: &Ctdg, reference: &Ctdg) -> Result<GraphDescriptor> {
        match self.config.normalization {
            Normalization::PerGraph => self.embed(g),
            Normalization::Reference => self.embed_with_stats(g, &NormStats::from_graph(reference)?),
        }
    }

    /// JL distance between a reference graph and a generated one.
    pub fn distance(&self, reference: &Ctdg, generated: &Ctdg) -> Result<f64> {
        let a = self.embed(reference)?;
        let b = self.embed_generated(generated, reference)?;
        jl_distance(&a, &b)
    }
}

/// Builds the projections for `(m, z)` and embeds `g` with its own
/// normalization statistics.
pub fn embed_graph(g: &Ctdg, config: JlConfig, m: usize, z: usize) -> Result<GraphDescriptor> {
    JlProjector::new(config, m, z)?.embed(g)
}

/// `1 - <A, B>_F / (|A|_F |B|_F)`, in `[0, 2]`.
pub fn jl_distance(a: &GraphDescriptor, b: &GraphDescriptor) -> Result<f64> {
    if a.params != b.params {
        return Err(Error::DescriptorMismatch(format!(
            "{:?} vs {:?}",
            a.params, b.params
        )));
    }
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateDescriptor);
    }
    let dot: f64 = a.matrix.iter().zip(&b.matrix).map(|(x, y)| x * y).sum();
    Ok((1.0 - dot / (na * nb)).clamp(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctdg::{generate_grid, Event};

    fn ev(src: NodeId, dst: NodeId, t: f64, f: &[f64]) -> Event {
        Event::new(src, dst, t, f.to_vec())
    }

    fn small_config() -> JlConfig {
        JlConfig {
            n: 8,
            o: 6,
            seed: 42,
            ..JlConfig::default()
        }
    }

    #[test]
    fn min_max_time_channel() {
        let g = Ctdg::new(
            vec![ev(0, 1, 0.0, &[7.0]), ev(1, 2, 5.0, &[7.0]), ev(2, 3, 10.0, &[7.0])],
            1,
        )
        .unwrap();
        let (r, stats) = normalize_events(&g).unwrap();
        let t: Vec<f64> = r.iter().map(|e| e.t_norm()).collect();
        assert_eq!(t, vec![0.0, 0.5, 1.0]);
        // constant channel
        assert!(r.iter().all(|e| e.features_norm() == [0.0]));
        assert_eq!(stats.min, vec![0.0, 7.0]);
    }

    #[test]
    fn grid_normalization_by_hand() {
        let g = generate_grid(2, 4, 1.0, 3).unwrap();
        let (r, _) = normalize_events(&g).unwrap();
        let f0: Vec<f64> = g.events().iter().map(|e| e.features[0]).collect();
        let f1: Vec<f64> = g.events().iter().map(|e| e.features[1]).collect();
        let mm = |v: &[f64], x: f64| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (x - lo) / (hi - lo)
        };
        for (i, e) in r.iter().enumerate() {
            assert_eq!(e.t_norm(), i as f64 / 3.0);
            assert_eq!(e.features_norm()[0], mm(&f0, f0[i]));
            assert_eq!(e.features_norm()[1], mm(&f1, f1[i]));
        }
    }

    #[test]
    fn empty_graph_cannot_normalize() {
        let g = Ctdg::new(vec![], 0).unwrap();
        assert!(normalize_events(&g).is_err());
    }

    #[test]
    fn sequences_single_event() {
        let g = Ctdg::new(vec![ev(0, 1, 0.0, &[])], 0).unwrap();
        let (r, _) = normalize_events(&g).unwrap();
        let seqs = build_node_sequences(&g, &r);
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].node, 0);
        assert_eq!(seqs[1].node, 1);
        assert_eq!(seqs[0].payload.len(), 1);
    }

    #[test]
    fn payload_length_counts_touches() {
        let g = Ctdg::new(
            vec![
                ev(4, 1, 0.0, &[1.0, 2.0]),
                ev(2, 4, 1.0, &[3.0, 4.0]),
                ev(4, 3, 2.0, &[5.0, 6.0]),
            ],
            2,
        )
        .unwrap();
        let (r, _) = normalize_events(&g).unwrap();
        let seqs = build_node_sequences(&g, &r);
        let four = seqs.iter().find(|s| s.node == 4).unwrap();
        assert_eq!(four.payload.len(), 9);
        // ties at t=0 ordered by id: 1 before 4
        assert_eq!(seqs[0].node, 1);
        assert_eq!(seqs[1].node, 4);
    }

    #[test]
    fn distance_identities() {
        let g = generate_grid(4, 30, 1.0, 1).unwrap();
        let p = JlProjector::for_graphs(small_config(), [&g]).unwrap();
        let a = p.embed(&g).unwrap();
        assert!(jl_distance(&a, &a).unwrap().abs() < 1e-12);

        let neg = GraphDescriptor::new(a.params, a.as_slice().iter().map(|x| -x).collect()).unwrap();
        assert!((jl_distance(&a, &neg).unwrap() - 2.0).abs() < 1e-12);

        let twice = GraphDescriptor::new(a.params, a.as_slice().iter().map(|x| 2.0 * x).collect()).unwrap();
        assert!(jl_distance(&a, &twice).unwrap().abs() < 1e-12);
    }

    #[test]
    fn distance_rejects_mismatch_and_zero() {
        let g = generate_grid(3, 10, 1.0, 1).unwrap();
        let p1 = JlProjector::new(small_config(), 50, 9).unwrap();
        let p2 = JlProjector::new(small_config(), 64, 9).unwrap();
        let a = p1.embed(&g).unwrap();
        let b = p2.embed(&g).unwrap();
        assert!(matches!(jl_distance(&a, &b), Err(Error::DescriptorMismatch(_))));
        let zero = GraphDescriptor::new(a.params, vec![0.0; 48]).unwrap();
        assert!(matches!(jl_distance(&a, &zero), Err(Error::DegenerateDescriptor)));
    }

    #[test]
    fn zero_payloads_give_zero_descriptor() {
        // Constant time and features normalize to all zeros.
        let g = Ctdg::new(vec![ev(0, 1, 2.0, &[3.0]), ev(1, 2, 2.0, &[3.0])], 1).unwrap();
        let d = embed_graph(&g, small_config(), 8, 3).unwrap();
        assert!(d.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn oversized_inputs_rejected() {
        let g = generate_grid(3, 12, 1.0, 1).unwrap();
        assert!(embed_graph(&g, small_config(), 2, 9).is_err());
        assert!(embed_graph(&g, small_config(), 100, 2).is_err());
    }

    #[test]
    fn blob_and_json_round_trip() {
        let g = generate_grid(3, 12, 1.0, 1).unwrap();
        let d = JlProjector::for_graphs(small_config(), [&g]).unwrap().embed(&g).unwrap();
        let mut blob = Vec::new();
        d.write_blob(&mut blob).unwrap();
        assert_eq!(GraphDescriptor::read_blob(blob.as_slice()).unwrap(), d);
        assert_eq!(GraphDescriptor::from_json(&d.to_json().unwrap()).unwrap(), d);
        assert!(GraphDescriptor::read_blob(&blob[..20]).is_err());
    }

    #[test]
    fn reference_normalization_differs_from_per_graph() {
        let g = generate_grid(4, 24, 1.0, 0).unwrap();
        let h = g.truncated(12);
        let cfg = JlConfig {
            normalization: Normalization::Reference,
            ..small_config()
        };
        let p = JlProjector::for_graphs(cfg, [&g, &h]).unwrap();
        let own = p.embed(&h).unwrap();
        let refd = p.embed_generated(&h, &g).unwrap();
        assert_ne!(own, refd);
    }
}
