//! Perturbations that turn a reference graph into a degraded copy `G(p)`.
//!
//! Every scheme draws its per-event (or per-mode) randomness independently of
//! `p` and only compares it against `p` at the end. For a fixed seed the set
//! of perturbed events therefore grows monotonically with `p`, which keeps
//! sensitivity curves from being dominated by resampling noise. `p = 0`
//! returns the input bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ctdg::{Ctdg, Event, NodeId};
use crate::error::{Error, Result};
use crate::jl::{build_node_sequences, normalize_events, JlConfig, JlProjector};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    EdgeRewiring,
    TimePerturbation,
    EventPermutation,
    ModeDropping,
    ModeCollapse,
}

impl PerturbKind {
    pub const ALL: [PerturbKind; 5] = [
        PerturbKind::EdgeRewiring,
        PerturbKind::TimePerturbation,
        PerturbKind::EventPermutation,
        PerturbKind::ModeDropping,
        PerturbKind::ModeCollapse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbKind::EdgeRewiring => "edge_rewiring",
            PerturbKind::TimePerturbation => "time_perturbation",
            PerturbKind::EventPermutation => "event_permutation",
            PerturbKind::ModeDropping => "mode_dropping",
            PerturbKind::ModeCollapse => "mode_collapse",
        }
    }

    /// Mode-based schemes need a [`ModeAssignment`].
    pub fn needs_modes(self) -> bool {
        matches!(self, PerturbKind::ModeDropping | PerturbKind::ModeCollapse)
    }
}

impl fmt::Display for PerturbKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PerturbKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "perturbation",
                name: s.to_string(),
            })
    }
}

/// How event permutation moves feature vectors around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermuteMode {
    /// Each selected event copies the features of a random other event.
    #[default]
    Replace,
    /// Selected events shuffle their features among themselves, which keeps
    /// the multiset of feature vectors intact.
    Shuffle,
}

/// One concrete perturbation: scheme, strength and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbKind,
    pub p: f64,
    pub seed: u64,
}

impl Perturbation {
    pub fn new(kind: PerturbKind, p: f64, seed: u64) -> Result<Self> {
        check_p(p)?;
        Ok(Perturbation { kind, p, seed })
    }

    /// Applies the perturbation. Mode-based kinds require `modes`.
    pub fn apply(&self, g: &Ctdg, modes: Option<&ModeAssignment>) -> Result<Ctdg> {
        let need_modes = || {
            modes.ok_or_else(|| Error::invalid(format!("{} needs a mode assignment", self.kind)))
        };
        match self.kind {
            PerturbKind::EdgeRewiring => edge_rewire(g, self.p, self.seed),
            PerturbKind::TimePerturbation => time_perturb(g, self.p, self.seed),
            PerturbKind::EventPermutation => {
                event_permute(g, self.p, self.seed, PermuteMode::Replace)
            }
            PerturbKind::ModeDropping => mode_drop(g, need_modes()?, self.p, self.seed),
            PerturbKind::ModeCollapse => mode_collapse(g, need_modes()?, self.p, self.seed),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability must lie in [0, 1], got {p}")))
    }
}

/// Rewires the destination of each event, with probability `p`, to a uniform
/// node other than its source.
pub fn edge_rewire(g: &Ctdg, p: f64, seed: u64) -> Result<Ctdg> {
    check_p(p)?;
    let nodes = g.node_ids();
    if nodes.len() < 2 {
        return Err(Error::invalid("edge rewiring needs at least 2 nodes"));
    }
    let mut rng = stream(seed, &[0x7265_7769]);
    let events = g
        .events()
        .iter()
        .map(|e| {
            let u: f64 = rng.random();
            let k = rng.random_range(0..nodes.len() - 1);
            let mut out = e.clone();
            if u < p {
                // Skip over the source's slot so every other node is equally likely.
                let src_pos = nodes.binary_search(&e.src).expect("src is a graph node");
                out.dst = nodes[if k >= src_pos { k + 1 } else { k }];
            }
            out
        })
        .collect();
    Ok(Ctdg::from_sorted(events, g.feature_dim()))
}

/// Redraws, with probability `p`, each interior timestamp uniformly between
/// its neighbours. Events are processed in order and the lower bound also
/// respects the already-moved predecessor, so the output stays sorted and
/// every new timestamp lies strictly inside the original neighbour interval.
/// The first and last events never move.
pub fn time_perturb(g: &Ctdg, p: f64, seed: u64) -> Result<Ctdg> {
    check_p(p)?;
    if g.num_events() < 3 {
        return Err(Error::invalid("time perturbation needs at least 3 events"));
    }
    let src = g.events();
    let mut rng = stream(seed, &[0x7469_6d65]);
    let mut events = src.to_vec();
    for i in 1..src.len() - 1 {
        let u: f64 = rng.random();
        let v: f64 = rng.sample(Open01);
        if u >= p {
            continue;
        }
        let lo = src[i - 1].t.max(events[i - 1].t);
        let hi = src[i + 1].t;
        if lo < hi {
            let t = lo + (hi - lo) * v;
            // Rounding can land on an endpoint; keep the original instead.
            if t > lo && t < hi {
                events[i].t = t;
            }
        }
    }
    Ok(Ctdg::from_sorted(events, g.feature_dim()))
}

/// Reassigns feature vectors between events; topology and timestamps are
/// untouched.
pub fn event_permute(g: &Ctdg, p: f64, seed: u64, mode: PermuteMode) -> Result<Ctdg> {
    check_p(p)?;
    if g.feature_dim() == 0 {
        return Err(Error::NoFeatures);
    }
    let n = g.num_events();
    if n < 2 {
        return Err(Error::invalid("event permutation needs at least 2 events"));
    }
    let src = g.events();
    let mut rng = stream(seed, &[0x7065_726d]);
    let mut events = src.to_vec();
    match mode {
        PermuteMode::Replace => {
            for (i, out) in events.iter_mut().enumerate() {
                let u: f64 = rng.random();
                let k = rng.random_range(0..n - 1);
                if u < p {
                    let donor = if k >= i { k + 1 } else { k };
                    out.features.clone_from(&src[donor].features);
                }
            }
        }
        PermuteMode::Shuffle => {
            let selected: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < p).collect();
            let mut order = selected.clone();
            order.shuffle(&mut rng);
            for (&to, &from) in selected.iter().zip(&order) {
                events[to].features.clone_from(&src[from].features);
            }
        }
    }
    Ok(Ctdg::from_sorted(events, g.feature_dim()))
}

/// Summary of one cluster of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub members: Vec<NodeId>,
    /// Member closest to the cluster mean in embedding space.
    pub representative: NodeId,
    /// Mean feature vector of the events whose source is in this mode.
    pub mean_feature: Vec<f64>,
}

/// Partition of a graph's nodes into modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAssignment {
    assignment: BTreeMap<NodeId, usize>,
    modes: Vec<Mode>,
}

impl ModeAssignment {
    /// Builds an assignment from explicit node groups. Representatives are
    /// the first member of each group; mean features come from `g`.
    pub fn from_groups(g: &Ctdg, groups: Vec<Vec<NodeId>>) -> Result<Self> {
        let reps = groups.iter().map(|m| m.first().copied()).collect::<Option<Vec<_>>>();
        let reps = reps.ok_or_else(|| Error::Clustering("empty mode".into()))?;
        Self::build(g, groups, reps)
    }

    fn build(g: &Ctdg, groups: Vec<Vec<NodeId>>, reps: Vec<NodeId>) -> Result<Self> {
        let mut assignment = BTreeMap::new();
        for (c, members) in groups.iter().enumerate() {
            for &v in members {
                if assignment.insert(v, c).is_some() {
                    return Err(Error::Clustering(format!("node {v} assigned twice")));
                }
            }
        }
        if let Some(v) = g.node_ids().iter().find(|v| !assignment.contains_key(v)) {
            return Err(Error::Clustering(format!("node {v} has no mode")));
        }
        let dim = g.feature_dim();
        let mut by_src = vec![(vec![0.0; dim], 0usize); groups.len()];
        let mut touching = vec![(vec![0.0; dim], 0usize); groups.len()];
        let add = |acc: &mut (Vec<f64>, usize), f: &[f64]| {
            acc.0.iter_mut().zip(f).for_each(|(a, x)| *a += x);
            acc.1 += 1;
        };
        for e in g.events() {
            let (cs, cd) = (assignment[&e.src], assignment[&e.dst]);
            add(&mut by_src[cs], &e.features);
            add(&mut touching[cs], &e.features);
            if cd != cs {
                add(&mut touching[cd], &e.features);
            }
        }
        let modes = groups
            .into_iter()
            .zip(reps)
            .enumerate()
            .map(|(c, (mut members, representative))| {
                members.sort_unstable();
                // A mode whose nodes only ever receive events falls back to
                // the events that touch it.
                let (sum, count) = if by_src[c].1 > 0 { &by_src[c] } else { &touching[c] };
                let mean_feature = sum.iter().map(|s| s / (*count).max(1) as f64).collect();
                Mode {
                    members,
                    representative,
                    mean_feature,
                }
            })
            .collect();
        Ok(ModeAssignment { assignment, modes })
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode_of(&self, v: NodeId) -> Option<usize> {
        self.assignment.get(&v).copied()
    }

    fn require(&self, v: NodeId) -> Result<usize> {
        self.mode_of(v)
            .ok_or_else(|| Error::invalid(format!("node {v} is not covered by the mode assignment")))
    }
}

/// Default number of modes for `z` nodes.
pub fn default_k(z: usize) -> usize {
    ((z as f64).sqrt().round() as usize).max(2)
}

/// Clusters nodes by their stage-1 JL embeddings with k-means
/// (`k = max(2, round(sqrt(z)))`, k-means++ seeding).
///
/// If fewer than two clusters end up non-empty the fit is retried with
/// `k = 2`; if the embeddings still do not separate (e.g. all nodes are
/// identical), the nodes are split into two halves by a seeded shuffle.
pub fn cluster_modes(g: &Ctdg, cfg: &JlConfig) -> Result<ModeAssignment> {
    let z = g.num_nodes();
    if z < 4 {
        return Err(Error::Clustering(format!("need at least 4 nodes, graph has {z}")));
    }
    let projector = JlProjector::for_graphs(*cfg, [g])?;
    let (reduced, _) = normalize_events(g)?;
    let seqs = build_node_sequences(g, &reduced);
    let points = projector.node_embeddings(&seqs)?;
    let nodes: Vec<NodeId> = seqs.iter().map(|s| s.node).collect();

    let seed = derive_seed(cfg.seed, &[3]);
    let mut labels = kmeans(&points, default_k(z).min(z), seed);
    if distinct(&labels) < 2 {
        labels = kmeans(&points, 2, derive_seed(seed, &[2]));
    }
    if distinct(&labels) < 2 {
        let mut order: Vec<usize> = (0..z).collect();
        order.shuffle(&mut stream(seed, &[4]));
        labels = vec![0; z];
        for &i in &order[z / 2..] {
            labels[i] = 1;
        }
    }

    // Relabel non-empty clusters in order of first appearance.
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in &labels {
        let next = relabel.len();
        relabel.entry(l).or_insert(next);
    }
    let k = relabel.len();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, l) in labels.iter().enumerate() {
        groups[relabel[l]].push(i);
    }

    let reps = groups
        .iter()
        .map(|idx| {
            let mean = centroid(&points, idx);
            *idx.iter()
                .min_by(|&&a, &&b| {
                    sq_dist(&points[a], &mean)
                        .total_cmp(&sq_dist(&points[b], &mean))
                        .then(nodes[a].cmp(&nodes[b]))
                })
                .map(|&i| &nodes[i])
                .expect("groups are non-empty")
        })
        .collect();
    let groups = groups
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| nodes[i]).collect())
        .collect();
    ModeAssignment::build(g, groups, reps)
}

fn distinct(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid(points: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let mut mean = vec![0.0; points[0].len()];
    for &i in idx {
        mean.iter_mut().zip(&points[i]).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= idx.len() as f64);
    mean
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Lloyd iterations from a k-means++ start. Returns one label per point.
fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    const MAX_ITERS: usize = 100;
    let mut rng = stream(seed, &[]);
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..MAX_ITERS {
        for (c, center) in centers.iter_mut().enumerate() {
            let idx: Vec<usize> = (0..points.len()).filter(|&i| labels[i] == c).collect();
            if !idx.is_empty() {
                *center = centroid(points, &idx);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

fn check_modes(g: &Ctdg, modes: &ModeAssignment) -> Result<()> {
    if modes.num_modes() < 2 {
        return Err(Error::invalid("mode perturbations need at least 2 modes"));
    }
    for e in g.events() {
        modes.require(e.src)?;
        modes.require(e.dst)?;
    }
    Ok(())
}

/// Drops each mode with probability `p` (at least one always survives) and
/// replaces every event touching a dropped mode with a copy of a random event
/// among the surviving modes. The replaced event keeps its timestamp.
pub fn mode_drop(g: &Ctdg, modes: &ModeAssignment, p: f64, seed: u64) -> Result<Ctdg> {
    check_p(p)?;
    check_modes(g, modes)?;
    let mut rng = stream(seed, &[0x6472_6f70]);
    let draws: Vec<f64> = (0..modes.num_modes()).map(|_| rng.random()).collect();
    let mut dropped: Vec<bool> = draws.iter().map(|&u| u < p).collect();
    if dropped.iter().all(|&d| d) {
        let survivor = (0..draws.len())
            .max_by(|&a, &b| draws[a].total_cmp(&draws[b]).then(b.cmp(&a)))
            .expect("at least two modes");
        dropped[survivor] = false;
    }
    let is_dropped = |v: NodeId| dropped[modes.mode_of(v).expect("checked")];

    let events = g.events();
    let mut pool: Vec<usize> = (0..events.len())
        .filter(|&i| !is_dropped(events[i].src) && !is_dropped(events[i].dst))
        .collect();
    if pool.is_empty() {
        pool = (0..events.len())
            .filter(|&i| !is_dropped(events[i].src) || !is_dropped(events[i].dst))
            .collect();
    }

    let out = events
        .iter()
        .map(|e| {
            let u: f64 = rng.random();
            if pool.is_empty() || !(is_dropped(e.src) || is_dropped(e.dst)) {
                return e.clone();
            }
            let donor = &events[pool[((u * pool.len() as f64) as usize).min(pool.len() - 1)]];
            Event::new(donor.src, donor.dst, e.t, donor.features.clone())
        })
        .collect();
    Ok(Ctdg::from_sorted(out, g.feature_dim()))
}

/// With probability `p` per event, moves both endpoints to their modes'
/// representatives and replaces the features with the source mode's mean.
pub fn mode_collapse(g: &Ctdg, modes: &ModeAssignment, p: f64, seed: u64) -> Result<Ctdg> {
    check_p(p)?;
    check_modes(g, modes)?;
    let mut rng = stream(seed, &[0x636f_6c6c]);
    let out = g
        .events()
        .iter()
        .map(|e| {
            let u: f64 = rng.random();
            if u >= p {
                return e.clone();
            }
            let ms = &modes.modes[modes.mode_of(e.src).expect("checked")];
            let md = &modes.modes[modes.mode_of(e.dst).expect("checked")];
            Event::new(ms.representative, md.representative, e.t, ms.mean_feature.clone())
        })
        .collect();
    Ok(Ctdg::from_sorted(out, g.feature_dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctdg::generate_grid;

    fn grid() -> Ctdg {
        generate_grid(6, 200, 1.0, 1).unwrap()
    }

    fn two_groups() -> Ctdg {
        // Nodes 0..4 talk among themselves early with small features; nodes
        // 10..14 talk late with large features.
        let mut ev = Vec::new();
        for i in 0..40u32 {
            let t = i as f64;
            ev.push(Event::new(i % 4, (i + 1) % 4, t, vec![0.0]));
            ev.push(Event::new(10 + i % 4, 10 + (i + 1) % 4, 1000.0 + t, vec![100.0]));
        }
        Ctdg::new(ev, 1).unwrap()
    }

    #[test]
    fn identity_at_zero() {
        let g = grid();
        for kind in [
            PerturbKind::EdgeRewiring,
            PerturbKind::TimePerturbation,
            PerturbKind::EventPermutation,
        ] {
            assert_eq!(Perturbation::new(kind, 0.0, 9).unwrap().apply(&g, None).unwrap(), g);
        }
        let modes = cluster_modes(&g, &JlConfig::default()).unwrap();
        assert_eq!(mode_drop(&g, &modes, 0.0, 3).unwrap(), g);
        assert_eq!(mode_collapse(&g, &modes, 0.0, 3).unwrap(), g);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(Perturbation::new(PerturbKind::EdgeRewiring, 1.5, 0).is_err());
        assert!(edge_rewire(&grid(), -0.1, 0).is_err());
    }

    #[test]
    fn rewire_two_nodes_flips() {
        let g = Ctdg::new(
            vec![Event::new(0, 1, 1.0, vec![]), Event::new(1, 0, 2.0, vec![]), Event::new(0, 0, 3.0, vec![])],
            0,
        )
        .unwrap();
        let r = edge_rewire(&g, 1.0, 4).unwrap();
        let dsts: Vec<NodeId> = r.events().iter().map(|e| e.dst).collect();
        assert_eq!(dsts, vec![1, 0, 1]);
    }

    #[test]
    fn rewire_never_creates_self_loops_and_keeps_times() {
        let g = grid();
        let r = edge_rewire(&g, 1.0, 11).unwrap();
        for (a, b) in g.events().iter().zip(r.events()) {
            assert_ne!(b.src, b.dst);
            assert_eq!(a.t, b.t);
            assert_eq!(a.src, b.src);
            assert_eq!(a.features, b.features);
        }
    }

    #[test]
    fn rewire_is_nested_in_p() {
        let g = grid();
        let changed = |p| {
            let r = edge_rewire(&g, p, 5).unwrap();
            g.events().iter().zip(r.events()).map(|(a, b)| a.dst != b.dst).collect::<Vec<_>>()
        };
        let (lo, hi) = (changed(0.3), changed(0.6));
        assert!(lo.iter().zip(&hi).all(|(&l, &h)| !l || h));
    }

    #[test]
    fn time_perturb_stays_in_neighbour_interval() {
        let g = grid();
        let r = time_perturb(&g, 1.0, 2).unwrap();
        let (a, b) = (g.events(), r.events());
        assert_eq!(a[0].t, b[0].t);
        assert_eq!(a[a.len() - 1].t, b[b.len() - 1].t);
        for i in 1..a.len() - 1 {
            assert!(b[i].t > a[i - 1].t && b[i].t < a[i + 1].t);
            assert_eq!((a[i].src, a[i].dst), (b[i].src, b[i].dst));
        }
        assert!(b.windows(2).all(|w| w[0].t <= w[1].t));
        assert!(time_perturb(&g.truncated(2), 0.5, 0).is_err());
    }

    #[test]
    fn permute_two_events_swaps() {
        let g = Ctdg::new(
            vec![Event::new(0, 1, 1.0, vec![1.0, 2.0]), Event::new(1, 2, 2.0, vec![3.0, 4.0])],
            2,
        )
        .unwrap();
        let r = event_permute(&g, 1.0, 0, PermuteMode::Replace).unwrap();
        assert_eq!(r.events()[0].features, vec![3.0, 4.0]);
        assert_eq!(r.events()[1].features, vec![1.0, 2.0]);
    }

    #[test]
    fn shuffle_preserves_feature_multiset() {
        let g = grid();
        let r = event_permute(&g, 0.7, 8, PermuteMode::Shuffle).unwrap();
        let key = |g: &Ctdg| {
            let mut f: Vec<Vec<u64>> =
                g.events().iter().map(|e| e.features.iter().map(|x| x.to_bits()).collect()).collect();
            f.sort();
            f
        };
        assert_eq!(key(&g), key(&r));
        assert_ne!(g, r);
    }

    #[test]
    fn permute_needs_features() {
        let g = Ctdg::new(vec![Event::new(0, 1, 1.0, vec![]), Event::new(1, 2, 2.0, vec![])], 0).unwrap();
        assert!(matches!(event_permute(&g, 0.5, 0, PermuteMode::Replace), Err(Error::NoFeatures)));
    }

    #[test]
    fn k_rule() {
        assert_eq!(default_k(100), 10);
        assert_eq!(default_k(1), 2);
        assert_eq!(default_k(529), 23);
    }

    #[test]
    fn clustering_recovers_planted_groups() {
        let g = two_groups();
        let cfg = JlConfig::default();
        let modes = cluster_modes(&g, &cfg).unwrap();
        for a in [0, 1, 2, 3] {
            for b in [10, 11, 12, 13] {
                assert_ne!(modes.mode_of(a), modes.mode_of(b));
            }
        }
        assert_eq!(cluster_modes(&g, &cfg).unwrap(), modes);
    }

    #[test]
    fn identical_nodes_fall_back_to_split() {
        // Four isolated self-loops with identical history.
        let ev = (0..4).map(|v| Event::new(v, v, 1.0, vec![])).collect();
        let g = Ctdg::new(ev, 0).unwrap();
        let modes = cluster_modes(&g, &JlConfig::default()).unwrap();
        assert_eq!(modes.num_modes(), 2);
        assert_eq!(modes.modes()[0].members.len() + modes.modes()[1].members.len(), 4);
        assert_eq!(modes, cluster_modes(&g, &JlConfig::default()).unwrap());
        assert!(cluster_modes(&g.truncated(3), &JlConfig::default()).is_err());
    }

    #[test]
    fn mode_drop_full_keeps_one_mode() {
        let g = two_groups();
        let modes = cluster_modes(&g, &JlConfig::default()).unwrap();
        let r = mode_drop(&g, &modes, 1.0, 6).unwrap();
        assert_eq!(r.num_events(), g.num_events());
        let survivors: Vec<usize> = r
            .events()
            .iter()
            .flat_map(|e| [modes.mode_of(e.src).unwrap(), modes.mode_of(e.dst).unwrap()])
            .collect();
        assert!(survivors.windows(2).all(|w| w[0] == w[1]));
        let ts: Vec<f64> = r.events().iter().map(|e| e.t).collect();
        assert_eq!(ts, g.events().iter().map(|e| e.t).collect::<Vec<_>>());
    }

    #[test]
    fn collapse_uses_hand_computed_means() {
        let ev = vec![
            Event::new(0, 1, 1.0, vec![1.0]),
            Event::new(1, 0, 2.0, vec![3.0]),
            Event::new(0, 2, 3.0, vec![5.0]),
            Event::new(2, 3, 4.0, vec![10.0]),
            Event::new(3, 2, 5.0, vec![20.0]),
            Event::new(3, 1, 6.0, vec![60.0]),
        ];
        let g = Ctdg::new(ev, 1).unwrap();
        let modes = ModeAssignment::from_groups(&g, vec![vec![0, 1], vec![2, 3]]).unwrap();
        // sources in {0,1}: 1, 3, 5 -> 3; sources in {2,3}: 10, 20, 60 -> 30
        assert_eq!(modes.modes()[0].mean_feature, vec![3.0]);
        assert_eq!(modes.modes()[1].mean_feature, vec![30.0]);
        let r = mode_collapse(&g, &modes, 1.0, 0).unwrap();
        let got: Vec<(NodeId, NodeId, f64)> =
            r.events().iter().map(|e| (e.src, e.dst, e.features[0])).collect();
        assert_eq!(
            got,
            vec![(0, 0, 3.0), (0, 0, 3.0), (0, 2, 3.0), (2, 2, 30.0), (2, 2, 30.0), (2, 0, 30.0)]
        );
    }

    #[test]
    fn mode_ops_require_two_modes_and_coverage() {
        let g = two_groups();
        let one = ModeAssignment::from_groups(&g, vec![g.node_ids().to_vec()]).unwrap();
        assert!(mode_drop(&g, &one, 0.5, 0).is_err());
        assert!(ModeAssignment::from_groups(&g, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PerturbKind::ALL {
            assert_eq!(k.name().parse::<PerturbKind>().unwrap(), k);
        }
        assert!("shuffle".parse::<PerturbKind>().is_err());
    }
}
