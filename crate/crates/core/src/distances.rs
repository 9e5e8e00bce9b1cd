//! Distance estimators between samples of function descriptors, and the
//! Spearman statistic used to score metric responses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default histogram resolution for KL/JS on feature channels.
pub const DEFAULT_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Ks,
    Mmd,
    Kl,
    Js,
}

impl DistanceKind {
    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Ks => "ks",
            DistanceKind::Mmd => "mmd",
            DistanceKind::Kl => "kl",
            DistanceKind::Js => "js",
        }
    }
}

/// RBF kernel width for MMD.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Median pairwise distance over the pooled sample.
    #[default]
    Auto,
    Fixed(f64),
}

fn check_finite(xs: &[f64], what: &'static str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Empty(what));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{what} contains non-finite values")));
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov statistic: largest gap between the two
/// empirical CDFs.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_finite(a, "first sample")?;
    check_finite(b, "second sample")?;
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Distinct sorted values with their multiplicities.
fn compress(sorted: &[f64]) -> (Vec<f64>, Vec<u64>) {
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for &x in sorted {
        match values.last() {
            Some(&last) if last == x => *counts.last_mut().unwrap() += 1,
            _ => {
                values.push(x);
                counts.push(1);
            }
        }
    }
    (values, counts)
}

/// Number of pairs `i < j` with `|x_i - x_j| <= d`, for a sample given as
/// distinct sorted values and multiplicities.
fn pairs_within(values: &[f64], counts: &[u64], prefix: &[u128], d: f64) -> u128 {
    let mut total: u128 = counts
        .iter()
        .map(|&c| c as u128 * (c as u128).saturating_sub(1) / 2)
        .sum();
    let mut lo = 0;
    for j in 0..values.len() {
        while values[j] - values[lo] > d {
            lo += 1;
        }
        total += counts[j] as u128 * (prefix[j] - prefix[lo]);
    }
    total
}

/// Exact `k`-th smallest (1-based) pairwise distance. Non-negative doubles
/// order like their bit patterns, so a binary search over bits lands on an
/// actual pairwise difference.
fn kth_pairwise(values: &[f64], counts: &[u64], prefix: &[u128], k: u128) -> f64 {
    let span = values[values.len() - 1] - values[0];
    let (mut lo, mut hi) = (0u64, span.to_bits());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pairs_within(values, counts, prefix, f64::from_bits(mid)) >= k {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    f64::from_bits(lo)
}

/// Median of `|x_i - x_j|` over all pairs `i < j` of a scalar sample. When
/// that median is 0 (heavy ties), the median of the positive distances is
/// used instead; a sample with no positive distance yields 1.
pub fn median_pairwise_distance(xs: &[f64]) -> f64 {
    let (values, counts) = compress(&sorted(xs));
    let n: u128 = counts.iter().map(|&c| c as u128).sum();
    if values.len() < 2 {
        return 1.0;
    }
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0u128);
    for &c in &counts {
        prefix.push(prefix.last().unwrap() + c as u128);
    }
    let kth = |k: u128| kth_pairwise(&values, &counts, &prefix, k);
    let median_of = |offset: u128, len: u128| {
        if len % 2 == 1 {
            kth(offset + len / 2 + 1)
        } else {
            0.5 * (kth(offset + len / 2) + kth(offset + len / 2 + 1))
        }
    };

    let total = n * (n - 1) / 2;
    let m = median_of(0, total);
    if m > 0.0 {
        return m;
    }
    let zero_pairs = pairs_within(&values, &counts, &prefix, 0.0);
    median_of(zero_pairs, total - zero_pairs)
}

fn resolve_bandwidth(bandwidth: Bandwidth, auto: impl FnOnce() -> f64) -> Result<f64> {
    match bandwidth {
        Bandwidth::Auto => Ok(auto()),
        Bandwidth::Fixed(s) if s.is_finite() && s > 0.0 => Ok(s),
        Bandwidth::Fixed(s) => Err(Error::invalid(format!("bandwidth must be positive, got {s}"))),
    }
}

/// Biased squared MMD with a Gaussian kernel `exp(-(x - y)^2 / (2 s^2))`.
///
/// Both samples are collapsed to distinct values with multiplicities, so the
/// cost is quadratic in the number of distinct values rather than the sample
/// sizes.
pub fn mmd_distance(a: &[f64], b: &[f64], bandwidth: Bandwidth) -> Result<f64> {
    check_finite(a, "first sample")?;
    check_finite(b, "second sample")?;
    let sa = sorted(a);
    let sb = sorted(b);
    let sigma = resolve_bandwidth(bandwidth, || {
        let mut pooled = sa.clone();
        pooled.extend_from_slice(&sb);
        median_pairwise_distance(&pooled)
    })?;
    if sa == sb {
        return Ok(0.0);
    }

    // Pooled distinct values with per-sample weights.
    let mut values = Vec::with_capacity(sa.len() + sb.len());
    let mut wa = Vec::with_capacity(values.capacity());
    let mut wb = Vec::with_capacity(values.capacity());
    let (mut i, mut j) = (0, 0);
    while i < sa.len() || j < sb.len() {
        let x = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let (mut ca, mut cb) = (0u64, 0u64);
        while i < sa.len() && sa[i] == x {
            ca += 1;
            i += 1;
        }
        while j < sb.len() && sb[j] == x {
            cb += 1;
            j += 1;
        }
        values.push(x);
        wa.push(ca as f64);
        wb.push(cb as f64);
    }

    let gamma = 1.0 / (2.0 * sigma * sigma);
    let (mut kxx, mut kyy, mut kxy) = (0.0, 0.0, 0.0);
    for p in 0..values.len() {
        kxx += wa[p] * wa[p];
        kyy += wb[p] * wb[p];
        kxy += wa[p] * wb[p];
        for q in p + 1..values.len() {
            let d = values[q] - values[p];
            let k = (-gamma * d * d).exp();
            kxx += 2.0 * wa[p] * wa[q] * k;
            kyy += 2.0 * wb[p] * wb[q] * k;
            kxy += (wa[p] * wb[q] + wa[q] * wb[p]) * k;
        }
    }
    let (n, m) = (sa.len() as f64, sb.len() as f64);
    Ok((kxx / (n * n) + kyy / (m * m) - 2.0 * kxy / (n * m)).max(0.0))
}

fn check_vectors(xs: &[Vec<f64>], what: &'static str) -> Result<usize> {
    let dim = xs.first().ok_or(Error::Empty(what))?.len();
    if dim == 0 {
        return Err(Error::invalid(format!("{what} has no channels")));
    }
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::invalid(format!("{what} has ragged rows")));
    }
    if xs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{what} contains non-finite values")));
    }
    Ok(dim)
}

fn check_pair(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    let da = check_vectors(a, "first sample")?;
    let db = check_vectors(b, "second sample")?;
    if da != db {
        return Err(Error::invalid(format!("channel count mismatch: {da} vs {db}")));
    }
    Ok(da)
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Median Euclidean distance over all pairs of a pooled vector sample, with
/// the same zero-median fallback as [`median_pairwise_distance`].
pub fn median_pairwise_euclidean(xs: &[&[f64]]) -> f64 {
    let mut d: Vec<f64> = Vec::with_capacity(xs.len() * xs.len().saturating_sub(1) / 2);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            d.push(sq_dist(xs[i], xs[j]).sqrt());
        }
    }
    let med = median_in_place(&mut d);
    if med > 0.0 {
        return med;
    }
    let mut positive: Vec<f64> = d.into_iter().filter(|&x| x > 0.0).collect();
    if positive.is_empty() {
        1.0
    } else {
        median_in_place(&mut positive)
    }
}

fn median_in_place(d: &mut [f64]) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let mid = d.len() / 2;
    let (_, &mut upper, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    if d.len() % 2 == 1 {
        upper
    } else {
        let lower = d[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Biased squared MMD between two samples of feature vectors, Gaussian kernel
/// on Euclidean distance.
pub fn mmd_vectors(a: &[Vec<f64>], b: &[Vec<f64>], bandwidth: Bandwidth) -> Result<f64> {
    check_pair(a, b)?;
    let sigma = resolve_bandwidth(bandwidth, || {
        let pooled: Vec<&[f64]> = a.iter().chain(b).map(Vec::as_slice).collect();
        median_pairwise_euclidean(&pooled)
    })?;
    if a == b {
        return Ok(0.0);
    }
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let mean_kernel = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        let mut s = 0.0;
        for p in x {
            for q in y {
                s += (-gamma * sq_dist(p, q)).exp();
            }
        }
        s / (x.len() as f64 * y.len() as f64)
    };
    Ok((mean_kernel(a, a) + mean_kernel(b, b) - 2.0 * mean_kernel(a, b)).max(0.0))
}

/// Mean over channels of the per-channel KS statistic.
pub fn ks_channels(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    let dim = check_pair(a, b)?;
    let mut total = 0.0;
    for c in 0..dim {
        let xa: Vec<f64> = a.iter().map(|r| r[c]).collect();
        let xb: Vec<f64> = b.iter().map(|r| r[c]).collect();
        total += ks_distance(&xa, &xb)?;
    }
    Ok(total / dim as f64)
}

/// Laplace-smoothed histograms of one channel of both samples over their
/// pooled range.
pub fn channel_histograms(a: &[f64], b: &[f64], bins: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    check_finite(a, "first sample")?;
    check_finite(b, "second sample")?;
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let hist = |xs: &[f64]| {
        let mut counts = vec![1.0; bins];
        for &x in xs {
            let k = if span > 0.0 {
                (((x - lo) / span) * bins as f64).floor() as usize
            } else {
                0
            };
            counts[k.min(bins - 1)] += 1.0;
        }
        let total = xs.len() as f64 + bins as f64;
        counts.into_iter().map(|c| c / total).collect::<Vec<f64>>()
    };
    Ok((hist(a), hist(b)))
}

/// `KL(p || q)` for strictly positive distributions.
pub fn kl_from_probs(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

pub fn js_from_probs(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    0.5 * kl_from_probs(p, &m) + 0.5 * kl_from_probs(q, &m)
}

fn per_channel(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    bins: usize,
    f: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    let dim = check_pair(a, b)?;
    let mut total = 0.0;
    for c in 0..dim {
        let xa: Vec<f64> = a.iter().map(|r| r[c]).collect();
        let xb: Vec<f64> = b.iter().map(|r| r[c]).collect();
        let (p, q) = channel_histograms(&xa, &xb, bins)?;
        total += f(&p, &q);
    }
    Ok(total / dim as f64)
}

/// Mean over channels of `KL(p_a || p_b)` on shared, smoothed histograms.
pub fn kl_divergence(a: &[Vec<f64>], b: &[Vec<f64>], bins: usize) -> Result<f64> {
    per_channel(a, b, bins, kl_from_probs)
}

/// Mean over channels of the Jensen–Shannon divergence; in `[0, ln 2]`.
pub fn js_divergence(a: &[Vec<f64>], b: &[Vec<f64>], bins: usize) -> Result<f64> {
    per_channel(a, b, bins, js_from_probs)
}

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties. A constant input
/// has no defined correlation and yields [`Error::ConstantSeries`].
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("spearman needs at least 2 points"));
    }
    check_finite(x, "first series")?;
    check_finite(y, "second series")?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_mmd(a: &[f64], b: &[f64], s: f64) -> f64 {
        let k = |x: f64, y: f64| (-(x - y) * (x - y) / (2.0 * s * s)).exp();
        let mean = |x: &[f64], y: &[f64]| {
            let mut t = 0.0;
            for &p in x {
                for &q in y {
                    t += k(p, q);
                }
            }
            t / (x.len() * y.len()) as f64
        };
        mean(a, a) + mean(b, b) - 2.0 * mean(a, b)
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[0.0; 4], &[1.0; 3]).unwrap(), 1.0);
        let d = ks_distance(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
        assert!(ks_distance(&[], &[1.0]).is_err());
        assert!(ks_distance(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn mmd_examples() {
        assert_eq!(mmd_distance(&[1.0, 2.0, 5.0], &[5.0, 2.0, 1.0], Bandwidth::Auto).unwrap(), 0.0);
        let d = mmd_distance(&[0.0; 5], &[10.0; 7], Bandwidth::Fixed(1.0)).unwrap();
        assert!((d - 2.0 * (1.0 - (-50f64).exp())).abs() < 1e-12);
        assert!(mmd_distance(&[], &[1.0], Bandwidth::Auto).is_err());
        assert!(mmd_distance(&[1.0], &[2.0], Bandwidth::Fixed(0.0)).is_err());
        assert!(mmd_distance(&[1.0], &[2.0], Bandwidth::Fixed(-1.0)).is_err());
    }

    #[test]
    fn mmd_matches_double_loop_with_ties() {
        let a = [1.0, 1.0, 2.0, 3.0, 3.0, 3.0, 7.5];
        let b = [2.0, 2.0, 4.0, 1.0];
        for s in [0.3, 1.0, 4.0] {
            let fast = mmd_distance(&a, &b, Bandwidth::Fixed(s)).unwrap();
            assert!((fast - brute_mmd(&a, &b, s)).abs() < 1e-12);
        }
    }

    #[test]
    fn median_pairwise_small() {
        // pairs of {0, 1, 3}: 1, 3, 2 -> median 2
        assert_eq!(median_pairwise_distance(&[0.0, 1.0, 3.0]), 2.0);
        // pairs of {0, 1, 3, 6}: 1,3,6,2,5,3 -> sorted 1,2,3,3,5,6 -> 3
        assert_eq!(median_pairwise_distance(&[6.0, 0.0, 3.0, 1.0]), 3.0);
        // mostly ties: {0,0,0,0,1}: 6 zeros and 4 ones -> falls back to positive median 1
        assert_eq!(median_pairwise_distance(&[0.0, 0.0, 0.0, 0.0, 1.0]), 1.0);
        assert_eq!(median_pairwise_distance(&[2.0, 2.0]), 1.0);
    }

    #[test]
    fn vector_mmd_identity_and_separation() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        assert_eq!(mmd_vectors(&a, &a.clone(), Bandwidth::Auto).unwrap(), 0.0);
        let b = vec![vec![10.0, 11.0], vec![11.0, 10.0]];
        assert!(mmd_vectors(&a, &b, Bandwidth::Auto).unwrap() > 0.1);
        assert!(mmd_vectors(&a, &[vec![1.0]], Bandwidth::Auto).is_err());
    }

    #[test]
    fn kl_two_bin_example() {
        let p = [0.75, 0.25];
        let q = [0.25, 0.75];
        assert!((kl_from_probs(&p, &q) - 0.5 * 3f64.ln()).abs() < 1e-15);

        // counts (2,0) vs (0,2) smooth to exactly those histograms.
        let a = vec![vec![0.0], vec![0.0]];
        let b = vec![vec![1.0], vec![1.0]];
        let (hp, hq) = channel_histograms(&[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        assert_eq!(hp, vec![0.75, 0.25]);
        assert_eq!(hq, vec![0.25, 0.75]);
        assert!((kl_divergence(&a, &b, 2).unwrap() - 0.549_306).abs() < 1e-6);
    }

    #[test]
    fn kl_identity_and_asymmetry() {
        let a = vec![vec![0.0], vec![0.1], vec![0.9]];
        assert_eq!(kl_divergence(&a, &a, 8).unwrap(), 0.0);
        let b = vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]];
        let ab = kl_divergence(&a, &b, 4).unwrap();
        let ba = kl_divergence(&b, &a, 4).unwrap();
        assert!((ab - ba).abs() > 1e-6);
    }

    #[test]
    fn js_bounds() {
        let a = vec![vec![0.0], vec![1.0]];
        assert_eq!(js_divergence(&a, &a, 4).unwrap(), 0.0);
        let zeros: Vec<Vec<f64>> = vec![vec![0.0]; 20_000];
        let ones: Vec<Vec<f64>> = vec![vec![1.0]; 20_000];
        let js = js_divergence(&zeros, &ones, 2).unwrap();
        assert!(js <= 2f64.ln());
        assert!((js - 2f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(
            spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]),
            Err(Error::ConstantSeries)
        ));
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert_eq!(spearman(&[0.0, 1.0], &[5.0, 2.0]).unwrap(), -1.0);
        assert!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }
}
