//! Random projection matrices.
//!
//! [`StructuredRandomMatrix`] is the product of a normalized Hadamard matrix
//! and a random ±1 diagonal. Only the diagonal is stored; products are formed
//! with an in-place fast Walsh–Hadamard transform. [`DenseRandomMatrix`] keeps
//! an explicit Gaussian matrix with orthonormalized columns and exists mostly
//! for A/B comparison.
//!
//! Both kinds map a vector of length at most `rows` to `cols` outputs and
//! scale the result so squared norms are preserved in expectation. Shorter
//! inputs use only the leading rows of the matrix.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// In-place normalized Walsh–Hadamard transform (`H_1 = (1)`,
/// `H_2l = [[H_l, H_l], [H_l, -H_l]] / sqrt(2)`). `H` is symmetric and
/// orthogonal, so applying it twice is the identity.
pub fn hadamard_transform(v: &mut [f64]) -> Result<()> {
    let len = v.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::invalid(format!(
            "Hadamard transform needs a power-of-two length, got {len}"
        )));
    }
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * FRAC_1_SQRT_2;
                *b = (x - y) * FRAC_1_SQRT_2;
            }
        }
        h *= 2;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    #[default]
    Structured,
    Dense,
}

/// Implicit `L x L` matrix `H D` truncated to `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredRandomMatrix {
    logical_rows: usize,
    cols: usize,
    padded_dim: usize,
    rademacher: Vec<f64>,
    scale: f64,
}

impl StructuredRandomMatrix {
    /// The padded dimension is the next power of two at or above both `rows`
    /// and `cols`.
    pub fn new(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        check_shape(rows, cols)?;
        let padded_dim = rows.max(cols).next_power_of_two();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rademacher = (0..padded_dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Self::from_diagonal(rows, cols, rademacher)
    }

    /// Builds the matrix from an explicit ±1 diagonal whose length fixes the
    /// padded dimension.
    pub fn from_diagonal(rows: usize, cols: usize, rademacher: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        let padded_dim = rademacher.len();
        if !padded_dim.is_power_of_two() || padded_dim < rows.max(cols) {
            return Err(Error::invalid(format!(
                "diagonal length {padded_dim} must be a power of two >= max(rows, cols)"
            )));
        }
        if rademacher.iter().any(|&d| d != 1.0 && d != -1.0) {
            return Err(Error::invalid("diagonal entries must be +1 or -1"));
        }
        Ok(StructuredRandomMatrix {
            logical_rows: rows,
            cols,
            padded_dim,
            rademacher,
            scale: (padded_dim as f64 / cols as f64).sqrt(),
        })
    }

    pub fn rows(&self) -> usize {
        self.logical_rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn padded_dim(&self) -> usize {
        self.padded_dim
    }

    pub fn rademacher(&self) -> &[f64] {
        &self.rademacher
    }

    /// `sqrt(L / cols)`, applied to every output.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// First `cols` coordinates of `H D v` (zero-padded `v`), scaled.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        let mut scratch = Vec::new();
        self.apply_into(v, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// Like [`apply`](Self::apply), writing into `out` and reusing `scratch`
    /// between calls.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        if v.len() > self.logical_rows {
            return Err(Error::DimensionMismatch {
                expected: self.logical_rows,
                found: v.len(),
            });
        }
        if out.len() != self.cols {
            return Err(Error::invalid(format!(
                "output buffer has length {}, expected {}",
                out.len(),
                self.cols
            )));
        }
        let l = self.padded_dim;
        let fast_cost = l * (l.trailing_zeros() as usize).max(1);
        if v.len() * self.cols <= fast_cost {
            // Short inputs: evaluate the needed entries of H directly from the
            // bit-parity rule H_ij = (-1)^popcount(i & j) / sqrt(L).
            let norm = self.scale / (l as f64).sqrt();
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, (&x, &d)) in v.iter().zip(&self.rademacher).enumerate() {
                    if (i & j).count_ones() % 2 == 0 {
                        acc += d * x;
                    } else {
                        acc -= d * x;
                    }
                }
                *o = acc * norm;
            }
            return Ok(());
        }
        scratch.clear();
        scratch.resize(l, 0.0);
        for ((s, &x), &d) in scratch.iter_mut().zip(v).zip(&self.rademacher) {
            *s = d * x;
        }
        hadamard_transform(scratch)?;
        for (o, &s) in out.iter_mut().zip(scratch.iter()) {
            *o = s * self.scale;
        }
        Ok(())
    }
}

/// Explicit `rows x cols` Gaussian matrix with orthonormal columns (unit-norm
/// columns when `rows < cols`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRandomMatrix {
    rows: usize,
    cols: usize,
    /// Row-major.
    entries: Vec<f64>,
    scale: f64,
}

impl DenseRandomMatrix {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        if rows >= cols {
            orthonormalize_columns(&mut entries, rows, cols);
        } else {
            normalize_columns(&mut entries, rows, cols);
        }
        Ok(DenseRandomMatrix {
            rows,
            cols,
            entries,
            scale: (rows as f64 / cols as f64).sqrt(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    /// `sqrt(rows / cols)`, applied to every output.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() > self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        if out.len() != self.cols {
            return Err(Error::invalid(format!(
                "output buffer has length {}, expected {}",
                out.len(),
                self.cols
            )));
        }
        out.fill(0.0);
        for (row, &x) in self.entries.chunks_exact(self.cols).zip(v) {
            if x == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
        for o in out.iter_mut() {
            *o *= self.scale;
        }
        Ok(())
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
fn orthonormalize_columns(a: &mut [f64], rows: usize, cols: usize) {
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..rows).map(|i| a[i * cols + j] * a[i * cols + k]).sum();
                for i in 0..rows {
                    a[i * cols + j] -= dot * a[i * cols + k];
                }
            }
        }
        let norm = (0..rows).map(|i| a[i * cols + j].powi(2)).sum::<f64>().sqrt();
        for i in 0..rows {
            a[i * cols + j] /= norm;
        }
    }
}

fn normalize_columns(a: &mut [f64], rows: usize, cols: usize) {
    for j in 0..cols {
        let norm = (0..rows).map(|i| a[i * cols + j].powi(2)).sum::<f64>().sqrt();
        for i in 0..rows {
            a[i * cols + j] /= norm;
        }
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "projection shape must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

/// Either projection kind behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomProjection {
    Structured(StructuredRandomMatrix),
    Dense(DenseRandomMatrix),
}

impl RandomProjection {
    pub fn new(kind: MatrixKind, rows: usize, cols: usize, seed: u64) -> Result<Self> {
        Ok(match kind {
            MatrixKind::Structured => {
                RandomProjection::Structured(StructuredRandomMatrix::new(rows, cols, seed)?)
            }
            MatrixKind::Dense => RandomProjection::Dense(DenseRandomMatrix::new(rows, cols, seed)?),
        })
    }

    pub fn rows(&self) -> usize {
        match self {
            RandomProjection::Structured(m) => m.rows(),
            RandomProjection::Dense(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            RandomProjection::Structured(m) => m.cols(),
            RandomProjection::Dense(m) => m.cols(),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            RandomProjection::Structured(m) => m.apply(v),
            RandomProjection::Dense(m) => m.apply(v),
        }
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        match self {
            RandomProjection::Structured(m) => m.apply_into(v, out, scratch),
            RandomProjection::Dense(m) => m.apply_into(v, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Explicit recursive Hadamard matrix, row-major.
    fn explicit_hadamard(l: usize) -> Vec<Vec<f64>> {
        if l == 1 {
            return vec![vec![1.0]];
        }
        let half = explicit_hadamard(l / 2);
        let s = FRAC_1_SQRT_2;
        let mut h = vec![vec![0.0; l]; l];
        for i in 0..l / 2 {
            for j in 0..l / 2 {
                h[i][j] = s * half[i][j];
                h[i][j + l / 2] = s * half[i][j];
                h[i + l / 2][j] = s * half[i][j];
                h[i + l / 2][j + l / 2] = -s * half[i][j];
            }
        }
        h
    }

    #[test]
    fn hadamard_small_cases() {
        let mut v = vec![3.0];
        hadamard_transform(&mut v).unwrap();
        assert_eq!(v, vec![3.0]);

        let mut v = vec![1.0, 1.0];
        hadamard_transform(&mut v).unwrap();
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
    }

    #[test]
    fn hadamard_rejects_bad_length() {
        assert!(hadamard_transform(&mut [1.0, 2.0, 3.0]).is_err());
        assert!(hadamard_transform(&mut []).is_err());
    }

    #[test]
    fn hadamard_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut w = v.clone();
        hadamard_transform(&mut w).unwrap();
        hadamard_transform(&mut w).unwrap();
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_transform_matches_explicit_matrix() {
        for l in [1, 2, 4, 8, 16, 32, 64] {
            let h = explicit_hadamard(l);
            let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
            let v: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut w = v.clone();
            hadamard_transform(&mut w).unwrap();
            for i in 0..l {
                let expected: f64 = (0..l).map(|j| h[i][j] * v[j]).sum();
                assert!((w[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn srm_zero_vector() {
        let m = StructuredRandomMatrix::new(10, 6, 3).unwrap();
        assert_eq!(m.apply(&[0.0; 10]).unwrap(), vec![0.0; 6]);
        assert_eq!(m.apply(&[]).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn srm_hand_computed_4x4() {
        // H_4 = 1/2 [[1,1,1,1],[1,-1,1,-1],[1,1,-1,-1],[1,-1,-1,1]], D = diag(+,-,+,+).
        let m = StructuredRandomMatrix::from_diagonal(4, 4, vec![1.0, -1.0, 1.0, 1.0]).unwrap();
        let close = |got: Vec<f64>, want: [f64; 4]| {
            assert!(got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-15), "{got:?}");
        };
        close(m.apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(), [0.5, 0.5, 0.5, 0.5]);
        close(m.apply(&[0.0, 1.0, 0.0, 0.0]).unwrap(), [-0.5, 0.5, -0.5, 0.5]);
        close(m.apply(&[0.0, 0.0, 0.0, 2.0]).unwrap(), [1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn srm_rejects_long_input() {
        let m = StructuredRandomMatrix::new(5, 2, 0).unwrap();
        assert!(matches!(
            m.apply(&[1.0; 6]),
            Err(Error::DimensionMismatch {
                expected: 5,
                found: 6
            })
        ));
    }

    #[test]
    fn srm_storage_is_padded_diagonal() {
        let m = StructuredRandomMatrix::new(100, 7, 5).unwrap();
        assert_eq!(m.padded_dim(), 128);
        assert_eq!(m.rademacher().len(), 128);
        assert!(m.rademacher().iter().all(|&d| d == 1.0 || d == -1.0));
        let wide = StructuredRandomMatrix::new(3, 100, 5).unwrap();
        assert_eq!(wide.padded_dim(), 128);
    }

    #[test]
    fn srm_direct_and_fast_paths_agree() {
        let m = StructuredRandomMatrix::new(4096, 8, 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // 3 * 8 is below L log L: direct path.
        let short: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut padded = short.clone();
        padded.resize(4096, 0.0);
        let direct = m.apply(&short).unwrap();
        let fast = m.apply(&padded).unwrap();
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn srm_deterministic() {
        let a = StructuredRandomMatrix::new(50, 10, 99).unwrap();
        let b = StructuredRandomMatrix::new(50, 10, 99).unwrap();
        let v: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        assert_eq!(a.apply(&v).unwrap(), b.apply(&v).unwrap());
    }

    #[test]
    fn dense_columns_orthonormal() {
        let m = DenseRandomMatrix::new(64, 16, 4).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let dot: f64 = (0..64).map(|i| m.get(i, a) * m.get(i, b)).sum();
                if a == b {
                    assert!((dot - 1.0).abs() < 1e-9);
                } else {
                    assert!(dot.abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn dense_square_is_rotation() {
        let m = DenseRandomMatrix::new(12, 12, 8).unwrap();
        let v: Vec<f64> = (0..12).map(|i| i as f64 - 5.5).collect();
        let out = m.apply(&v).unwrap();
        let n_in: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n_out: f64 = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n_in - n_out).abs() < 1e-9);
        assert_eq!(m.apply(&[0.0; 12]).unwrap(), vec![0.0; 12]);
    }

    #[test]
    fn dense_wide_has_unit_columns() {
        let m = DenseRandomMatrix::new(3, 10, 1).unwrap();
        for j in 0..10 {
            let norm: f64 = (0..3).map(|i| m.get(i, j).powi(2)).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(m.apply(&[1.0; 4]).is_err());
    }
}
