//! Structured random projections: the implicit `H D` product against its
//! explicit matrix, and squared-norm preservation compared with a dense
//! Gaussian projection.
//!
//! cargo run --release --example srm_projection

use jlmetric::rng::stream;
use jlmetric::srm::{hadamard_transform, DenseRandomMatrix, StructuredRandomMatrix};
use rand::Rng;

fn main() -> jlmetric::Result<()> {
    // Column j of H D is D_jj * H e_j.
    let srm = StructuredRandomMatrix::new(8, 8, 1)?;
    let mut worst: f64 = 0.0;
    for j in 0..8 {
        let mut e = vec![0.0; 8];
        e[j] = 1.0;
        let implicit = srm.apply(&e)?;
        let mut column = e.clone();
        hadamard_transform(&mut column)?;
        for (a, b) in implicit.iter().zip(&column) {
            worst = worst.max((a - b * srm.rademacher()[j] * srm.scale()).abs());
        }
    }
    println!("8x8 implicit vs explicit, max abs diff: {worst:e}");

    let (input, output) = (1024, 150);
    let srm = StructuredRandomMatrix::new(input, output, 7)?;
    let dense = DenseRandomMatrix::new(input, output, 7)?;
    let mut rng = stream(3, &[]);
    let (mut s_ratio, mut d_ratio) = (0.0, 0.0);
    let trials = 200;
    for _ in 0..trials {
        let v: Vec<f64> = (0..input).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum();
        s_ratio += srm.apply(&v)?.iter().map(|x| x * x).sum::<f64>() / norm;
        d_ratio += dense.apply(&v)?.iter().map(|x| x * x).sum::<f64>() / norm;
    }
    println!("mean |Wv|^2 / |v|^2 over {trials} vectors ({input} -> {output}):");
    println!("  structured  {:.4}", s_ratio / trials as f64);
    println!("  dense       {:.4}", d_ratio / trials as f64);
    Ok(())
}
