//! Embeds two graphs with shared projections and compares them. With two
//! event CSV paths, scores those; otherwise compares grids built with
//! different orientation seeds and a partly rewired grid.
//!
//! cargo run --release --example jl_distance [-- REFERENCE.csv GENERATED.csv]

use jlmetric::ctdg::{load_ctdg, GridSpec};
use jlmetric::perturb::edge_rewire;
use jlmetric::{jl_distance, JlConfig, JlProjector};

fn main() -> jlmetric::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = JlConfig::default();

    if let [a, b] = args.as_slice() {
        let (a, b) = (load_ctdg(a)?, load_ctdg(b)?);
        let projector = JlProjector::for_graphs(cfg, [&a, &b])?;
        println!("{}", projector.distance(&a, &b)?);
        return Ok(());
    }

    let reference = GridSpec::default().generate()?;
    let reoriented = GridSpec { seed: 1, ..Default::default() }.generate()?;
    let rewired = edge_rewire(&reference, 0.3, 5)?;

    let projector = JlProjector::for_graphs(cfg, [&reference, &reoriented, &rewired])?;
    let params = projector.params();
    println!("M = {}, Z = {}, descriptor {} x {}", params.max_payload, params.max_nodes, params.n, params.o);

    let d_ref = projector.embed(&reference)?;
    println!("self           {:.6}", jl_distance(&d_ref, &d_ref)?);
    println!("reoriented     {:.6}", jl_distance(&d_ref, &projector.embed(&reoriented)?)?);
    println!("rewired p=0.3  {:.6}", jl_distance(&d_ref, &projector.embed(&rewired)?)?);

    let mut blob = Vec::new();
    d_ref.write_blob(&mut blob)?;
    println!("descriptor blob: {} bytes", blob.len());
    Ok(())
}
