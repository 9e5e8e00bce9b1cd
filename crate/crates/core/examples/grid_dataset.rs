//! Generates the synthetic grid dataset, prints its statistics and optionally
//! writes it as event CSV.
//!
//! cargo run --example grid_dataset [-- OUT.csv]

use jlmetric::ctdg::{nyquist_resolution, save_ctdg, GridSpec, SnapshotSchedule};

fn main() -> jlmetric::Result<()> {
    let spec = GridSpec::default();
    let g = spec.generate()?;
    let phi = nyquist_resolution(&g)?;
    let schedule = SnapshotSchedule::new(&g, phi)?;
    let manifest = g.manifest();

    println!("side x side   {} x {}", spec.side, spec.side);
    println!("nodes         {}", g.num_nodes());
    println!("events        {}", g.num_events());
    println!("features      {}", g.feature_dim());
    println!("nyquist       {phi}");
    println!("snapshots     {}", schedule.count);
    println!("sha256        {}", manifest.checksum);
    for e in &g.events()[..5] {
        println!("  {} -> {} at t={} features={:?}", e.src, e.dst, e.t, e.features);
    }

    if let Some(path) = std::env::args().nth(1) {
        save_ctdg(&g, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
