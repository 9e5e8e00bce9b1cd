//! Snapshot statistics and activity rates of the grid against a rewired copy,
//! compared with KS and MMD.
//!
//! cargo run --release --example classical_baselines

use jlmetric::classical::{activity_rate, snapshot_series, Descriptor};
use jlmetric::ctdg::{nyquist_resolution, GridSpec};
use jlmetric::distances::{ks_distance, mmd_distance, Bandwidth};
use jlmetric::perturb::edge_rewire;

fn main() -> jlmetric::Result<()> {
    let g = GridSpec::default().generate()?;
    let r = edge_rewire(&g, 0.5, 2)?;
    let phi = nyquist_resolution(&g)?;

    println!("{:<14} {:>10} {:>10} {:>12}", "descriptor", "final", "ks", "mmd");
    for d in Descriptor::SNAPSHOT {
        let a = snapshot_series(&g, d, phi)?;
        let b = snapshot_series(&r, d, phi)?;
        let (a, b) = (a.masked(), b.masked());
        println!(
            "{:<14} {:>10.3} {:>10.4} {:>12.3e}",
            d.name(),
            a.last().copied().unwrap_or(f64::NAN),
            ks_distance(&a, &b)?,
            mmd_distance(&a, &b, Bandwidth::Auto)?,
        );
    }
    let (a, b) = (activity_rate(&g).masked(), activity_rate(&r).masked());
    println!(
        "{:<14} {:>10} {:>10.4} {:>12.3e}",
        "activity_rate",
        "",
        ks_distance(&a, &b)?,
        mmd_distance(&a, &b, Bandwidth::Auto)?,
    );
    Ok(())
}
