//! Clusters grid nodes into modes from their JL node embeddings, then applies
//! mode dropping and mode collapse.
//!
//! cargo run --release --example mode_clustering

use jlmetric::ctdg::GridSpec;
use jlmetric::perturb::{cluster_modes, mode_collapse, mode_drop};
use jlmetric::{JlConfig, JlProjector};

fn main() -> jlmetric::Result<()> {
    let g = GridSpec::default().generate()?;
    let cfg = JlConfig::default();
    let modes = cluster_modes(&g, &cfg)?;

    println!("{} modes over {} nodes", modes.num_modes(), g.num_nodes());
    for (i, m) in modes.modes().iter().enumerate().take(5) {
        println!(
            "  mode {i}: {} nodes, representative {}, mean feature {:?}",
            m.members.len(),
            m.representative,
            m.mean_feature
        );
    }

    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let dropped = mode_drop(&g, &modes, p, 1)?;
        let collapsed = mode_collapse(&g, &modes, p, 1)?;
        let projector = JlProjector::for_graphs(cfg, [&g, &dropped, &collapsed])?;
        println!(
            "p={p:.2}  drop: {} nodes, jl {:.4}   collapse: {} nodes, jl {:.4}",
            dropped.num_nodes(),
            projector.distance(&g, &dropped)?,
            collapsed.num_nodes(),
            projector.distance(&g, &collapsed)?,
        );
    }
    Ok(())
}
