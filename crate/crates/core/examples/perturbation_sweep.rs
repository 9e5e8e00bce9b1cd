//! JL distance to the reference as each fidelity perturbation gets stronger.
//!
//! cargo run --release --example perturbation_sweep [-- SEED]

use jlmetric::ctdg::GridSpec;
use jlmetric::harness::config::default_p_grid;
use jlmetric::perturb::{PerturbKind, Perturbation};
use jlmetric::{JlConfig, JlProjector};

fn main() -> jlmetric::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let reference = GridSpec::default().generate()?;
    let grid = default_p_grid();

    print!("{:<18}", "p");
    for p in &grid {
        print!(" {p:>9.1}");
    }
    println!();
    for kind in [
        PerturbKind::EdgeRewiring,
        PerturbKind::TimePerturbation,
        PerturbKind::EventPermutation,
    ] {
        let graphs = grid
            .iter()
            .map(|&p| Perturbation::new(kind, p, seed)?.apply(&reference, None))
            .collect::<jlmetric::Result<Vec<_>>>()?;
        let projector = JlProjector::for_graphs(
            JlConfig::default().with_seed(seed),
            std::iter::once(&reference).chain(&graphs),
        )?;
        print!("{:<18}", kind.name());
        for g in &graphs {
            print!(" {:>9.2e}", projector.distance(&reference, g)?);
        }
        println!();
    }
    Ok(())
}
