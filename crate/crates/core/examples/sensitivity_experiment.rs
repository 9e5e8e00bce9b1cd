//! Sensitivity of a few metrics to the three fidelity perturbations on the
//! grid dataset. Writes result files when given an output directory.
//!
//! cargo run --release --example sensitivity_experiment [-- OUT_DIR [SEEDS]]

use jlmetric::harness::{emit_results, run_sensitivity, ExperimentConfig, MetricId};
use jlmetric::perturb::PerturbKind;

fn main() -> jlmetric::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next();
    let seeds = args.next().map_or(10, |s| s.parse().expect("seed count"));

    let cfg = ExperimentConfig {
        metrics: ["jl", "mean_degree_ks", "lcc_mmd", "activity_rate_ks", "feat_js"]
            .iter()
            .map(|m| m.parse::<MetricId>())
            .collect::<Result<_, _>>()?,
        perturbations: vec![
            PerturbKind::EdgeRewiring,
            PerturbKind::TimePerturbation,
            PerturbKind::EventPermutation,
        ],
        seeds,
        ..Default::default()
    };
    let table = run_sensitivity(&cfg)?;
    print!("{}", jlmetric::harness::emit::render_table(&table));
    if let Some(dir) = out {
        for path in emit_results(&table, &dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
