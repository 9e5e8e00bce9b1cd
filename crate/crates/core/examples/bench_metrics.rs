//! Seconds per 100 events for every metric on the grid dataset.
//!
//! cargo run --release --example bench_metrics

use jlmetric::harness::bench::write_bench_csv;
use jlmetric::harness::{run_bench, BenchConfig};

fn main() -> jlmetric::Result<()> {
    let rows = run_bench(&BenchConfig::default())?;
    write_bench_csv(&rows, std::io::stdout())?;
    Ok(())
}
