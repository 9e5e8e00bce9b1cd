//! Minimum number of events each metric needs to tell real data from
//! generated data. Without a dataset path the grid is compared against a
//! fully rewired copy of itself.
//!
//! cargo run --release --example sample_efficiency [-- JODIE_CSV]

use jlmetric::harness::sample_efficiency::write_efficiency_csv;
use jlmetric::harness::{run_sample_efficiency, DatasetSource, DatasetSpec, SampleEfficiencyConfig};

fn main() -> jlmetric::Result<()> {
    let real = std::env::args().nth(1).map(|path| DatasetSpec {
        name: "real".into(),
        source: DatasetSource::Jodie { path: path.into() },
    });
    let cfg = SampleEfficiencyConfig {
        real,
        truncate: Some(1000),
        max_lambda: Some(60),
        ..Default::default()
    };
    let results = run_sample_efficiency(&cfg)?;
    write_efficiency_csv(&results, std::io::stdout())?;
    Ok(())
}
