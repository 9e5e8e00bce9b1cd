use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jlmetric::ctdg::{load_ctdg, load_jodie, write_ctdg, Ctdg, GridSpec};
use jlmetric::harness::bench::write_bench_csv;
use jlmetric::harness::metrics::comparison_resolution;
use jlmetric::harness::sample_efficiency::write_efficiency_csv;
use jlmetric::harness::{
    emit_results, evaluate, run_bench, run_sample_efficiency, run_sensitivity, BenchConfig, DatasetSource,
    DatasetSpec, ExperimentConfig, MetricId, MetricSettings, SampleEfficiencyConfig,
};
use jlmetric::{Error, JlConfig, Result};

#[derive(Parser)]
#[command(name = "jlmetric", version, about = "Score and benchmark continuous-time dynamic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic grid dataset as event CSV.
    GenGrid {
        #[arg(long, default_value_t = 23)]
        side: usize,
        #[arg(long, default_value_t = 1000)]
        events: usize,
        #[arg(long, default_value_t = 1.0)]
        interval: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a generated event CSV against a reference with one metric.
    Metric {
        reference: PathBuf,
        generated: PathBuf,
        #[arg(long, default_value = "jl")]
        metric: MetricId,
        /// Inputs are Jodie-style CSVs.
        #[arg(long)]
        jodie: bool,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        o: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sensitivity experiment from a TOML or JSON config.
    Experiment {
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of repetitions, overriding the config.
        #[arg(long)]
        seeds: Option<usize>,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Smallest window size at which each metric separates real from generated data.
    SampleEfficiency {
        /// Real dataset; the grid is compared with a rewired copy of itself when omitted.
        #[arg(long)]
        real: Option<PathBuf>,
        #[arg(long)]
        jodie: bool,
        #[arg(long, value_delimiter = ',')]
        metrics: Option<Vec<MetricId>>,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long)]
        max_lambda: Option<usize>,
        #[arg(long)]
        truncate: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Seconds per 100 events for each metric.
    Bench {
        /// Dataset to time; the default grid when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        jodie: bool,
        #[arg(long, value_delimiter = ',')]
        metrics: Option<Vec<MetricId>>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        truncate: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: EmitArgs,
    },
}

#[derive(Args)]
struct EmitArgs {
    /// Directory for result files; results go to stdout when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn load(path: &Path, jodie: bool) -> Result<Ctdg> {
    if jodie {
        load_jodie(path)
    } else {
        load_ctdg(path)
    }
}

fn dataset_spec(path: PathBuf, jodie: bool) -> DatasetSpec {
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let source = if jodie {
        DatasetSource::Jodie { path }
    } else {
        DatasetSource::Csv { path }
    };
    DatasetSpec { name, source }
}

/// Writes `f`'s CSV output to `dir/name`, or to stdout without a directory.
fn emit_csv(dir: Option<&Path>, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(name);
            let mut file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            f(&mut file)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => f(&mut io::stdout()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGrid {
            side,
            events,
            interval,
            seed,
            out,
        } => {
            let g = GridSpec {
                side,
                num_events: events,
                interval,
                seed,
            }
            .generate()?;
            match out {
                Some(path) => jlmetric::ctdg::save_ctdg(&g, &path)?,
                None => write_ctdg(&g, io::stdout())?,
            }
        }
        Command::Metric {
            reference,
            generated,
            metric,
            jodie,
            n,
            o,
            seed,
        } => {
            let a = load(&reference, jodie)?;
            let b = load(&generated, jodie)?;
            let settings = MetricSettings {
                jl: JlConfig {
                    n,
                    o,
                    seed,
                    ..Default::default()
                },
                ..Default::default()
            };
            let phi = comparison_resolution(&a, [&b]);
            println!("{}", evaluate(metric, &settings, &a, &b, phi, None)?);
        }
        Command::Experiment {
            config,
            seed,
            seeds,
            emit,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_path(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            let table = run_sensitivity(&cfg)?;
            match emit.out_dir.or(cfg.output_dir) {
                Some(dir) => {
                    for path in emit_results(&table, dir)? {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => print!("{}", jlmetric::harness::emit::render_table(&table)),
            }
        }
        Command::SampleEfficiency {
            real,
            jodie,
            metrics,
            seeds,
            max_lambda,
            truncate,
            seed,
            emit,
        } => {
            let defaults = SampleEfficiencyConfig::default();
            let cfg = SampleEfficiencyConfig {
                real: real.map(|p| dataset_spec(p, jodie)),
                metrics: metrics.unwrap_or(defaults.metrics.clone()),
                seeds,
                max_lambda,
                truncate,
                seed,
                ..defaults
            };
            let results = run_sample_efficiency(&cfg)?;
            emit_csv(emit.out_dir.as_deref(), "sample_efficiency.csv", |w| {
                write_efficiency_csv(&results, w)
            })?;
        }
        Command::Bench {
            dataset,
            jodie,
            metrics,
            reps,
            truncate,
            seed,
            emit,
        } => {
            let defaults = BenchConfig::default();
            let cfg = BenchConfig {
                datasets: dataset.map_or(defaults.datasets.clone(), |p| vec![dataset_spec(p, jodie)]),
                metrics: metrics.unwrap_or(defaults.metrics.clone()),
                reps,
                truncate,
                seed,
                ..defaults
            };
            let rows = run_bench(&cfg)?;
            emit_csv(emit.out_dir.as_deref(), "bench.csv", |w| write_bench_csv(&rows, w))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
