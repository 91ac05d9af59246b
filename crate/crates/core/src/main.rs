use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crab_al::dataset::MultiLabelDataset;
use crab_al::harness::{
    emit_plots, generate_base, load_results_dir, run_experiment, subsample_to_mean_ir, ExperimentConfig, StrategyKind,
    SyntheticSpec,
};
use crab_al::metrics::mean_ir;

#[derive(Parser)]
#[command(name = "crab-al", version, about = "Correlation-aware multi-label active learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an active-learning campaign.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// crab, besra or random; overrides the config.
        #[arg(long)]
        strategy: Option<StrategyKind>,
        /// Comma-separated seeds; overrides the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write A and NegA after every iteration.
        #[arg(long)]
        dump_correlation: bool,
        /// Run single-threaded.
        #[arg(long)]
        sequential: bool,
    },
    /// Subsample a dataset to a target MeanIR.
    Synth {
        /// Sparse-format pool to subsample; without it a pool is generated.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        target_ir: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generated pool size.
        #[arg(long, default_value_t = 2000)]
        instances: usize,
        /// Generated label count.
        #[arg(long, default_value_t = 10)]
        labels: usize,
        /// Generated feature dimension.
        #[arg(long, default_value_t = 32)]
        features: usize,
        /// Ratio of the most to the least frequent generated label rate.
        #[arg(long, default_value_t = 30.0)]
        imbalance: f64,
    },
    /// Render figures from the strategy subdirectories of a results directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to `<in>/plots`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> crab_al::Result<bool> {
    match cli.command {
        Command::Run {
            config,
            strategy,
            seeds,
            out,
            dump_correlation,
            sequential,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = strategy {
                cfg.run.strategy = s;
            }
            if let Some(s) = seeds {
                cfg.run.seeds = s;
            }
            if let Some(o) = out {
                cfg.run.out = o;
            }
            cfg.run.dump_correlation |= dump_correlation;
            if sequential {
                cfg.run.execution = crab_al::par::Execution::Sequential;
            }
            let results = run_experiment(&cfg)?;
            let mut ok = true;
            for r in results.aborted() {
                eprintln!("seed {} aborted: {}", r.seed, r.error.as_deref().unwrap_or(""));
                ok = false;
            }
            println!(
                "wrote {}",
                cfg.run.out.join(cfg.run.strategy.name()).join("metrics.csv").display()
            );
            Ok(ok)
        }
        Command::Synth {
            base,
            target_ir,
            out,
            tolerance,
            seed,
            instances,
            labels,
            features,
            imbalance,
        } => {
            let spec = SyntheticSpec {
                base: base.clone(),
                instances,
                labels,
                feature_dim: features,
                imbalance,
                target_mean_ir: target_ir,
                tolerance,
                seed,
                ..SyntheticSpec::default()
            };
            spec.validate()?;
            let pool = match &base {
                Some(p) => MultiLabelDataset::load(p)?,
                None => generate_base(&spec)?,
            };
            let data = subsample_to_mean_ir(&pool, target_ir, tolerance, seed)?;
            data.save(&out)?;
            println!(
                "wrote {} ({} instances, MeanIR {:.3})",
                out.display(),
                data.len(),
                mean_ir(data.labels()).value.unwrap_or(f64::NAN)
            );
            Ok(true)
        }
        Command::Plot { input, out } => {
            let series = load_results_dir(&input)?;
            let dir = out.unwrap_or_else(|| input.join("plots"));
            for p in emit_plots(&series, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
