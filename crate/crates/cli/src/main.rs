use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geu_cli::commands::{fit_model, uncertainty_for, write_projections};
use geu_cli::{load_dataset, run_boundary, run_compare, run_size_curve, CliError, ExperimentConfig};
use geu_core::data::load_csv;
use geu_core::EmbeddingModel;

#[derive(Parser)]
#[command(name = "geu", version, about = "Subspace learning with data uncertainty: experiments and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML key = value); defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores), overriding the config.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validated comparison of the configured methods.
    Compare,
    /// Accuracy versus training-set size on a fixed test set.
    SizeCurve,
    /// Decision grids of MFA, GEU-MFA and augmented MFA on 2-D blobs.
    Boundary,
    /// Write the estimated per-sample variances as CSV.
    EstimateUncertainty,
    /// Fit one method on the whole dataset and save the model.
    Fit,
    /// Apply a saved model to a CSV dataset.
    Project {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let out = &cli.out;
    match cli.command {
        Command::Compare => {
            let report = run_compare(&cfg, &load_dataset(&cfg)?)?;
            report.write(out)?;
            print!("{}", report.markdown());
        }
        Command::SizeCurve => {
            let report = run_size_curve(&cfg, &load_dataset(&cfg)?)?;
            report.write(out)?;
            print!("{}", report.markdown());
        }
        Command::Boundary => {
            let report = run_boundary(&cfg)?;
            report.write(out)?;
            let mfa = report.grid("MFA").expect("MFA grid");
            for (name, grid) in &report.grids {
                println!("{name}: agreement with MFA {:.4}", mfa.agreement(grid)?);
            }
        }
        Command::EstimateUncertainty => {
            let u = uncertainty_for(&cfg, &load_dataset(&cfg)?)?;
            std::fs::create_dir_all(out)?;
            u.write_csv(out.join("uncertainty.csv"))?;
        }
        Command::Fit => {
            let model = fit_model(&cfg, &load_dataset(&cfg)?)?;
            std::fs::create_dir_all(out)?;
            model.write(out.join("model.txt"))?;
        }
        Command::Project { model, input } => {
            let model = EmbeddingModel::read(model)?;
            let data = load_csv(input, &cfg.load_options()?)?;
            write_projections(&model, &data, &out.join("projections.csv"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
