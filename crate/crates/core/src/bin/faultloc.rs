use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use faultloc::features::ReductionMode;
use faultloc::neuralnet::Algorithm;
use faultloc::pipeline::{self, Denominator, GenerateOptions, PipelineConfig};

#[derive(Parser)]
#[command(name = "faultloc", about = "Image-based single-line-to-ground fault locator")]
struct Cli {
    /// TOML config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset directory.
    #[arg(long, global = true, default_value = "out/dataset")]
    data: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate all scenarios and write images, features and the manifest.
    Generate {
        /// Also write every impedance locus as CSV.
        #[arg(long)]
        debug_locus: bool,
    },
    /// Train one model for one grounding scheme.
    Train {
        #[arg(long)]
        scheme: String,
        /// trainlm, traincgb, trainscg, trainoss, traingdx or svr.
        #[arg(long, default_value = "traincgb")]
        trainer: String,
        #[arg(long)]
        reduction: Option<ReductionMode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out/models")]
        out: PathBuf,
    },
    /// Evaluate a saved model on its scheme's test split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// span (195 km) or line (200 km).
        #[arg(long)]
        denominator: Option<Denominator>,
    },
    /// Train both networks and the SVR baseline for every scheme.
    Compare {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        denominator: Option<Denominator>,
        #[arg(long, default_value = "out/models")]
        out: PathBuf,
    },
    /// Render all saved models into one markdown report.
    Report {
        #[arg(long, default_value = "out/models")]
        models: PathBuf,
        #[arg(long)]
        denominator: Option<Denominator>,
        #[arg(long, default_value = "out/report.md")]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> faultloc::Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> faultloc::Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let denom = |d: Option<Denominator>| d.unwrap_or(cfg.report.denominator);
    match cli.cmd {
        Cmd::Generate { debug_locus } => {
            let m = pipeline::generate(&cfg, &cli.data, GenerateOptions { debug_locus })?;
            println!("{} scenarios written to {} (config {})", m.scenarios.len(), cli.data.display(), m.config_hash);
        }
        Cmd::Train {
            scheme,
            trainer,
            reduction,
            seed,
            out,
        } => {
            let algorithm = match trainer.as_str() {
                "svr" => None,
                t => Some(t.parse::<Algorithm>()?),
            };
            let seed = seed.unwrap_or(cfg.training.seed);
            let (model, path) = pipeline::train_cmd(&cfg, &cli.data, &scheme, algorithm, reduction, seed, &out)?;
            if let pipeline::Predictor::Ann { log, .. } = &model.predictor {
                println!("{} epochs, training MSE {:.3e}, stop {:?}", log.epochs.len(), log.final_mse, log.stop);
            }
            println!("{} -> {}", model.descriptor(), path.display());
        }
        Cmd::Eval { model, denominator } => {
            let r = pipeline::eval_cmd(&cli.data, &model, denom(denominator))?;
            print!("{}", pipeline::report::eval_markdown(&r));
        }
        Cmd::Compare { seed, denominator, out } => {
            let seed = seed.unwrap_or(cfg.training.seed);
            let runs = pipeline::compare_cmd(&cfg, &cli.data, seed, denom(denominator), &out)?;
            let c = pipeline::Comparison {
                rows: runs.iter().map(pipeline::SchemeRun::comparison_row).collect(),
            };
            print!("{}", c.to_markdown());
        }
        Cmd::Report {
            models,
            denominator,
            out,
        } => {
            pipeline::report_cmd(&cli.data, &models, denom(denominator), &out)?;
            println!("report written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
