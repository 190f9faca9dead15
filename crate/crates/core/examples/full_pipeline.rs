//! Dataset generation, neural and SVR training, evaluation and the
//! comparison report, end to end.
//!
//! `cargo run --release --example full_pipeline -- out/study`

use std::path::PathBuf;

use faultloc::pipeline::{self, Denominator, GenerateOptions, PipelineConfig};

fn main() -> faultloc::Result<()> {
    env_logger::init();
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/study".into()));
    let cfg = PipelineConfig::default();
    let data = root.join("dataset");
    let models = root.join("models");

    let manifest = pipeline::generate(&cfg, &data, GenerateOptions::default())?;
    println!("{} scenarios, config {}", manifest.scenarios.len(), &manifest.config_hash[..12]);

    let runs = pipeline::compare_cmd(&cfg, &data, cfg.training.seed, Denominator::Span, &models)?;
    for run in &runs {
        let (net, svr) = (&run.best_network().1, &run.svr.1);
        println!(
            "{:<11} network {:.2e} (max {:.2}%)   svr {:.2e}",
            run.scheme,
            net.mse_normalized,
            net.max_percent_error(),
            svr.mse_normalized
        );
    }
    pipeline::report_cmd(&data, &models, Denominator::Span, &root.join("report.md"))?;
    println!("report written to {}", root.join("report.md").display());
    Ok(())
}
