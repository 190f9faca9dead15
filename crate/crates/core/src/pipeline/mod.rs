//! Dataset generation, training, evaluation and reporting.
//!
//! A dataset directory holds `manifest.json`, the config it was built from,
//! one PGM per scenario and one feature table per reduction mode. Models and
//! reports carry the config hash so they cannot be evaluated against a
//! dataset built from different settings.

pub mod config;
pub mod dataset;
pub mod metrics;
pub mod model;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::PipelineConfig;
pub use dataset::{generate, render_scenario, Dataset, DatasetManifest, GenerateOptions, ScenarioRecord, Split};
pub use metrics::{mse_normalized, percent_error, Denominator};
pub use model::{evaluate, train_ann, train_svr_baseline, EvalReport, EvalRow, ModelFile, Predictor};
pub use report::{Comparison, ComparisonRow};

use crate::features::ReductionMode;
use crate::neuralnet::Algorithm;
use crate::{Error, Result};

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `{scheme}_{trainer}_{mode}.json`
pub fn model_file_name(model: &ModelFile) -> String {
    let kind = match &model.predictor {
        Predictor::Ann { log, .. } => log.algorithm.name(),
        Predictor::Svr { .. } => "svr",
    };
    format!("{}_{}_{}.json", model.scheme, kind, model.reduction)
}

/// Write the evaluation table (CSV and markdown) and scatter data next to
/// `stem`.
pub fn write_eval(report: &EvalReport, stem: &Path) -> Result<()> {
    let with = |suffix: &str| PathBuf::from(format!("{}{suffix}", stem.display()));
    write(&with(".csv"), &report::eval_csv(report))?;
    write(&with(".md"), &report::eval_markdown(report))?;
    write(&with("_scatter.csv"), &report::scatter_csv(report))
}

/// Networks and baseline trained for one scheme.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: String,
    pub networks: Vec<(ModelFile, EvalReport)>,
    pub svr: (ModelFile, EvalReport),
}

impl SchemeRun {
    /// Network with the lowest test MSE.
    pub fn best_network(&self) -> &(ModelFile, EvalReport) {
        self.networks
            .iter()
            .min_by(|a, b| a.1.mse_normalized.total_cmp(&b.1.mse_normalized))
            .expect("at least one network")
    }

    pub fn comparison_row(&self) -> ComparisonRow {
        let (ann, ann_eval) = self.best_network();
        ComparisonRow {
            scheme: self.scheme.clone(),
            ann_model: ann.descriptor(),
            ann_mse: ann_eval.mse_normalized,
            ann_max_percent_error: ann_eval.max_percent_error(),
            svr_model: self.svr.0.descriptor(),
            svr_mse: self.svr.1.mse_normalized,
        }
    }
}

/// The pairings the study compares: CGB on its default layout and LM on
/// its default layout.
pub const STUDY_TRAINERS: [Algorithm; 2] = [Algorithm::Cgb, Algorithm::Lm];

/// Train the study networks and the SVR baseline on one scheme and
/// evaluate them on its test split.
pub fn run_scheme(cfg: &PipelineConfig, data: &Dataset, scheme: &str, seed: u64, denom: Denominator) -> Result<SchemeRun> {
    let mut networks = Vec::new();
    for algorithm in STUDY_TRAINERS {
        let m = train_ann(cfg, data, scheme, algorithm, None, seed)?;
        let e = evaluate(data, &m, denom)?;
        networks.push((m, e));
    }
    let svr = train_svr_baseline(cfg, data, scheme, None, seed)?;
    let svr_eval = evaluate(data, &svr, denom)?;
    Ok(SchemeRun {
        scheme: scheme.to_string(),
        networks,
        svr: (svr, svr_eval),
    })
}

/// `train`: fit one model and save it into `out_dir`.
#[allow(clippy::too_many_arguments)]
pub fn train_cmd(
    cfg: &PipelineConfig,
    dataset_dir: &Path,
    scheme: &str,
    trainer: Option<Algorithm>,
    reduction: Option<ReductionMode>,
    seed: u64,
    out_dir: &Path,
) -> Result<(ModelFile, PathBuf)> {
    let data = Dataset::open(dataset_dir)?;
    if data.manifest.config_hash != cfg.hash() {
        return Err(Error::Manifest("dataset was generated from a different config".into()));
    }
    let model = match trainer {
        Some(a) => train_ann(cfg, &data, scheme, a, reduction, seed)?,
        None => train_svr_baseline(cfg, &data, scheme, reduction, seed)?,
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(model_file_name(&model));
    model.save(&path)?;
    Ok((model, path))
}

/// `eval`: evaluate a saved model and write its tables next to it.
pub fn eval_cmd(dataset_dir: &Path, model_path: &Path, denom: Denominator) -> Result<EvalReport> {
    let data = Dataset::open(dataset_dir)?;
    let model = ModelFile::load(model_path)?;
    let report = evaluate(&data, &model, denom)?;
    write_eval(&report, &model_path.with_extension("eval"))?;
    Ok(report)
}

/// `compare`: train networks and baselines for every scheme, save models,
/// per-model tables and the comparison table into `out_dir`.
pub fn compare_cmd(cfg: &PipelineConfig, dataset_dir: &Path, seed: u64, denom: Denominator, out_dir: &Path) -> Result<Vec<SchemeRun>> {
    let data = Dataset::open(dataset_dir)?;
    if data.manifest.config_hash != cfg.hash() {
        return Err(Error::Manifest("dataset was generated from a different config".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut runs = Vec::new();
    for scheme in data.manifest.schemes() {
        let run = run_scheme(cfg, &data, &scheme, seed, denom)?;
        for (m, e) in run.networks.iter().chain(std::iter::once(&run.svr)) {
            let path = out_dir.join(model_file_name(m));
            m.save(&path)?;
            write_eval(e, &path.with_extension("eval"))?;
        }
        runs.push(run);
    }
    let comparison = Comparison {
        rows: runs.iter().map(SchemeRun::comparison_row).collect(),
    };
    write(&out_dir.join("comparison.md"), &comparison.to_markdown())?;
    write(&out_dir.join("comparison.csv"), &comparison.to_csv())?;
    Ok(runs)
}

/// `report`: evaluate every model file in `models_dir` and render one
/// markdown document.
pub fn report_cmd(dataset_dir: &Path, models_dir: &Path, denom: Denominator, out: &Path) -> Result<String> {
    let data = Dataset::open(dataset_dir)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(models_dir)
        .map_err(|e| Error::io(models_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut evals = Vec::new();
    let mut models = Vec::new();
    for p in &paths {
        let m = ModelFile::load(p)?;
        evals.push(evaluate(&data, &m, denom)?);
        models.push(m);
    }
    if evals.is_empty() {
        return Err(Error::Manifest(format!("no model files in {}", models_dir.display())));
    }
    let mut comparison = Comparison::default();
    for scheme in data.manifest.schemes() {
        let pick = |ann: bool| {
            models
                .iter()
                .zip(&evals)
                .filter(|(m, _)| m.scheme == scheme && m.is_ann() == ann)
                .min_by(|a, b| a.1.mse_normalized.total_cmp(&b.1.mse_normalized))
        };
        if let (Some((a, ae)), Some((s, se))) = (pick(true), pick(false)) {
            comparison.rows.push(ComparisonRow {
                scheme: scheme.clone(),
                ann_model: a.descriptor(),
                ann_mse: ae.mse_normalized,
                ann_max_percent_error: ae.max_percent_error(),
                svr_model: s.descriptor(),
                svr_mse: se.mse_normalized,
            });
        }
    }
    let text = report::full_report(&data.manifest.config_hash, &comparison, &evals);
    write(out, &text)?;
    Ok(text)
}
