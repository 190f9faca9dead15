use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::ReductionMode;
use crate::neuralnet::{
    check_memory_contract, train, Algorithm, Batch, CascadeNet, NormalizationSpec, Standardizer, Topology, TrainLog,
};
use crate::svr::{grid_search, train_svr, GridPoint, SvrModel};
use crate::{Error, Result};

use super::config::PipelineConfig;
use super::dataset::{Dataset, SchemeSplit};
use super::metrics::{mse_normalized, percent_error, Denominator};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    Ann {
        topology: Topology,
        params: Vec<f64>,
        log: TrainLog,
    },
    Svr {
        model: SvrModel,
        grid: Vec<GridPoint>,
        best: usize,
    },
}

/// A trained per-scheme locator with everything needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub config_hash: String,
    pub scheme: String,
    pub reduction: ReductionMode,
    pub seed: u64,
    pub normalization: NormalizationSpec,
    pub standardizer: Standardizer,
    pub predictor: Predictor,
}

impl ModelFile {
    pub fn descriptor(&self) -> String {
        match &self.predictor {
            Predictor::Ann { topology, log, .. } => format!(
                "{} {:?} {} {}",
                if topology.cascade { "cascade-forward" } else { "feedforward" },
                topology.hidden,
                log.algorithm.name(),
                self.reduction
            ),
            Predictor::Svr { model, .. } => format!(
                "svr rbf C={} eps={} gamma={:.3e} {}",
                model.c, model.epsilon, model.gamma, self.reduction
            ),
        }
    }

    pub fn is_ann(&self) -> bool {
        matches!(self.predictor, Predictor::Ann { .. })
    }

    /// Predicted distance in km for a raw feature row.
    pub fn predict_km(&self, features: &[f64]) -> Result<f64> {
        let x = self.standardizer.transform(features)?;
        let y = match &self.predictor {
            Predictor::Ann { topology, params, .. } => {
                CascadeNet::from_params(topology.clone(), params.clone())?.predict(&x)?
            }
            Predictor::Svr { model, .. } => model.predict(&x)?,
        };
        Ok(self.normalization.invert(y))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.version != MODEL_VERSION {
            return Err(Error::Manifest(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }
}

fn standardized(split: &SchemeSplit) -> Result<(Standardizer, Vec<Vec<f64>>)> {
    // Statistics come from the training rows only.
    let st = Standardizer::fit(&split.train_x)?;
    let x = split.train_x.iter().map(|r| st.transform(r)).collect::<Result<_>>()?;
    Ok((st, x))
}

/// Train a neural locator for `scheme`. `reduction` defaults to the
/// layout configured for the trainer.
pub fn train_ann(
    cfg: &PipelineConfig,
    data: &Dataset,
    scheme: &str,
    algorithm: Algorithm,
    reduction: Option<ReductionMode>,
    seed: u64,
) -> Result<ModelFile> {
    let mode = reduction.unwrap_or_else(|| cfg.training.default_reduction(algorithm));
    let dim = mode.feature_len(data.manifest.image_height, data.manifest.image_width);
    let topology = Topology {
        cascade: cfg.training.cascade,
        ..Topology::cascade(dim, &cfg.training.hidden)
    };
    // Refuse impossible pairings before touching any data.
    check_memory_contract(algorithm, topology.param_count())?;
    let split = data.split(scheme, mode)?;
    let spec = data.manifest.normalization;
    let (st, x) = standardized(&split)?;
    let y: Vec<f64> = split.train_km.iter().map(|d| spec.apply(*d)).collect();
    let net = CascadeNet::init_weights(topology.clone(), seed)?;
    let (net, log) = train(&net, &Batch::scalar(x, &y), &cfg.training.train_config(algorithm, seed))?;
    log::info!(
        "{scheme}: {} on {mode}, {} epochs, training MSE {:.3e} ({:?})",
        algorithm.name(),
        log.epochs.len(),
        log.final_mse,
        log.stop
    );
    Ok(ModelFile {
        version: MODEL_VERSION,
        config_hash: data.manifest.config_hash.clone(),
        scheme: scheme.to_string(),
        reduction: mode,
        seed,
        normalization: spec,
        standardizer: st,
        predictor: Predictor::Ann {
            topology,
            params: net.params().to_vec(),
            log,
        },
    })
}

/// Grid-searched ε-SVR baseline for `scheme`.
pub fn train_svr_baseline(
    cfg: &PipelineConfig,
    data: &Dataset,
    scheme: &str,
    reduction: Option<ReductionMode>,
    seed: u64,
) -> Result<ModelFile> {
    let mode = reduction.unwrap_or(cfg.svr.reduction);
    let split = data.split(scheme, mode)?;
    let spec = data.manifest.normalization;
    let (st, x) = standardized(&split)?;
    let y: Vec<f64> = split.train_km.iter().map(|d| spec.apply(*d)).collect();
    let (grid, best) = grid_search(&x, &y, &cfg.svr.grid, seed)?;
    let model = train_svr(&x, &y, &grid[best].params)?;
    log::info!("{scheme}: svr on {mode}, best {:?} (cv mse {:.3e})", grid[best].params, grid[best].cv_mse);
    Ok(ModelFile {
        version: MODEL_VERSION,
        config_hash: data.manifest.config_hash.clone(),
        scheme: scheme.to_string(),
        reduction: mode,
        seed,
        normalization: spec,
        standardizer: st,
        predictor: Predictor::Svr { model, grid, best },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub actual_km: f64,
    pub predicted_km: f64,
    pub percent_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: String,
    pub model: String,
    pub config_hash: String,
    pub denominator: Denominator,
    pub denominator_km: f64,
    /// Test points, sorted by actual distance.
    pub rows: Vec<EvalRow>,
    pub mse_normalized: f64,
    /// Every scenario of the scheme as `(actual, predicted, is_test)`.
    pub scatter: Vec<(f64, f64, bool)>,
}

impl EvalReport {
    pub fn max_percent_error(&self) -> f64 {
        self.rows.iter().map(|r| r.percent_error).fold(0.0, f64::max)
    }
}

/// Predict the test scenarios of the model's scheme.
pub fn evaluate(data: &Dataset, model: &ModelFile, denominator: Denominator) -> Result<EvalReport> {
    if model.config_hash != data.manifest.config_hash {
        return Err(Error::Manifest(format!(
            "config hash mismatch: model {} was trained on a dataset from config {}, this dataset is {}",
            model.scheme, model.config_hash, data.manifest.config_hash
        )));
    }
    let split = data.split(&model.scheme, model.reduction)?;
    let spec = data.manifest.normalization;
    let denom_km = denominator.km(&spec, data.manifest.line_length_km);
    let mut rows = split
        .test_x
        .iter()
        .zip(&split.test_km)
        .map(|(x, &d)| {
            let p = model.predict_km(x)?;
            Ok(EvalRow {
                actual_km: d,
                predicted_km: p,
                percent_error: percent_error(d, p, denom_km)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.actual_km.total_cmp(&b.actual_km));
    let actual: Vec<f64> = rows.iter().map(|r| r.actual_km).collect();
    let pred: Vec<f64> = rows.iter().map(|r| r.predicted_km).collect();
    let mut scatter = Vec::new();
    for (x, &d) in split.train_x.iter().zip(&split.train_km) {
        scatter.push((d, model.predict_km(x)?, false));
    }
    scatter.extend(rows.iter().map(|r| (r.actual_km, r.predicted_km, true)));
    Ok(EvalReport {
        scheme: model.scheme.clone(),
        model: model.descriptor(),
        config_hash: data.manifest.config_hash.clone(),
        denominator,
        denominator_km: denom_km,
        mse_normalized: mse_normalized(&actual, &pred, &spec)?,
        rows,
        scatter,
    })
}
