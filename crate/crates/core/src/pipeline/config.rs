use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::features::ReductionMode;
use crate::gridsim::{FaultSpec, GroundingScheme, SequenceLineParams, SourceParams, SystemModel};
use crate::neuralnet::{Algorithm, NormalizationSpec, TrainConfig, REFERENCE_HIDDEN};
use crate::raster::{RasterOptions, Viewport};
use crate::svr::SvrGrid;
use crate::{Error, Result};

use super::metrics::Denominator;

/// Everything that determines a dataset, its models and its reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub system: SystemConfig,
    pub scenarios: ScenarioConfig,
    pub relay: RelayConfig,
    pub raster: RasterConfig,
    pub features: FeatureConfig,
    pub training: TrainingConfig,
    pub svr: SvrConfig,
    pub report: ReportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub nominal_kv: f64,
    pub f0: f64,
    pub line: SequenceLineParams,
    pub short_circuit_mva: f64,
    pub x_over_r: f64,
    /// Pre-fault transfer towards the remote system.
    pub load_mw: f64,
    /// Neutral resistor of the impedance-grounded scheme.
    pub neutral_resistance_ohm: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            nominal_kv: 154.0,
            f0: 50.0,
            line: SequenceLineParams::default(),
            short_circuit_mva: 2000.0,
            x_over_r: 10.0,
            load_mw: 25.0,
            neutral_resistance_ohm: 5.0,
        }
    }
}

impl SystemConfig {
    pub fn model(&self, scheme: GroundingScheme) -> Result<SystemModel> {
        let src = SourceParams::from_short_circuit(self.nominal_kv, self.short_circuit_mva, self.x_over_r, scheme);
        let model = SystemModel {
            line: self.line,
            local: src,
            remote: Some(src),
            load_mw: self.load_mw,
            nominal_kv: self.nominal_kv,
            f0: self.f0,
        }
        .with_load_flow()?;
        model.validate()?;
        Ok(model)
    }

    /// Scheme for a label such as `"impedance"`.
    pub fn scheme(&self, label: &str) -> Result<GroundingScheme> {
        GroundingScheme::all(self.neutral_resistance_ohm)
            .into_iter()
            .find(|s| s.label() == label.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown grounding scheme {label:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schemes: Vec<String>,
    pub first_km: f64,
    pub step_km: f64,
    pub count: usize,
    /// The first `train_count` distances train, the rest test.
    pub train_count: usize,
    pub rf_ohm: f64,
    pub t_on: f64,
    pub duration: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schemes: ["ungrounded", "solid", "impedance"].map(String::from).to_vec(),
            first_km: 5.0,
            step_km: 5.0,
            count: 40,
            train_count: 34,
            rf_ohm: 1.0,
            t_on: 0.3,
            duration: 0.05,
        }
    }
}

impl ScenarioConfig {
    pub fn distances(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.first_km + k as f64 * self.step_km).collect()
    }

    pub fn fault(&self, distance_km: f64) -> FaultSpec {
        FaultSpec {
            distance_km,
            rf_ohm: self.rf_ohm,
            t_on: self.t_on,
            duration: self.duration,
        }
    }

    /// Target scaling spans the generated distance range.
    pub fn normalization(&self) -> Result<NormalizationSpec> {
        let d = self.distances();
        NormalizationSpec::new(d[0], d[d.len() - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelayConfig {
    pub fs: f64,
    /// Superpose the decaying DC offset on the fault currents.
    pub dc_offset: bool,
    /// Current floor as a fraction of the nominal load current peak.
    pub current_floor_fraction: f64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            fs: crate::relaydsp::DEFAULT_FS,
            dc_offset: true,
            current_floor_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RasterConfig {
    pub viewport: Viewport,
    pub gain: u8,
    /// Draw a mho circle reaching this fraction of the line impedance.
    pub zone_reach_fraction: Option<f64>,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            viewport: Viewport::default(),
            gain: RasterOptions::default().gain,
            zone_reach_fraction: None,
        }
    }
}

impl RasterConfig {
    pub fn options(&self, line: &SequenceLineParams) -> RasterOptions {
        RasterOptions {
            gain: self.gain,
            zone_reach: self
                .zone_reach_fraction
                .map(|f| line.z1_per_km * line.length_km * f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// One feature table is written per mode.
    pub modes: Vec<ReductionMode>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            modes: vec![ReductionMode::Block(8), ReductionMode::PerColumn],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub hidden: Vec<usize>,
    pub cascade: bool,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub goal_mse: f64,
    pub min_grad: f64,
    pub seed: u64,
    pub lm_mu0: f64,
    pub lm_mu_inc: f64,
    pub lm_mu_dec: f64,
    pub lm_mu_max: f64,
    /// Feature layout used with Levenberg-Marquardt unless overridden.
    pub lm_reduction: ReductionMode,
    /// Feature layout used with the first-order trainers unless overridden.
    pub first_order_reduction: ReductionMode,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden: REFERENCE_HIDDEN.to_vec(),
            cascade: true,
            max_epochs: t.max_epochs,
            learning_rate: t.learning_rate,
            goal_mse: t.goal_mse,
            min_grad: t.min_grad,
            seed: t.seed,
            lm_mu0: t.lm_mu0,
            lm_mu_inc: t.lm_mu_inc,
            lm_mu_dec: t.lm_mu_dec,
            lm_mu_max: t.lm_mu_max,
            lm_reduction: ReductionMode::Block(8),
            first_order_reduction: ReductionMode::PerColumn,
        }
    }
}

impl TrainingConfig {
    pub fn train_config(&self, algorithm: Algorithm, seed: u64) -> TrainConfig {
        TrainConfig {
            algorithm,
            max_epochs: self.max_epochs,
            learning_rate: self.learning_rate,
            goal_mse: self.goal_mse,
            min_grad: self.min_grad,
            seed,
            lm_mu0: self.lm_mu0,
            lm_mu_inc: self.lm_mu_inc,
            lm_mu_dec: self.lm_mu_dec,
            lm_mu_max: self.lm_mu_max,
        }
    }

    pub fn default_reduction(&self, algorithm: Algorithm) -> ReductionMode {
        match algorithm {
            Algorithm::Lm => self.lm_reduction,
            _ => self.first_order_reduction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrConfig {
    pub reduction: ReductionMode,
    pub grid: SvrGrid,
}

impl Default for SvrConfig {
    fn default() -> Self {
        Self {
            reduction: ReductionMode::Block(8),
            grid: SvrGrid::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub denominator: Denominator,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn schemes(&self) -> Result<Vec<GroundingScheme>> {
        self.scenarios.schemes.iter().map(|s| self.system.scheme(s)).collect()
    }

    /// Structural checks. Physical limits such as the line length are left
    /// to the per-scenario validation so errors name the scenario.
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenarios;
        if s.schemes.is_empty() {
            return Err(Error::Config("no grounding schemes selected".into()));
        }
        self.schemes()?;
        if s.count < 2 || s.train_count == 0 || s.train_count >= s.count {
            return Err(Error::Config(format!(
                "need 0 < train_count < count, got {} of {}",
                s.train_count, s.count
            )));
        }
        if !(s.first_km > 0.0 && s.step_km > 0.0) {
            return Err(Error::Config("distances must be positive and increasing".into()));
        }
        if self.features.modes.is_empty() {
            return Err(Error::Config("no feature reduction selected".into()));
        }
        let t = &self.training;
        if t.hidden.is_empty() || t.hidden.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".into()));
        }
        self.training.train_config(Algorithm::Lm, t.seed).validate()?;
        self.raster.viewport.validate()?;
        if self.relay.current_floor_fraction < 0.0 {
            return Err(Error::Config("current floor must be non-negative".into()));
        }
        Ok(())
    }
}
