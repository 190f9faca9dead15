use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{reduce, ReductionMode};
use crate::gridsim::{solve_slg_detailed, GroundingScheme};
use crate::neuralnet::NormalizationSpec;
use crate::raster::{normalize_pixels, rasterize, read_pgm, write_pgm, GrayImage, HEIGHT, WIDTH};
use crate::relaydsp::{compute_locus, dc_time_constant, synthesize_waveforms, ImpedanceLocus};
use crate::{Error, Result};

use super::config::PipelineConfig;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub scheme: String,
    pub distance_km: f64,
    pub rf_ohm: f64,
    /// Relative to the dataset directory.
    pub image: String,
    /// Row in every feature table.
    pub feature_row: usize,
    pub split: Split,
}

impl ScenarioRecord {
    pub fn id(&self) -> String {
        format!("{}_{}", self.scheme, self.distance_km)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub config_hash: String,
    pub normalization: NormalizationSpec,
    pub line_length_km: f64,
    pub image_height: usize,
    pub image_width: usize,
    /// Feature table file per reduction mode.
    pub feature_tables: BTreeMap<ReductionMode, String>,
    pub scenarios: Vec<ScenarioRecord>,
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!("unsupported manifest version {}", m.version)));
        }
        Ok(m)
    }

    pub fn scenarios_for<'a>(&'a self, scheme: &'a str, split: Split) -> impl Iterator<Item = &'a ScenarioRecord> + 'a {
        self.scenarios
            .iter()
            .filter(move |s| s.scheme == scheme && s.split == split)
    }

    pub fn schemes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.scenarios {
            if !out.contains(&s.scheme) {
                out.push(s.scheme.clone());
            }
        }
        out
    }
}

/// Locus and rendered image of one scenario.
#[derive(Debug, Clone)]
pub struct RenderedScenario {
    pub locus: ImpedanceLocus,
    pub image: GrayImage,
}

/// Run one scenario through simulation, relay processing and rendering.
pub fn render_scenario(cfg: &PipelineConfig, scheme: GroundingScheme, distance_km: f64) -> Result<RenderedScenario> {
    let run = || -> Result<RenderedScenario> {
        let model = cfg.system.model(scheme)?;
        let fault = cfg.scenarios.fault(distance_km);
        let sol = solve_slg_detailed(&model, &fault)?;
        let tau = cfg
            .relay
            .dc_offset
            .then(|| dc_time_constant(sol.loop_impedance, sol.thevenin.z1, model.omega()));
        let rec = synthesize_waveforms(&sol.prefault, &sol.during, &fault, model.f0, cfg.relay.fs, tau)?;
        let floor = cfg.relay.current_floor_fraction * model.nominal_load_current_peak();
        let locus = compute_locus(&rec, &model.line, floor)?;
        let image = rasterize(&locus, &cfg.raster.viewport, &cfg.raster.options(&model.line));
        Ok(RenderedScenario { locus, image })
    };
    run().map_err(|e| Error::Scenario {
        scenario: format!("{} at {} km", scheme.label(), distance_km),
        source: Box::new(e),
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Also write each locus as `loci/{scheme}_{distance}.csv`.
    pub debug_locus: bool,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn feature_table_name(mode: ReductionMode) -> String {
    format!("features_{mode}.csv")
}

/// Simulate every scheme × distance, write images, feature tables and the
/// manifest into `out_dir`.
pub fn generate(cfg: &PipelineConfig, out_dir: &Path, opts: GenerateOptions) -> Result<DatasetManifest> {
    cfg.validate()?;
    let schemes = cfg.schemes()?;
    let distances = cfg.scenarios.distances();
    let jobs: Vec<(GroundingScheme, usize, f64)> = schemes
        .iter()
        .flat_map(|&s| distances.iter().enumerate().map(move |(k, &d)| (s, k, d)))
        .collect();
    // Ordered collect: output order never depends on scheduling.
    let rendered: Vec<RenderedScenario> = jobs
        .par_iter()
        .map(|&(s, _, d)| render_scenario(cfg, s, d))
        .collect::<Result<_>>()?;
    log::info!("rendered {} scenarios", rendered.len());

    create_dir(&out_dir.join("images"))?;
    if opts.debug_locus {
        create_dir(&out_dir.join("loci"))?;
    }
    let mut scenarios = Vec::with_capacity(jobs.len());
    let mut tables: BTreeMap<ReductionMode, Vec<Vec<f64>>> = BTreeMap::new();
    for (row, (&(scheme, k, d), r)) in jobs.iter().zip(&rendered).enumerate() {
        let record = ScenarioRecord {
            scheme: scheme.label().to_string(),
            distance_km: d,
            rf_ohm: cfg.scenarios.rf_ohm,
            image: format!("images/{}_{}.pgm", scheme.label(), d),
            feature_row: row,
            split: if k < cfg.scenarios.train_count { Split::Train } else { Split::Test },
        };
        write_pgm(&r.image, &out_dir.join(&record.image))?;
        if opts.debug_locus {
            let path = out_dir.join(format!("loci/{}.csv", record.id()));
            write_file(&path, r.locus.to_csv().as_bytes())?;
        }
        let norm = normalize_pixels(&r.image);
        for &mode in &cfg.features.modes {
            tables.entry(mode).or_default().push(reduce(&norm, mode).values);
        }
        scenarios.push(record);
    }

    let mut feature_tables = BTreeMap::new();
    for (&mode, rows) in &tables {
        let name = feature_table_name(mode);
        write_feature_table(&out_dir.join(&name), mode, &scenarios, rows)?;
        feature_tables.insert(mode, name);
    }
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        config_hash: cfg.hash(),
        normalization: cfg.scenarios.normalization()?,
        line_length_km: cfg.system.line.length_km,
        image_height: HEIGHT,
        image_width: WIDTH,
        feature_tables,
        scenarios,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write_file(&out_dir.join(MANIFEST_FILE), json.as_bytes())?;
    write_file(&out_dir.join("config.toml"), cfg.to_toml()?.as_bytes())?;
    Ok(manifest)
}

fn write_feature_table(path: &Path, mode: ReductionMode, scenarios: &[ScenarioRecord], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["scheme".to_string(), "distance_km".to_string()];
    header.extend(mode.descriptor(HEIGHT, WIDTH));
    w.write_record(&header)?;
    for (s, row) in scenarios.iter().zip(rows) {
        let mut rec = vec![s.scheme.clone(), s.distance_km.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A generated dataset loaded back from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub manifest: DatasetManifest,
    tables: BTreeMap<ReductionMode, Vec<Vec<f64>>>,
}

/// Rows of one scheme, split into train and test.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSplit {
    pub scheme: String,
    pub mode: ReductionMode,
    pub train_x: Vec<Vec<f64>>,
    pub train_km: Vec<f64>,
    pub test_x: Vec<Vec<f64>>,
    pub test_km: Vec<f64>,
    /// Feature-table rows used for training, for bookkeeping checks.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest = DatasetManifest::load(dir)?;
        let mut tables = BTreeMap::new();
        for (&mode, name) in &manifest.feature_tables {
            tables.insert(mode, read_feature_table(&dir.join(name), mode, &manifest)?);
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            tables,
        })
    }

    pub fn features(&self, mode: ReductionMode) -> Result<&[Vec<f64>]> {
        self.tables
            .get(&mode)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Manifest(format!("dataset has no {mode} feature table")))
    }

    pub fn image(&self, record: &ScenarioRecord) -> Result<GrayImage> {
        read_pgm(&self.dir.join(&record.image))
    }

    pub fn split(&self, scheme: &str, mode: ReductionMode) -> Result<SchemeSplit> {
        let table = self.features(mode)?;
        let mut out = SchemeSplit {
            scheme: scheme.to_string(),
            mode,
            train_x: vec![],
            train_km: vec![],
            test_x: vec![],
            test_km: vec![],
            train_rows: vec![],
            test_rows: vec![],
        };
        for s in self.manifest.scenarios.iter().filter(|s| s.scheme == scheme) {
            let row = table
                .get(s.feature_row)
                .ok_or_else(|| Error::Manifest(format!("missing feature row {} for {}", s.feature_row, s.id())))?
                .clone();
            match s.split {
                Split::Train => {
                    out.train_x.push(row);
                    out.train_km.push(s.distance_km);
                    out.train_rows.push(s.feature_row);
                }
                Split::Test => {
                    out.test_x.push(row);
                    out.test_km.push(s.distance_km);
                    out.test_rows.push(s.feature_row);
                }
            }
        }
        if out.train_x.is_empty() || out.test_x.is_empty() {
            return Err(Error::Manifest(format!("scheme {scheme:?} has no train or test rows")));
        }
        Ok(out)
    }
}

fn read_feature_table(path: &Path, mode: ReductionMode, manifest: &DatasetManifest) -> Result<Vec<Vec<f64>>> {
    let expected = mode.feature_len(manifest.image_height, manifest.image_width);
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != expected + 2 {
            return Err(Error::Dimension {
                expected: expected + 2,
                actual: rec.len(),
            });
        }
        let row = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|e| Error::Manifest(format!("{}: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != manifest.scenarios.len() {
        return Err(Error::Manifest(format!(
            "{} has {} rows, manifest lists {} scenarios",
            path.display(),
            rows.len(),
            manifest.scenarios.len()
        )));
    }
    Ok(rows)
}
