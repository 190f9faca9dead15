use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use faultloc::features::ReductionMode;
use faultloc::neuralnet::{Algorithm, StopReason};
use faultloc::pipeline::{
    self, evaluate, train_ann, Dataset, Denominator, GenerateOptions, ModelFile, PipelineConfig, Predictor, Split,
};
use faultloc::svr::SvrModel;

fn small_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.scenarios.schemes = vec!["solid".into(), "impedance".into()];
    cfg.scenarios.count = 10;
    cfg.scenarios.train_count = 8;
    cfg.scenarios.first_km = 20.0;
    cfg.scenarios.step_km = 20.0;
    cfg.training.hidden = vec![4, 3];
    cfg.training.max_epochs = 40;
    cfg.svr.grid.cs = vec![1.0, 10.0];
    cfg.svr.grid.epsilons = vec![0.01];
    cfg.svr.grid.gamma_factors = vec![1.0];
    cfg.svr.grid.folds = 4;
    cfg
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn default_config_builds_the_reference_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::default();
    let m = pipeline::generate(&cfg, tmp.path(), GenerateOptions::default()).unwrap();
    assert_eq!(m.scenarios.len(), 120);
    for scheme in ["ungrounded", "solid", "impedance"] {
        let train: Vec<f64> = m.scenarios_for(scheme, Split::Train).map(|s| s.distance_km).collect();
        let test: Vec<f64> = m.scenarios_for(scheme, Split::Test).map(|s| s.distance_km).collect();
        assert_eq!(train.len(), 34);
        assert_eq!((train[0], train[33]), (5.0, 170.0));
        assert_eq!(test, vec![175.0, 180.0, 185.0, 190.0, 195.0, 200.0]);
    }
    assert_eq!((m.normalization.x_min, m.normalization.x_max), (5.0, 200.0));
    assert!(tmp.path().join("images/impedance_35.pgm").is_file());
    assert_eq!(m.config_hash, cfg.hash());

    let data = Dataset::open(tmp.path()).unwrap();
    assert_eq!(data.features(ReductionMode::Block(8)).unwrap().len(), 120);
    assert_eq!(data.features(ReductionMode::PerColumn).unwrap()[0].len(), 584);
    assert!(data.features(ReductionMode::Global).is_err());
    let img = data.image(&m.scenarios[7]).unwrap();
    assert_eq!((img.height, img.width), (339, 292));

    // Same config again: same hash, same bytes.
    let again = tempfile::tempdir().unwrap();
    pipeline::generate(&cfg, again.path(), GenerateOptions::default()).unwrap();
    assert_eq!(tree(tmp.path()), tree(again.path()));
}

#[test]
fn distances_beyond_the_line_are_rejected_with_the_scenario() {
    let mut cfg = PipelineConfig::default();
    cfg.system.line.length_km = 100.0;
    let tmp = tempfile::tempdir().unwrap();
    let err = pipeline::generate(&cfg, tmp.path(), GenerateOptions::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("distance exceeds line length"), "{msg}");
    assert!(msg.contains(" km"), "{msg}");
}

#[test]
fn debug_locus_files_are_optional() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.scenarios.schemes = vec!["solid".into()];
    pipeline::generate(&cfg, tmp.path(), GenerateOptions { debug_locus: true }).unwrap();
    let csv = fs::read_to_string(tmp.path().join("loci/solid_100.csv")).unwrap();
    assert!(csv.starts_with("t,r,x\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn full_runs_are_byte_identical() {
    let cfg = small_config();
    let run = |dir: &Path| {
        let data = dir.join("data");
        let models = dir.join("models");
        pipeline::generate(&cfg, &data, GenerateOptions::default()).unwrap();
        pipeline::compare_cmd(&cfg, &data, 3, Denominator::Span, &models).unwrap();
        pipeline::report_cmd(&data, &models, Denominator::Span, &dir.join("report.md")).unwrap();
        tree(dir)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ta = run(a.path());
    assert!(ta.contains_key("models/solid_traincgb_percolumn.json"));
    assert!(ta.contains_key("models/impedance_svr_block8.eval.md"));
    assert!(ta.contains_key("models/comparison.md"));
    assert_eq!(ta, run(b.path()));
}

#[test]
fn test_rows_never_reach_training() {
    let cfg = small_config();
    let tmp = tempfile::tempdir().unwrap();
    pipeline::generate(&cfg, tmp.path(), GenerateOptions::default()).unwrap();
    let data = Dataset::open(tmp.path()).unwrap();
    let split = data.split("solid", ReductionMode::Block(8)).unwrap();
    assert!(split.train_rows.iter().all(|r| !split.test_rows.contains(r)));
    assert_eq!(split.test_km, vec![180.0, 200.0]);

    let before = train_ann(&cfg, &data, "solid", Algorithm::Lm, None, 5).unwrap();
    let svr_before = pipeline::train_svr_baseline(&cfg, &data, "solid", None, 5).unwrap();
    // Standardization statistics come from training rows alone.
    for (j, m) in before.standardizer.mean.iter().enumerate() {
        let want = split.train_x.iter().map(|r| r[j]).sum::<f64>() / split.train_x.len() as f64;
        assert!((m - want).abs() < 1e-15);
    }

    // Corrupt every test row on disk; training must not notice.
    let path = tmp.path().join("features_block8.csv");
    let text = fs::read_to_string(&path).unwrap();
    let corrupted: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let is_test = i > 0 && split.test_rows.contains(&(i - 1));
            if is_test {
                let cells: Vec<&str> = line.split(',').collect();
                let mut out = cells[..2].join(",");
                for _ in 2..cells.len() {
                    out.push_str(",0.5");
                }
                out
            } else {
                line.to_string()
            }
        })
        .collect();
    fs::write(&path, corrupted.join("\n") + "\n").unwrap();
    let data = Dataset::open(tmp.path()).unwrap();
    assert_eq!(train_ann(&cfg, &data, "solid", Algorithm::Lm, None, 5).unwrap(), before);
    assert_eq!(pipeline::train_svr_baseline(&cfg, &data, "solid", None, 5).unwrap(), svr_before);
}

#[test]
fn evaluation_refuses_foreign_models_and_scores_a_perfect_stub() {
    let cfg = small_config();
    let tmp = tempfile::tempdir().unwrap();
    pipeline::generate(&cfg, tmp.path(), GenerateOptions::default()).unwrap();
    let data = Dataset::open(tmp.path()).unwrap();
    let mut model = train_ann(&cfg, &data, "impedance", Algorithm::Cgb, Some(ReductionMode::Block(8)), 1).unwrap();
    let report = evaluate(&data, &model, Denominator::Span).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.denominator_km, 180.0);
    assert_eq!(report.scatter.len(), 10);
    assert_eq!(evaluate(&data, &model, Denominator::LineLength).unwrap().denominator_km, 200.0);

    let path = tmp.path().join("m.json");
    model.save(&path).unwrap();
    assert_eq!(ModelFile::load(&path).unwrap(), model);

    model.config_hash = "0".repeat(64);
    let err = evaluate(&data, &model, Denominator::Span).unwrap_err();
    assert!(err.to_string().contains("config hash mismatch"));

    // A lookup table over the test rows: a sharp kernel makes every test
    // row its own basis function.
    let split = data.split("impedance", ReductionMode::Block(8)).unwrap();
    let mut stub = train_ann(&cfg, &data, "impedance", Algorithm::Cgb, Some(ReductionMode::Block(8)), 1).unwrap();
    let st = stub.standardizer.clone();
    stub.predictor = Predictor::Svr {
        model: SvrModel {
            support_vectors: split.test_x.iter().map(|r| st.transform(r).unwrap()).collect(),
            coefficients: split.test_km.iter().map(|d| stub.normalization.apply(*d)).collect(),
            bias: 0.0,
            gamma: 1e6,
            c: 1.0,
            epsilon: 0.0,
            objective: 0.0,
            iterations: 0,
        },
        grid: vec![],
        best: 0,
    };
    let perfect = evaluate(&data, &stub, Denominator::Span).unwrap();
    assert!(perfect.rows.iter().all(|r| r.percent_error < 1e-9));
    assert!(perfect.mse_normalized < 1e-20);
}

#[test]
fn trainer_pairings_follow_the_memory_contract() {
    let cfg = PipelineConfig::default();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("data");
    pipeline::generate(&cfg, &dir, GenerateOptions::default()).unwrap();
    let out = tmp.path().join("models");

    let err = pipeline::train_cmd(&cfg, &dir, "solid", Some(Algorithm::Lm), Some(ReductionMode::PerColumn), 1, &out)
        .unwrap_err();
    assert!(err.to_string().contains("Levenberg-Marquardt supports at most"));

    for (scheme, algorithm) in [("solid", Algorithm::Lm), ("ungrounded", Algorithm::Cgb)] {
        let (m, path) =
            pipeline::train_cmd(&cfg, &dir, scheme, Some(algorithm), Some(ReductionMode::Block(8)), 1, &out).unwrap();
        let Predictor::Ann { log, .. } = &m.predictor else {
            panic!("expected a network")
        };
        assert_eq!(log.stop, StopReason::Goal, "{scheme}");
        assert!(log.final_mse <= cfg.training.goal_mse);
        assert!(log.epochs.len() <= 1000);
        assert!(path.is_file());
    }

    let mut other = cfg.clone();
    other.training.seed = 99;
    assert!(pipeline::train_cmd(&other, &dir, "solid", None, None, 1, &out).is_err());
    assert!(pipeline::train_cmd(&cfg, &dir, "resonant", None, None, 1, &out).is_err());
}
