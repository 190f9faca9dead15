//! Train the cascade-forward locator on synthetic faults with each trainer.

use faultloc::features::ReductionMode;
use faultloc::gridsim::GroundingScheme;
use faultloc::neuralnet::{
    check_memory_contract, train, Algorithm, Batch, CascadeNet, NormalizationSpec, Standardizer, Topology,
    TrainConfig, REFERENCE_HIDDEN,
};
use faultloc::pipeline::{render_scenario, PipelineConfig};
use faultloc::raster::normalize_pixels;

fn main() -> faultloc::Result<()> {
    let cfg = PipelineConfig::default();
    let spec = NormalizationSpec::new(5.0, 200.0)?;
    let mode = ReductionMode::Block(8);
    let distances: Vec<f64> = (1..=34).map(|k| 5.0 * k as f64).collect();
    let rows = distances
        .iter()
        .map(|&d| {
            let img = normalize_pixels(&render_scenario(&cfg, GroundingScheme::Solid, d)?.image);
            Ok(faultloc::features::reduce(&img, mode).values)
        })
        .collect::<faultloc::Result<Vec<_>>>()?;
    let st = Standardizer::fit(&rows)?;
    let x = rows.iter().map(|r| st.transform(r)).collect::<faultloc::Result<Vec<_>>>()?;
    let y: Vec<f64> = distances.iter().map(|d| spec.apply(*d)).collect();
    let batch = Batch::scalar(x, &y);

    let topo = Topology::cascade(batch.inputs[0].len(), &REFERENCE_HIDDEN);
    println!("{} weights", topo.param_count());
    for alg in [Algorithm::Lm, Algorithm::Cgb, Algorithm::Scg, Algorithm::Oss, Algorithm::Gdx] {
        check_memory_contract(alg, topo.param_count())?;
        let net = CascadeNet::init_weights(topo.clone(), 1)?;
        let (net, log) = train(&net, &batch, &TrainConfig::with_algorithm(alg))?;
        println!(
            "{:<9} {:>5} epochs  mse {:.2e}  {:?}  (130 km -> fitted {:.1} km)",
            alg.name(),
            log.epochs.len(),
            log.final_mse,
            log.stop,
            spec.invert(net.predict(&batch.inputs[25])?)
        );
    }
    Ok(())
}
