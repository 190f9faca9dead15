//! Feature vectors of the rendered images under each reduction.

use faultloc::features::{reduce, ReductionMode};
use faultloc::gridsim::GroundingScheme;
use faultloc::pipeline::{render_scenario, PipelineConfig};
use faultloc::raster::normalize_pixels;

fn main() -> faultloc::Result<()> {
    let cfg = PipelineConfig::default();
    let modes = [ReductionMode::Global, ReductionMode::Block(8), ReductionMode::PerColumn];
    for d in [30.0, 100.0, 170.0] {
        let img = normalize_pixels(&render_scenario(&cfg, GroundingScheme::Solid, d)?.image);
        for mode in modes {
            let f = reduce(&img, mode);
            let n = f.values.len() / 2;
            let peak = f.values[..n].iter().cloned().fold(0.0, f64::max);
            println!("{d:>5} km  {:<10} {:>4} values, largest mean {peak:.4}", mode.to_string(), f.values.len());
        }
    }
    Ok(())
}
