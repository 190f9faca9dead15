//! Render fault trajectories to PGM images.
//!
//! `cargo run --example render_locus -- out/images` writes one image per
//! scheme for a 90 km fault.

use std::path::PathBuf;

use faultloc::gridsim::GroundingScheme;
use faultloc::pipeline::{render_scenario, PipelineConfig};
use faultloc::raster::write_pgm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/images".into()));
    std::fs::create_dir_all(&dir)?;
    let cfg = PipelineConfig::default();
    for scheme in GroundingScheme::all(cfg.system.neutral_resistance_ohm) {
        let r = render_scenario(&cfg, scheme, 90.0)?;
        let path = dir.join(format!("{}_90.pgm", scheme.label()));
        write_pgm(&r.image, &path)?;
        println!("{}: {} lit pixels -> {}", scheme.label(), r.image.lit_pixels().len(), path.display());
    }
    Ok(())
}
