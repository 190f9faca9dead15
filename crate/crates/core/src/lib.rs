//! Image-based fault location for a two-source transmission line.
//!
//! The crate chains five stages, each usable on its own:
//!
//! 1. [`gridsim`] solves single-line-to-ground faults in the phasor domain
//!    with symmetrical components, for ungrounded, solidly grounded and
//!    resistance grounded transformer neutrals.
//! 2. [`relaydsp`] turns the pre-fault/fault phasors into sampled waveforms,
//!    runs a sliding full-cycle DFT and produces the zero-sequence
//!    compensated impedance locus a distance relay would plot.
//! 3. [`raster`] draws that locus on a fixed 339×292 R-X canvas.
//! 4. [`features`] reduces the canvas to mean/standard-deviation features.
//! 5. [`neuralnet`] and [`svr`] learn fault distance from those features.
//!
//! [`pipeline`] ties the stages together into dataset generation, training,
//! evaluation and report rendering, and backs the `faultloc` binary.

pub mod error;
pub mod features;
pub mod gridsim;
pub mod neuralnet;
pub mod pipeline;
pub mod raster;
pub mod relaydsp;
pub mod svr;
pub mod symmetrical;

pub use error::{Error, Result};
