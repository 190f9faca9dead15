//! Apparent-impedance trajectory seen by the relay during a fault.

use faultloc::gridsim::{solve_slg_detailed, FaultSpec, GroundingScheme, SystemModel};
use faultloc::relaydsp::{compute_locus, dc_time_constant, synthesize_waveforms};

fn main() -> faultloc::Result<()> {
    let model = SystemModel::reference(GroundingScheme::Solid)?;
    let fault = FaultSpec::at(120.0, 1.0);
    let sol = solve_slg_detailed(&model, &fault)?;
    let tau = dc_time_constant(sol.loop_impedance, sol.thevenin.z1, model.omega());
    let rec = synthesize_waveforms(&sol.prefault, &sol.during, &fault, model.f0, 3200.0, Some(tau))?;
    let locus = compute_locus(&rec, &model.line, 0.01 * model.nominal_load_current_peak())?;

    let step = (locus.points.len() / 12).max(1);
    for p in locus.points.iter().step_by(step) {
        println!("t = {:.4} s   R = {:>9.2} Ω   X = {:>9.2} Ω", p.t, p.r, p.x);
    }
    let z = model.line.z1_per_km * fault.distance_km;
    println!("line impedance to the fault: {:.2} + j{:.2} Ω (τ = {:.1} ms)", z.re, z.im, tau * 1e3);
    Ok(())
}
