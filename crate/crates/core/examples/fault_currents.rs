//! Fault current and healthy-phase voltages for each grounding scheme.

use faultloc::gridsim::{prefault_state, solve_slg_detailed, FaultSpec, GroundingScheme, SystemModel};

fn main() -> faultloc::Result<()> {
    for scheme in GroundingScheme::all(5.0) {
        let model = SystemModel::reference(scheme)?;
        let pre = prefault_state(&model)?.va.norm();
        println!("{}", scheme.label());
        for d in [20.0, 100.0, 180.0] {
            let sol = solve_slg_detailed(&model, &FaultSpec::at(d, 1.0))?;
            println!(
                "  {d:>5} km  |If| {:>10.1} A   |Vb|/|Va,pre| {:.3}   |Vc|/|Va,pre| {:.3}",
                sol.fault_current().norm(),
                sol.during.vb.norm() / pre,
                sol.during.vc.norm() / pre,
            );
        }
    }
    Ok(())
}
