mod common;

use faultloc::gridsim::{prefault_state, sequence_thevenin, solve_slg, FaultSpec, GroundingScheme, SystemModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scheme(rng: &mut ChaCha8Rng) -> GroundingScheme {
    match rng.gen_range(0..3) {
        0 => GroundingScheme::Ungrounded,
        1 => GroundingScheme::Solid,
        _ => GroundingScheme::Impedance {
            rn_ohm: rng.gen_range(1.0..50.0),
        },
    }
}

#[test]
fn slg_matches_nodal_admittance_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let scheme = random_scheme(&mut rng);
        let model = SystemModel::reference(scheme).unwrap();
        let fault = FaultSpec::at(rng.gen_range(1.0..199.0), rng.gen_range(0.1..30.0));
        let got = solve_slg(&model, &fault).unwrap();
        let want = common::nodal_solve(&model, Some(&fault));
        let (dv, di) = common::relative_deviation(&got, &want);
        assert!(dv < 1e-6 && di < 1e-6, "{scheme:?} {fault:?}: dv {dv:e} di {di:e}");
    }
}

#[test]
fn prefault_matches_nodal_solve() {
    for scheme in GroundingScheme::all(5.0) {
        let model = SystemModel::reference(scheme).unwrap();
        let (dv, di) = common::relative_deviation(&prefault_state(&model).unwrap(), &common::nodal_solve(&model, None));
        assert!(dv < 1e-9 && di < 1e-9);
    }
}

#[test]
fn positive_sequence_thevenin_is_two_paths_in_parallel() {
    let model = SystemModel::reference(GroundingScheme::Solid).unwrap();
    for d in [10.0, 75.0, 150.0] {
        let th = sequence_thevenin(&model, d).unwrap();
        let zl = model.local.z1_src + model.line.z1_per_km * d;
        let zr = model.remote.unwrap().z1_src + model.line.z1_per_km * (200.0 - d);
        let want = zl * zr / (zl + zr);
        assert!((th.z1 - want).norm() < 1e-9 * want.norm());
        assert!((th.d1 - zr / (zl + zr)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn slg_agrees_with_oracle_everywhere(d in 0.5..199.5f64, rf in 0.05..100.0f64, rn in 0.5..40.0f64, k in 0usize..3) {
        let scheme = GroundingScheme::all(rn)[k];
        let model = SystemModel::reference(scheme).unwrap();
        let fault = FaultSpec::at(d, rf);
        let (dv, di) = common::relative_deviation(&solve_slg(&model, &fault).unwrap(), &common::nodal_solve(&model, Some(&fault)));
        prop_assert!(dv < 1e-6 && di < 1e-6);
    }
}
