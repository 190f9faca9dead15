//! Phase-domain reference solutions shared by the integration tests.
#![allow(dead_code)]

use faultloc::gridsim::{FaultSpec, SystemModel, TerminalState};
use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

type C = Complex64;

fn fortescue() -> (Matrix3<C>, Matrix3<C>) {
    let a = C::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let one = C::new(1.0, 0.0);
    let m = Matrix3::new(one, one, one, one, a * a, a, one, a, a * a);
    let inv = Matrix3::new(one, one, one, one, a, a * a, one, a * a, a) / C::new(3.0, 0.0);
    (m, inv)
}

/// Phase admittance matrix of a branch with sequence admittances
/// `(y0, y1, y2)`.
fn phase_admittance(y0: C, y1: C, y2: C) -> Matrix3<C> {
    let (a, ainv) = fortescue();
    a * Matrix3::from_diagonal(&nalgebra::Vector3::new(y0, y1, y2)) * ainv
}

fn stamp_series(y: &mut DMatrix<C>, from: usize, to: usize, b: &Matrix3<C>) {
    for i in 0..3 {
        for j in 0..3 {
            y[(from + i, from + j)] += b[(i, j)];
            y[(to + i, to + j)] += b[(i, j)];
            y[(from + i, to + j)] -= b[(i, j)];
            y[(to + i, from + j)] -= b[(i, j)];
        }
    }
}

fn stamp_shunt(y: &mut DMatrix<C>, at: usize, b: &Matrix3<C>) {
    for i in 0..3 {
        for j in 0..3 {
            y[(at + i, at + j)] += b[(i, j)];
        }
    }
}

/// Relay-end voltages and the relay-to-fault current from a 9-node nodal
/// solve (local bus, fault point, remote bus). `fault = None` gives the
/// pre-fault state with the fault point at mid-line.
pub fn nodal_solve(model: &SystemModel, fault: Option<&FaultSpec>) -> TerminalState {
    const R: usize = 0;
    const F: usize = 3;
    const S: usize = 6;
    let zero = C::new(0.0, 0.0);
    let line = &model.line;
    let d = fault.map_or(line.length_km / 2.0, |f| f.distance_km);
    let mut y = DMatrix::from_element(9, 9, zero);
    let mut inj = DVector::from_element(9, zero);

    let (a, _) = fortescue();
    let mut source = |at: usize, src: &faultloc::gridsim::SourceParams, y: &mut DMatrix<C>| {
        let y0 = src
            .grounding
            .zero_sequence_neutral()
            .map_or(zero, |zn| (src.z0_src + zn).inv());
        let ys = phase_admittance(y0, src.z1_src.inv(), src.z1_src.inv());
        stamp_shunt(y, at, &ys);
        let e = a * nalgebra::Vector3::new(zero, src.emf, zero);
        let i = ys * e;
        for k in 0..3 {
            inj[at + k] += i[k];
        }
    };
    source(R, &model.local, &mut y);
    if let Some(remote) = &model.remote {
        source(S, remote, &mut y);
    }

    let section = |len: f64| phase_admittance((line.z0_per_km * len).inv(), (line.z1_per_km * len).inv(), (line.z1_per_km * len).inv());
    let near = section(d);
    stamp_series(&mut y, R, F, &near);
    stamp_series(&mut y, F, S, &section(line.length_km - d));
    let half_c0 = C::new(0.0, model.omega() * line.c0_per_km * line.length_km / 2.0);
    let shunt = phase_admittance(half_c0, zero, zero);
    stamp_shunt(&mut y, R, &shunt);
    stamp_shunt(&mut y, S, &shunt);
    if let Some(f) = fault {
        y[(F, F)] += C::new(1.0 / f.rf_ohm, 0.0);
    }

    let v = y.lu().solve(&inj).expect("nodal matrix is non-singular");
    let vr = nalgebra::Vector3::new(v[R], v[R + 1], v[R + 2]);
    let vf = nalgebra::Vector3::new(v[F], v[F + 1], v[F + 2]);
    let i = near * (vr - vf);
    TerminalState::new([vr[0], vr[1], vr[2]], [i[0], i[1], i[2]])
}

/// Largest phasor deviation relative to the largest magnitude in `want`.
pub fn relative_deviation(got: &TerminalState, want: &TerminalState) -> (f64, f64) {
    let rel = |g: [C; 3], w: [C; 3]| {
        let scale = w.iter().map(|p| p.norm()).fold(0.0, f64::max);
        g.iter().zip(&w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
    };
    (
        rel(got.voltages(), want.voltages()),
        rel(got.currents(), want.currents()),
    )
}
