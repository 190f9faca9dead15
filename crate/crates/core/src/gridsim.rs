//! Phasor-domain single-line-to-ground fault solver for a two-source line.
//!
//! The network is the relay bus R, the fault point F and the remote bus S.
//! Positive and negative sequence networks contain the source impedances and
//! the two line sections. The zero-sequence network additionally carries the
//! grounding path of each transformer neutral (`z0_src + 3·rn`, open when
//! ungrounded) and half of the line's zero-sequence shunt capacitance at each
//! line end. A phase-A-to-ground fault connects the three networks in series
//! through `3·rf`; the during-fault state is the pre-fault state plus the
//! superposed fault change.
//!
//! All phasors use the peak-amplitude convention.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::symmetrical::{balanced, to_phase, Phasor, SequenceSet};
use crate::{Error, Result};

/// Per-km sequence constants of the line and its length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceLineParams {
    /// Positive (= negative) sequence series impedance, Ω/km.
    pub z1_per_km: Complex64,
    /// Zero-sequence series impedance, Ω/km.
    pub z0_per_km: Complex64,
    /// Positive-sequence shunt capacitance, F/km. Carried for completeness;
    /// the positive/negative networks are modelled without shunt branches.
    pub c1_per_km: f64,
    /// Zero-sequence shunt capacitance, F/km.
    pub c0_per_km: f64,
    pub length_km: f64,
}

impl Default for SequenceLineParams {
    /// Representative 154 kV single-circuit overhead line, 200 km.
    fn default() -> Self {
        Self {
            z1_per_km: Complex64::new(0.05, 0.45),
            z0_per_km: Complex64::new(0.25, 1.35),
            c1_per_km: 9e-9,
            c0_per_km: 5.5e-9,
            length_km: 200.0,
        }
    }
}

impl SequenceLineParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.z1_per_km.re,
            self.z1_per_km.im,
            self.z0_per_km.re,
            self.z0_per_km.im,
            self.c1_per_km,
            self.c0_per_km,
            self.length_km,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Model("line constants must be finite".into()));
        }
        if self.length_km <= 0.0 {
            return Err(Error::Model(format!(
                "line length must be positive, got {} km",
                self.length_km
            )));
        }
        if self.z1_per_km.re < 0.0 || self.z0_per_km.re < 0.0 {
            return Err(Error::Model("series resistance must be non-negative".into()));
        }
        if self.z1_per_km.im <= 0.0 || self.z0_per_km.im <= 0.0 {
            return Err(Error::Model("series reactance must be positive".into()));
        }
        if self.c1_per_km < 0.0 || self.c0_per_km < 0.0 {
            return Err(Error::Model("shunt capacitance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Transformer neutral treatment on the high-voltage star winding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundingScheme {
    Ungrounded,
    Solid,
    Impedance { rn_ohm: f64 },
}

impl GroundingScheme {
    /// The three schemes compared throughout the crate, impedance grounding
    /// with the given neutral resistor.
    pub fn all(rn_ohm: f64) -> [GroundingScheme; 3] {
        [
            GroundingScheme::Ungrounded,
            GroundingScheme::Solid,
            GroundingScheme::Impedance { rn_ohm },
        ]
    }

    /// Short lowercase name used in file names and reports.
    pub fn label(&self) -> &'static str {
        match self {
            GroundingScheme::Ungrounded => "ungrounded",
            GroundingScheme::Solid => "solid",
            GroundingScheme::Impedance { .. } => "impedance",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GroundingScheme::Impedance { rn_ohm } if !(rn_ohm > 0.0 && rn_ohm.is_finite()) => Err(
                Error::Model(format!("neutral resistance must be positive, got {rn_ohm}")),
            ),
            _ => Ok(()),
        }
    }

    /// Series impedance the neutral adds to the zero-sequence path, `None`
    /// when the neutral is isolated.
    pub fn zero_sequence_neutral(&self) -> Option<Complex64> {
        match *self {
            GroundingScheme::Ungrounded => None,
            GroundingScheme::Solid => Some(Complex64::new(0.0, 0.0)),
            GroundingScheme::Impedance { rn_ohm } => Some(Complex64::new(3.0 * rn_ohm, 0.0)),
        }
    }
}

/// Generator plus step-up transformer seen from the 154 kV bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Phase-A internal EMF (peak), V.
    pub emf: Phasor,
    pub z1_src: Complex64,
    /// Zero-sequence impedance of the transformer path, excluding the
    /// neutral impedance.
    pub z0_src: Complex64,
    pub grounding: GroundingScheme,
}

impl SourceParams {
    /// Source with the given short-circuit level and X/R ratio at
    /// `nominal_kv`; the zero-sequence transformer impedance equals the
    /// positive-sequence one. The EMF is nominal phase voltage at 0°.
    pub fn from_short_circuit(
        nominal_kv: f64,
        short_circuit_mva: f64,
        x_over_r: f64,
        grounding: GroundingScheme,
    ) -> Self {
        let z_mag = (nominal_kv * 1e3).powi(2) / (short_circuit_mva * 1e6);
        let r = z_mag / (1.0 + x_over_r * x_over_r).sqrt();
        let z = Complex64::new(r, r * x_over_r);
        Self {
            emf: Complex64::new(nominal_phase_peak(nominal_kv), 0.0),
            z1_src: z,
            z0_src: z,
            grounding,
        }
    }

    /// Impedance from the bus to ground in the zero-sequence network through
    /// the transformer neutral, `None` when open.
    pub fn zero_sequence_ground_path(&self) -> Option<Complex64> {
        self.grounding
            .zero_sequence_neutral()
            .map(|zn| self.z0_src + zn)
    }

    fn validate(&self) -> Result<()> {
        self.grounding.validate()?;
        if !(self.emf.re.is_finite() && self.emf.im.is_finite()) || self.emf.norm() == 0.0 {
            return Err(Error::Model("source EMF must be finite and non-zero".into()));
        }
        Ok(())
    }
}

/// Peak phase-to-neutral voltage of a system with line-to-line RMS `kv`.
pub fn nominal_phase_peak(kv: f64) -> f64 {
    kv * 1e3 * (2.0f64 / 3.0).sqrt()
}

/// Two-source line: relay at the local bus, constant power transfer
/// `load_mw` towards the remote system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub line: SequenceLineParams,
    /// Source behind the relay bus.
    pub local: SourceParams,
    /// Source behind the remote bus; `None` for a radial feed.
    pub remote: Option<SourceParams>,
    pub load_mw: f64,
    /// Line-to-line RMS nominal voltage, kV.
    pub nominal_kv: f64,
    pub f0: f64,
}

impl SystemModel {
    /// The 154 kV, 50 Hz, 200 km reference system: 2000 MVA (X/R = 10)
    /// sources at both ends sharing `scheme`, 25 MW transfer.
    pub fn reference(scheme: GroundingScheme) -> Result<Self> {
        let nominal_kv = 154.0;
        let src = SourceParams::from_short_circuit(nominal_kv, 2000.0, 10.0, scheme);
        let model = SystemModel {
            line: SequenceLineParams::default(),
            local: src,
            remote: Some(src),
            load_mw: 25.0,
            nominal_kv,
            f0: 50.0,
        }
        .with_load_flow()?;
        model.validate()?;
        Ok(model)
    }

    /// Same model with both neutrals switched to `scheme`.
    pub fn with_grounding(mut self, scheme: GroundingScheme) -> Self {
        self.local.grounding = scheme;
        if let Some(remote) = self.remote.as_mut() {
            remote.grounding = scheme;
        }
        self
    }

    /// Set the source EMFs so that the relay bus sits at nominal voltage
    /// (0°) and `load_mw` flows from the local bus into the line at unity
    /// power factor. A radial model cannot carry a transfer and requires
    /// `load_mw = 0`.
    pub fn with_load_flow(mut self) -> Result<Self> {
        let v_relay = Complex64::new(self.nominal_phase_peak(), 0.0);
        let i_line = Complex64::new(self.nominal_load_current_peak(), 0.0);
        self.local.emf = v_relay + self.local.z1_src * i_line;
        match self.remote.as_mut() {
            Some(remote) => {
                let v_remote = v_relay - self.line.z1_per_km * self.line.length_km * i_line;
                remote.emf = v_remote - remote.z1_src * i_line;
            }
            None if self.load_mw > 0.0 => {
                return Err(Error::Model(
                    "a radial model has no remote system to absorb load".into(),
                ))
            }
            None => {}
        }
        Ok(self)
    }

    pub fn nominal_phase_peak(&self) -> f64 {
        nominal_phase_peak(self.nominal_kv)
    }

    /// Peak line current of the balanced `load_mw` transfer at nominal
    /// voltage and unity power factor.
    pub fn nominal_load_current_peak(&self) -> f64 {
        2.0 * self.load_mw * 1e6 / (3.0 * self.nominal_phase_peak())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f0
    }

    pub fn validate(&self) -> Result<()> {
        self.line.validate()?;
        self.local.validate()?;
        if let Some(remote) = &self.remote {
            remote.validate()?;
        }
        if !(self.load_mw >= 0.0 && self.load_mw.is_finite()) {
            return Err(Error::Model(format!("load must be non-negative, got {}", self.load_mw)));
        }
        if !(self.nominal_kv > 0.0 && self.f0 > 0.0) {
            return Err(Error::Model("nominal voltage and frequency must be positive".into()));
        }
        Ok(())
    }

    /// Zero-sequence shunt admittance lumped at each line end.
    fn half_shunt_admittance(&self) -> Complex64 {
        Complex64::new(
            0.0,
            self.omega() * self.line.c0_per_km * self.line.length_km / 2.0,
        )
    }
}

/// Location, resistance and timing of a phase-A-to-ground fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    /// Distance from the relay bus, km.
    pub distance_km: f64,
    pub rf_ohm: f64,
    /// Fault inception time, s.
    pub t_on: f64,
    pub duration: f64,
}

impl FaultSpec {
    pub fn at(distance_km: f64, rf_ohm: f64) -> Self {
        Self {
            distance_km,
            rf_ohm,
            t_on: 0.3,
            duration: 0.05,
        }
    }

    pub fn validate(&self, line: &SequenceLineParams) -> Result<()> {
        check_distance(self.distance_km, line)?;
        if !(self.rf_ohm >= 0.0 && self.rf_ohm.is_finite()) {
            return Err(Error::Fault(format!(
                "fault resistance must be non-negative, got {}",
                self.rf_ohm
            )));
        }
        if !(self.t_on.is_finite() && self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Fault("fault timing must be finite with positive duration".into()));
        }
        Ok(())
    }
}

fn check_distance(distance_km: f64, line: &SequenceLineParams) -> Result<()> {
    if !(distance_km > 0.0) {
        return Err(Error::Fault(format!(
            "fault distance must be positive, got {distance_km} km"
        )));
    }
    if distance_km > line.length_km {
        return Err(Error::Fault(format!(
            "distance exceeds line length: {distance_km} km > {} km",
            line.length_km
        )));
    }
    Ok(())
}

/// Voltages and currents measured at the relay bus. Currents are positive
/// flowing from the bus into the protected line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalState {
    pub va: Phasor,
    pub vb: Phasor,
    pub vc: Phasor,
    pub ia: Phasor,
    pub ib: Phasor,
    pub ic: Phasor,
    /// `(ia + ib + ic) / 3`.
    pub i0: Phasor,
}

impl TerminalState {
    pub fn new(v: [Phasor; 3], i: [Phasor; 3]) -> Self {
        Self {
            va: v[0],
            vb: v[1],
            vc: v[2],
            ia: i[0],
            ib: i[1],
            ic: i[2],
            i0: (i[0] + i[1] + i[2]) / 3.0,
        }
    }

    pub fn voltages(&self) -> [Phasor; 3] {
        [self.va, self.vb, self.vc]
    }

    pub fn currents(&self) -> [Phasor; 3] {
        [self.ia, self.ib, self.ic]
    }
}

/// Thevenin view of the sequence networks from the fault point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceThevenin {
    pub z1: Complex64,
    pub z2: Complex64,
    pub z0: Complex64,
    /// Share of the fault-point positive (and negative) sequence current
    /// supplied through the relay-side line section.
    pub d1: Complex64,
    /// Same share for the zero sequence.
    pub d0: Complex64,
}

/// Balanced pre-fault state at the relay bus.
pub fn prefault_state(model: &SystemModel) -> Result<TerminalState> {
    model.validate()?;
    let (va, ia) = prefault_phase_a(model)?;
    Ok(TerminalState::new(balanced(va), balanced(ia)))
}

fn prefault_phase_a(model: &SystemModel) -> Result<(Phasor, Phasor)> {
    let line_z = model.line.z1_per_km * model.line.length_km;
    let ia = match &model.remote {
        Some(remote) => {
            let total = model.local.z1_src + line_z + remote.z1_src;
            if total.norm() == 0.0 {
                return Err(Error::Model("zero total positive-sequence impedance".into()));
            }
            (model.local.emf - remote.emf) / total
        }
        None => Complex64::new(0.0, 0.0),
    };
    Ok((model.local.emf - model.local.z1_src * ia, ia))
}

/// Two-terminal branch that may be open.
fn parallel_split(left: Option<Complex64>, right: Option<Complex64>) -> Result<(Complex64, Complex64)> {
    match (left, right) {
        (Some(l), Some(r)) => {
            let sum = l + r;
            if sum.norm() == 0.0 {
                return Err(Error::Model("sequence network has a zero-impedance loop".into()));
            }
            Ok((l * r / sum, r / sum))
        }
        (Some(l), None) => Ok((l, Complex64::new(1.0, 0.0))),
        (None, Some(r)) => Ok((r, Complex64::new(0.0, 0.0))),
        (None, None) => Err(Error::ZeroSequenceSingular),
    }
}

/// Parallel combination of optional ground paths with a shunt admittance.
fn bus_ground_impedance(path: Option<Complex64>, shunt: Complex64) -> Option<Complex64> {
    let y = path.map(|z| z.inv()).unwrap_or_default() + shunt;
    (y.norm() > 0.0).then(|| y.inv())
}

/// Thevenin impedances and relay-branch current shares at `distance_km`.
pub fn sequence_thevenin(model: &SystemModel, distance_km: f64) -> Result<SequenceThevenin> {
    model.validate()?;
    check_distance(distance_km, &model.line)?;
    let line = &model.line;
    let rest_km = line.length_km - distance_km;

    let left1 = model.local.z1_src + line.z1_per_km * distance_km;
    let right1 = model.remote.map(|r| r.z1_src + line.z1_per_km * rest_km);
    let (z1, d1) = parallel_split(Some(left1), right1)
        .map_err(|_| Error::Model("positive-sequence network singular".into()))?;

    let shunt = model.half_shunt_admittance();
    let left0 = bus_ground_impedance(model.local.zero_sequence_ground_path(), shunt)
        .map(|z| z + line.z0_per_km * distance_km);
    let right0 = bus_ground_impedance(model.remote.and_then(|r| r.zero_sequence_ground_path()), shunt)
        .map(|z| z + line.z0_per_km * rest_km);
    let (z0, d0) = parallel_split(left0, right0)?;

    Ok(SequenceThevenin {
        z1,
        z2: z1,
        z0,
        d1,
        d0,
    })
}

/// Full fault solution: relay-bus state plus fault-point quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlgSolution {
    pub prefault: TerminalState,
    pub during: TerminalState,
    pub thevenin: SequenceThevenin,
    /// Pre-fault phase-A voltage at the fault point.
    pub prefault_fault_point: Phasor,
    /// Sequence current `I1 = I2 = I0` drawn at the fault point.
    pub sequence_current: Phasor,
    /// Loop impedance `Z1 + Z2 + Z0 + 3·rf`.
    pub loop_impedance: Complex64,
}

impl SlgSolution {
    /// Fault current to ground, `3·I0` at the fault point.
    pub fn fault_current(&self) -> Phasor {
        self.sequence_current * 3.0
    }
}

/// During-fault steady state at the relay bus for a phase-A-to-ground fault.
pub fn solve_slg(model: &SystemModel, fault: &FaultSpec) -> Result<TerminalState> {
    solve_slg_detailed(model, fault).map(|s| s.during)
}

pub fn solve_slg_detailed(model: &SystemModel, fault: &FaultSpec) -> Result<SlgSolution> {
    model.validate()?;
    fault.validate(&model.line)?;
    let th = sequence_thevenin(model, fault.distance_km)?;
    let (va_pre, ia_pre) = prefault_phase_a(model)?;
    let prefault = TerminalState::new(balanced(va_pre), balanced(ia_pre));

    let d = fault.distance_km;
    let v_fault_pre = va_pre - model.line.z1_per_km * d * ia_pre;
    let loop_z = th.z1 + th.z2 + th.z0 + 3.0 * fault.rf_ohm;
    if loop_z.norm() == 0.0 {
        return Err(Error::Model("fault loop impedance is zero".into()));
    }
    let i_seq = v_fault_pre / loop_z;

    // Changes at the relay end of the faulted section.
    let di = SequenceSet {
        zero: th.d0 * i_seq,
        pos: th.d1 * i_seq,
        neg: th.d1 * i_seq,
    };
    let dv = SequenceSet {
        zero: -th.z0 * i_seq + model.line.z0_per_km * d * di.zero,
        pos: -th.z1 * i_seq + model.line.z1_per_km * d * di.pos,
        neg: -th.z2 * i_seq + model.line.z1_per_km * d * di.neg,
    };
    let dv_abc = to_phase(dv);
    let di_abc = to_phase(di);
    let v = [
        prefault.va + dv_abc[0],
        prefault.vb + dv_abc[1],
        prefault.vc + dv_abc[2],
    ];
    let i = [
        prefault.ia + di_abc[0],
        prefault.ib + di_abc[1],
        prefault.ic + di_abc[2],
    ];
    let during = TerminalState::new(v, i);
    let all_finite = v
        .iter()
        .chain(i.iter())
        .all(|p| p.re.is_finite() && p.im.is_finite());
    if !all_finite {
        return Err(Error::Model("fault solution is not finite".into()));
    }
    Ok(SlgSolution {
        prefault,
        during,
        thevenin: th,
        prefault_fault_point: v_fault_pre,
        sequence_current: i_seq,
        loop_impedance: loop_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn radial() -> SystemModel {
        let mut m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        m.remote = None;
        m.load_mw = 0.0;
        m.with_load_flow().unwrap()
    }

    #[test]
    fn no_load_prefault_is_nominal_and_currentless() {
        let mut m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        m.load_mw = 0.0;
        let m = m.with_load_flow().unwrap();
        let s = prefault_state(&m).unwrap();
        for i in s.currents() {
            assert!(i.norm() < 1e-9);
        }
        assert!((s.va.norm() - m.nominal_phase_peak()).abs() < 1e-6);
    }

    #[test]
    fn prefault_load_current_matches_power() {
        let m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        let s = prefault_state(&m).unwrap();
        // P = √3 · V_LL · I_rms
        let i_rms = 25e6 / (3f64.sqrt() * 154e3);
        assert!((i_rms - 93.7).abs() < 0.05);
        assert!((s.ia.norm() / 2f64.sqrt() - i_rms).abs() < 1e-6 * i_rms);
        assert!(s.i0.norm() < 1e-9 * s.ia.norm());
        let a = crate::symmetrical::a_op();
        assert!((s.vb - s.va * a * a).norm() < 1e-6);
        assert!((s.vc - s.va * a).norm() < 1e-6);
    }

    #[test]
    fn radial_thevenin_is_series_path() {
        let m = radial();
        let th = sequence_thevenin(&m, 100.0).unwrap();
        let expected = m.local.z1_src + 100.0 * m.line.z1_per_km;
        assert!((th.z1 - expected).norm() < 1e-12);
        assert!((th.d1 - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_sources_split_evenly_at_midpoint() {
        let m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        let th = sequence_thevenin(&m, 100.0).unwrap();
        assert!((th.d1 - c(0.5, 0.0)).norm() < 1e-9);
        assert!((th.d0 - c(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn ungrounded_without_capacitance_is_singular() {
        let mut m = SystemModel::reference(GroundingScheme::Ungrounded).unwrap();
        m.line.c0_per_km = 0.0;
        assert!(matches!(
            sequence_thevenin(&m, 50.0),
            Err(Error::ZeroSequenceSingular)
        ));
    }

    #[test]
    fn distance_beyond_line_is_rejected() {
        let m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        assert!(sequence_thevenin(&m, 200.5).is_err());
        assert!(sequence_thevenin(&m, 0.0).is_err());
        assert!(solve_slg(&m, &FaultSpec::at(201.0, 1.0)).is_err());
        assert!(solve_slg(&m, &FaultSpec::at(20.0, -1.0)).is_err());
    }

    #[test]
    fn bolted_solid_fault_current_dwarfs_load() {
        let m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        let pre = prefault_state(&m).unwrap();
        let during = solve_slg(&m, &FaultSpec::at(100.0, 0.0)).unwrap();
        assert!(during.ia.norm() >= 5.0 * pre.ia.norm());
    }

    #[test]
    fn ungrounded_healthy_phases_rise_by_root_three() {
        let solid = SystemModel::reference(GroundingScheme::Solid).unwrap();
        let m = SystemModel::reference(GroundingScheme::Ungrounded).unwrap();
        let pre = prefault_state(&m).unwrap();
        let fault = FaultSpec::at(100.0, 1.0);
        let s = solve_slg_detailed(&m, &fault).unwrap();
        let solid_fault = solve_slg_detailed(&solid, &fault).unwrap().fault_current().norm();
        let target = 3f64.sqrt() * pre.va.norm();
        for v in [s.during.vb, s.during.vc] {
            assert!((v.norm() - target).abs() < 0.1 * target, "{} vs {}", v.norm(), target);
        }
        assert!((3.0 * s.during.i0).norm() < 0.05 * solid_fault);
    }

    #[test]
    fn fault_current_ordering_by_grounding() {
        for d in [5.0, 50.0, 100.0, 150.0, 200.0] {
            let fault = FaultSpec::at(d, 1.0);
            let current = |scheme| {
                let m = SystemModel::reference(scheme).unwrap();
                solve_slg(&m, &fault).unwrap().ia.norm()
            };
            let solid = current(GroundingScheme::Solid);
            let imp = current(GroundingScheme::Impedance { rn_ohm: 5.0 });
            let ung = current(GroundingScheme::Ungrounded);
            assert!(solid > imp && imp > ung, "d={d}: {solid} {imp} {ung}");
        }
    }

    #[test]
    fn solid_grounding_keeps_healthy_phases_near_prefault() {
        let m = SystemModel::reference(GroundingScheme::Solid).unwrap();
        let pre = prefault_state(&m).unwrap();
        for d in [5.0, 50.0, 100.0, 150.0, 200.0] {
            let s = solve_slg(&m, &FaultSpec::at(d, 1.0)).unwrap();
            for (v, v0) in [(s.vb, pre.vb), (s.vc, pre.vc)] {
                let ratio = v.norm() / v0.norm();
                assert!((ratio - 1.0).abs() < 0.05, "d={d} ratio={ratio}");
            }
        }
    }

    #[test]
    fn ungrounded_overvoltage_factor_in_band() {
        let m = SystemModel::reference(GroundingScheme::Ungrounded).unwrap();
        let pre = prefault_state(&m).unwrap();
        for d in [5.0, 50.0, 100.0, 150.0, 200.0] {
            let s = solve_slg(&m, &FaultSpec::at(d, 1.0)).unwrap();
            for v in [s.vb, s.vc] {
                let k = v.norm() / pre.va.norm();
                assert!((1.55..=1.9).contains(&k), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn zero_sequence_identity_holds() {
        let m = SystemModel::reference(GroundingScheme::Impedance { rn_ohm: 5.0 }).unwrap();
        let s = solve_slg(&m, &FaultSpec::at(70.0, 1.0)).unwrap();
        let i0 = (s.ia + s.ib + s.ic) / 3.0;
        assert!((i0 - s.i0).norm() <= 1e-9 * i0.norm());
    }

    #[test]
    fn invalid_neutral_resistance_rejected() {
        let m = SystemModel::reference(GroundingScheme::Impedance { rn_ohm: 0.0 });
        assert!(m.is_err());
    }
}
