//! Relay-side signal processing: waveform synthesis, sliding full-cycle DFT
//! phasor estimation and the zero-sequence compensated phase-A ground-loop
//! impedance locus.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gridsim::{FaultSpec, SequenceLineParams, TerminalState};
use crate::symmetrical::Phasor;
use crate::{Error, Result};

/// Default relay sample rate: 64 samples per 50 Hz cycle.
pub const DEFAULT_FS: f64 = 3200.0;

/// Instantaneous three-phase voltages and currents at the relay.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub fs: f64,
    pub f0: f64,
    /// Time of the first sample, s.
    pub t0: f64,
    pub va: Vec<f64>,
    pub vb: Vec<f64>,
    pub vc: Vec<f64>,
    pub ia: Vec<f64>,
    pub ib: Vec<f64>,
    pub ic: Vec<f64>,
}

impl SampleRecord {
    pub fn len(&self) -> usize {
        self.va.len()
    }

    pub fn is_empty(&self) -> bool {
        self.va.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.fs
    }

    /// Samples per fundamental cycle.
    pub fn cycle_len(&self) -> Result<usize> {
        samples_per_cycle(self.f0, self.fs)
    }
}

/// `fs / f0` when it is a whole number.
pub fn samples_per_cycle(f0: f64, fs: f64) -> Result<usize> {
    if !(f0 > 0.0 && fs > 0.0) {
        return Err(Error::Signal("frequencies must be positive".into()));
    }
    let ratio = fs / f0;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio || n < 1.0 {
        return Err(Error::Signal(format!(
            "sample rate {fs} Hz is not an integer multiple of {f0} Hz"
        )));
    }
    Ok(n as usize)
}

/// Time constant of the decaying DC offset for a fault loop impedance.
///
/// Capacitive loops (ungrounded systems) fall back to `fallback`, the
/// positive-sequence source loop, since the DC path closes through the
/// inductive phase conductors.
pub fn dc_time_constant(loop_z: Complex64, fallback: Complex64, omega: f64) -> f64 {
    let tau = |z: Complex64| z.im / (omega * z.re);
    let primary = tau(loop_z);
    if primary.is_finite() && primary > 0.0 {
        primary
    } else {
        let t = tau(fallback);
        if t.is_finite() && t > 0.0 {
            t
        } else {
            0.0
        }
    }
}

fn sinusoid(p: Phasor, omega: f64, t: f64) -> f64 {
    p.norm() * (omega * t + p.arg()).cos()
}

/// Sample the pre-fault phasors up to `t_on` and the fault phasors for
/// `duration` afterwards, starting two cycles before inception.
///
/// With `dc_tau = Some(τ)` each current channel gets `A·e^{−(t−t_on)/τ}`
/// added during the fault, with `A` making the current continuous at
/// `t_on`.
pub fn synthesize_waveforms(
    pre: &TerminalState,
    during: &TerminalState,
    fault: &FaultSpec,
    f0: f64,
    fs: f64,
    dc_tau: Option<f64>,
) -> Result<SampleRecord> {
    let n_cycle = samples_per_cycle(f0, fs)?;
    if n_cycle < 16 {
        return Err(Error::Signal(format!(
            "sample rate {fs} Hz gives {n_cycle} samples per cycle, need at least 16"
        )));
    }
    if fault.duration < 1.0 / f0 {
        return Err(Error::Signal(format!(
            "fault duration {} s is shorter than one cycle",
            fault.duration
        )));
    }
    let omega = 2.0 * PI * f0;
    let lead = 2 * n_cycle;
    let n_fault = (fault.duration * fs).round() as usize;
    let total = lead + n_fault;
    let t0 = fault.t_on - lead as f64 / fs;

    let v_pre = pre.voltages();
    let i_pre = pre.currents();
    let v_dur = during.voltages();
    let i_dur = during.currents();
    let dc_amp: [f64; 3] = std::array::from_fn(|ph| match dc_tau {
        Some(tau) if tau > 0.0 => {
            sinusoid(i_pre[ph], omega, fault.t_on) - sinusoid(i_dur[ph], omega, fault.t_on)
        }
        _ => 0.0,
    });

    let mut v: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(total));
    let mut i: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(total));
    for k in 0..total {
        let t = t0 + k as f64 / fs;
        let faulted = k >= lead;
        for ph in 0..3 {
            if faulted {
                let decay = match dc_tau {
                    Some(tau) if tau > 0.0 => dc_amp[ph] * (-(t - fault.t_on) / tau).exp(),
                    _ => 0.0,
                };
                v[ph].push(sinusoid(v_dur[ph], omega, t));
                i[ph].push(sinusoid(i_dur[ph], omega, t) + decay);
            } else {
                v[ph].push(sinusoid(v_pre[ph], omega, t));
                i[ph].push(sinusoid(i_pre[ph], omega, t));
            }
        }
    }
    let [va, vb, vc] = v;
    let [ia, ib, ic] = i;
    Ok(SampleRecord {
        fs,
        f0,
        t0,
        va,
        vb,
        vc,
        ia,
        ib,
        ic,
    })
}

/// Fundamental-frequency phasor of exactly one cycle of samples, referenced
/// to the first sample of the window.
pub fn fullcycle_dft(window: &[f64], f0: f64, fs: f64) -> Result<Phasor> {
    let n = samples_per_cycle(f0, fs)?;
    if window.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: window.len(),
        });
    }
    Ok(dft_with_table(window, &twiddles(n)))
}

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect()
}

fn dft_with_table(window: &[f64], table: &[Complex64]) -> Phasor {
    let sum: Complex64 = window.iter().zip(table).map(|(x, w)| w * *x).sum();
    sum * (2.0 / window.len() as f64)
}

/// Zero-sequence compensation factor `(z0 − z1) / (3·z1)`.
pub fn k0_factor(z1: Complex64, z0: Complex64) -> Result<Complex64> {
    if z1.norm() == 0.0 {
        return Err(Error::Signal("k0 undefined for zero positive-sequence impedance".into()));
    }
    Ok((z0 - z1) / (3.0 * z1))
}

/// Phase-A ground-loop impedance `va / (ia + k0·3·i0)`.
pub fn apparent_impedance(
    va: Phasor,
    ia: Phasor,
    i0: Phasor,
    k0: Complex64,
    current_floor: f64,
) -> Result<Complex64> {
    let compensated = ia + k0 * 3.0 * i0;
    let magnitude = compensated.norm();
    if !(magnitude > current_floor) {
        return Err(Error::BelowCurrentFloor {
            magnitude,
            floor: current_floor,
        });
    }
    Ok(va / compensated)
}

/// One relay impedance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub r: f64,
    pub x: f64,
    /// Time of the last sample in the DFT window.
    pub t: f64,
}

/// Ordered trajectory of relay impedance estimates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImpedanceLocus {
    pub points: Vec<LocusPoint>,
    /// Windows skipped for falling under the current floor.
    pub dropped: usize,
}

impl ImpedanceLocus {
    pub fn first(&self) -> Option<&LocusPoint> {
        self.points.first()
    }

    pub fn last(&self) -> Option<&LocusPoint> {
        self.points.last()
    }

    /// `t,r,x` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r,x\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.t, p.r, p.x));
        }
        out
    }
}

/// Slide a one-cycle window one sample at a time over the record and emit
/// the compensated phase-A ground-loop impedance of every window whose
/// compensated current exceeds `current_floor`.
pub fn compute_locus(
    rec: &SampleRecord,
    line: &SequenceLineParams,
    current_floor: f64,
) -> Result<ImpedanceLocus> {
    let n = rec.cycle_len()?;
    let channels = [&rec.vb, &rec.vc, &rec.ia, &rec.ib, &rec.ic];
    if channels.iter().any(|c| c.len() != rec.va.len()) {
        return Err(Error::Signal("record channels differ in length".into()));
    }
    if rec.len() < 3 * n {
        return Err(Error::Signal(format!(
            "record holds {} samples, need at least three cycles ({})",
            rec.len(),
            3 * n
        )));
    }
    let k0 = k0_factor(line.z1_per_km, line.z0_per_km)?;
    let table = twiddles(n);
    let mut locus = ImpedanceLocus::default();
    for start in 0..=(rec.len() - n) {
        let end = start + n;
        let va = dft_with_table(&rec.va[start..end], &table);
        let ia = dft_with_table(&rec.ia[start..end], &table);
        let ib = dft_with_table(&rec.ib[start..end], &table);
        let ic = dft_with_table(&rec.ic[start..end], &table);
        let i0 = (ia + ib + ic) / 3.0;
        match apparent_impedance(va, ia, i0, k0, current_floor) {
            Ok(z) => locus.points.push(LocusPoint {
                r: z.re,
                x: z.im,
                t: rec.time(end - 1),
            }),
            Err(Error::BelowCurrentFloor { .. }) => locus.dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if locus.points.is_empty() {
        return Err(Error::Signal(
            "no window passed the current floor; locus is empty".into(),
        ));
    }
    Ok(locus)
}
