//! Fortescue transform between phase (a, b, c) and sequence (0, 1, 2)
//! quantities.

use num_complex::Complex64;

/// Complex phasor, peak-amplitude convention: `x(t) = Re(P · e^{jωt})`.
pub type Phasor = Complex64;

/// The rotation operator `a = 1∠120°`.
pub fn a_op() -> Complex64 {
    Complex64::new(-0.5, 3f64.sqrt() / 2.0)
}

/// Zero, positive and negative sequence components of a phase triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceSet {
    pub zero: Phasor,
    pub pos: Phasor,
    pub neg: Phasor,
}

/// Phase triple `[a, b, c]` to sequence components.
pub fn to_sequence(phases: [Phasor; 3]) -> SequenceSet {
    let a = a_op();
    let a2 = a * a;
    let [pa, pb, pc] = phases;
    SequenceSet {
        zero: (pa + pb + pc) / 3.0,
        pos: (pa + a * pb + a2 * pc) / 3.0,
        neg: (pa + a2 * pb + a * pc) / 3.0,
    }
}

/// Sequence components back to the phase triple `[a, b, c]`.
pub fn to_phase(seq: SequenceSet) -> [Phasor; 3] {
    let a = a_op();
    let a2 = a * a;
    [
        seq.zero + seq.pos + seq.neg,
        seq.zero + a2 * seq.pos + a * seq.neg,
        seq.zero + a * seq.pos + a2 * seq.neg,
    ]
}

/// Balanced positive-sequence set with phase A equal to `va`.
pub fn balanced(va: Phasor) -> [Phasor; 3] {
    let a = a_op();
    [va, va * a * a, va * a]
}
