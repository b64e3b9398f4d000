//! Single-qubit gates, CNOT, and Pauli-frame corrections applied to dense
//! state vectors, plus the closed-form Hadamard transform used as an oracle.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::RangeInclusive;

use crate::bitchain::{delta_sign, BitChain};
use crate::error::{Error, Result};
use crate::statevector::StateVector;
use crate::Amplitude;

const UNITARY_TOLERANCE: f64 = 1e-12;

/// A 2×2 unitary, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate2x2 {
    m: [[Amplitude; 2]; 2],
}

fn re(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

impl Gate2x2 {
    /// Checks `M·M† = I` within 1e-12 per entry.
    pub fn new(m: [[Amplitude; 2]; 2]) -> Result<Self> {
        for r in 0..2 {
            for c in 0..2 {
                let entry: Amplitude = (0..2).map(|k| m[r][k] * m[c][k].conj()).sum();
                let expected = if r == c { re(1.0) } else { re(0.0) };
                if (entry - expected).norm() > UNITARY_TOLERANCE {
                    return Err(Error::InvalidState(format!(
                        "matrix is not unitary: (MM†)[{r}][{c}] = {entry}"
                    )));
                }
            }
        }
        Ok(Self { m })
    }

    pub fn hadamard() -> Self {
        let h = re(FRAC_1_SQRT_2);
        Self {
            m: [[h, h], [h, -h]],
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            m: [[re(0.0), re(1.0)], [re(1.0), re(0.0)]],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            m: [[re(1.0), re(0.0)], [re(0.0), re(-1.0)]],
        }
    }

    pub fn identity() -> Self {
        Self {
            m: [[re(1.0), re(0.0)], [re(0.0), re(1.0)]],
        }
    }

    pub fn matrix(&self) -> &[[Amplitude; 2]; 2] {
        &self.m
    }

    fn act(&self, a0: Amplitude, a1: Amplitude) -> (Amplitude, Amplitude) {
        (
            self.m[0][0] * a0 + self.m[0][1] * a1,
            self.m[1][0] * a0 + self.m[1][1] * a1,
        )
    }
}

fn check_qubit(state: &StateVector, q: usize) -> Result<()> {
    if q == 0 || q > state.n_qubits() as usize {
        return Err(Error::QubitOutOfRange {
            index: q,
            n_qubits: state.n_qubits(),
        });
    }
    Ok(())
}

fn bit_mask(state: &StateVector, q: usize) -> usize {
    1usize << (state.n_qubits() as usize - q)
}

/// Applies `gate` to qubit `target` (1-based), identity elsewhere.
pub fn apply_gate(state: &StateVector, gate: &Gate2x2, target: usize) -> Result<StateVector> {
    check_qubit(state, target)?;
    let mask = bit_mask(state, target);
    let mut out = state.amplitudes().to_vec();
    for low in 0..out.len() {
        if low & mask != 0 {
            continue;
        }
        let high = low | mask;
        let (a0, a1) = gate.act(out[low], out[high]);
        out[low] = a0;
        out[high] = a1;
    }
    Ok(StateVector::from_unitary_image(state.n_qubits(), out))
}

/// Flips `target` on every basis state where `control` is 1.
pub fn apply_cnot(state: &StateVector, control: usize, target: usize) -> Result<StateVector> {
    check_qubit(state, control)?;
    check_qubit(state, target)?;
    if control == target {
        return Err(Error::InvalidQubits(format!(
            "CNOT control and target are both qubit {control}"
        )));
    }
    let (cmask, tmask) = (bit_mask(state, control), bit_mask(state, target));
    let src = state.amplitudes();
    let out = (0..src.len())
        .map(|b| {
            if b & cmask != 0 {
                src[b ^ tmask]
            } else {
                src[b]
            }
        })
        .collect();
    Ok(StateVector::from_unitary_image(state.n_qubits(), out))
}

/// H on every qubit of `qubits`.
pub fn hadamard_layer(state: &StateVector, qubits: RangeInclusive<usize>) -> Result<StateVector> {
    let h = Gate2x2::hadamard();
    let mut s = state.clone();
    for q in qubits {
        s = apply_gate(&s, &h, q)?;
    }
    Ok(s)
}

/// `H^{⊗n}|i⟩` built directly from the sign rule
/// `amplitude(k) = (-1)^δ(i, k) / √(2^n)`, with no matrix application.
pub fn hadamard_closed_form(i: &BitChain) -> Result<StateVector> {
    let n = i.width();
    crate::statevector::check_capacity(n)?;
    let scale = (-(n as f64) / 2.0).exp2();
    let amplitudes = BitChain::all(n)
        .map(|k| delta_sign(i, &k).map(|s| re(s * scale)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateVector::from_unitary_image(n, amplitudes))
}

/// The Pauli frame `(⊗_m X^{x_m})(⊗_m Z^{z_m})` on n consecutive qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliCorrection {
    x_exponents: BitChain,
    z_exponents: BitChain,
}

impl PauliCorrection {
    pub fn new(x_exponents: BitChain, z_exponents: BitChain) -> Result<Self> {
        if x_exponents.width() != z_exponents.width() {
            return Err(Error::WidthMismatch {
                left: x_exponents.width(),
                right: z_exponents.width(),
            });
        }
        Ok(Self {
            x_exponents,
            z_exponents,
        })
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::new(BitChain::zeros(n)?, BitChain::zeros(n)?)
    }

    /// Splits a 2N-bit measurement record `a_1…a_{2N}`: the first half are
    /// the Z exponents, the second half the X exponents.
    pub fn from_outcome(outcome: &BitChain) -> Result<Self> {
        let w = outcome.width();
        if !w.is_multiple_of(2) {
            return Err(Error::InvalidChain(format!(
                "outcome width {w} is not even"
            )));
        }
        let n = w / 2;
        Self::new(outcome.slice(n + 1, n)?, outcome.slice(1, n)?)
    }

    pub fn n(&self) -> u32 {
        self.x_exponents.width()
    }

    pub fn x_exponents(&self) -> &BitChain {
        &self.x_exponents
    }

    pub fn z_exponents(&self) -> &BitChain {
        &self.z_exponents
    }

    fn check_range(&self, state: &StateVector, base: usize) -> Result<()> {
        let last = base + self.n() as usize - 1;
        check_qubit(state, base)?;
        check_qubit(state, last)
    }

    fn apply_factors(
        &self,
        state: &StateVector,
        base: usize,
        exponents: &BitChain,
        gate: &Gate2x2,
    ) -> Result<StateVector> {
        let mut s = state.clone();
        for m in 1..=self.n() {
            if exponents.bit(m) {
                s = apply_gate(&s, gate, base + m as usize - 1)?;
            }
        }
        Ok(s)
    }
}

/// Applies the operator `X^x · Z^z` to qubits `base..base+n-1`: every Z
/// factor acts first, then every X factor.
pub fn apply_pauli_correction(
    state: &StateVector,
    corr: &PauliCorrection,
    base: usize,
) -> Result<StateVector> {
    corr.check_range(state, base)?;
    let s = corr.apply_factors(state, base, &corr.z_exponents, &Gate2x2::pauli_z())?;
    corr.apply_factors(&s, base, &corr.x_exponents, &Gate2x2::pauli_x())
}

/// Exact inverse of [`apply_pauli_correction`]: X factors first, then Z.
pub fn apply_pauli_correction_inverse(
    state: &StateVector,
    corr: &PauliCorrection,
    base: usize,
) -> Result<StateVector> {
    corr.check_range(state, base)?;
    let s = corr.apply_factors(state, base, &corr.x_exponents, &Gate2x2::pauli_x())?;
    corr.apply_factors(&s, base, &corr.z_exponents, &Gate2x2::pauli_z())
}
