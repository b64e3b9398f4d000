//! The N-qubit teleportation protocol, simulated gate by gate.
//!
//! A run uses a 3N-qubit register: qubits `1..=N` carry the input state,
//! `N+1..=2N` are Alice's ancillas and `2N+1..=3N` are Bob's. The ancillas
//! are entangled pairwise into the generalized Bell state
//! `2^{-N/2} Σ_j |j j⟩`, Alice applies CNOT `m → N+m` and then H on her input
//! qubits, and measures qubits `1..=2N`. For outcome `a_1…a_{2N}` Bob holds
//! `(⊗ X^{a_{N+m}})(⊗ Z^{a_m})|ψ⟩` and undoes it exactly.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitchain::BitChain;
use crate::error::{Error, Result};
use crate::gates::{
    apply_cnot, apply_gate, apply_pauli_correction, apply_pauli_correction_inverse, hadamard_layer,
    Gate2x2, PauliCorrection,
};
use crate::statevector::{check_capacity, MeasurementOutcome, StateVector, DRIFT_TOLERANCE};

/// Full record of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleportTrace {
    pub n: u32,
    pub input_state: StateVector,
    /// Ancilla register after entanglement (2N qubits).
    pub bell_state: StateVector,
    /// 3N-qubit register right before Alice measures.
    pub pre_measurement_state: StateVector,
    pub outcome: MeasurementOutcome,
    pub correction: PauliCorrection,
    pub bob_pre_correction: StateVector,
    pub bob_post_correction: StateVector,
    pub fidelity_to_input: f64,
}

#[derive(Serialize)]
struct TraceStates<'a> {
    input: &'a StateVector,
    bell: &'a StateVector,
    pre_measurement: &'a StateVector,
    bob_pre_correction: &'a StateVector,
    bob_post_correction: &'a StateVector,
}

#[derive(Serialize)]
struct TraceJson<'a> {
    n: u32,
    outcome: &'a BitChain,
    probability: f64,
    fidelity: f64,
    states: TraceStates<'a>,
}

impl Serialize for TeleportTrace {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        TraceJson {
            n: self.n,
            outcome: &self.outcome.bits,
            probability: self.outcome.probability,
            fidelity: self.fidelity_to_input,
            states: TraceStates {
                input: &self.input_state,
                bell: &self.bell_state,
                pre_measurement: &self.pre_measurement_state,
                bob_pre_correction: &self.bob_pre_correction,
                bob_post_correction: &self.bob_post_correction,
            },
        }
        .serialize(serializer)
    }
}

impl TeleportTrace {
    /// Compact JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("trace serialization is infallible");
        s.push('\n');
        s
    }
}

fn checked(stage: &str, state: StateVector) -> Result<StateVector> {
    state
        .check_normalized(DRIFT_TOLERANCE)
        .map_err(|e| match e {
            Error::Unnormalized { norm_sqr } => Error::InvalidState(format!(
                "normalization drift after {stage}: squared norm {norm_sqr}"
            )),
            other => other,
        })?;
    Ok(state)
}

fn check_register(state: &StateVector, n: u32) -> Result<()> {
    if n == 0 || state.n_qubits() != 3 * n {
        return Err(Error::InvalidState(format!(
            "expected a {}-qubit register for N = {n}, got {} qubits",
            3 * n,
            state.n_qubits()
        )));
    }
    Ok(())
}

/// Builds `2^{-n/2} Σ_j |j_n j_n⟩` from |0_{2n}⟩: H on qubits `1..=n`, then
/// CNOT `m → n+m`.
pub fn prepare_generalized_bell(n: u32) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidState("N must be at least 1".into()));
    }
    check_capacity(2 * n)?;
    let mut s = hadamard_layer(&StateVector::zero(2 * n)?, 1..=n as usize)?;
    for m in 1..=n as usize {
        s = apply_cnot(&s, m, n as usize + m)?;
    }
    checked("Bell preparation", s)
}

/// CNOT from each input qubit `m` onto Alice's ancilla `n+m`.
pub fn alice_cnot_layer(state: &StateVector, n: u32) -> Result<StateVector> {
    check_register(state, n)?;
    let mut s = state.clone();
    for m in 1..=n as usize {
        s = apply_cnot(&s, m, n as usize + m)?;
    }
    checked("Alice's CNOT layer", s)
}

/// H on each input qubit `1..=n`.
pub fn alice_hadamard_layer(state: &StateVector, n: u32) -> Result<StateVector> {
    check_register(state, n)?;
    checked(
        "Alice's Hadamard layer",
        hadamard_layer(state, 1..=n as usize)?,
    )
}

/// Bob's predicted (uncorrected) state for a 2N-bit outcome:
/// `X^{a_{N+1..2N}} Z^{a_{1..N}} ψ`.
pub fn branch_state(outcome: &BitChain, psi: &StateVector) -> Result<StateVector> {
    if outcome.width() != 2 * psi.n_qubits() {
        return Err(Error::WidthMismatch {
            left: outcome.width(),
            right: 2 * psi.n_qubits(),
        });
    }
    apply_pauli_correction(psi, &PauliCorrection::from_outcome(outcome)?, 1)
}

fn alice_qubits(n: u32) -> Vec<usize> {
    (1..=2 * n as usize).collect()
}

/// Everything up to Alice's measurement.
fn prepare(psi: &StateVector) -> Result<(u32, StateVector, StateVector)> {
    let n = psi.n_qubits();
    check_capacity(3 * n)?;
    psi.check_normalized(DRIFT_TOLERANCE)?;
    let bell = prepare_generalized_bell(n)?;
    let register = checked("register assembly", psi.tensor(&bell)?)?;
    let after_cnot = alice_cnot_layer(&register, n)?;
    let pre = alice_hadamard_layer(&after_cnot, n)?;
    Ok((n, bell, pre))
}

fn finish(
    psi: &StateVector,
    n: u32,
    bell: StateVector,
    pre: StateVector,
    outcome: MeasurementOutcome,
    collapsed: StateVector,
) -> Result<TeleportTrace> {
    let bob_pre = collapsed.remaining_after(&alice_qubits(n), &outcome.bits)?;
    let correction = PauliCorrection::from_outcome(&outcome.bits)?;
    let bob_post = checked(
        "Bob's correction",
        apply_pauli_correction_inverse(&bob_pre, &correction, 1)?,
    )?;
    let fidelity = bob_post.fidelity(psi)?;
    Ok(TeleportTrace {
        n,
        input_state: psi.clone(),
        bell_state: bell,
        pre_measurement_state: pre,
        outcome,
        correction,
        bob_pre_correction: bob_pre,
        bob_post_correction: bob_post,
        fidelity_to_input: fidelity,
    })
}

/// Teleports `psi`, drawing Alice's outcome from a ChaCha8 generator seeded
/// with `seed`.
pub fn teleport(psi: &StateVector, seed: u64) -> Result<TeleportTrace> {
    let (n, bell, pre) = prepare(psi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (outcome, collapsed) = pre.measure_subset(&alice_qubits(n), &mut rng)?;
    finish(psi, n, bell, pre, outcome, collapsed)
}

/// Teleports `psi` with Alice's outcome fixed to `outcome` (2N bits). The
/// trace reports that outcome's Born probability.
pub fn teleport_forced(psi: &StateVector, outcome: &BitChain) -> Result<TeleportTrace> {
    if outcome.width() != 2 * psi.n_qubits() {
        return Err(Error::WidthMismatch {
            left: outcome.width(),
            right: 2 * psi.n_qubits(),
        });
    }
    let (n, bell, pre) = prepare(psi)?;
    let (outcome, collapsed) = pre.project(&alice_qubits(n), outcome)?;
    finish(psi, n, bell, pre, outcome, collapsed)
}

/// One line of a gate schedule. Qubit indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    H(usize),
    X(usize),
    Z(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Computational-basis measurement of `first..=last`.
    Measure {
        first: usize,
        last: usize,
    },
    /// Classically controlled Pauli correction on `first..=last`.
    Correct {
        first: usize,
        last: usize,
    },
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::H(q) => write!(f, "H q{q}"),
            Op::X(q) => write!(f, "X q{q}"),
            Op::Z(q) => write!(f, "Z q{q}"),
            Op::Cnot { control, target } => write!(f, "CNOT q{control} q{target}"),
            Op::Measure { first, last } => write!(f, "M q{first}..q{last}"),
            Op::Correct { first, last } => {
                let n = last + 1 - first;
                write!(
                    f,
                    "# correct q{first}..q{last}: Z^a[1..{n}] X^a[{}..{}]",
                    n + 1,
                    2 * n
                )
            }
        }
    }
}

fn parse_qubit(token: &str) -> Result<usize> {
    token
        .strip_prefix('q')
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&q| q >= 1)
        .ok_or_else(|| Error::Parse(format!("bad qubit token {token:?}")))
}

fn parse_range(token: &str) -> Result<(usize, usize)> {
    let (a, b) = token
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("bad qubit range {token:?}")))?;
    let (first, last) = (parse_qubit(a)?, parse_qubit(b)?);
    if first > last {
        return Err(Error::Parse(format!("empty qubit range {token:?}")));
    }
    Ok((first, last))
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# correct ") {
            let range = rest.split(':').next().unwrap_or_default();
            let (first, last) = parse_range(range.trim())?;
            return Ok(Op::Correct { first, last });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["H", q] => Ok(Op::H(parse_qubit(q)?)),
            ["X", q] => Ok(Op::X(parse_qubit(q)?)),
            ["Z", q] => Ok(Op::Z(parse_qubit(q)?)),
            ["CNOT", c, t] => Ok(Op::Cnot {
                control: parse_qubit(c)?,
                target: parse_qubit(t)?,
            }),
            ["M", r] => {
                let (first, last) = parse_range(r)?;
                Ok(Op::Measure { first, last })
            }
            _ => Err(Error::Parse(format!("unrecognized schedule line {line:?}"))),
        }
    }
}

/// Ordered gate list for the teleportation circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub ops: Vec<Op>,
}

impl Schedule {
    /// One operation per line, newline-terminated.
    pub fn to_text(&self) -> String {
        self.ops.iter().map(|op| format!("{op}\n")).collect()
    }

    /// Parses [`Schedule::to_text`] output. Blank lines and comments other
    /// than the correction marker are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let ops = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && (!l.starts_with('#') || l.starts_with("# correct ")))
            .map(str::parse)
            .collect::<Result<Vec<Op>>>()?;
        Ok(Self { ops })
    }

    /// Number of unitary gate lines (H, X, Z, CNOT).
    pub fn gate_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Op::H(_) | Op::X(_) | Op::Z(_) | Op::Cnot { .. }))
            .count()
    }

    /// Applies every unitary gate to `state` in order; measurement and
    /// correction markers are skipped.
    pub fn apply_gates(&self, state: &StateVector) -> Result<StateVector> {
        let mut s = state.clone();
        for op in &self.ops {
            s = match *op {
                Op::H(q) => apply_gate(&s, &Gate2x2::hadamard(), q)?,
                Op::X(q) => apply_gate(&s, &Gate2x2::pauli_x(), q)?,
                Op::Z(q) => apply_gate(&s, &Gate2x2::pauli_z(), q)?,
                Op::Cnot { control, target } => apply_cnot(&s, control, target)?,
                Op::Measure { .. } | Op::Correct { .. } => continue,
            };
        }
        Ok(s)
    }

    /// Runs the unitary part on `psi ⊗ |0_{2N}⟩`, yielding the state Alice
    /// measures.
    pub fn replay(&self, psi: &StateVector) -> Result<StateVector> {
        let n = psi.n_qubits();
        check_capacity(3 * n)?;
        self.apply_gates(&psi.tensor(&StateVector::zero(2 * n)?)?)
    }
}

/// The 3N-qubit teleportation circuit.
pub fn circuit_schedule(n: u32) -> Result<Schedule> {
    if n == 0 {
        return Err(Error::InvalidState("N must be at least 1".into()));
    }
    let n = n as usize;
    let mut ops = Vec::with_capacity(4 * n + 2);
    ops.extend((n + 1..=2 * n).map(Op::H));
    ops.extend((1..=n).map(|m| Op::Cnot {
        control: n + m,
        target: 2 * n + m,
    }));
    ops.extend((1..=n).map(|m| Op::Cnot {
        control: m,
        target: n + m,
    }));
    ops.extend((1..=n).map(Op::H));
    ops.push(Op::Measure {
        first: 1,
        last: 2 * n,
    });
    ops.push(Op::Correct {
        first: 2 * n + 1,
        last: 3 * n,
    });
    Ok(Schedule { ops })
}
