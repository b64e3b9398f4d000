//! Dense normalized state vectors over n qubits.
//!
//! Amplitudes are indexed by the big-endian value of the basis label: qubit 1
//! is the most-significant bit of the index. Qubit indices in this API are
//! 1-based, matching ket notation.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bitchain::BitChain;
use crate::error::{Error, Result};
use crate::Amplitude;

/// Default register capacity: 2^21 amplitudes, 32 MiB.
pub const DEFAULT_MAX_QUBITS: u32 = 21;
/// Capacity can be raised through the environment, but never past this.
pub const HARD_MAX_QUBITS: u32 = 30;
/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "QTELEPORT_MAX_QUBITS";

/// Tolerance for "normalized" in checks and tests.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Drift beyond this after a pipeline stage is reported as an error.
pub const DRIFT_TOLERANCE: f64 = 1e-8;

/// Register capacity in qubits, read once from [`MAX_QUBITS_ENV`].
///
/// Unparsable or out-of-range values fall back to the default.
pub fn max_qubits() -> u32 {
    static MAX: OnceLock<u32> = OnceLock::new();
    *MAX.get_or_init(|| {
        std::env::var(MAX_QUBITS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&v| (1..=HARD_MAX_QUBITS).contains(&v))
            .unwrap_or(DEFAULT_MAX_QUBITS)
    })
}

pub(crate) fn check_capacity(requested: u32) -> Result<()> {
    let max = max_qubits();
    if requested > max {
        return Err(Error::Capacity { requested, max });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: u32,
    amplitudes: Vec<Amplitude>,
}

/// Result of measuring a subset of qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    /// Measured bits, in the order the qubits were listed.
    pub bits: BitChain,
    /// Born probability of `bits` in the state before measurement.
    pub probability: f64,
}

fn norm_sqr(amplitudes: &[Amplitude]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

fn qubits_for_len(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "amplitude count {len} is not a power of two >= 2"
        )));
    }
    Ok(len.trailing_zeros())
}

impl StateVector {
    /// Wraps `amplitudes`, which must have length `2^n` (n ≥ 1), be finite and
    /// be normalized within [`DRIFT_TOLERANCE`].
    pub fn new(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        check_capacity(n_qubits)?;
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        state.check_normalized(DRIFT_TOLERANCE)?;
        Ok(state)
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Amplitude>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalize, norm {n}")));
        }
        for a in &mut amplitudes {
            *a /= n;
        }
        Self::new(amplitudes)
    }

    /// Construction for operations that are unitary by construction.
    pub(crate) fn from_unitary_image(n_qubits: u32, amplitudes: Vec<Amplitude>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1usize << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// The computational basis state |label⟩.
    pub fn basis_state(label: &BitChain) -> Result<Self> {
        let n = label.width();
        check_capacity(n)?;
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); 1usize << n];
        amplitudes[label.value() as usize] = Amplitude::new(1.0, 0.0);
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// |0_n⟩.
    pub fn zero(n_qubits: u32) -> Result<Self> {
        Self::basis_state(&BitChain::zeros(n_qubits)?)
    }

    /// Random state: `2^{n+1}` independent standard normals (real part then
    /// imaginary part for each index in ascending order), normalized.
    pub fn random<R: Rng + ?Sized>(n_qubits: u32, rng: &mut R) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidState("zero qubits".into()));
        }
        check_capacity(n_qubits)?;
        let amplitudes = (0..1usize << n_qubits)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Amplitude::new(re, im)
            })
            .collect();
        Self::normalized(amplitudes)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn amplitude(&self, label: &BitChain) -> Result<Amplitude> {
        if label.width() != self.n_qubits {
            return Err(Error::WidthMismatch {
                left: label.width(),
                right: self.n_qubits,
            });
        }
        Ok(self.amplitudes[label.value() as usize])
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn check_normalized(&self, tolerance: f64) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > tolerance {
            return Err(Error::Unnormalized { norm_sqr: n });
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + other.n_qubits;
        check_capacity(n)?;
        let mut amplitudes = Vec::with_capacity(1usize << n);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self::from_unitary_image(n, amplitudes))
    }

    fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    /// ⟨self|other⟩ = Σ conj(self_i)·other_i.
    pub fn inner_product(&self, other: &StateVector) -> Result<Amplitude> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|², clamped into [0, 1].
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Largest per-amplitude absolute difference. No phase alignment.
    pub fn max_abs_deviation(&self, other: &StateVector) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(max_abs_deviation(&self.amplitudes, &other.amplitudes))
    }

    fn validate_qubits(&self, qubits: &[usize]) -> Result<()> {
        if qubits.is_empty() {
            return Err(Error::InvalidQubits("empty qubit list".into()));
        }
        for (pos, &q) in qubits.iter().enumerate() {
            if q == 0 || q > self.n_qubits as usize {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
            if qubits[..pos].contains(&q) {
                return Err(Error::InvalidQubits(format!("qubit {q} listed twice")));
            }
        }
        Ok(())
    }

    /// Outcome value read off basis `index` for the listed qubits.
    fn outcome_of(&self, index: usize, qubits: &[usize]) -> usize {
        let n = self.n_qubits as usize;
        qubits
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((index >> (n - q)) & 1))
    }

    /// Born probabilities of every outcome on `qubits`, indexed by the
    /// outcome's value (bits in the listed qubit order).
    pub fn probabilities_of_subset(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.validate_qubits(qubits)?;
        let mut probs = vec![0.0; 1usize << qubits.len()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            probs[self.outcome_of(index, qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Projects onto `outcome` for `qubits` and renormalizes.
    pub fn project(
        &self,
        qubits: &[usize],
        outcome: &BitChain,
    ) -> Result<(MeasurementOutcome, StateVector)> {
        self.validate_qubits(qubits)?;
        if outcome.width() as usize != qubits.len() {
            return Err(Error::WidthMismatch {
                left: outcome.width(),
                right: qubits.len() as u32,
            });
        }
        let target = outcome.value() as usize;
        let probability: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.outcome_of(*i, qubits) == target)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if probability <= f64::MIN_POSITIVE {
            return Err(Error::ZeroProbability);
        }
        let scale = probability.sqrt().recip();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if self.outcome_of(i, qubits) == target {
                    a * scale
                } else {
                    Amplitude::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((
            MeasurementOutcome {
                bits: *outcome,
                probability,
            },
            Self::from_unitary_image(self.n_qubits, amplitudes),
        ))
    }

    /// Measures `qubits` in the computational basis.
    ///
    /// The outcome is chosen by inverting the cumulative distribution over
    /// outcomes in ascending order with one uniform draw from `rng`. The
    /// returned state keeps all qubits; measured ones are left in their
    /// observed basis values.
    pub fn measure_subset<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<(MeasurementOutcome, StateVector)> {
        let probs = self.probabilities_of_subset(qubits)?;
        let total: f64 = probs.iter().sum();
        if total <= f64::MIN_POSITIVE {
            return Err(Error::ZeroProbability);
        }
        let draw = rng.random::<f64>() * total;
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (value, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            chosen = Some(value);
            cumulative += p;
            if draw < cumulative {
                break;
            }
        }
        let value = chosen.ok_or(Error::ZeroProbability)?;
        let bits = BitChain::new(qubits.len() as u32, value as u64)?;
        self.project(qubits, &bits)
    }

    /// State of the qubits not in `measured`, given that `measured` already
    /// hold `outcome` with certainty. Remaining qubits keep ascending order.
    pub fn remaining_after(&self, measured: &[usize], outcome: &BitChain) -> Result<StateVector> {
        self.validate_qubits(measured)?;
        if outcome.width() as usize != measured.len() {
            return Err(Error::WidthMismatch {
                left: outcome.width(),
                right: measured.len() as u32,
            });
        }
        let rest: Vec<usize> = (1..=self.n_qubits as usize)
            .filter(|q| !measured.contains(q))
            .collect();
        if rest.is_empty() {
            return Err(Error::InvalidQubits("no qubits remain".into()));
        }
        let n = self.n_qubits as usize;
        let mut base = 0usize;
        for (pos, &q) in measured.iter().enumerate() {
            if outcome.bit(pos as u32 + 1) {
                base |= 1 << (n - q);
            }
        }
        let amplitudes: Vec<Amplitude> = (0..1usize << rest.len())
            .map(|r| {
                let mut index = base;
                for (pos, &q) in rest.iter().enumerate() {
                    if (r >> (rest.len() - 1 - pos)) & 1 == 1 {
                        index |= 1 << (n - q);
                    }
                }
                self.amplitudes[index]
            })
            .collect();
        let state = Self::from_unitary_image(rest.len() as u32, amplitudes);
        state.check_normalized(DRIFT_TOLERANCE)?;
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Largest per-element absolute difference between two amplitude slices.
///
/// Panics on length mismatch.
pub fn max_abs_deviation(a: &[Amplitude], b: &[Amplitude]) -> f64 {
    assert_eq!(a.len(), b.len(), "amplitude slices differ in length");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Wire form `{ "n_qubits": n, "amplitudes": [[re, im], ...] }`.
///
/// Unlike [`StateVector`] this is not validated, so callers can inspect or
/// renormalize slightly-off inputs before building a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub n_qubits: u32,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateRecord {
    pub fn amplitudes(&self) -> Vec<Amplitude> {
        self.amplitudes
            .iter()
            .map(|&[re, im]| Amplitude::new(re, im))
            .collect()
    }

    /// Checks that the amplitude count agrees with `n_qubits`.
    pub fn check_shape(&self) -> Result<()> {
        let expected = 1usize.checked_shl(self.n_qubits).unwrap_or(0);
        if self.n_qubits == 0 || self.amplitudes.len() != expected {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for {} qubits",
                self.amplitudes.len(),
                self.n_qubits
            )));
        }
        Ok(())
    }
}

impl From<&StateVector> for StateRecord {
    fn from(s: &StateVector) -> Self {
        Self {
            n_qubits: s.n_qubits,
            amplitudes: s.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateRecord> for StateVector {
    type Error = Error;

    fn try_from(record: StateRecord) -> Result<Self> {
        record.check_shape()?;
        StateVector::new(record.amplitudes())
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        StateRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let record = StateRecord::deserialize(deserializer)?;
        StateVector::try_from(record).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    fn bc(s: &str) -> BitChain {
        s.parse().unwrap()
    }

    #[test]
    fn basis_states() {
        let z = StateVector::basis_state(&bc("00")).unwrap();
        assert_eq!(z.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let s = StateVector::basis_state(&bc("11")).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let s = StateVector::basis_state(&bc("10")).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(StateVector::new(vec![c(1.0), c(0.0), c(0.0)]).is_err());
        assert!(StateVector::new(vec![c(1.0)]).is_err());
        assert!(matches!(
            StateVector::new(vec![c(1.0), c(1.0)]),
            Err(Error::Unnormalized { .. })
        ));
        assert!(StateVector::new(vec![c(f64::NAN), c(0.0)]).is_err());
        assert!(StateVector::normalized(vec![c(0.0), c(0.0)]).is_err());
    }

    #[test]
    fn tensor_of_zero_states() {
        let z = StateVector::zero(1).unwrap();
        assert_eq!(z.tensor(&z).unwrap(), StateVector::zero(2).unwrap());
    }

    #[test]
    fn tensor_with_bell_pair_gives_four_terms() {
        // (α|0⟩+β|1⟩)(|00⟩+|11⟩)/√2
        let (alpha, beta) = (Amplitude::new(0.6, 0.0), Amplitude::new(0.0, 0.8));
        let psi = StateVector::new(vec![alpha, beta]).unwrap();
        let bell =
            StateVector::new(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
        let s = psi.tensor(&bell).unwrap();
        let h = FRAC_1_SQRT_2;
        let expected = [
            alpha * h,
            c(0.0),
            c(0.0),
            alpha * h,
            beta * h,
            c(0.0),
            c(0.0),
            beta * h,
        ];
        assert!(max_abs_deviation(s.amplitudes(), &expected) < 1e-15);
    }

    #[test]
    fn tensor_respects_capacity() {
        let big = StateVector::zero(max_qubits()).unwrap();
        let one = StateVector::zero(1).unwrap();
        assert!(matches!(big.tensor(&one), Err(Error::Capacity { .. })));
        assert!(StateVector::zero(max_qubits() + 1).is_err());
    }

    #[test]
    fn inner_products() {
        let a = StateVector::basis_state(&bc("00")).unwrap();
        let b = StateVector::basis_state(&bc("11")).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0));
        // H|0⟩ = (|0⟩+|1⟩)/√2, ⟨0|H|0⟩ = 1/√2
        let zero = StateVector::zero(1).unwrap();
        let plus = StateVector::new(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        assert!((zero.inner_product(&plus).unwrap() - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(matches!(
            a.inner_product(&zero),
            Err(Error::DimensionMismatch { left: 2, right: 1 })
        ));
        assert!(a.fidelity(&zero).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::random(3, &mut rng).unwrap();
        assert!((psi.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        let phase = Amplitude::from_polar(1.0, 0.7);
        let rotated =
            StateVector::new(psi.amplitudes().iter().map(|a| a * phase).collect()).unwrap();
        assert!((psi.fidelity(&rotated).unwrap() - 1.0).abs() < 1e-12);
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis_state(&bc("1")).unwrap();
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);
    }

    #[test]
    fn measuring_bell_pair() {
        let h = FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let probs = bell.probabilities_of_subset(&[1, 2]).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[3] - 0.5).abs() < 1e-15);
        assert_eq!(probs[1] + probs[2], 0.0);
        let mut seen = [false; 4];
        for seed in 0..64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (outcome, post) = bell.measure_subset(&[1, 2], &mut rng).unwrap();
            let v = outcome.bits.value() as usize;
            assert!(v == 0 || v == 3);
            assert!((outcome.probability - 0.5).abs() < 1e-15);
            assert_eq!(post, StateVector::basis_state(&outcome.bits).unwrap());
            seen[v] = true;
        }
        assert!(seen[0] && seen[3]);
    }

    #[test]
    fn measuring_basis_state_is_certain() {
        let s = StateVector::basis_state(&bc("101")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (outcome, post) = s.measure_subset(&[3, 1], &mut rng).unwrap();
        assert_eq!(outcome.bits, bc("11"));
        assert_eq!(outcome.probability, 1.0);
        assert_eq!(post, s);
        let probs = StateVector::zero(4)
            .unwrap()
            .probabilities_of_subset(&[1, 2, 3, 4])
            .unwrap();
        assert_eq!(probs[0], 1.0);
    }

    #[test]
    fn measurement_rejects_bad_qubits() {
        let s = StateVector::zero(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            s.measure_subset(&[1, 1], &mut rng),
            Err(Error::InvalidQubits(_))
        ));
        assert!(matches!(
            s.measure_subset(&[0], &mut rng),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(s.probabilities_of_subset(&[4]).is_err());
        assert!(s.probabilities_of_subset(&[]).is_err());
    }

    #[test]
    fn measuring_unnormalized_zero_state_fails() {
        let s = StateVector::from_unitary_image(1, vec![c(0.0), c(0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            s.measure_subset(&[1], &mut rng).unwrap_err(),
            Error::ZeroProbability
        );
        assert_eq!(
            s.project(&[1], &bc("0")).unwrap_err(),
            Error::ZeroProbability
        );
    }

    #[test]
    fn remaining_after_extracts_unmeasured_qubits() {
        // |1⟩ ⊗ (0.6|0⟩ + 0.8|1⟩) ⊗ |0⟩, measure qubits 1 and 3
        let mid = StateVector::new(vec![c(0.6), c(0.8)]).unwrap();
        let s = StateVector::basis_state(&bc("1"))
            .unwrap()
            .tensor(&mid)
            .unwrap()
            .tensor(&StateVector::zero(1).unwrap())
            .unwrap();
        let rest = s.remaining_after(&[1, 3], &bc("10")).unwrap();
        assert_eq!(rest, mid);
        assert!(s.remaining_after(&[1, 3], &bc("00")).is_err());
    }

    #[test]
    fn json_format() {
        let s = StateVector::new(vec![c(0.6), Amplitude::new(0.0, -0.8)]).unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"n_qubits":1,"amplitudes":[[0.6,0.0],[0.0,-0.8]]}"#
        );
        assert!(
            StateVector::from_json(r#"{"n_qubits":2,"amplitudes":[[1.0,0.0],[0.0,0.0]]}"#).is_err()
        );
        assert!(
            StateVector::from_json(r#"{"n_qubits":1,"amplitudes":[[1.0,0.0],[1.0,0.0]]}"#).is_err()
        );
    }

    proptest! {
        #[test]
        fn json_round_trips_exactly(seed in any::<u64>(), n in 1u32..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = StateVector::random(n, &mut rng).unwrap();
            prop_assert_eq!(StateVector::from_json(&s.to_json()).unwrap(), s);
        }

        #[test]
        fn tensor_preserves_norm(seed in any::<u64>(), n in 1u32..=4, m in 1u32..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = StateVector::random(n, &mut rng).unwrap();
            let b = StateVector::random(m, &mut rng).unwrap();
            let t = a.tensor(&b).unwrap();
            prop_assert_eq!(t.n_qubits(), n + m);
            prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }

        #[test]
        fn subset_probabilities_sum_to_one(seed in any::<u64>(), n in 1u32..=6, pick in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = StateVector::random(n, &mut rng).unwrap();
            let qubits: Vec<usize> = (1..=n as usize).filter(|q| pick >> q & 1 == 1).collect();
            prop_assume!(!qubits.is_empty());
            let total: f64 = s.probabilities_of_subset(&qubits).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < NORM_TOLERANCE);
        }

        #[test]
        fn collapse_is_idempotent(seed in any::<u64>(), n in 2u32..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = StateVector::random(n, &mut rng).unwrap();
            let qubits = [n as usize, 1];
            let (first, post) = s.measure_subset(&qubits, &mut rng).unwrap();
            prop_assert!((post.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            let (second, again) = post.measure_subset(&qubits, &mut rng).unwrap();
            prop_assert_eq!(first.bits, second.bits);
            prop_assert!((second.probability - 1.0).abs() < NORM_TOLERANCE);
            prop_assert!(again.max_abs_deviation(&post).unwrap() < 1e-12);
        }
    }
}
