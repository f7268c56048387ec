//! Per-key success probabilities of the explicit basis-measurement attacks,
//! plus a generic POVM telegraphing-attack evaluator with key-aware optimal
//! post-processing.
//!
//! Success probabilities are computed analytically from the measurement
//! distribution rather than by sampling outcomes, so the Haar average over
//! keys is the only Monte Carlo quantity anywhere in the pipeline.

use crate::error::{Error, Result};
use crate::formulas::majority_exact_value;
use crate::linalg::{conjugate, frobenius_distance, ComplexMatrix, UnitaryMatrix};
use crate::qecm::{sigma, HaarScheme};

/// Completeness tolerance for POVMs: `‖Σ_x P_x − I‖_F ≤ 1e-9`.
pub const POVM_COMPLETENESS_TOL: f64 = 1e-9;

/// A partition of the computational-basis outcomes `[d]`, assigning every
/// outcome to the message it most likely came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodingSets {
    assignment: Vec<usize>,
}

impl DecodingSets {
    pub fn dim(&self) -> usize {
        self.assignment.len()
    }

    pub fn message_for(&self, index: usize) -> usize {
        self.assignment[index]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn indices_for(&self, message: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m == message)
            .map(|(i, _)| i)
    }
}

/// The attack family evaluated per key.
#[derive(Clone, Debug)]
pub enum AttackKind {
    /// Single-copy computational-basis attack on a bit (n = 2).
    BitSingle,
    /// t independent basis measurements followed by majority vote (n = 2).
    BitMajority { t: usize },
    /// Single-copy argmax decoding over all n messages.
    MultiArgmax,
    /// Two-message distinguishing attack; ties favor `m0`.
    Distinguish { m0: usize, m1: usize },
    /// Arbitrary POVM with key-aware optimal post-processing over the listed
    /// candidate messages.
    GenericPovm {
        povm: Vec<ComplexMatrix>,
        messages: Vec<usize>,
    },
}

/// A fully-specified attack against a fixed scheme.
#[derive(Clone, Debug)]
pub struct AttackSpec {
    scheme: HaarScheme,
    kind: AttackKind,
}

impl AttackSpec {
    pub fn new(scheme: HaarScheme, kind: AttackKind) -> Result<Self> {
        match &kind {
            AttackKind::BitSingle | AttackKind::BitMajority { .. } => {
                if scheme.message_count() != 2 {
                    return Err(Error::UnsupportedAttack(format!(
                        "bit attacks need n = 2, scheme has n = {}",
                        scheme.message_count()
                    )));
                }
                if let AttackKind::BitMajority { t } = kind {
                    if t < 1 {
                        return Err(Error::InvalidParameter("majority needs t ≥ 1".into()));
                    }
                }
            }
            AttackKind::MultiArgmax => {}
            AttackKind::Distinguish { m0, m1 } => {
                scheme.check_message(*m0)?;
                scheme.check_message(*m1)?;
                if m0 == m1 {
                    return Err(Error::InvalidParameter(
                        "distinguishing attack needs two distinct messages".into(),
                    ));
                }
            }
            AttackKind::GenericPovm { povm, messages } => {
                check_povm(povm, scheme.dim())?;
                // full PSD validation once at construction; the per-key path
                // only re-checks completeness
                for (x, p) in povm.iter().enumerate() {
                    let min_eig = crate::linalg::hermitian_eigenvalues(p)[0];
                    if min_eig < -1e-9 {
                        return Err(Error::InvalidParameter(format!(
                            "POVM element {x} has eigenvalue {min_eig:.3e}"
                        )));
                    }
                }
                if messages.is_empty() {
                    return Err(Error::InvalidParameter(
                        "candidate message list must be nonempty".into(),
                    ));
                }
                for &m in messages {
                    scheme.check_message(m)?;
                }
            }
        }
        Ok(Self { scheme, kind })
    }

    pub fn scheme(&self) -> &HaarScheme {
        &self.scheme
    }

    pub fn kind(&self) -> &AttackKind {
        &self.kind
    }

    /// Short machine-readable attack name.
    pub fn label(&self) -> String {
        match &self.kind {
            AttackKind::BitSingle => "bit-single".into(),
            AttackKind::BitMajority { t } => format!("bit-majority(t={t})"),
            AttackKind::MultiArgmax => "multi-argmax".into(),
            AttackKind::Distinguish { m0, m1 } => format!("distinguish({m0},{m1})"),
            AttackKind::GenericPovm { povm, .. } => format!("generic-povm({} outcomes)", povm.len()),
        }
    }

    /// Success probability of the attack for one fixed key.
    pub fn per_key_value(&self, key: &UnitaryMatrix) -> Result<f64> {
        match &self.kind {
            AttackKind::BitSingle => single_copy_success(&self.scheme, key),
            AttackKind::BitMajority { t } => majority_success(&self.scheme, key, *t),
            AttackKind::MultiArgmax => single_copy_success(&self.scheme, key),
            AttackKind::Distinguish { m0, m1 } => distinguish_success(&self.scheme, key, *m0, *m1),
            AttackKind::GenericPovm { povm, messages } => {
                povm_attack_success(&self.scheme, key, povm, messages)
            }
        }
    }
}

fn check_povm(povm: &[ComplexMatrix], dim: usize) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::InvalidParameter("POVM must have outcomes".into()));
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for p in povm {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "POVM element is {}x{}, expected {dim}x{dim}",
                p.nrows(),
                p.ncols()
            )));
        }
        if !crate::linalg::is_hermitian(p, 1e-9) {
            return Err(Error::InvalidParameter("POVM element is not Hermitian".into()));
        }
        sum += p;
    }
    let defect = frobenius_distance(&sum, &ComplexMatrix::identity(dim, dim));
    if defect > POVM_COMPLETENESS_TOL {
        return Err(Error::InvalidParameter(format!(
            "POVM completeness defect {defect:.3e} exceeds {POVM_COMPLETENESS_TOL:.1e}"
        )));
    }
    Ok(())
}

/// Outcome weights `w[m][i] = ⟨i|U Π_m U†|i⟩ = Σ_{j ∈ block m} |U_{ij}|²`
/// for the listed messages.
fn block_weights(scheme: &HaarScheme, key: &UnitaryMatrix, messages: &[usize]) -> Vec<Vec<f64>> {
    let d = scheme.dim();
    let r = scheme.rank();
    let u = key.matrix();
    messages
        .iter()
        .map(|&m| {
            (0..d)
                .map(|i| (r * m..r * (m + 1)).map(|j| u[(i, j)].norm_sqr()).sum())
                .collect()
        })
        .collect()
}

/// Assigns every basis outcome to the message maximizing
/// `⟨i|U σ_m U†|i⟩` among `messages`; ties go to the smallest message index
/// (strict comparison against smaller indices, non-strict against larger).
pub fn build_decoding_sets(
    scheme: &HaarScheme,
    key: &UnitaryMatrix,
    messages: &[usize],
) -> Result<DecodingSets> {
    scheme.check_key(key)?;
    if messages.is_empty() {
        return Err(Error::InvalidParameter("message list must be nonempty".into()));
    }
    let mut sorted = messages.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != messages.len() {
        return Err(Error::InvalidParameter("messages must be distinct".into()));
    }
    for &m in &sorted {
        scheme.check_message(m)?;
    }
    let weights = block_weights(scheme, key, &sorted);
    let assignment = (0..scheme.dim())
        .map(|i| {
            let mut best = sorted[0];
            let mut best_w = weights[0][i];
            for (pos, &m) in sorted.iter().enumerate().skip(1) {
                if weights[pos][i] > best_w {
                    best_w = weights[pos][i];
                    best = m;
                }
            }
            best
        })
        .collect();
    Ok(DecodingSets { assignment })
}

/// Winning probability of the single-copy basis attack over all n messages:
/// `(1/d) Σ_i max_m ⟨i|U Π_m U†|i⟩`, equivalently the decoding-set sum
/// `(1/n) Σ_m Σ_{i ∈ G_m} ⟨i|U σ_m U†|i⟩`.
pub fn single_copy_success(scheme: &HaarScheme, key: &UnitaryMatrix) -> Result<f64> {
    scheme.check_key(key)?;
    let all: Vec<usize> = (0..scheme.message_count()).collect();
    let weights = block_weights(scheme, key, &all);
    let d = scheme.dim();
    let total: f64 = (0..d)
        .map(|i| weights.iter().map(|w| w[i]).fold(f64::NEG_INFINITY, f64::max))
        .sum();
    Ok(total / d as f64)
}

/// Per-copy success probabilities `(p_0, p_1)` of the bit attack for a
/// fixed key: `p_b = Σ_{i ∈ G_b} ⟨i|U σ_b U†|i⟩`.
fn per_bit_success(scheme: &HaarScheme, key: &UnitaryMatrix) -> Result<(f64, f64)> {
    let sets = build_decoding_sets(scheme, key, &[0, 1])?;
    let weights = block_weights(scheme, key, &[0, 1]);
    let r = scheme.rank() as f64;
    let mut p = [0.0f64; 2];
    for (i, &m) in sets.assignment().iter().enumerate() {
        p[m] += weights[m][i] / r;
    }
    Ok((p[0], p[1]))
}

/// Majority vote over t independent basis measurements of fresh ciphertext
/// copies under the same key; per-bit success probabilities may differ for
/// a fixed key, so the binomial expression is evaluated per encoded bit and
/// averaged over the uniform bit.
pub fn majority_success(scheme: &HaarScheme, key: &UnitaryMatrix, t: usize) -> Result<f64> {
    if scheme.message_count() != 2 {
        return Err(Error::UnsupportedAttack(format!(
            "majority attack needs n = 2, got n = {}",
            scheme.message_count()
        )));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("majority needs t ≥ 1".into()));
    }
    scheme.check_key(key)?;
    let (p0, p1) = per_bit_success(scheme, key)?;
    Ok(0.5 * (majority_exact_value(p0.clamp(0.0, 1.0), t)? + majority_exact_value(p1.clamp(0.0, 1.0), t)?))
}

/// Distinguishing success for the pair `(m0, m1)` with the decoding rule
/// `G_0 = {i : ⟨i|Uσ_{m0}U†|i⟩ ≥ ⟨i|Uσ_{m1}U†|i⟩}` (ties favor b = 0),
/// averaged analytically over the uniform bit.
pub fn distinguish_success(
    scheme: &HaarScheme,
    key: &UnitaryMatrix,
    m0: usize,
    m1: usize,
) -> Result<f64> {
    scheme.check_key(key)?;
    scheme.check_message(m0)?;
    scheme.check_message(m1)?;
    if m0 == m1 {
        return Err(Error::InvalidParameter(
            "distinguishing attack needs two distinct messages".into(),
        ));
    }
    let weights = block_weights(scheme, key, &[m0, m1]);
    let r = scheme.rank() as f64;
    let mut value = 0.0;
    for (&w0, &w1) in weights[0].iter().zip(&weights[1]) {
        value += 0.5 * if w0 >= w1 { w0 } else { w1 } / r;
    }
    Ok(value)
}

/// Value of a generic telegraphing attack `(X, {P_x})` with the optimal
/// key-aware post-processing: `(1/N) Σ_x max_{m ∈ messages} Tr[P_x · Uσ_mU†]`.
/// With the computational-basis PVM and all messages this reduces exactly to
/// [`single_copy_success`].
pub fn povm_attack_success(
    scheme: &HaarScheme,
    key: &UnitaryMatrix,
    povm: &[ComplexMatrix],
    messages: &[usize],
) -> Result<f64> {
    scheme.check_key(key)?;
    check_povm(povm, scheme.dim())?;
    if messages.is_empty() {
        return Err(Error::InvalidParameter("message list must be nonempty".into()));
    }
    for &m in messages {
        scheme.check_message(m)?;
    }
    let ciphertexts: Vec<ComplexMatrix> = messages
        .iter()
        .map(|&m| conjugate(key, &sigma(scheme, m)?))
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    for p in povm {
        let best = ciphertexts
            .iter()
            .map(|ct| (p * ct).trace().re)
            .fold(f64::NEG_INFINITY, f64::max);
        value += best;
    }
    Ok(value / messages.len() as f64)
}
