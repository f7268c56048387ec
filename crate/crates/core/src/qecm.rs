//! The Haar-measure encryption scheme: a message `m ∈ [n]` is encrypted
//! under a Haar-random key `U ∈ U(rn)` as `U (Π_m / r) U†`, where `Π_m`
//! projects onto the m-th block of `r` consecutive basis states.
//! Decryption undoes the conjugation and measures the block index.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    conjugate, diag_probabilities, matrix_from_real_diagonal, ComplexMatrix, DensityMatrix,
    RngStream, UnitaryMatrix,
};

/// Scheme parameters: rank `r ≥ 1`, message count `n ≥ 2`, ciphertext
/// dimension `d = r·n`. Messages are indexed by contiguous basis blocks
/// `[r·m, r·(m+1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HaarScheme {
    r: usize,
    n: usize,
}

impl HaarScheme {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        if r < 1 {
            return Err(Error::InvalidParameter("rank r must be ≥ 1".into()));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(
                "message count n must be ≥ 2".into(),
            ));
        }
        r.checked_mul(n)
            .ok_or_else(|| Error::Capacity(format!("d = r·n overflows for r={r}, n={n}")))?;
        Ok(Self { r, n })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn message_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.r * self.n
    }

    pub(crate) fn check_message(&self, m: usize) -> Result<()> {
        if m < self.n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "message {m} out of range for n = {}",
                self.n
            )))
        }
    }

    pub(crate) fn check_key(&self, key: &UnitaryMatrix) -> Result<()> {
        if key.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "key dimension {} does not match scheme dimension {}",
                key.dim(),
                self.dim()
            )))
        }
    }
}

/// An encrypted state. When produced by [`encrypt`], all nonzero eigenvalues
/// equal `1/r`.
#[derive(Clone, Debug)]
pub struct Ciphertext {
    state: DensityMatrix,
}

impl Ciphertext {
    pub fn new(state: DensityMatrix) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

/// The unnormalized block projector `Π_m`: diagonal 0/1 with ones exactly at
/// indices `r·m … r·(m+1)−1`; trace `r`.
pub fn projector(scheme: &HaarScheme, m: usize) -> Result<ComplexMatrix> {
    scheme.check_message(m)?;
    let r = scheme.rank();
    let mut diag = vec![0.0; scheme.dim()];
    for slot in diag.iter_mut().skip(r * m).take(r) {
        *slot = 1.0;
    }
    Ok(matrix_from_real_diagonal(&diag))
}

/// The normalized ciphertext block state `σ_m = Π_m / r`.
pub fn sigma(scheme: &HaarScheme, m: usize) -> Result<ComplexMatrix> {
    let scale = Complex64::new(1.0 / scheme.rank() as f64, 0.0);
    Ok(projector(scheme, m)? * scale)
}

/// `Enc(m, U) = U (Π_m / r) U†`.
pub fn encrypt(scheme: &HaarScheme, m: usize, key: &UnitaryMatrix) -> Result<Ciphertext> {
    scheme.check_key(key)?;
    let state = conjugate(key, &sigma(scheme, m)?)?;
    Ok(Ciphertext::new(DensityMatrix::new(state)?))
}

/// Applies `U†·ct·U` and sums the outcome probabilities within each message
/// block. The result is the decryption distribution over `[n]`.
pub fn decrypt_distribution(
    scheme: &HaarScheme,
    ct: &Ciphertext,
    key: &UnitaryMatrix,
) -> Result<Vec<f64>> {
    scheme.check_key(key)?;
    if ct.dim() != scheme.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ciphertext dimension {} does not match scheme dimension {}",
            ct.dim(),
            scheme.dim()
        )));
    }
    let rotated = conjugate(&key.adjoint(), ct.state().matrix())?;
    let p = diag_probabilities(&DensityMatrix::new(rotated)?)?;
    let r = scheme.rank();
    Ok((0..scheme.message_count())
        .map(|m| p[r * m..r * (m + 1)].iter().sum())
        .collect())
}

/// Round-trips `samples` random (message, key) pairs and returns the largest
/// decoding error `|1 − P(correct)|` observed. The scheme is exactly correct,
/// so this must come back ≤ 1e-9.
pub fn correctness_check(scheme: &HaarScheme, samples: usize, master_seed: u64) -> Result<f64> {
    if samples < 1 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut worst = 0.0f64;
    for idx in 0..samples {
        let stream = RngStream::new(master_seed, idx as u64);
        let key = crate::linalg::sample_haar_unitary(scheme.dim(), &stream)?;
        let m = (stream.substream(1).rng().random_range(0..scheme.message_count() as u64)) as usize;
        let ct = encrypt(scheme, m, &key)?;
        let dist = decrypt_distribution(scheme, &ct, &key)?;
        worst = worst.max((1.0 - dist[m]).abs());
    }
    Ok(worst)
}
