use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, UnitaryMatrix};
use crate::error::{Error, Result};

/// A counter-based random stream: `(master_seed, stream_index)` fully
/// determines the output, so per-sample streams can be derived independently
/// of evaluation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// A derived stream for sub-task `index` of this stream. Mixing the parent
    /// stream index with a large odd constant keeps derived families disjoint.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_index: self
                .stream_index
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(index),
        }
    }

    /// Materializes the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn standard_complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // E|z|² = 1: real and imaginary parts are N(0, 1/2).
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

/// `dim × dim` matrix of i.i.d. standard complex Gaussians.
/// Entries are drawn in row-major order.
pub fn sample_ginibre(dim: usize, stream: &RngStream) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("ginibre sample needs dim ≥ 1".into()));
    }
    let mut rng = stream.rng();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = standard_complex_gaussian(&mut rng);
        }
    }
    Ok(m)
}

/// Haar-distributed unitary on `U(dim)`.
///
/// QR of a Ginibre sample with the diagonal phase correction
/// `U = Q · diag(R_ii / |R_ii|)`: the correction pins down the unique
/// factorization with positive-real R diagonal, whose Q factor is exactly
/// Haar. Plain QR is not.
pub fn sample_haar_unitary(dim: usize, stream: &RngStream) -> Result<UnitaryMatrix> {
    let g = sample_ginibre(dim, stream)?;
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 { rjj / norm } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new(q)
}
