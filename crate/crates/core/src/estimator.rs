//! Seeded, parallel Monte Carlo estimation of Haar-averaged attack values.
//!
//! Sample i draws its key from `RngStream(master_seed, i)`, so per-sample
//! values depend only on the seed and the sample index. Aggregation walks
//! fixed-size chunks in index order, which makes the reduction — and hence
//! the reported mean and standard error — bit-identical for any worker
//! count.

use rayon::prelude::*;
use serde::Serialize;

use crate::attacks::AttackSpec;
use crate::error::{Error, Result};
use crate::linalg::{sample_haar_unitary, RngStream};

/// Samples per reduction chunk. CLI-settable; changing it changes the
/// (bit-exact) reduction order, not the estimator's distribution.
pub const DEFAULT_CHUNK_SIZE: usize = 1024;

/// A Monte Carlo estimate of a Haar-averaged attack value.
#[derive(Clone, Debug, Serialize)]
pub struct ValueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub master_seed: u64,
    pub attack: String,
}

/// Mean and standard error of the per-key attack value over `samples`
/// independent Haar keys.
pub fn estimate(spec: &AttackSpec, samples: usize, master_seed: u64) -> Result<ValueEstimate> {
    estimate_with_chunk_size(spec, samples, master_seed, DEFAULT_CHUNK_SIZE)
}

pub fn estimate_with_chunk_size(
    spec: &AttackSpec,
    samples: usize,
    master_seed: u64,
    chunk_size: usize,
) -> Result<ValueEstimate> {
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 samples for a standard error".into(),
        ));
    }
    if chunk_size < 1 {
        return Err(Error::InvalidParameter("chunk size must be ≥ 1".into()));
    }
    let dim = spec.scheme().dim();
    let n_chunks = samples.div_ceil(chunk_size);

    // Per-chunk sums are accumulated sequentially in sample order; chunks are
    // evaluated in parallel and folded in chunk order.
    let chunk_sums: Vec<Result<(f64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk_size;
            let hi = ((c + 1) * chunk_size).min(samples);
            let mut sum = 0.0f64;
            let mut sumsq = 0.0f64;
            for idx in lo..hi {
                let stream = RngStream::new(master_seed, idx as u64);
                let key = sample_haar_unitary(dim, &stream)?;
                let v = spec.per_key_value(&key)?;
                sum += v;
                sumsq += v * v;
            }
            Ok((sum, sumsq))
        })
        .collect();

    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for chunk in chunk_sums {
        let (s, q) = chunk?;
        sum += s;
        sumsq += q;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let variance = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    let stderr = (variance / nf).sqrt();
    Ok(ValueEstimate {
        mean,
        stderr,
        n_samples: samples,
        master_seed,
        attack: spec.label(),
    })
}

/// `(mean − z·stderr, mean + z·stderr)`, clamped into [0, 1].
pub fn confidence_interval(est: &ValueEstimate, z: f64) -> Result<(f64, f64)> {
    if z.is_nan() || z <= 0.0 || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "z must be positive and finite, got {z}"
        )));
    }
    let lo = (est.mean - z * est.stderr).max(0.0);
    let hi = (est.mean + z * est.stderr).min(1.0);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackKind;
    use crate::formulas::bit_exact_value;
    use crate::qecm::HaarScheme;

    fn bit_spec(r: usize) -> AttackSpec {
        AttackSpec::new(HaarScheme::new(r, 2).unwrap(), AttackKind::BitSingle).unwrap()
    }

    #[test]
    fn converges_to_closed_form() {
        // |mean − exact| ≤ 4·stderr at 10⁵ samples for r ∈ {1, 2, 4};
        // statistical gate, retried once on an independent seed.
        for r in [1usize, 2, 4] {
            let exact = bit_exact_value(r).unwrap().float;
            let pass = |seed: u64| {
                let est = estimate(&bit_spec(r), 100_000, seed).unwrap();
                (est.mean - exact).abs() <= 4.0 * est.stderr
            };
            assert!(
                pass(2024) || pass(2025),
                "estimate for r = {r} failed 4σ against {exact} on two seeds"
            );
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = bit_spec(2);
        let a = estimate(&spec, 4000, 31).unwrap();
        let b = estimate(&spec, 4000, 31).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn bit_identical_across_worker_counts() {
        let spec = bit_spec(1);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate(&spec, 10_000, 5).unwrap());
        let quad = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| estimate(&spec, 10_000, 5).unwrap());
        assert_eq!(single.mean.to_bits(), quad.mean.to_bits());
        assert_eq!(single.stderr.to_bits(), quad.stderr.to_bits());
    }

    #[test]
    fn chunk_size_changes_reduction_not_distribution() {
        let spec = bit_spec(1);
        let a = estimate_with_chunk_size(&spec, 10_000, 5, 128).unwrap();
        let b = estimate_with_chunk_size(&spec, 10_000, 5, 1024).unwrap();
        // same per-sample values, different summation order
        assert!((a.mean - b.mean).abs() < 1e-12);
    }

    #[test]
    fn stderr_scales_like_inverse_sqrt() {
        let spec = bit_spec(1);
        for seed in [1u64, 2] {
            let small = estimate(&spec, 20_000, seed).unwrap();
            let big = estimate(&spec, 40_000, seed).unwrap();
            let ratio = big.stderr / small.stderr;
            assert!(
                (0.6..=0.82).contains(&ratio),
                "stderr ratio {ratio} outside [0.6, 0.82] for seed {seed}"
            );
        }
    }

    #[test]
    fn rejects_degenerate_sample_counts() {
        let spec = bit_spec(1);
        assert!(estimate(&spec, 0, 1).is_err());
        assert!(estimate(&spec, 1, 1).is_err());
        assert!(estimate_with_chunk_size(&spec, 100, 1, 0).is_err());
    }

    #[test]
    fn confidence_interval_arithmetic_and_clamping() {
        let mut est = estimate(&bit_spec(1), 100, 1).unwrap();

        est.mean = 0.75;
        est.stderr = 0.001;
        assert_eq!(confidence_interval(&est, 4.0).unwrap(), (0.746, 0.754));

        est.stderr = 0.0;
        assert_eq!(confidence_interval(&est, 2.0).unwrap(), (0.75, 0.75));

        est.mean = 0.999;
        est.stderr = 0.01;
        let (_, hi) = confidence_interval(&est, 2.0).unwrap();
        assert_eq!(hi, 1.0);

        assert!(confidence_interval(&est, 0.0).is_err());
        assert!(confidence_interval(&est, -1.0).is_err());
    }
}
