use num_complex::Complex64;

use super::matrix::{ComplexMatrix, UnitaryMatrix};
use crate::error::{Error, Result};

/// Largest tensor-power dimension `d^k` we materialize or index into.
pub const TENSOR_DIM_CAP: usize = 65_536;
/// Largest `d^k` for which a dense `d^k × d^k` permutation operator is built.
pub const DENSE_OPERATOR_CAP: usize = 8_192;

/// A permutation of `[k]`, stored as its image map (`map[i] = π(i)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Self { map: (0..k).collect() }
    }

    pub fn from_images(map: Vec<usize>) -> Result<Self> {
        let k = map.len();
        let mut seen = vec![false; k];
        for &img in &map {
            if img >= k || seen[img] {
                return Err(Error::InvalidParameter(format!(
                    "{map:?} is not a permutation of [{k}]"
                )));
            }
            seen[img] = true;
        }
        Ok(Self { map })
    }

    pub fn transposition(k: usize, a: usize, b: usize) -> Result<Self> {
        if a >= k || b >= k || a == b {
            return Err(Error::InvalidParameter(format!(
                "transposition ({a} {b}) is not valid on [{k}]"
            )));
        }
        let mut map: Vec<usize> = (0..k).collect();
        map.swap(a, b);
        Ok(Self { map })
    }

    /// Permutation acting as the cycle `(c₀ c₁ … c_m)` on `[k]`.
    pub fn from_cycle(k: usize, cycle: &[usize]) -> Result<Self> {
        let mut map: Vec<usize> = (0..k).collect();
        if cycle.is_empty() {
            return Ok(Self { map });
        }
        for w in cycle.windows(2) {
            if w[0] >= k || w[1] >= k {
                return Err(Error::InvalidParameter("cycle element out of range".into()));
            }
            map[w[0]] = w[1];
        }
        let last = *cycle.last().unwrap();
        if last >= k {
            return Err(Error::InvalidParameter("cycle element out of range".into()));
        }
        map[last] = cycle[0];
        Self::from_images(map)
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.map.len()];
        for (i, &img) in self.map.iter().enumerate() {
            inv[img] = i;
        }
        Self { map: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`, so that `V(π)·V(σ) = V(π∘σ)`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree());
        Self {
            map: (0..self.degree()).map(|i| self.map[other.map[i]]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &img)| i == img)
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_type().len()
    }

    /// Cycle lengths, descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let k = self.degree();
        let mut seen = vec![false; k];
        let mut lengths = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = self.map[cur];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    /// All `k!` permutations of `[k]`, lexicographic by image map; the
    /// identity comes first.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..k).collect();
        loop {
            out.push(Permutation { map: current.clone() });
            // next lexicographic permutation
            let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..k).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }
}

pub(crate) fn checked_tensor_dim(d: usize, k: usize) -> Result<usize> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "tensor power needs d ≥ 1 and k ≥ 1".into(),
        ));
    }
    let mut dim: usize = 1;
    for _ in 0..k {
        dim = dim.checked_mul(d).ok_or_else(|| {
            Error::Capacity(format!("d^k overflows for d={d}, k={k}"))
        })?;
        if dim > TENSOR_DIM_CAP {
            return Err(Error::Capacity(format!(
                "d^k = {d}^{k} exceeds the cap of {TENSOR_DIM_CAP}"
            )));
        }
    }
    Ok(dim)
}

/// Action of `V_d(π)` on flattened basis indices of `(C^d)^{⊗k}`:
/// `map[i]` is the index `j` with `V_d(π)|e_i⟩ = |e_j⟩`.
///
/// Basis tuples are encoded big-endian: index `i` stands for
/// `|i_1 … i_k⟩` with `i = Σ_t i_t d^{k-t}`, and
/// `V_d(π)|i_1 … i_k⟩ = |i_{π⁻¹(1)} … i_{π⁻¹(k)}⟩`.
pub(crate) fn tensor_index_map(perm: &Permutation, d: usize) -> Result<Vec<usize>> {
    let k = perm.degree();
    let dim = checked_tensor_dim(d, k)?;
    let inv = perm.inverse();
    let mut map = vec![0usize; dim];
    let mut digits = vec![0usize; k];
    for (i, slot) in map.iter_mut().enumerate() {
        let mut rem = i;
        for t in (0..k).rev() {
            digits[t] = rem % d;
            rem /= d;
        }
        let mut j = 0usize;
        for t in 0..k {
            j = j * d + digits[inv.apply(t)];
        }
        *slot = j;
    }
    Ok(map)
}

/// Dense `d^k × d^k` 0/1 matrix of `V_d(π)` permuting tensor factors.
pub fn permutation_operator(perm: &Permutation, d: usize) -> Result<UnitaryMatrix> {
    let dim = checked_tensor_dim(d, perm.degree())?;
    if dim > DENSE_OPERATOR_CAP {
        return Err(Error::Capacity(format!(
            "dense permutation operator of dimension {dim} exceeds the cap of {DENSE_OPERATOR_CAP}"
        )));
    }
    let map = tensor_index_map(perm, d)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (src, &dst) in map.iter().enumerate() {
        m[(dst, src)] = Complex64::new(1.0, 0.0);
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}
