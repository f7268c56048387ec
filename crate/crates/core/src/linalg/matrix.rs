use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the workhorse representation for operators,
/// POVM elements and states.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Unitarity tolerance per unit of dimension: a key `U` must satisfy
/// `‖U†U − I‖_F ≤ UNITARITY_TOL_PER_DIM · dim`.
pub const UNITARITY_TOL_PER_DIM: f64 = 1e-10;
/// The determinant of a unitary must have modulus within this distance of 1.
pub const DET_MODULUS_TOL: f64 = 1e-8;
/// Hermiticity tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const MIN_EIGENVALUE_TOL: f64 = -1e-9;
/// Diagonal entries of a state below this are an error rather than rounding noise.
pub const DIAG_CLAMP_TOL: f64 = -1e-12;

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix("non-finite entry".into()))
    }
}

/// Builds a matrix from a row-major slice of entries, rejecting non-finite values.
pub fn matrix_from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{rows}x{cols} matrix needs {} entries, got {}",
            rows * cols,
            entries.len()
        )));
    }
    let m = ComplexMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn matrix_from_real_diagonal(diag: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(diag.len(), diag.len(), |i, j| {
        if i == j {
            Complex64::new(diag[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && frobenius_distance(m, &m.adjoint()) <= tol
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// A matrix certified unitary within tolerance; the encryption key type.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    /// Certifies `matrix` as unitary: square, finite entries,
    /// `‖U†U − I‖_F ≤ 1e-10·dim` and `||det| − 1| ≤ 1e-8`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "unitary must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        ensure_finite(&matrix)?;
        let dim = matrix.nrows();
        let gram = matrix.adjoint() * &matrix;
        let defect = frobenius_distance(&gram, &ComplexMatrix::identity(dim, dim));
        if defect > UNITARITY_TOL_PER_DIM * dim as f64 {
            return Err(Error::InvalidMatrix(format!(
                "unitarity defect {defect:.3e} exceeds {:.3e}",
                UNITARITY_TOL_PER_DIM * dim as f64
            )));
        }
        let det_mod = matrix.determinant().norm();
        if (det_mod - 1.0).abs() > DET_MODULUS_TOL {
            return Err(Error::InvalidMatrix(format!(
                "determinant modulus {det_mod} not within {DET_MODULUS_TOL:.1e} of 1"
            )));
        }
        Ok(Self { matrix })
    }

    /// Internal constructor for matrices unitary by construction (adjoints,
    /// products of certified unitaries, permutation operators).
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self::new_unchecked(self.matrix.adjoint())
    }

    /// The product `self · other`, again a unitary.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose unitaries of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self::new_unchecked(&self.matrix * &other.matrix))
    }

    /// Frobenius distance of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        frobenius_distance(
            &(self.matrix.adjoint() * &self.matrix),
            &ComplexMatrix::identity(dim, dim),
        )
    }
}

/// A quantum state: Hermitian, unit trace, nonnegative spectrum up to rounding.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "density matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        ensure_finite(&matrix)?;
        if !is_hermitian(&matrix, HERMITICITY_TOL) {
            return Err(Error::InvalidMatrix("state is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidMatrix(format!("state trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < MIN_EIGENVALUE_TOL {
            return Err(Error::InvalidMatrix(format!(
                "state has eigenvalue {min_eig:.3e} below {MIN_EIGENVALUE_TOL:.1e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self {
            matrix: ComplexMatrix::identity(dim, dim) * scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Spectrum, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// `U X U†`. Preserves trace and spectrum.
pub fn conjugate(u: &UnitaryMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() || x.nrows() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot conjugate {}x{} matrix by dimension-{} unitary",
            x.nrows(),
            x.ncols(),
            u.dim()
        )));
    }
    Ok(u.matrix() * x * u.matrix().adjoint())
}

/// Computational-basis outcome distribution `p_i = ⟨i|ρ|i⟩`.
///
/// Rounding can push diagonal entries slightly negative; values in
/// `[-1e-12, 0)` are clamped to zero and the vector renormalized. Anything
/// more negative signals an invalid state and is an error.
pub fn diag_probabilities(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let mut p: Vec<f64> = (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect();
    for (i, v) in p.iter_mut().enumerate() {
        if *v < DIAG_CLAMP_TOL {
            return Err(Error::InvalidMatrix(format!(
                "diagonal entry {i} is {v:.3e}, below the clamp threshold"
            )));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidMatrix(format!(
            "diagonal sums to {total}, not 1"
        )));
    }
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}
