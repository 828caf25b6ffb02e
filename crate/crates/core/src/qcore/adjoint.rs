use nalgebra::{Complex, DMatrix, SVD};

use super::matrix::QMatrix;
use super::quaternion::Quaternion;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// The `2n1 × 2n2` complex adjoint `[[A, B], [−conj(B), conj(A)]]` of a quaternion
/// matrix `A + B·j`, with `A = W + X·i` and `B = Y + Z·i`.
#[derive(Clone, Debug)]
pub struct ComplexAdjoint {
    matrix: DMatrix<C64>,
    rows: usize,
    cols: usize,
}

impl ComplexAdjoint {
    pub fn from_qmatrix(q: &QMatrix) -> Self {
        let (n1, n2) = q.shape();
        let (w, x, y, z) = (q.w(), q.x(), q.y(), q.z());
        let mut m = DMatrix::<C64>::zeros(2 * n1, 2 * n2);
        for c in 0..n2 {
            for r in 0..n1 {
                let a = C64::new(w[(r, c)], x[(r, c)]);
                let b = C64::new(y[(r, c)], z[(r, c)]);
                m[(r, c)] = a;
                m[(r, c + n2)] = b;
                m[(r + n1, c)] = -b.conj();
                m[(r + n1, c + n2)] = a.conj();
            }
        }
        ComplexAdjoint {
            matrix: m,
            rows: n1,
            cols: n2,
        }
    }

    /// Reads the quaternion matrix back from the first block row.
    pub fn to_qmatrix(&self) -> QMatrix {
        let (n1, n2) = (self.rows, self.cols);
        QMatrix::from_fn(n1, n2, |r, c| {
            let a = self.matrix[(r, c)];
            let b = self.matrix[(r, c + n2)];
            Quaternion::new(a.re, a.im, b.re, b.im)
        })
        .expect("adjoint of a non-empty matrix")
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Shape of the source quaternion matrix.
    pub fn source_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Complex SVD of the adjoint, singular values sorted nonincreasing.
    pub fn svd(&self, compute_vectors: bool) -> Result<SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
        let dim = self.matrix.nrows().max(self.matrix.ncols());
        let max_iters = 10_000 + 200 * dim;
        SVD::try_new(
            self.matrix.clone(),
            compute_vectors,
            compute_vectors,
            f64::EPSILON,
            max_iters,
        )
        .ok_or_else(|| {
            Error::Numerical(format!(
                "complex SVD of the {}x{} adjoint did not converge within {max_iters} iterations",
                self.matrix.nrows(),
                self.matrix.ncols()
            ))
        })
    }

    /// All `2·min(n1, n2)` singular values of the adjoint, nonincreasing.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        Ok(self.svd(false)?.singular_values.iter().copied().collect())
    }

    /// Largest gap inside the consecutive pairs `(σ_2i, σ_2i+1)` of the adjoint spectrum.
    pub fn pairing_residual(&self) -> Result<f64> {
        Ok(pairing_residual(&self.singular_values()?))
    }
}

pub(crate) fn pairing_residual(values: &[f64]) -> f64 {
    values
        .chunks(2)
        .map(|p| if p.len() == 2 { (p[0] - p[1]).abs() } else { p[0] })
        .fold(0.0, f64::max)
}

/// Quaternion vector `v1 + v2·j` encoded in the adjoint's column space as `[v1; −conj(v2)]`.
pub(crate) fn complex_column_to_quaternions(col: &[C64]) -> Vec<Quaternion> {
    let n = col.len() / 2;
    (0..n)
        .map(|i| {
            let a = col[i];
            let b = col[i + n];
            Quaternion::new(a.re, a.im, -b.re, b.im)
        })
        .collect()
}
