use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::QMatrix;
use super::quaternion::Quaternion;

/// Matrix whose four components are independent standard normal draws.
///
/// Panics on a zero dimension.
pub fn gaussian_qmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> QMatrix {
    let mut m = QMatrix::zeros(rows, cols).expect("non-empty shape");
    for c in 0..cols {
        for r in 0..rows {
            let q = Quaternion::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            m.set(r, c, q);
        }
    }
    m
}
