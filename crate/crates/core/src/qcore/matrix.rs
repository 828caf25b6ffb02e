use std::io::{Read, Write};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

use super::quaternion::Quaternion;
use super::qsvd;
use crate::error::{Error, Result};

/// Magic bytes at the start of a binary matrix dump.
pub const DUMP_MAGIC: &[u8; 4] = b"QMAT";
/// Dump format revision stored after the magic.
pub const DUMP_VERSION: u32 = 1;

/// Dense quaternion matrix stored as four real component planes.
///
/// The planes hold the real part and the `i`, `j`, `k` coefficients. A color
/// image is a pure matrix: `w` is zero and `x`, `y`, `z` hold red, green, blue.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    w: DMatrix<f64>,
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    z: DMatrix<f64>,
}

/// Matrix norms over quaternion entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    /// Sum of entry moduli.
    L1,
    Fro,
    /// Largest entry modulus.
    Inf,
    /// `(Σ|x_ij|^p)^(1/p)` for `0 < p < 1`.
    Lp(f64),
    /// Sum of singular values.
    Nuclear,
    /// Largest singular value.
    Spectral,
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "quaternion matrices must be non-empty, got {rows}x{cols}"
        )));
    }
    Ok(())
}

impl QMatrix {
    /// Builds a matrix from four row-major planes.
    pub fn from_planes(
        rows: usize,
        cols: usize,
        w: &[f64],
        x: &[f64],
        y: &[f64],
        z: &[f64],
    ) -> Result<Self> {
        check_dims(rows, cols)?;
        let n = rows * cols;
        for (name, p) in [("w", w), ("x", x), ("y", y), ("z", z)] {
            if p.len() != n {
                return Err(Error::Dimension(format!(
                    "plane {name} has {} values, expected {n}",
                    p.len()
                )));
            }
        }
        Ok(QMatrix {
            w: DMatrix::from_row_slice(rows, cols, w),
            x: DMatrix::from_row_slice(rows, cols, x),
            y: DMatrix::from_row_slice(rows, cols, y),
            z: DMatrix::from_row_slice(rows, cols, z),
        })
    }

    /// Builds a matrix from nalgebra planes of identical shape.
    pub fn from_dmatrices(
        w: DMatrix<f64>,
        x: DMatrix<f64>,
        y: DMatrix<f64>,
        z: DMatrix<f64>,
    ) -> Result<Self> {
        check_dims(w.nrows(), w.ncols())?;
        let shape = w.shape();
        if x.shape() != shape || y.shape() != shape || z.shape() != shape {
            return Err(Error::Dimension("component planes differ in shape".into()));
        }
        Ok(QMatrix { w, x, y, z })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self::zeros_unchecked(rows, cols))
    }

    pub(crate) fn zeros_unchecked(rows: usize, cols: usize) -> Self {
        QMatrix {
            w: DMatrix::zeros(rows, cols),
            x: DMatrix::zeros(rows, cols),
            y: DMatrix::zeros(rows, cols),
            z: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dims(n, n)?;
        let mut m = Self::zeros_unchecked(n, n);
        m.w.fill_with_identity();
        Ok(m)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Quaternion,
    ) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut m = Self::zeros_unchecked(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.set(r, c, f(r, c));
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given quaternion vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Quaternion>]) -> Result<Self> {
        check_dims(rows, columns.len())?;
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::Dimension(format!(
                "column of length {} in a matrix with {rows} rows",
                bad.len()
            )));
        }
        Self::from_fn(rows, columns.len(), |r, c| columns[c][r])
    }

    pub fn rows(&self) -> usize {
        self.w.nrows()
    }

    pub fn cols(&self) -> usize {
        self.w.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.w.shape()
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        Quaternion::new(self.w[(r, c)], self.x[(r, c)], self.y[(r, c)], self.z[(r, c)])
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        self.w[(r, c)] = q.w;
        self.x[(r, c)] = q.x;
        self.y[(r, c)] = q.y;
        self.z[(r, c)] = q.z;
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }
    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }
    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn planes(&self) -> [&DMatrix<f64>; 4] {
        [&self.w, &self.x, &self.y, &self.z]
    }

    pub fn planes_mut(&mut self) -> [&mut DMatrix<f64>; 4] {
        [&mut self.w, &mut self.x, &mut self.y, &mut self.z]
    }

    pub fn column(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows()).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Quaternion]) {
        debug_assert_eq!(v.len(), self.rows());
        for (r, q) in v.iter().enumerate() {
            self.set(r, c, *q);
        }
    }

    /// The `nrows × ncols` block whose top-left entry is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Result<QMatrix> {
        check_dims(nrows, ncols)?;
        if r0 + nrows > self.rows() || c0 + ncols > self.cols() {
            return Err(Error::Dimension(format!(
                "block ({r0}, {c0}) of size {nrows}x{ncols} outside a {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        let take = |m: &DMatrix<f64>| m.view((r0, c0), (nrows, ncols)).into_owned();
        Ok(QMatrix { w: take(&self.w), x: take(&self.x), y: take(&self.y), z: take(&self.z) })
    }

    /// Applies `f` to every entry.
    pub fn map(&self, mut f: impl FnMut(Quaternion) -> Quaternion) -> QMatrix {
        let mut out = self.clone();
        for c in 0..self.cols() {
            for r in 0..self.rows() {
                out.set(r, c, f(self.get(r, c)));
            }
        }
        out
    }

    /// Applies `f(row, col, entry)` to every entry.
    pub fn map_indexed(&self, mut f: impl FnMut(usize, usize, Quaternion) -> Quaternion) -> QMatrix {
        let mut out = self.clone();
        for c in 0..self.cols() {
            for r in 0..self.rows() {
                out.set(r, c, f(r, c, self.get(r, c)));
            }
        }
        out
    }

    /// Conjugate transpose `X*`.
    pub fn conj_transpose(&self) -> QMatrix {
        QMatrix {
            w: self.w.transpose(),
            x: -self.x.transpose(),
            y: -self.y.transpose(),
            z: -self.z.transpose(),
        }
    }

    /// Quaternion matrix product `self · rhs`, assembled from real plane products.
    pub fn matmul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let (a, b) = (self, rhs);
        Ok(QMatrix {
            w: &a.w * &b.w - &a.x * &b.x - &a.y * &b.y - &a.z * &b.z,
            x: &a.w * &b.x + &a.x * &b.w + &a.y * &b.z - &a.z * &b.y,
            y: &a.w * &b.y - &a.x * &b.z + &a.y * &b.w + &a.z * &b.x,
            z: &a.w * &b.z + &a.x * &b.y - &a.y * &b.x + &a.z * &b.w,
        })
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix {
            w: &self.w * s,
            x: &self.x * s,
            y: &self.y * s,
            z: &self.z * s,
        }
    }

    /// Real inner product `Re tr(X* Y)`.
    pub fn inner_product(&self, other: &QMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.w.dot(&other.w) + self.x.dot(&other.x) + self.y.dot(&other.y) + self.z.dot(&other.z))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.w.norm_squared() + self.x.norm_squared() + self.y.norm_squared() + self.z.norm_squared()
    }

    /// Entry moduli `|x_ij|` as a real matrix.
    pub fn abs(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows(), self.cols(), |r, c| self.get(r, c).abs())
    }

    /// Elementwise `(signQ(X), |X|)`.
    pub fn sign_abs(&self) -> (QMatrix, DMatrix<f64>) {
        (self.map(Quaternion::sign), self.abs())
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        Ok(match kind {
            NormKind::L1 => self.abs().iter().sum(),
            NormKind::Fro => self.frobenius_norm(),
            NormKind::Inf => self.abs().iter().fold(0.0, |m, &v| f64::max(m, v)),
            NormKind::Lp(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Parameter(format!(
                        "Lp norm needs 0 < p < 1, got {p}"
                    )));
                }
                self.lp_pow(p).powf(1.0 / p)
            }
            NormKind::Nuclear => qsvd::singular_values(self)?.iter().sum(),
            NormKind::Spectral => qsvd::singular_values(self)?[0],
        })
    }

    /// `Σ |x_ij|^p`, the p-th power of the Lp quasi-norm. Zero entries contribute zero.
    pub fn lp_pow(&self, p: f64) -> f64 {
        self.abs()
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v.powf(p))
            .sum()
    }

    pub fn is_pure(&self) -> bool {
        self.w.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.planes().iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    pub fn check_same_shape(&self, other: &QMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "shape {:?} does not match {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Writes the binary dump: `QMAT`, u32 version, u32 rows, u32 cols, then the
    /// W, X, Y, Z planes row-major as little-endian f64.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let (rows, cols) = self.shape();
        let as_u32 = |v: usize| {
            u32::try_from(v).map_err(|_| Error::Dimension(format!("{v} exceeds dump limits")))
        };
        out.write_all(DUMP_MAGIC)?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        out.write_all(&as_u32(rows)?.to_le_bytes())?;
        out.write_all(&as_u32(cols)?.to_le_bytes())?;
        for plane in self.planes() {
            for r in 0..rows {
                for c in 0..cols {
                    out.write_all(&plane[(r, c)].to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut input: R) -> Result<QMatrix> {
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        if &header[..4] != DUMP_MAGIC {
            return Err(Error::Input("missing QMAT magic".into()));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        if word(4) != DUMP_VERSION {
            return Err(Error::Input(format!("unsupported dump version {}", word(4))));
        }
        let (rows, cols) = (word(8) as usize, word(12) as usize);
        check_dims(rows, cols)?;
        let mut planes = Vec::with_capacity(4);
        let mut buf = [0u8; 8];
        for _ in 0..4 {
            let mut p = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                input.read_exact(&mut buf)?;
                p.push(f64::from_le_bytes(buf));
            }
            planes.push(p);
        }
        QMatrix::from_planes(rows, cols, &planes[0], &planes[1], &planes[2], &planes[3])
    }
}

macro_rules! planewise_binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&QMatrix> for &QMatrix {
            type Output = QMatrix;
            fn $f(self, rhs: &QMatrix) -> QMatrix {
                assert_eq!(self.shape(), rhs.shape(), "quaternion matrix shape mismatch");
                QMatrix {
                    w: &self.w $op &rhs.w,
                    x: &self.x $op &rhs.x,
                    y: &self.y $op &rhs.y,
                    z: &self.z $op &rhs.z,
                }
            }
        }
        impl $tr<QMatrix> for QMatrix {
            type Output = QMatrix;
            fn $f(self, rhs: QMatrix) -> QMatrix {
                &self $op &rhs
            }
        }
        impl $tr<&QMatrix> for QMatrix {
            type Output = QMatrix;
            fn $f(self, rhs: &QMatrix) -> QMatrix {
                &self $op rhs
            }
        }
    };
}

planewise_binop!(Add, add, +);
planewise_binop!(Sub, sub, -);

impl AddAssign<&QMatrix> for QMatrix {
    fn add_assign(&mut self, rhs: &QMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "quaternion matrix shape mismatch");
        self.w += &rhs.w;
        self.x += &rhs.x;
        self.y += &rhs.y;
        self.z += &rhs.z;
    }
}

impl SubAssign<&QMatrix> for QMatrix {
    fn sub_assign(&mut self, rhs: &QMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "quaternion matrix shape mismatch");
        self.w -= &rhs.w;
        self.x -= &rhs.x;
        self.y -= &rhs.y;
        self.z -= &rhs.z;
    }
}

impl Mul<f64> for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: f64) -> QMatrix {
        self.scale(rhs)
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        self.scale(-1.0)
    }
}

/// `‖A − B‖_F`.
pub fn frobenius_distance(a: &QMatrix, b: &QMatrix) -> f64 {
    (a - b).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::gaussian_qmatrix as random_qmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_empty_shapes() {
        assert!(QMatrix::zeros(0, 3).is_err());
        assert!(QMatrix::zeros(2, 0).is_err());
        assert!(QMatrix::from_planes(1, 2, &[0.0], &[0.0], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn conj_transpose_of_pure_unit() {
        let m = QMatrix::from_fn(1, 1, |_, _| Quaternion::I).unwrap();
        assert_eq!(m.conj_transpose().get(0, 0), -Quaternion::I);
    }

    #[test]
    fn conj_transpose_of_real_is_transpose() {
        let m = QMatrix::from_fn(2, 3, |r, c| Quaternion::real((r * 3 + c) as f64)).unwrap();
        let t = m.conj_transpose();
        assert_eq!(t.shape(), (3, 2));
        for r in 0..2 {
            for c in 0..3 {
                assert_eq!(t.get(c, r), m.get(r, c));
            }
        }
    }

    #[test]
    fn conj_transpose_roundtrip_and_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_qmatrix(&mut rng, 3, 2);
        let y = random_qmatrix(&mut rng, 2, 4);
        assert!(frobenius_distance(&x.conj_transpose().conj_transpose(), &x) < 1e-15);
        let lhs = x.matmul(&y).unwrap().conj_transpose();
        let rhs = y.conj_transpose().matmul(&x.conj_transpose()).unwrap();
        assert!(frobenius_distance(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn matmul_matches_entrywise_hamilton_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_qmatrix(&mut rng, 3, 4);
        let b = random_qmatrix(&mut rng, 4, 2);
        let c = a.matmul(&b).unwrap();
        for r in 0..3 {
            for col in 0..2 {
                let mut acc = Quaternion::ZERO;
                for k in 0..4 {
                    acc += a.get(r, k) * b.get(k, col);
                }
                assert!((acc - c.get(r, col)).abs() < 1e-12);
            }
        }
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let x = QMatrix::from_fn(1, 1, |_, _| Quaternion::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(x.inner_product(&x).unwrap(), 2.0);
        let zero = QMatrix::zeros(1, 1).unwrap();
        assert_eq!(x.inner_product(&zero).unwrap(), 0.0);
        assert!(x.inner_product(&QMatrix::zeros(2, 1).unwrap()).is_err());
    }

    #[test]
    fn inner_product_adjunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_qmatrix(&mut rng, 4, 3);
        let y = random_qmatrix(&mut rng, 4, 5);
        let z = random_qmatrix(&mut rng, 5, 3);
        let lhs = x.inner_product(&y.matmul(&z).unwrap()).unwrap();
        let rhs = y.conj_transpose().matmul(&x).unwrap().inner_product(&z).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        // Right adjunction: <X, ZW> = <X W*, Z>.
        let w = random_qmatrix(&mut rng, 3, 3);
        let zz = random_qmatrix(&mut rng, 4, 3);
        let lhs = x.inner_product(&zz.matmul(&w).unwrap()).unwrap();
        let rhs = x.matmul(&w.conj_transpose()).unwrap().inner_product(&zz).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        assert!((x.inner_product(&y.matmul(&z).unwrap()).unwrap()
            - y.matmul(&z).unwrap().inner_product(&x).unwrap())
        .abs()
            < 1e-12);
    }

    #[test]
    fn inner_product_equals_frobenius_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_qmatrix(&mut rng, 6, 5);
        let fro = x.norm(NormKind::Fro).unwrap();
        assert!((x.inner_product(&x).unwrap() - fro * fro).abs() < 1e-12 * fro * fro);
    }

    #[test]
    fn norm_examples() {
        let zero = QMatrix::zeros(3, 2).unwrap();
        for kind in [
            NormKind::L1,
            NormKind::Fro,
            NormKind::Inf,
            NormKind::Lp(0.5),
            NormKind::Nuclear,
            NormKind::Spectral,
        ] {
            assert_eq!(zero.norm(kind).unwrap(), 0.0);
        }
        let x = QMatrix::from_fn(1, 2, |_, c| {
            if c == 0 {
                Quaternion::real(1.0)
            } else {
                Quaternion::new(0.0, 0.0, 4.0, 0.0)
            }
        })
        .unwrap();
        assert!((x.norm(NormKind::Lp(0.5)).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(x.norm(NormKind::L1).unwrap(), 5.0);
        assert_eq!(x.norm(NormKind::Inf).unwrap(), 4.0);
        let eye = QMatrix::identity(3).unwrap();
        assert!((eye.norm(NormKind::Nuclear).unwrap() - 3.0).abs() < 1e-12);
        assert!((eye.norm(NormKind::Spectral).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(x.norm(NormKind::Lp(1.0)), Err(Error::Parameter(_))));
        assert!(matches!(x.norm(NormKind::Lp(0.0)), Err(Error::Parameter(_))));
    }

    #[test]
    fn sign_abs_examples() {
        let vals = [
            Quaternion::pure(0.0, 0.0, 3.0),
            Quaternion::ZERO,
            Quaternion::new(1.0, 1.0, 1.0, 1.0),
        ];
        let x = QMatrix::from_fn(1, 3, |_, c| vals[c]).unwrap();
        let (s, a) = x.sign_abs();
        assert_eq!((s.get(0, 0), a[(0, 0)]), (Quaternion::K, 3.0));
        assert_eq!((s.get(0, 1), a[(0, 1)]), (Quaternion::ZERO, 0.0));
        assert_eq!(a[(0, 2)], 2.0);
        assert_eq!(s.get(0, 2), vals[2] / 2.0);
        for c in 0..3 {
            assert!((s.get(0, c) * a[(0, c)] - vals[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn dump_roundtrip_and_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_qmatrix(&mut rng, 3, 2);
        let mut buf = Vec::new();
        x.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 6 * 8);
        assert_eq!(&buf[..4], b"QMAT");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 2);
        // second value of the W plane is entry (0, 1)
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), x.get(0, 1).w);
        assert_eq!(QMatrix::read_dump(&buf[..]).unwrap(), x);
        assert!(QMatrix::read_dump(&b"QMAX0000000000000000"[..]).is_err());
    }
}
