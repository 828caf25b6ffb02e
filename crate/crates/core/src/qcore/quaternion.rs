use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A real quaternion `w + x·i + y·j + z·k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion `x·i + y·j + z·k`.
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Quaternion::new(0.0, x, y, z)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Squared modulus `w² + x² + y² + z²`.
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Modulus `|q|`.
    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_pure(self) -> bool {
        self.w == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `q / |q|`, or zero when `q = 0`.
    pub fn sign(self) -> Self {
        let m = self.abs();
        if m == 0.0 {
            Quaternion::ZERO
        } else {
            self / m
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse; `None` for the zero quaternion.
    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sqr();
        (n != 0.0).then(|| self.conj().scale(1.0 / n))
    }
}

/// Hamilton product `a·b`.
pub fn hamilton_product(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        hamilton_product(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: f64) -> Quaternion {
        self.scale(rhs)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, rhs: f64) -> Quaternion {
        Quaternion::new(self.w / rhs, self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Quaternion) {
        *self = *self + rhs;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, rhs: Quaternion) {
        *self = *self - rhs;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.w, self.x, self.y, self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Quaternion, b: Quaternion) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn multiplication_table() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        for u in [i, j, k] {
            assert_eq!(u * u, -Quaternion::ONE);
        }
    }

    #[test]
    fn identity_element() {
        let q = Quaternion::new(0.3, -1.2, 2.5, 4.0);
        assert_eq!(q * Quaternion::ONE, q);
        assert_eq!(Quaternion::ONE * q, q);
    }

    #[test]
    fn one_plus_i_times_one_plus_j() {
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(Quaternion::ZERO.sign(), Quaternion::ZERO);
        assert_eq!(Quaternion::pure(0.0, 0.0, 3.0).sign(), Quaternion::K);
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
            .prop_map(|(w, x, y, z)| Quaternion::new(w, x, y, z))
    }

    proptest! {
        #[test]
        fn modulus_is_multiplicative(p in quat(), q in quat()) {
            prop_assert!(((p * q).abs() - p.abs() * q.abs()).abs() < 1e-12 * (1.0 + p.abs() * q.abs()));
        }

        #[test]
        fn product_is_associative(a in quat(), b in quat(), c in quat()) {
            prop_assert!(((a * b) * c - a * (b * c)).abs() < 1e-10);
        }

        #[test]
        fn conj_reverses_products(a in quat(), b in quat()) {
            prop_assert!(close((a * b).conj(), b.conj() * a.conj()));
        }
    }
}
