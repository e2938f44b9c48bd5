//! Exact arithmetic in Z[ζ], ζ = e^{iπ/5}, using the basis 1, ζ, ζ², ζ³
//! and the relation ζ⁴ = ζ³ − ζ² + ζ − 1.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExactPoint(pub [i64; 4]);

impl ExactPoint {
    pub const ZERO: ExactPoint = ExactPoint([0, 0, 0, 0]);
    pub const ONE: ExactPoint = ExactPoint([1, 0, 0, 0]);
    pub const ZETA: ExactPoint = ExactPoint([0, 1, 0, 0]);
    /// φ = 1 + ζ² − ζ³ (equivalently ζ + ζ⁻¹).
    pub const PHI: ExactPoint = ExactPoint([1, 0, 1, -1]);

    pub fn new(c: [i64; 4]) -> Self {
        ExactPoint(c)
    }

    pub fn coords(&self) -> [i64; 4] {
        self.0
    }

    pub fn mul_zeta(self) -> Self {
        let [a, b, c, d] = self.0;
        ExactPoint([-d, a + d, b - d, c + d])
    }

    /// ζ^j for any integer j (period 10).
    pub fn zeta_pow(j: i64) -> Self {
        let mut p = ExactPoint::ONE;
        for _ in 0..j.rem_euclid(10) {
            p = p.mul_zeta();
        }
        p
    }

    pub fn rotate(self, j: i64) -> Self {
        let mut p = self;
        for _ in 0..j.rem_euclid(10) {
            p = p.mul_zeta();
        }
        p
    }

    /// Division by φ, exact since 1/φ = φ − 1 is a ring element.
    pub fn div_phi(self) -> Self {
        self * (ExactPoint::PHI - ExactPoint::ONE)
    }

    pub fn mul_phi(self) -> Self {
        self * ExactPoint::PHI
    }

    pub fn to_f64(&self) -> [f64; 2] {
        let mut x = 0.0;
        let mut y = 0.0;
        for (i, &c) in self.0.iter().enumerate() {
            let a = PI * i as f64 / 5.0;
            x += c as f64 * a.cos();
            y += c as f64 * a.sin();
        }
        [x, y]
    }

    /// Index j with `self == ζ^j`, if `self` is a tenth root of unity.
    pub fn unit_direction(&self) -> Option<usize> {
        (0..10).find(|&j| ExactPoint::zeta_pow(j as i64) == *self)
    }
}

impl Add for ExactPoint {
    type Output = ExactPoint;
    fn add(self, o: ExactPoint) -> ExactPoint {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(o.0) {
            *x += y;
        }
        ExactPoint(c)
    }
}

impl Sub for ExactPoint {
    type Output = ExactPoint;
    fn sub(self, o: ExactPoint) -> ExactPoint {
        self + (-o)
    }
}

impl Neg for ExactPoint {
    type Output = ExactPoint;
    fn neg(self) -> ExactPoint {
        ExactPoint(self.0.map(|x| -x))
    }
}

impl Mul for ExactPoint {
    type Output = ExactPoint;
    fn mul(self, o: ExactPoint) -> ExactPoint {
        let mut acc = ExactPoint::ZERO;
        let mut power = self;
        for &c in &o.0 {
            acc = acc + ExactPoint(power.0.map(|x| x * c));
            power = power.mul_zeta();
        }
        acc
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}
