use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Sub};

/// Dense 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[C64::new(0.0, 0.0); 2]; 2]);

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Mat2([[a, zero], [zero, b]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, k: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).max_abs()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let entry = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Mat2([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
    }
}
