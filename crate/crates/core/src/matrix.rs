//! Minimal 2×2 complex matrix algebra.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::special::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl Mat2 {
    pub fn new(a: C64, b: C64, cc: C64, d: C64) -> Self {
        Mat2([[a, b], [cc, d]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    pub fn zeros() -> Self {
        Mat2([[c(0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2::from_real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn diag(d: [f64; 2]) -> Self {
        Mat2::from_real([[d[0], 0.0], [0.0, d[1]]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn scale(&self, k: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    /// diag(d)⁻¹ · self · diag(d), i.e. entry (i,j) times d_j / d_i.
    pub fn similarity_diag(&self, d: [f64; 2]) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] *= d[j] / d[i];
            }
        }
        out
    }

    pub fn row_sums(&self) -> [C64; 2] {
        [self.0[0][0] + self.0[0][1], self.0[1][0] + self.0[1][1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise |self - other| / |other|, with entries where
    /// `other` vanishes measured against the largest entry of `other`.
    pub fn max_rel_diff(&self, other: &Mat2) -> f64 {
        let scale = other.max_abs();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let d = (self.0[i][j] - other.0[i][j]).norm();
                let r = other.0[i][j].norm();
                let denom = if r > 1e-14 * scale { r } else { scale };
                let rel = if denom > 0.0 { d / denom } else { d };
                worst = worst.max(rel);
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

impl Index<(usize, usize)> for Mat2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
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

// Serialised as [[re, im], ...] in row-major order.
impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(4))?;
        for z in self.0.iter().flatten() {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}
