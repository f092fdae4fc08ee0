// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense 2x2 complex matrices and the Pauli basis.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    pub m: [[Complex64; 2]; 2],
}

impl Complex2x2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    /// Pauli matrix `sigma_k` for `k` in 1..=3.
    pub fn pauli(k: usize) -> Self {
        match k {
            1 => Self::new(ZERO, ONE, ONE, ZERO),
            2 => Self::new(ZERO, -I, I, ZERO),
            3 => Self::new(ONE, ZERO, ZERO, -ONE),
            _ => panic!("Pauli index must be 1, 2 or 3, got {k}"),
        }
    }

    /// `c0 I + c . sigma`
    pub fn from_pauli(c0: Complex64, c: [Complex64; 3]) -> Self {
        Self::new(c0 + c[2], c[0] - I * c[1], c[0] + I * c[1], c0 - c[2])
    }

    /// `c0 I + v . sigma` for real coefficients.
    pub fn from_real_pauli(c0: f64, v: [f64; 3]) -> Self {
        Self::from_pauli(c0.into(), [v[0].into(), v[1].into(), v[2].into()])
    }

    /// Inverse of [`from_pauli`](Self::from_pauli): `c_k = Tr(M sigma_k) / 2`.
    pub fn pauli_components(&self) -> (Complex64, [Complex64; 3]) {
        let [[a, b], [c, d]] = self.m;
        let c0 = (a + d) * 0.5;
        let c1 = (b + c) * 0.5;
        let c2 = (c - b) * 0.5 * -I;
        let c3 = (a - d) * 0.5;
        (c0, [c1, c2, c3])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Matrix inverse, `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let m = self.m;
        let inv = det.inv();
        Some(Self::new(m[1][1] * inv, -m[0][1] * inv, -m[1][0] * inv, m[0][0] * inv))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `sqrt(Tr(M M^dagger))`
    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real-packed layout used by the ODE integrator: `[re00, im00, re01, im01, ...]`.
    pub fn to_real8(&self) -> [f64; 8] {
        let m = self.m;
        [m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re, m[1][1].im]
    }

    pub fn from_real8(y: &[f64]) -> Self {
        Self::new(
            Complex64::new(y[0], y[1]),
            Complex64::new(y[2], y[3]),
            Complex64::new(y[4], y[5]),
            Complex64::new(y[6], y[7]),
        )
    }
}

impl Default for Complex2x2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for Complex2x2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.m, o.m);
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl AddAssign for Complex2x2 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Complex2x2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.m, o.m);
        Self::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Neg for Complex2x2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl Mul for Complex2x2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.m, o.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Complex64> for Complex2x2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for Complex2x2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale_real(s)
    }
}
