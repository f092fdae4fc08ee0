// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-level states, observables and their spectral data.
//!
//! All generator magnitudes are stored divided by hbar, i.e. as angular
//! rates in rad/s. An observable `Omega = (omega/2) omega_hat . sigma` is
//! therefore described by `omega_rate = omega / hbar`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex2::Complex2x2;
use crate::error::{Error, Result};
use crate::geometry::unit_omega;
use crate::vec3::{self, Vec3};

/// Tolerance for |n| <= 1 when constructing a [`BlochVector`].
pub const BLOCH_NORM_TOL: f64 = 1e-10;
/// Absolute tolerance for Hermiticity, trace and positivity checks.
pub const MATRIX_TOL: f64 = 1e-12;

/// Outcome label selecting the sign of the driving term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }
}

impl TryFrom<i32> for Branch {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            other => Err(Error::domain(format!("branch must be +1 or -1, got {other}"))),
        }
    }
}

impl From<Branch> for i32 {
    fn from(b: Branch) -> i32 {
        b.sign() as i32
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Plus => write!(f, "+1"),
            Branch::Minus => write!(f, "-1"),
        }
    }
}

/// Real 3-vector `n` with `|n| <= 1` parametrizing `rho = (I + n . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector(Vec3);

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector([0.0; 3]);

    pub fn new(n: Vec3) -> Result<Self> {
        if n.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(format!("Bloch vector has non-finite entries: {n:?}")));
        }
        let r = vec3::norm(&n);
        if r > 1.0 + BLOCH_NORM_TOL {
            return Err(Error::domain(format!("|n| = {r} exceeds 1")));
        }
        Ok(Self(n))
    }

    /// Skips the norm check. Integrators use this for states that may sit
    /// a rounding error outside the ball.
    pub(crate) fn new_unchecked(n: Vec3) -> Self {
        Self(n)
    }

    pub fn as_array(&self) -> &Vec3 {
        &self.0
    }

    pub fn into_array(self) -> Vec3 {
        self.0
    }

    pub fn norm(&self) -> f64 {
        vec3::norm(&self.0)
    }

    pub fn dot(&self, v: &Vec3) -> f64 {
        vec3::dot(&self.0, v)
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        vec3::distance(&self.0, &other.0)
    }

    /// `rho = (I + n . sigma) / 2`
    pub fn to_density(&self) -> DensityMatrix2 {
        DensityMatrix2 { matrix: Complex2x2::from_real_pauli(0.5, vec3::scale(&self.0, 0.5)) }
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(n: [f64; 3]) -> Result<Self> {
        Self::new(n)
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(b: BlochVector) -> Self {
        b.0
    }
}

pub fn density_from_bloch(n: &BlochVector) -> DensityMatrix2 {
    n.to_density()
}

pub fn bloch_from_density(rho: &DensityMatrix2) -> BlochVector {
    rho.bloch()
}

/// Hermitian, unit-trace, positive semidefinite 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    matrix: Complex2x2,
}

impl DensityMatrix2 {
    /// Validates Hermiticity, unit trace and positivity to [`MATRIX_TOL`].
    pub fn new(matrix: Complex2x2) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::domain("density matrix has non-finite entries"));
        }
        let defect = matrix.hermiticity_defect();
        if defect > MATRIX_TOL {
            return Err(Error::domain(format!("matrix is not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > MATRIX_TOL {
            return Err(Error::domain(format!("trace is {tr}, expected 1")));
        }
        let (lo, _) = hermitian_eigenvalues(&matrix);
        if lo < -MATRIX_TOL {
            return Err(Error::domain(format!("matrix has negative eigenvalue {lo:e}")));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: Complex2x2) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.matrix
    }

    /// `n_k = Tr(rho sigma_k)`
    pub fn bloch(&self) -> BlochVector {
        let (_, c) = self.matrix.pauli_components();
        BlochVector::new_unchecked([2.0 * c[0].re, 2.0 * c[1].re, 2.0 * c[2].re])
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }
}

/// Eigenvalues (ascending) of the Hermitian part of a 2x2 matrix.
pub fn hermitian_eigenvalues(m: &Complex2x2) -> (f64, f64) {
    let a = m.m[0][0].re;
    let d = m.m[1][1].re;
    let b = (m.m[0][1] + m.m[1][0].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - half_gap, mean + half_gap)
}

/// Observable `Omega = (omega_rate / 2) omega_hat(alpha, beta_az) . sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    /// omega / hbar in rad/s.
    pub omega_rate: f64,
    /// Polar angle of omega_hat.
    pub alpha: f64,
    /// Azimuth of omega_hat.
    pub beta_az: f64,
}

impl ObservableSpec {
    pub fn new(omega_rate: f64, alpha: f64, beta_az: f64) -> Result<Self> {
        if !(omega_rate.is_finite() && omega_rate >= 0.0) {
            return Err(Error::domain(format!("omega_rate must be finite and >= 0, got {omega_rate}")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, pi], got {alpha}")));
        }
        if !beta_az.is_finite() {
            return Err(Error::domain("beta_az must be finite"));
        }
        Ok(Self { omega_rate, alpha, beta_az })
    }

    pub fn unit_direction(&self) -> Vec3 {
        unit_omega(self.alpha, self.beta_az)
    }

    /// The full vector `omega_rate * omega_hat`.
    pub fn vector(&self) -> Vec3 {
        vec3::scale(&self.unit_direction(), self.omega_rate)
    }

    pub fn matrix(&self) -> Complex2x2 {
        observable_matrix(self)
    }

    pub fn ensure_nondegenerate(&self) -> Result<()> {
        if self.omega_rate == 0.0 {
            Err(Error::DegenerateObservable)
        } else {
            Ok(())
        }
    }

    pub fn projectors(&self) -> Result<(Projector2, Projector2)> {
        spectral_projectors(self)
    }

    pub fn projector(&self, branch: Branch) -> Result<Projector2> {
        self.ensure_nondegenerate()?;
        Ok(Projector2::along(&self.unit_direction(), branch))
    }

    /// Bloch vector of the eigenstate `lambda * omega_hat`.
    pub fn eigenstate(&self, branch: Branch) -> BlochVector {
        BlochVector::new_unchecked(vec3::scale(&self.unit_direction(), branch.sign()))
    }
}

/// Rank-one spectral projector `(I + lambda omega_hat . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector2 {
    matrix: Complex2x2,
}

impl Projector2 {
    pub(crate) fn along(unit: &Vec3, branch: Branch) -> Self {
        Self { matrix: Complex2x2::from_real_pauli(0.5, vec3::scale(unit, 0.5 * branch.sign())) }
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.matrix
    }

    pub fn bloch(&self) -> BlochVector {
        DensityMatrix2::new_unchecked(self.matrix).bloch()
    }
}

pub fn observable_matrix(spec: &ObservableSpec) -> Complex2x2 {
    Complex2x2::from_real_pauli(0.0, vec3::scale(&spec.vector(), 0.5))
}

/// `(Pi_plus, Pi_minus)`.
pub fn spectral_projectors(spec: &ObservableSpec) -> Result<(Projector2, Projector2)> {
    Ok((spec.projector(Branch::Plus)?, spec.projector(Branch::Minus)?))
}

/// Born rule `p_lambda = (1 + lambda omega_hat . n0) / 2`.
pub fn born_probability(n0: &BlochVector, spec: &ObservableSpec, branch: Branch) -> Result<f64> {
    spec.ensure_nondegenerate()?;
    let p = 0.5 * (1.0 + branch.sign() * n0.dot(&spec.unit_direction()));
    Ok(p.clamp(0.0, 1.0))
}

/// Post-measurement state `Pi rho Pi / Tr(Pi rho)`, which for a rank-one
/// projector is the eigenstate itself.
pub fn von_neumann_projected_state(n0: &BlochVector, spec: &ObservableSpec, branch: Branch) -> Result<BlochVector> {
    let p = born_probability(n0, spec, branch)?;
    if p <= f64::EPSILON {
        return Err(Error::DegenerateBranch(format!("branch {branch} has Born probability {p:e}")));
    }
    Ok(spec.eigenstate(branch))
}
