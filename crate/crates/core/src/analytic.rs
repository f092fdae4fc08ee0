// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form evolution when the drive is parallel (`lambda = +1`) or
//! antiparallel (`lambda = -1`) to the observable.
//!
//! With `s = lambda Gamma(t)` and `phi = omega t`:
//!
//! ```text
//! n(t) = [cos(phi) sech(s) n0 + (tanh(s) + (1 - cos(phi) sech(s)) c) w
//!         + sin(phi) sech(s) (w x n0)] / (1 + tanh(s) c),    c = w . n0
//! ```
//!
//! Hyperbolic functions of large arguments are never formed: beyond
//! [`LOG_DOMAIN_SEAM`] everything is written in terms of `exp(-|s|)`.

use num_complex::Complex64;

use crate::complex2::{Complex2x2, I};
use crate::dynamics::DeviceConfig;
use crate::error::{Error, Result};
use crate::potentials::{PotentialProfile, GAMMA_REL_TOL};
use crate::state::{BlochVector, Branch, ObservableSpec, Projector2};
use crate::vec3::{self, Vec3};

/// `Gamma` above which the log-domain path is used.
pub const LOG_DOMAIN_SEAM: f64 = 30.0;
/// Largest `Gamma` accepted by the unnormalized propagator.
pub const RAW_PROPAGATOR_LIMIT: f64 = 700.0;

#[derive(Debug, Clone)]
pub struct ParallelScenario {
    pub spec: ObservableSpec,
    pub profile: PotentialProfile,
    pub branch: Branch,
}

impl ParallelScenario {
    pub fn new(spec: ObservableSpec, profile: PotentialProfile, branch: Branch) -> Result<Self> {
        spec.ensure_nondegenerate()?;
        Ok(Self { spec, profile, branch })
    }

    /// The equivalent numerical device (`g_hat = omega_hat`).
    pub fn device(&self) -> DeviceConfig {
        DeviceConfig::parallel(self.profile.clone())
    }

    /// `Gamma(t)`, in closed form when available.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        match self.profile.gamma_closed_form(t) {
            Some(g) => Ok(g),
            None => self.profile.gamma(t, GAMMA_REL_TOL),
        }
    }
}

struct Hyperbolic {
    sech: f64,
    /// `1 + tanh(s) c`
    den: f64,
    /// `tanh(s) + c`
    tanh_plus_c: f64,
}

fn hyperbolic(s: f64, c: f64) -> Hyperbolic {
    if s.abs() <= LOG_DOMAIN_SEAM {
        let tanh = s.tanh();
        Hyperbolic { sech: 1.0 / s.cosh(), den: 1.0 + tanh * c, tanh_plus_c: tanh + c }
    } else {
        let sigma = s.signum();
        let e1 = (-s.abs()).exp();
        let e2 = e1 * e1;
        let tail = 2.0 * e2 / (1.0 + e2);
        Hyperbolic {
            sech: 2.0 * e1 / (1.0 + e2),
            den: ((1.0 + sigma * c) + e2 * (1.0 - sigma * c)) / (1.0 + e2),
            tanh_plus_c: (sigma + c) - sigma * tail,
        }
    }
}

/// The closed form for precession angle `phase = omega t` and integrated
/// drive `gamma`.
pub fn bloch_parallel_closed_form(
    n0: &BlochVector,
    omega_hat: &Vec3,
    phase: f64,
    gamma: f64,
    branch: Branch,
) -> Result<BlochVector> {
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!("Gamma = {gamma} must be >= 0")));
    }
    let n = n0.as_array();
    let c = vec3::dot(omega_hat, n);
    let h = hyperbolic(branch.sign() * gamma, c);
    if h.den <= 1e-300 {
        return Err(Error::DegenerateBranch("n0 is the opposite eigenstate and the drive has saturated".into()));
    }
    let (sin, cos) = phase.sin_cos();
    let a = cos * h.sech;
    let b = h.tanh_plus_c - c * a;
    let d = sin * h.sech;
    let wxn = vec3::cross(omega_hat, n);
    let out = [0, 1, 2].map(|k| (a * n[k] + b * omega_hat[k] + d * wxn[k]) / h.den);
    Ok(BlochVector::new_unchecked(out))
}

/// Closed-form Bloch vector at time `t`; `gamma_fn` supplies `Gamma(t)`.
pub fn bloch_parallel(
    t: f64,
    n0: &BlochVector,
    scenario: &ParallelScenario,
    gamma_fn: impl Fn(f64) -> f64,
) -> Result<BlochVector> {
    let w = scenario.spec.unit_direction();
    bloch_parallel_closed_form(n0, &w, scenario.spec.omega_rate * t, gamma_fn(t), scenario.branch)
}

fn rotation(w: &Vec3, phase: f64) -> Complex2x2 {
    let (s, c) = (0.5 * phase).sin_cos();
    Complex2x2::identity().scale_real(c) - Complex2x2::from_real_pauli(0.0, *w).scale(I * s)
}

/// `(cosh(s/2) I + sinh(s/2) w.sigma)(cos(phi/2) I - i sin(phi/2) w.sigma)`
pub fn k_parallel(t: f64, scenario: &ParallelScenario, gamma_fn: impl Fn(f64) -> f64) -> Result<Complex2x2> {
    let gamma = gamma_fn(t);
    if gamma > RAW_PROPAGATOR_LIMIT {
        return Err(Error::Overflow(format!(
            "Gamma = {gamma} overflows the raw propagator; use k_parallel_normalized"
        )));
    }
    let s = scenario.branch.sign() * gamma;
    let w = scenario.spec.unit_direction();
    let h = Complex2x2::identity().scale_real((0.5 * s).cosh())
        + Complex2x2::from_real_pauli(0.0, w).scale_real((0.5 * s).sinh());
    Ok(h * rotation(&w, scenario.spec.omega_rate * t))
}

/// `cosh(s/2) / sqrt(2 cosh s)` and `sinh(s/2) / sqrt(2 cosh s)` via `exp(-|s|)`.
pub fn normalized_coefficients(s: f64) -> (f64, f64) {
    let e1 = (-s.abs()).exp();
    let denom = 2.0 * (1.0 + e1 * e1).sqrt();
    ((1.0 + e1) / denom, s.signum() * (1.0 - e1) / denom)
}

/// Propagator normalized so that `Tr(K K^dagger) = 1`.
pub fn k_parallel_normalized(t: f64, scenario: &ParallelScenario, gamma_fn: impl Fn(f64) -> f64) -> Complex2x2 {
    let s = scenario.branch.sign() * gamma_fn(t);
    let (a, b) = if s == 0.0 { (std::f64::consts::FRAC_1_SQRT_2, 0.0) } else { normalized_coefficients(s) };
    let w = scenario.spec.unit_direction();
    let h = Complex2x2::identity().scale_real(a) + Complex2x2::from_real_pauli(0.0, w).scale_real(b);
    h * rotation(&w, scenario.spec.omega_rate * t)
}

/// The saturated propagator `Pi_lambda exp(-i lambda omega t / 2)`.
pub fn saturated_propagator(t: f64, scenario: &ParallelScenario) -> Result<Complex2x2> {
    let phase = Complex64::from_polar(1.0, -scenario.branch.sign() * 0.5 * scenario.spec.omega_rate * t);
    Ok(scenario.spec.projector(scenario.branch)?.matrix().scale(phase))
}

/// The von Neumann projector the closed form converges to.
pub fn projector_limit(scenario: &ParallelScenario) -> Result<Projector2> {
    scenario.spec.projector(scenario.branch)
}

/// Entrywise distance between `a` and `b` after removing the best global phase.
pub fn distance_up_to_phase(a: &Complex2x2, b: &Complex2x2) -> f64 {
    let overlap = (b.adjoint() * *a).trace();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    (*a - b.scale(phase)).max_abs()
}
