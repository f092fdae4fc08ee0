// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-1/2 silver atoms crossing a Stern–Gerlach magnet, parametrized by
//! the distance `L = V t` travelled through the field.
//!
//! The dipole field `b` along `z` sets the observable, `omega = 2 mu_B b / hbar`.
//! The gradient `beta_grad` enters through the effective drive
//! `g(t) = mu_B^2 beta_grad^2 t^2 S(t) / (m_Ag hbar)`, parallel to `z`.

use serde::{Deserialize, Serialize};

use crate::analytic::bloch_parallel_closed_form;
use crate::dynamics::{integrate_bloch_with, log_grid, Abscissa, Drive, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{casimirs_from_cos, CasimirPair};
use crate::potentials::{PotentialProfile, GAMMA_REL_TOL};
use crate::state::{BlochVector, Branch, ObservableSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Bohr magneton, eV/T.
    pub mu_b: f64,
    /// Reduced Planck constant, eV s.
    pub hbar: f64,
    /// Electron gyromagnetic ratio, 1/(s T).
    pub gamma_e: f64,
    /// Silver atom mass, eV s^2 / m^2.
    pub m_ag: f64,
}

impl PhysicalConstants {
    pub const STANDARD: PhysicalConstants =
        PhysicalConstants { mu_b: 5.788e-5, hbar: 6.582e-16, gamma_e: 1.758736e11, m_ag: 1.11e-6 };

    /// Relative mismatch between `gamma_e` and `2 mu_B / hbar`.
    pub fn gyromagnetic_mismatch(&self) -> f64 {
        (2.0 * self.mu_b / self.hbar / self.gamma_e - 1.0).abs()
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgConfig {
    /// Dipole field magnitude, T.
    pub b_field: f64,
    /// Field gradient, T/m.
    pub beta_grad: f64,
    /// Beam speed, m/s.
    #[serde(rename = "V")]
    pub speed: f64,
    /// Switch-off centre, s.
    pub t_end: f64,
    /// Switch-off width, s.
    pub t_w: f64,
    /// First nonzero sample of the distance grid, m.
    pub l_start: f64,
    /// End of the distance grid, m.
    pub l_final: f64,
    pub branch: Branch,
    pub constants: PhysicalConstants,
}

/// Dipole field giving `omega = 1e8 rad/s` with the standard constants.
pub fn default_b_field() -> f64 {
    1e8 * PhysicalConstants::STANDARD.hbar / (2.0 * PhysicalConstants::STANDARD.mu_b)
}

impl Default for SgConfig {
    fn default() -> Self {
        Self {
            b_field: default_b_field(),
            beta_grad: 1e3,
            speed: 500.0,
            t_end: 1e-4,
            t_w: 5e-6,
            l_start: 1e-7,
            l_final: 0.2,
            branch: Branch::Plus,
            constants: PhysicalConstants::STANDARD,
        }
    }
}

impl SgConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("b_field", self.b_field),
            ("beta_grad", self.beta_grad),
            ("V", self.speed),
            ("t_end", self.t_end),
            ("t_w", self.t_w),
            ("l_start", self.l_start),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.l_final > self.l_start && self.l_final.is_finite()) {
            return Err(Error::domain("l_final must exceed l_start"));
        }
        Ok(())
    }

    /// `2 mu_B b / hbar`, rad/s.
    pub fn omega_rate(&self) -> f64 {
        2.0 * self.constants.mu_b * self.b_field / self.constants.hbar
    }

    /// Coefficient of `t^2` in the drive, rad/s^3.
    pub fn prefactor(&self) -> f64 {
        let c = &self.constants;
        c.mu_b * c.mu_b * self.beta_grad * self.beta_grad / (c.m_ag * c.hbar)
    }

    /// The drive as a function of time.
    pub fn time_profile(&self) -> Result<PotentialProfile> {
        PotentialProfile::stern_gerlach_time(self.prefactor(), self.t_end, self.t_w)
    }

    pub fn observable(&self) -> Result<ObservableSpec> {
        omega_from_b(self.b_field, &self.constants)
    }

    /// Drive rate at distance `L`, rad/s.
    pub fn drive_rate(&self, l: f64) -> Result<f64> {
        if !(l >= 0.0) {
            return Err(Error::domain(format!("L = {l} must be >= 0")));
        }
        Ok(self.time_profile()?.rate(l / self.speed))
    }

    /// `Gamma` accumulated over the first `L` metres.
    pub fn gamma(&self, l: f64) -> Result<f64> {
        if !(l >= 0.0) {
            return Err(Error::domain(format!("L = {l} must be >= 0")));
        }
        self.time_profile()?.gamma(l / self.speed, GAMMA_REL_TOL)
    }

    /// Distance grid `[0, l_start, ..., l_final]`.
    pub fn grid(&self, samples_per_decade: u32) -> Vec<f64> {
        log_grid(self.l_start, self.l_final, samples_per_decade)
    }

    fn drive(&self) -> Result<Drive> {
        let spec = self.observable()?;
        Ok(Drive { omega: spec.vector(), g_hat: [0.0, 0.0, 1.0], profile: self.time_profile()?, branch: self.branch })
    }
}

/// z-aligned observable of a dipole field `b_field`.
pub fn omega_from_b(b_field: f64, constants: &PhysicalConstants) -> Result<ObservableSpec> {
    if !(b_field > 0.0) {
        return Err(Error::DegenerateObservable);
    }
    ObservableSpec::new(2.0 * constants.mu_b * b_field / constants.hbar, 0.0, 0.0)
}

/// Numerical evolution over the distance grid of `cfg`. Only the tolerances,
/// `samples_per_decade` and `max_steps` of `integ` are used.
pub fn integrate_bloch_l(n0: &BlochVector, cfg: &SgConfig, integ: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let drive = cfg.drive()?;
    let zero_p = 0.5 * (1.0 + cfg.branch.sign() * n0.as_array()[2]) <= f64::EPSILON;
    integrate_bloch_with(
        &drive,
        n0,
        &cfg.grid(integ.samples_per_decade),
        1.0 / cfg.speed,
        Abscissa::Distance,
        &integ.ode_options(),
        zero_p,
    )
}

/// Closed form at distance `L`.
pub fn bloch_sg_analytic(l: f64, n0: &BlochVector, cfg: &SgConfig) -> Result<BlochVector> {
    let phase = cfg.omega_rate() * l / cfg.speed;
    bloch_parallel_closed_form(n0, &[0.0, 0.0, 1.0], phase, cfg.gamma(l)?, cfg.branch)
}

/// Casimirs at distance `L`; the effective drive is `lambda g z_hat`.
pub fn sg_casimirs(l: f64, cfg: &SgConfig) -> Result<CasimirPair> {
    Ok(casimirs_from_cos(cfg.omega_rate(), cfg.drive_rate(l)?, cfg.branch.sign()))
}

/// `|dn/dL|` at each sample, 1/m.
pub fn sg_rate_of_change(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.abscissa != Abscissa::Distance {
        return Err(Error::domain("trajectory is not distance-parametrized"));
    }
    Ok(traj.samples.iter().map(|s| s.rate).collect())
}

/// Smallest sampled `L` with `|n3| > threshold`.
pub fn transition_length(traj: &Trajectory, threshold: f64) -> Option<f64> {
    traj.samples.iter().find(|s| s.n.as_array()[2].abs() > threshold).map(|s| s.t)
}
