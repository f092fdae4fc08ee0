// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical integration of the measurement dynamics in three equivalent
//! representations: Bloch vector, density matrix and the linear propagator
//! `K(t)`, plus the mixing weight `epsilon(t)` of a convex split.

mod bloch;
mod density;
mod epsilon;
mod propagator;

pub use bloch::{bloch_rhs, integrate_bloch, integrate_bloch_with, rate_of_change};
pub use density::{density_rhs, integrate_density, DensityTrajectory};
pub use epsilon::{epsilon_via_integral, epsilon_via_propagator, recombine};
pub use propagator::{integrate_propagator, propagator_rhs, PropagatorHistory, PropagatorState};

use serde::{Deserialize, Serialize};

use crate::complex2::Complex2x2;
use crate::error::{Error, Result};
use crate::geometry::{g_direction_polar, DeviceGeometry};
use crate::ode::{Dopri5Options, OdeStats};
use crate::potentials::PotentialProfile;
use crate::state::{BlochVector, Branch, ObservableSpec};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// First nonzero sample of the logarithmic output grid.
    pub t_start: f64,
    pub t_final: f64,
    pub samples_per_decade: u32,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, t_start: 1e-9, t_final: 1e-3, samples_per_decade: 200, max_steps: 20_000_000 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::domain("rtol and atol must be positive"));
        }
        if !(self.t_start > 0.0 && self.t_start < self.t_final && self.t_final.is_finite()) {
            return Err(Error::domain(format!(
                "need 0 < t_start < t_final, got t_start = {}, t_final = {}",
                self.t_start, self.t_final
            )));
        }
        if self.samples_per_decade < 1 {
            return Err(Error::domain("samples_per_decade must be >= 1"));
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be positive"));
        }
        Ok(())
    }

    /// `0` followed by a logarithmic grid from `t_start` to `t_final`.
    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.t_start, self.t_final, self.samples_per_decade)
    }

    pub fn ode_options(&self) -> Dopri5Options {
        Dopri5Options { rtol: self.rtol, atol: self.atol, max_steps: self.max_steps, ..Default::default() }
    }
}

/// `[0, start, ..., end]` with `per_decade` points per factor of ten.
pub fn log_grid(start: f64, end: f64, per_decade: u32) -> Vec<f64> {
    let decades = (end / start).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    let mut grid = Vec::with_capacity(n + 2);
    grid.push(0.0);
    for k in 0..n {
        grid.push(start * 10f64.powf(decades * k as f64 / n as f64));
    }
    grid.push(end);
    grid
}

/// How the drive direction `g_hat` is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveDirection {
    /// `(theta, Theta, chart_branch)` relative to the observable.
    Chart(DeviceGeometry),
    /// Explicit polar angles of `g_hat`.
    Polar { theta: f64, phi: f64 },
    /// `g_hat = omega_hat`.
    Parallel,
}

#[derive(Debug, Clone)]
pub struct DeviceConfig {
    pub direction: DriveDirection,
    pub profile: PotentialProfile,
}

impl DeviceConfig {
    pub fn new(direction: DriveDirection, profile: PotentialProfile) -> Self {
        Self { direction, profile }
    }

    pub fn chart(geometry: DeviceGeometry, profile: PotentialProfile) -> Self {
        Self::new(DriveDirection::Chart(geometry), profile)
    }

    pub fn parallel(profile: PotentialProfile) -> Self {
        Self::new(DriveDirection::Parallel, profile)
    }

    /// Unit drive direction for this observable, validating admissibility.
    pub fn g_unit(&self, spec: &ObservableSpec) -> Result<Vec3> {
        match self.direction {
            DriveDirection::Chart(geometry) => {
                geometry.check_admissible(spec.alpha)?;
                geometry.g_direction(spec.alpha, spec.beta_az)
            }
            DriveDirection::Polar { theta, phi } => Ok(g_direction_polar(theta, phi)),
            DriveDirection::Parallel => Ok(spec.unit_direction()),
        }
    }

    /// `cos Theta` between drive and observable.
    pub fn cos_relative_angle(&self, spec: &ObservableSpec) -> Result<f64> {
        Ok(vec3::dot(&self.g_unit(spec)?, &spec.unit_direction()))
    }
}

/// Right-hand side data of one branch: `omega`, `lambda g(t) g_hat`.
#[derive(Debug, Clone)]
pub struct Drive {
    pub omega: Vec3,
    pub g_hat: Vec3,
    pub profile: PotentialProfile,
    pub branch: Branch,
}

impl Drive {
    pub fn new(spec: &ObservableSpec, device: &DeviceConfig, branch: Branch) -> Result<Self> {
        spec.ensure_nondegenerate()?;
        Ok(Self { omega: spec.vector(), g_hat: device.g_unit(spec)?, profile: device.profile.clone(), branch })
    }

    pub fn g_rate(&self, t: f64) -> f64 {
        self.profile.rate(t)
    }

    /// `omega x n + lambda g (g_hat - n (g_hat . n))`
    pub fn bloch_rhs(&self, t: f64, n: &Vec3) -> Vec3 {
        bloch_rhs(t, n, &self.omega, &self.profile, &self.g_hat, self.branch)
    }

    /// `Omega = omega . sigma / 2`
    pub fn omega_matrix(&self) -> Complex2x2 {
        Complex2x2::from_real_pauli(0.0, vec3::scale(&self.omega, 0.5))
    }

    /// `G(t) = lambda g(t) g_hat . sigma / 2`
    pub fn g_matrix(&self, t: f64) -> Complex2x2 {
        Complex2x2::from_real_pauli(0.0, vec3::scale(&self.g_hat, 0.5 * self.branch.sign() * self.g_rate(t)))
    }
}

/// Independent variable of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Abscissa {
    /// Time in seconds.
    Time,
    /// Distance travelled through the magnet, in metres.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    /// Time (s) or distance (m), see [`Trajectory::abscissa`].
    pub t: f64,
    pub n: BlochVector,
    pub norm: f64,
    /// `|dn/dt|` (1/s) or `|dn/dL|` (1/m).
    pub rate: f64,
    /// Drive rate `g` in rad/s.
    pub g_rate: f64,
    pub epsilon: Option<f64>,
    /// `int g (g_hat . n) dt` from the start, used for the mixing weight.
    pub drive_work: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    /// Number of times `|n|` was pulled back onto the unit sphere.
    pub renormalizations: usize,
    /// The branch had Born probability zero.
    pub zero_probability_branch: bool,
}

impl Diagnostics {
    fn from_stats(stats: &OdeStats, zero_probability_branch: bool) -> Self {
        Self {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            rhs_evals: stats.rhs_evals,
            renormalizations: stats.renormalizations,
            zero_probability_branch,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub abscissa: Abscissa,
    pub branch: Branch,
    pub samples: Vec<TrajectorySample>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn states(&self) -> Vec<Vec3> {
        self.samples.iter().map(|s| s.n.into_array()).collect()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn final_state(&self) -> Option<BlochVector> {
        self.last().map(|s| s.n)
    }

    /// Largest Euclidean distance between matching samples.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.samples.len() != other.samples.len() || self.samples.iter().zip(&other.samples).any(|(a, b)| a.t != b.t)
        {
            return Err(Error::GridMismatch("trajectories are sampled on different grids".into()));
        }
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| a.n.distance(&b.n)).fold(0.0, f64::max))
    }

    /// First sample with rate below `threshold`.
    pub fn first_time_below(&self, threshold: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.rate < threshold).map(|s| s.t)
    }

    /// First abscissa from which the rate stays below `threshold` for the rest of the run.
    pub fn settling_time(&self, threshold: f64) -> Option<f64> {
        let last_above = self.samples.iter().rposition(|s| s.rate >= threshold);
        match last_above {
            None => self.samples.first().map(|s| s.t),
            Some(i) => self.samples.get(i + 1).map(|s| s.t),
        }
    }
}

pub(crate) fn zero_probability(n0: &BlochVector, spec: &ObservableSpec, branch: Branch) -> bool {
    0.5 * (1.0 + branch.sign() * n0.dot(&spec.unit_direction())) <= f64::EPSILON
}
