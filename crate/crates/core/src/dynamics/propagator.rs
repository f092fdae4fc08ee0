// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

use super::{Abscissa, DeviceConfig, Diagnostics, Drive, IntegratorConfig, Trajectory, TrajectorySample};
use crate::complex2::{Complex2x2, I};
use crate::error::{Error, Result};
use crate::ode::{self, OdeSystem};
use crate::state::{BlochVector, Branch, DensityMatrix2, ObservableSpec};
use crate::vec3;

/// `dK/dt = -i (Omega + i G) K`
pub fn propagator_rhs(k: &Complex2x2, omega: &Complex2x2, g: &Complex2x2) -> Complex2x2 {
    (*omega + g.scale(I)).scale(-I) * *k
}

/// `K = exp(log_scale) * k` with `Tr(k k^dagger) = 2`, so that `K(0) = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorState {
    pub k: Complex2x2,
    pub log_scale: f64,
}

impl PropagatorState {
    pub const INITIAL: PropagatorState = PropagatorState { k: Complex2x2::identity(), log_scale: 0.0 };

    fn normalized(k: Complex2x2, log_scale: f64) -> Self {
        let norm = (0.5 * k.to_real8().iter().map(|v| v * v).sum::<f64>()).sqrt();
        Self { k: k.scale_real(1.0 / norm), log_scale: log_scale + norm.ln() }
    }

    /// `k` scaled to `Tr(k k^dagger) = 1`.
    pub fn unit_trace(&self) -> Complex2x2 {
        self.k.scale_real(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `k rho k^dagger`, unnormalized.
    pub fn sandwich(&self, rho: &Complex2x2) -> Complex2x2 {
        self.k * *rho * self.k.adjoint()
    }

    /// `K rho0 K^dagger / Tr(...)`
    pub fn evolve(&self, rho0: &DensityMatrix2) -> Result<BlochVector> {
        let m = self.sandwich(rho0.matrix());
        let tr = m.trace().re;
        if !(tr > 0.0) {
            return Err(Error::DegenerateBranch("Tr(K rho0 K^dagger) vanishes".into()));
        }
        let (_, c) = m.scale_real(1.0 / tr).pauli_components();
        Ok(BlochVector::new_unchecked([2.0 * c[0].re, 2.0 * c[1].re, 2.0 * c[2].re]))
    }
}

struct PropagatorSystem<'a> {
    drive: &'a Drive,
    omega: Complex2x2,
}

impl OdeSystem<8> for PropagatorSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 8], dy: &mut [f64; 8]) {
        let k = Complex2x2::from_real8(y);
        *dy = propagator_rhs(&k, &self.omega, &self.drive.g_matrix(t)).to_real8();
    }

    fn renormalize(&self, y: &mut [f64; 8]) -> Option<f64> {
        let norm = (0.5 * y.iter().map(|v| v * v).sum::<f64>()).sqrt();
        for v in y.iter_mut() {
            *v /= norm;
        }
        Some(norm.ln())
    }
}

/// Sampled propagator of one branch. Independent of the initial state.
#[derive(Debug, Clone)]
pub struct PropagatorHistory {
    pub times: Vec<f64>,
    pub states: Vec<PropagatorState>,
    pub drive: Drive,
    pub diagnostics: Diagnostics,
}

impl PropagatorHistory {
    /// Bloch trajectory of `rho0` under this propagator.
    pub fn trajectory(&self, rho0: &DensityMatrix2) -> Result<Trajectory> {
        let samples = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| {
                let n = s.evolve(rho0)?;
                Ok(TrajectorySample {
                    t,
                    n,
                    norm: n.norm(),
                    rate: vec3::norm(&self.drive.bloch_rhs(t, n.as_array())),
                    g_rate: self.drive.g_rate(t),
                    epsilon: None,
                    drive_work: f64::NAN,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { abscissa: Abscissa::Time, branch: self.drive.branch, samples, diagnostics: self.diagnostics })
    }
}

pub fn integrate_propagator(
    spec: &ObservableSpec,
    device: &DeviceConfig,
    branch: Branch,
    cfg: &IntegratorConfig,
) -> Result<PropagatorHistory> {
    cfg.validate()?;
    let drive = Drive::new(spec, device, branch)?;
    let sys = PropagatorSystem { drive: &drive, omega: drive.omega_matrix() };
    let grid = cfg.grid();
    let y0 = Complex2x2::identity().to_real8();
    let result = ode::integrate(&sys, 0.0, y0, &grid, &cfg.ode_options());
    let (out, failure) = match result {
        Ok(out) => (out, None),
        Err(fail) => (fail.partial, Some((fail.reason, fail.t))),
    };
    let states = out
        .states
        .iter()
        .zip(&out.log_scales)
        .map(|(y, &ls)| PropagatorState::normalized(Complex2x2::from_real8(y), ls))
        .collect();
    let history =
        PropagatorHistory { times: out.times, states, diagnostics: Diagnostics::from_stats(&out.stats, false), drive };
    match failure {
        None => Ok(history),
        Some((reason, t)) => {
            let rho = DensityMatrix2::new_unchecked(Complex2x2::identity().scale_real(0.5));
            let partial = history.trajectory(&rho).unwrap_or_else(|_| Trajectory {
                abscissa: Abscissa::Time,
                branch,
                samples: Vec::new(),
                diagnostics: history.diagnostics,
            });
            Err(Error::Integration { reason, t, partial: Box::new(partial) })
        }
    }
}
