// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

use super::{
    zero_probability, Abscissa, DeviceConfig, Diagnostics, Drive, IntegratorConfig, Trajectory, TrajectorySample,
};
use crate::error::{Error, Result};
use crate::ode::{self, Dopri5Options, OdeSystem};
use crate::potentials::PotentialProfile;
use crate::state::{BlochVector, Branch, ObservableSpec};
use crate::vec3::{self, Vec3};

/// `omega x n + lambda g(t) (g_hat - n (g_hat . n))`, in 1/s.
pub fn bloch_rhs(t: f64, n: &Vec3, omega: &Vec3, profile: &PotentialProfile, g_hat: &Vec3, branch: Branch) -> Vec3 {
    let precession = vec3::cross(omega, n);
    let lg = branch.sign() * profile.rate(t);
    let gn = vec3::dot(g_hat, n);
    [
        precession[0] + lg * (g_hat[0] - n[0] * gn),
        precession[1] + lg * (g_hat[1] - n[1] * gn),
        precession[2] + lg * (g_hat[2] - n[2] * gn),
    ]
}

/// State `[n1, n2, n3, W]` with `W' = g (g_hat . n)`. The independent variable
/// `x` maps to time as `t = x * dt_dx`.
struct BlochSystem<'a> {
    drive: &'a Drive,
    dt_dx: f64,
    clamp_slack: f64,
}

impl OdeSystem<4> for BlochSystem<'_> {
    const CONTROLLED: usize = 3;

    fn rhs(&self, x: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let t = x * self.dt_dx;
        let n = [y[0], y[1], y[2]];
        let f = self.drive.bloch_rhs(t, &n);
        dy[0] = f[0] * self.dt_dx;
        dy[1] = f[1] * self.dt_dx;
        dy[2] = f[2] * self.dt_dx;
        dy[3] = self.drive.g_rate(t) * vec3::dot(&self.drive.g_hat, &n) * self.dt_dx;
    }

    fn renormalize(&self, y: &mut [f64; 4]) -> Option<f64> {
        let norm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        if norm > 1.0 + self.clamp_slack {
            for v in &mut y[..3] {
                *v /= norm;
            }
            Some(norm.ln())
        } else {
            None
        }
    }
}

/// Integrates one branch from `n0` over the grid of `cfg`.
pub fn integrate_bloch(
    n0: &BlochVector,
    spec: &ObservableSpec,
    device: &DeviceConfig,
    branch: Branch,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let drive = Drive::new(spec, device, branch)?;
    let zero_p = zero_probability(n0, spec, branch);
    integrate_bloch_with(&drive, n0, &cfg.grid(), 1.0, Abscissa::Time, &cfg.ode_options(), zero_p)
}

/// Lower-level entry point: integrates over `grid` in the variable `x` with
/// `t = x * dt_dx`. Rates in the output are per unit of `x`.
pub fn integrate_bloch_with(
    drive: &Drive,
    n0: &BlochVector,
    grid: &[f64],
    dt_dx: f64,
    abscissa: Abscissa,
    opts: &Dopri5Options,
    zero_probability_branch: bool,
) -> Result<Trajectory> {
    let sys = BlochSystem { drive, dt_dx, clamp_slack: opts.atol };
    let n = n0.as_array();
    let x0 = grid.first().copied().unwrap_or(0.0);
    let to_trajectory = |out: &ode::OdeOutput<4>| Trajectory {
        abscissa,
        branch: drive.branch,
        samples: out
            .times
            .iter()
            .zip(&out.states)
            .map(|(&x, y)| {
                let n = [y[0], y[1], y[2]];
                let t = x * dt_dx;
                TrajectorySample {
                    t: x,
                    n: BlochVector::new_unchecked(n),
                    norm: vec3::norm(&n),
                    rate: vec3::norm(&drive.bloch_rhs(t, &n)) * dt_dx,
                    g_rate: drive.g_rate(t),
                    epsilon: None,
                    drive_work: y[3],
                }
            })
            .collect(),
        diagnostics: Diagnostics::from_stats(&out.stats, zero_probability_branch),
    };
    match ode::integrate(&sys, x0, [n[0], n[1], n[2], 0.0], grid, opts) {
        Ok(out) => Ok(to_trajectory(&out)),
        Err(fail) => {
            Err(Error::Integration { reason: fail.reason, t: fail.t, partial: Box::new(to_trajectory(&fail.partial)) })
        }
    }
}

/// `|dn/dt|` at each sample, as evaluated from the right-hand side when the
/// trajectory was produced.
pub fn rate_of_change(traj: &Trajectory) -> Vec<f64> {
    traj.samples.iter().map(|s| s.rate).collect()
}
