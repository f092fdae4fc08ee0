// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Mixing weight of a convex split `rho0 = eps0 rho_a + (1 - eps0) rho_b`
//! under the (nonlinear) branch evolution.

use super::{PropagatorHistory, Trajectory};
use crate::error::{Error, Result};
use crate::state::{Branch, DensityMatrix2, MATRIX_TOL};
use crate::vec3::Vec3;

fn check_weight(eps0: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps0) {
        Ok(())
    } else {
        Err(Error::domain(format!("eps0 = {eps0} is outside [0, 1]")))
    }
}

/// `eps0 Tr(K rho_a0 K^dagger) / Tr(K rho0 K^dagger)` at each sample.
pub fn epsilon_via_propagator(
    history: &PropagatorHistory,
    rho_a0: &DensityMatrix2,
    rho0: &DensityMatrix2,
    eps0: f64,
) -> Result<Vec<f64>> {
    check_weight(eps0)?;
    let diff = *rho0.matrix() - rho_a0.matrix().scale_real(eps0);
    if eps0 < 1.0 {
        DensityMatrix2::new(diff.scale_real(1.0 / (1.0 - eps0)))
            .map_err(|_| Error::domain("rho0 - eps0 rho_a0 is not (1 - eps0) times a density matrix"))?;
    } else if diff.max_abs() > MATRIX_TOL {
        return Err(Error::domain("eps0 = 1 requires rho_a0 = rho0"));
    }
    history
        .states
        .iter()
        .map(|s| {
            let num = s.sandwich(rho_a0.matrix()).trace().re;
            let den = s.sandwich(rho0.matrix()).trace().re;
            if !(den > f64::MIN_POSITIVE) {
                return Err(Error::DegenerateBranch("Tr(K rho0 K^dagger) vanishes".into()));
            }
            Ok(eps0 * num / den)
        })
        .collect()
}

/// Logistic form with `X = lambda (W_a - W_b)`, `W = int g (g_hat . n) dt`.
pub fn epsilon_via_integral(traj_a: &Trajectory, traj_b: &Trajectory, branch: Branch, eps0: f64) -> Result<Vec<f64>> {
    check_weight(eps0)?;
    if traj_a.samples.len() != traj_b.samples.len()
        || traj_a.samples.iter().zip(&traj_b.samples).any(|(a, b)| a.t != b.t)
    {
        return Err(Error::GridMismatch("epsilon needs both branches on the same grid".into()));
    }
    if eps0 == 0.0 || eps0 == 1.0 {
        return Ok(vec![eps0; traj_a.samples.len()]);
    }
    let logit0 = eps0.ln() - (-eps0).ln_1p();
    traj_a
        .samples
        .iter()
        .zip(&traj_b.samples)
        .map(|(a, b)| {
            if !(a.drive_work.is_finite() && b.drive_work.is_finite()) {
                return Err(Error::domain("trajectories carry no drive work; use integrate_bloch"));
            }
            let z = logit0 + branch.sign() * (a.drive_work - b.drive_work);
            Ok(logistic(z))
        })
        .collect()
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `eps n_a + (1 - eps) n_b` sample by sample.
pub fn recombine(traj_a: &Trajectory, traj_b: &Trajectory, eps: &[f64]) -> Result<Vec<Vec3>> {
    if traj_a.samples.len() != traj_b.samples.len() || eps.len() != traj_a.samples.len() {
        return Err(Error::GridMismatch("recombination inputs differ in length".into()));
    }
    Ok(traj_a
        .samples
        .iter()
        .zip(&traj_b.samples)
        .zip(eps)
        .map(|((a, b), &e)| {
            let (na, nb) = (a.n.as_array(), b.n.as_array());
            [0, 1, 2].map(|k| e * na[k] + (1.0 - e) * nb[k])
        })
        .collect())
}
