// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

use super::{
    zero_probability, Abscissa, DeviceConfig, Diagnostics, Drive, IntegratorConfig, Trajectory, TrajectorySample,
};
use crate::complex2::{Complex2x2, I};
use crate::error::{Error, Result};
use crate::ode::{self, OdeSystem};
use crate::state::{BlochVector, Branch, DensityMatrix2, ObservableSpec};
use crate::vec3;

/// `-i [Omega, rho] + {G, rho} - 2 rho Tr(G rho)`
pub fn density_rhs(rho: &Complex2x2, omega: &Complex2x2, g: &Complex2x2) -> Complex2x2 {
    let unitary = omega.commutator(rho).scale(-I);
    let gain = g.anticommutator(rho);
    let loss = rho.scale((*g * *rho).trace() * 2.0);
    unitary + gain - loss
}

struct DensitySystem<'a> {
    drive: &'a Drive,
    omega: Complex2x2,
}

impl OdeSystem<8> for DensitySystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 8], dy: &mut [f64; 8]) {
        let rho = Complex2x2::from_real8(y);
        *dy = density_rhs(&rho, &self.omega, &self.drive.g_matrix(t)).to_real8();
    }
}

/// Density-matrix run with per-sample structure diagnostics.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    pub trajectory: Trajectory,
    pub matrices: Vec<Complex2x2>,
    /// Max-entry distance of each sample from its adjoint.
    pub hermiticity_defect: Vec<f64>,
    /// `|Tr rho - 1|` at each sample.
    pub trace_drift: Vec<f64>,
}

impl DensityTrajectory {
    pub fn max_hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.trace_drift.iter().copied().fold(0.0, f64::max)
    }
}

pub fn integrate_density(
    rho0: &DensityMatrix2,
    spec: &ObservableSpec,
    device: &DeviceConfig,
    branch: Branch,
    cfg: &IntegratorConfig,
) -> Result<DensityTrajectory> {
    cfg.validate()?;
    let drive = Drive::new(spec, device, branch)?;
    let zero_p = zero_probability(&rho0.bloch(), spec, branch);
    let sys = DensitySystem { drive: &drive, omega: drive.omega_matrix() };
    let grid = cfg.grid();
    let build = |out: &ode::OdeOutput<8>| {
        let matrices: Vec<Complex2x2> = out.states.iter().map(|y| Complex2x2::from_real8(y)).collect();
        let samples = out
            .times
            .iter()
            .zip(&matrices)
            .map(|(&t, rho)| {
                let (_, c) = rho.pauli_components();
                let n = [2.0 * c[0].re, 2.0 * c[1].re, 2.0 * c[2].re];
                TrajectorySample {
                    t,
                    n: BlochVector::new_unchecked(n),
                    norm: vec3::norm(&n),
                    rate: vec3::norm(&drive.bloch_rhs(t, &n)),
                    g_rate: drive.g_rate(t),
                    epsilon: None,
                    drive_work: f64::NAN,
                }
            })
            .collect();
        DensityTrajectory {
            trajectory: Trajectory {
                abscissa: Abscissa::Time,
                branch,
                samples,
                diagnostics: Diagnostics::from_stats(&out.stats, zero_p),
            },
            hermiticity_defect: matrices.iter().map(Complex2x2::hermiticity_defect).collect(),
            trace_drift: matrices.iter().map(|m| (m.trace() - 1.0).norm()).collect(),
            matrices,
        }
    };
    match ode::integrate(&sys, 0.0, rho0.matrix().to_real8(), &grid, &cfg.ode_options()) {
        Ok(out) => Ok(build(&out)),
        Err(fail) => Err(Error::Integration {
            reason: fail.reason,
            t: fail.t,
            partial: Box::new(build(&fail.partial).trajectory),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::Complex2x2 as M;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn pure_von_neumann_term() {
        let rho = BlochVector::new([0.3, -0.2, 0.5]).unwrap().to_density();
        let omega = M::from_real_pauli(0.0, [0.0, 0.0, 0.5]);
        let out = density_rhs(rho.matrix(), &omega, &M::zero());
        let expected = (omega * *rho.matrix() - *rho.matrix() * omega).scale(-I);
        assert!((out - expected).max_abs() < 1e-16);
    }

    #[test]
    fn maximally_mixed_driven() {
        let g = 3.0;
        let half = M::identity().scale_real(0.5);
        let gm = M::from_real_pauli(0.0, [0.0, 0.0, 0.5 * g]);
        let out = density_rhs(&half, &M::zero(), &gm);
        let expected = M::from_real_pauli(0.0, [0.0, 0.0, 0.5 * g]);
        assert!((out - expected).max_abs() < 1e-15);
    }

    fn random_hermitian(v: &[f64]) -> M {
        M::new(
            Complex64::new(v[0], 0.0),
            Complex64::new(v[1], v[2]),
            Complex64::new(v[1], -v[2]),
            Complex64::new(v[3], 0.0),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rhs_is_traceless(
            n in proptest::collection::vec(-0.57f64..0.57, 3),
            w in proptest::collection::vec(-5.0f64..5.0, 4),
            g in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let rho = BlochVector::new([n[0], n[1], n[2]]).unwrap().to_density();
            let out = density_rhs(rho.matrix(), &random_hermitian(&w), &random_hermitian(&g));
            prop_assert!(out.trace().norm() < 1e-13);
            prop_assert!(out.hermiticity_defect() < 1e-13);
        }
    }
}
