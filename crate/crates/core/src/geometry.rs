// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter-space geometry of an (observable, device) pair.
//!
//! The observable direction is `omega_hat(alpha, beta_az)`. The drive
//! direction `g_hat` is given either by its own polar angles `(theta, phi)`
//! or, more conveniently near the critical set, by `theta` together with the
//! relative angle `Theta` between `omega_hat` and `g_hat`. Eliminating `phi`
//! leaves a sign ambiguity, exposed as [`ChartBranch`].

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex2::{Complex2x2, I};
use crate::error::{Error, Result};
use crate::state::DensityMatrix2;
use crate::vec3::{self, Vec3};

/// Slack used when classifying points on the tetrahedron boundary.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// Below this |sin(alpha)| the Theta chart is refused.
const CHART_SINGULAR_SIN: f64 = 1e-12;

/// Sign choice of the square root in the Theta chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum ChartBranch {
    Upper,
    Lower,
}

impl ChartBranch {
    pub fn sign(self) -> f64 {
        match self {
            ChartBranch::Upper => 1.0,
            ChartBranch::Lower => -1.0,
        }
    }
}

impl TryFrom<i32> for ChartBranch {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(ChartBranch::Upper),
            -1 => Ok(ChartBranch::Lower),
            other => Err(Error::domain(format!("chart_branch must be +1 or -1, got {other}"))),
        }
    }
}

impl From<ChartBranch> for i32 {
    fn from(b: ChartBranch) -> i32 {
        b.sign() as i32
    }
}

/// Drive direction in the Theta chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    /// Polar angle of `g_hat`.
    pub theta: f64,
    /// Angle between `omega_hat` and `g_hat`.
    #[serde(rename = "Theta")]
    pub relative_angle: f64,
    pub chart_branch: ChartBranch,
}

impl DeviceGeometry {
    pub fn new(theta: f64, relative_angle: f64, chart_branch: ChartBranch) -> Self {
        Self { theta, relative_angle, chart_branch }
    }

    pub fn g_direction(&self, alpha: f64, beta_az: f64) -> Result<Vec3> {
        g_direction(alpha, beta_az, self.theta, self.relative_angle, self.chart_branch)
    }

    pub fn check_admissible(&self, alpha: f64) -> Result<()> {
        if is_admissible(alpha, self.theta, self.relative_angle)? {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "(alpha, theta, Theta) = ({alpha}, {}, {}) lies outside the admissible tetrahedron",
                self.theta, self.relative_angle
            )))
        }
    }
}

/// `[sin(alpha) cos(beta), sin(alpha) sin(beta), cos(alpha)]`
pub fn unit_omega(alpha: f64, beta_az: f64) -> Vec3 {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta_az.sin_cos();
    [sa * cb, sa * sb, ca]
}

/// `[sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)]`
pub fn g_direction_polar(theta: f64, phi: f64) -> Vec3 {
    unit_omega(theta, phi)
}

/// `cos(Theta)` from both polar charts.
pub fn cos_relative_angle(alpha: f64, beta_az: f64, theta: f64, phi: f64) -> f64 {
    alpha.sin() * theta.sin() * (beta_az - phi).cos() + alpha.cos() * theta.cos()
}

fn admissibility_radicand(alpha: f64, theta: f64, relative_angle: f64) -> f64 {
    let c = relative_angle.cos();
    ((alpha - theta).cos() - c) * (c - (alpha + theta).cos())
}

/// Drive direction from the Theta chart. `g_hat . omega_hat = cos(Theta)`
/// and `g_hat_z = cos(theta)`; the two chart branches are the two solutions
/// for the azimuth of `g_hat`.
pub fn g_direction(
    alpha: f64,
    beta_az: f64,
    theta: f64,
    relative_angle: f64,
    chart_branch: ChartBranch,
) -> Result<Vec3> {
    if !is_admissible(alpha, theta, relative_angle)? {
        return Err(Error::domain(format!(
            "(alpha, theta, Theta) = ({alpha}, {theta}, {relative_angle}) is not admissible"
        )));
    }
    let sa = alpha.sin();
    if sa.abs() < CHART_SINGULAR_SIN {
        return Err(Error::ChartSingularity);
    }
    let root = admissibility_radicand(alpha, theta, relative_angle).max(0.0).sqrt();
    let along = relative_angle.cos() - alpha.cos() * theta.cos();
    let (sb, cb) = beta_az.sin_cos();
    let s = chart_branch.sign();
    Ok([(cb * along + s * sb * root) / sa, (sb * along - s * cb * root) / sa, theta.cos()])
}

fn check_angle(name: &str, x: f64) -> Result<()> {
    if (0.0..=PI).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {x} is outside [0, pi]")))
    }
}

/// Interval form `|alpha - theta| <= Theta <= pi - |pi - (alpha + theta)|`.
pub fn admissible_by_interval(alpha: f64, theta: f64, relative_angle: f64) -> bool {
    let lo = (alpha - theta).abs();
    let hi = PI - (PI - (alpha + theta)).abs();
    lo - ADMISSIBILITY_SLACK <= relative_angle && relative_angle <= hi + ADMISSIBILITY_SLACK
}

/// Product form `(cos(alpha - theta) - cos Theta)(cos Theta - cos(alpha + theta)) >= 0`.
pub fn admissible_by_product(alpha: f64, theta: f64, relative_angle: f64) -> bool {
    admissibility_radicand(alpha, theta, relative_angle) >= -ADMISSIBILITY_SLACK
}

/// Distance of `Theta` to the nearest face of the interval form.
fn boundary_distance(alpha: f64, theta: f64, relative_angle: f64) -> f64 {
    let lo = (alpha - theta).abs();
    let hi = PI - (PI - (alpha + theta)).abs();
    (relative_angle - lo).abs().min((relative_angle - hi).abs())
}

/// Closed tetrahedron of admissible `(alpha, theta, Theta)`.
pub fn is_admissible(alpha: f64, theta: f64, relative_angle: f64) -> Result<bool> {
    check_angle("alpha", alpha)?;
    check_angle("theta", theta)?;
    check_angle("Theta", relative_angle)?;
    let by_interval = admissible_by_interval(alpha, theta, relative_angle);
    debug_assert!(
        by_interval == admissible_by_product(alpha, theta, relative_angle)
            || boundary_distance(alpha, theta, relative_angle) < 1e-6,
        "admissibility forms disagree away from the boundary at ({alpha}, {theta}, {relative_angle})"
    );
    Ok(by_interval)
}

/// The two SL(2,C) Casimir forms of the generator pair, in (rad/s)^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasimirPair {
    /// `(omega^2 - g^2) / 4`
    pub c1: f64,
    /// `omega g cos(Theta) / 2`
    pub c2: f64,
    /// `max(omega^2, g^2) / 4`, the reference scale for criticality tests.
    pub scale: f64,
}

pub fn casimirs(omega_rate: f64, g_rate: f64, relative_angle: f64) -> CasimirPair {
    casimirs_from_cos(omega_rate, g_rate, relative_angle.cos())
}

pub(crate) fn casimirs_from_cos(omega_rate: f64, g_rate: f64, cos_relative: f64) -> CasimirPair {
    CasimirPair {
        c1: 0.25 * (omega_rate * omega_rate - g_rate * g_rate),
        c2: 0.5 * omega_rate * g_rate * cos_relative,
        scale: 0.25 * (omega_rate * omega_rate).max(g_rate * g_rate),
    }
}

/// Casimirs of arbitrary (not necessarily unit-scaled) vectors `omega`, `g`.
pub fn casimirs_of_vectors(omega: &Vec3, g: &Vec3) -> CasimirPair {
    let (w2, g2) = (vec3::dot(omega, omega), vec3::dot(g, g));
    CasimirPair { c1: 0.25 * (w2 - g2), c2: 0.5 * vec3::dot(omega, g), scale: 0.25 * w2.max(g2) }
}

/// Principal square root `zeta` of `C1 + i C2`, an eigenvalue of `Omega + i G`.
pub fn generator_eigenvalue(c: &CasimirPair) -> Complex64 {
    Complex64::new(c.c1, c.c2).sqrt()
}

/// `|zeta|^2 <= tol_rel * max(omega^2, g^2) / 4`.
pub fn is_critical(c: &CasimirPair, tol_rel: f64) -> Result<bool> {
    if !(tol_rel > 0.0) {
        return Err(Error::domain("tol_rel must be positive"));
    }
    Ok(c.c1.hypot(c.c2) <= tol_rel * c.scale)
}

/// Result of an SL(2,C) conjugation of `(omega, g, rho)`.
#[derive(Debug, Clone, Copy)]
pub struct Conjugated {
    pub omega: Vec3,
    pub g: Vec3,
    pub rho: DensityMatrix2,
}

/// `Omega' + i G' = A (Omega + i G) A^-1`, `rho' = A rho A^dagger / Tr(...)`.
pub fn sl2c_conjugate(a: &Complex2x2, omega: &Vec3, g: &Vec3, rho: &DensityMatrix2) -> Result<Conjugated> {
    let det = a.det();
    if (det - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::domain(format!("det A = {det} is not 1")));
    }
    let a_inv = a.inverse().ok_or_else(|| Error::domain("A is singular"))?;
    let half = Complex64::new(0.5, 0.0);
    let coeffs = [0, 1, 2].map(|k| (Complex64::new(omega[k], 0.0) + I * g[k]) * half);
    let generator = Complex2x2::from_pauli(Complex64::new(0.0, 0.0), coeffs);
    let (_, c) = (*a * generator * a_inv).pauli_components();

    let numerator = *a * *rho.matrix() * a.adjoint();
    let tr = numerator.trace().re;
    if !(tr > 0.0) {
        return Err(Error::domain("A rho A^dagger has vanishing trace"));
    }
    let mut rho_out = numerator.scale_real(1.0 / tr);
    // Symmetrize away rounding before validation.
    rho_out = (rho_out + rho_out.adjoint()).scale_real(0.5);
    Ok(Conjugated {
        omega: [2.0 * c[0].re, 2.0 * c[1].re, 2.0 * c[2].re],
        g: [2.0 * c[0].im, 2.0 * c[1].im, 2.0 * c[2].im],
        rho: DensityMatrix2::new(rho_out)?,
    })
}

/// Which side of the `Theta = pi/2` surface a configuration lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeRegion {
    /// `Theta < pi/2`
    Aligned,
    /// `Theta = pi/2`
    Boundary,
    /// `Theta > pi/2`
    Opposed,
}

impl OutcomeRegion {
    pub fn of(relative_angle: f64) -> Self {
        let d = relative_angle - FRAC_PI_2;
        if d.abs() <= ADMISSIBILITY_SLACK {
            OutcomeRegion::Boundary
        } else if d < 0.0 {
            OutcomeRegion::Aligned
        } else {
            OutcomeRegion::Opposed
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            OutcomeRegion::Aligned => "Theta<pi/2",
            OutcomeRegion::Boundary => "Theta=pi/2",
            OutcomeRegion::Opposed => "Theta>pi/2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPoint {
    pub alpha: f64,
    pub theta: f64,
    pub relative_angle: f64,
    pub admissible: bool,
    pub region: OutcomeRegion,
}

fn linspace(n: usize) -> impl Iterator<Item = f64> + Clone {
    let step = PI / (n - 1) as f64;
    (0..n).map(move |i| if i == n - 1 { PI } else { i as f64 * step })
}

/// Regular grid over `[0, pi]^3`, ordered alpha-major.
pub fn tetrahedron_mesh(alpha_samples: usize, theta_samples: usize, relative_samples: usize) -> Result<Vec<MeshPoint>> {
    if alpha_samples < 2 || theta_samples < 2 || relative_samples < 2 {
        return Err(Error::domain("every mesh axis needs at least 2 samples"));
    }
    let alphas: Vec<f64> = linspace(alpha_samples).collect();
    Ok(alphas
        .par_iter()
        .flat_map_iter(|&alpha| {
            linspace(theta_samples).flat_map(move |theta| {
                linspace(relative_samples).map(move |relative_angle| MeshPoint {
                    alpha,
                    theta,
                    relative_angle,
                    admissible: admissible_by_interval(alpha, theta, relative_angle),
                    region: OutcomeRegion::of(relative_angle),
                })
            })
        })
        .collect())
}

/// A single `alpha` cross-section, ordered theta-major.
pub fn cross_section(alpha: f64, resolution: usize) -> Result<Vec<MeshPoint>> {
    check_angle("alpha", alpha)?;
    if resolution < 2 {
        return Err(Error::domain("resolution must be at least 2"));
    }
    Ok(linspace(resolution)
        .flat_map(|theta| {
            linspace(resolution).map(move |relative_angle| MeshPoint {
                alpha,
                theta,
                relative_angle,
                admissible: admissible_by_interval(alpha, theta, relative_angle),
                region: OutcomeRegion::of(relative_angle),
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    const BASELINE_G: [f64; 3] = [
        (1.732_050_807_568_877_2 - 1.0) / 4.0,
        -(1.732_050_807_568_877_2 + 1.0) / 4.0,
        -std::f64::consts::FRAC_1_SQRT_2,
    ];

    #[test]
    fn unit_omega_cases() {
        assert_eq!(unit_omega(0.0, 1.234), [0.0, 0.0, 1.0]);
        let w = unit_omega(FRAC_PI_2, -FRAC_PI_6);
        assert!(vec3::distance(&w, &[3f64.sqrt() / 2.0, -0.5, 0.0]) < 1e-15);
        assert!(vec3::distance(&unit_omega(FRAC_PI_2, 0.0), &[1.0, 0.0, 0.0]) < 1e-16);
    }

    #[test]
    fn baseline_drive_direction() {
        let g = g_direction(FRAC_PI_2, -FRAC_PI_6, 3.0 * FRAC_PI_4, FRAC_PI_3, ChartBranch::Upper).unwrap();
        assert!(vec3::distance(&g, &BASELINE_G) < 1e-15, "{g:?}");
    }

    #[test]
    fn parallel_configuration_gives_omega_hat() {
        let (alpha, beta) = (1.1, 0.4);
        for branch in [ChartBranch::Upper, ChartBranch::Lower] {
            let g = g_direction(alpha, beta, alpha, 0.0, branch).unwrap();
            assert!(vec3::distance(&g, &unit_omega(alpha, beta)) < 1e-12);
        }
    }

    #[test]
    fn chart_errors() {
        assert!(matches!(g_direction(0.0, 0.0, 0.5, 0.5, ChartBranch::Upper), Err(Error::ChartSingularity)));
        assert!(matches!(g_direction(FRAC_PI_2, 0.0, 0.1, 3.0, ChartBranch::Upper), Err(Error::Domain(_))));
    }

    #[test]
    fn polar_chart_cases() {
        assert_eq!(g_direction_polar(0.0, 0.0), [0.0, 0.0, 1.0]);
        assert!(vec3::distance(&g_direction_polar(FRAC_PI_2, FRAC_PI_2), &[0.0, 1.0, 0.0]) < 1e-16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b, t, p) = (
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
            );
            let dot = vec3::dot(&unit_omega(a, b), &g_direction_polar(t, p));
            assert!((dot - cos_relative_angle(a, b, t, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(FRAC_PI_2, 3.0 * FRAC_PI_4, FRAC_PI_3).unwrap());
        assert!(is_admissible(0.0, 0.0, 0.0).unwrap());
        assert!(!is_admissible(0.0, 0.0, FRAC_PI_2).unwrap());
        assert!(is_admissible(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap());
        assert!(is_admissible(-0.1, 0.0, 0.0).is_err());
        assert!(is_admissible(0.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn casimir_examples() {
        let c = casimirs(1e8, 1e8, FRAC_PI_2);
        assert_eq!(c.c1, 0.0);
        assert!(c.c2.abs() < 1e-16 * 1e16);
        assert!(is_critical(&c, 1e-12).unwrap());

        let c = casimirs(1e8, 0.0, 0.3);
        assert_eq!((c.c1, c.c2), (0.25e16, 0.0));
        assert!(!is_critical(&c, 1e-6).unwrap());

        let c = casimirs(1e8, 2e8, FRAC_PI_3);
        assert!((c.c1 + 7.5e15).abs() < 1.0);
        assert!((c.c2 - 5e15).abs() < 10.0);

        assert!(!is_critical(&casimirs(1e8, 1e8, FRAC_PI_3), 1e-6).unwrap());
        assert!(is_critical(&c, 0.0).is_err());
    }

    #[test]
    fn eigenvalue_cases() {
        let z = generator_eigenvalue(&CasimirPair { c1: 0.0, c2: 0.0, scale: 1.0 });
        assert_eq!(z, Complex64::new(0.0, 0.0));
        let z = generator_eigenvalue(&CasimirPair { c1: 1.0, c2: 0.0, scale: 1.0 });
        assert_eq!(z, Complex64::new(1.0, 0.0));
        // exact zero on the critical set
        let c = casimirs_from_cos(3e7, 3e7, 0.0);
        assert_eq!(generator_eigenvalue(&c), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn conjugation_by_identity_and_rotation() {
        let omega = [0.3, -1.0, 2.0];
        let g = [1.5, 0.2, -0.7];
        let rho = crate::state::BlochVector::new([0.1, 0.2, -0.3]).unwrap().to_density();
        let out = sl2c_conjugate(&Complex2x2::identity(), &omega, &g, &rho).unwrap();
        assert!(vec3::distance(&out.omega, &omega) < 1e-15);
        assert!(vec3::distance(&out.g, &g) < 1e-15);
        assert!((*out.rho.matrix() - *rho.matrix()).max_abs() < 1e-15);

        // exp(-i chi sigma_z / 2) rotates vectors by chi about z.
        let chi: f64 = 0.7;
        let a = Complex2x2::new(
            Complex64::from_polar(1.0, -chi / 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, chi / 2.0),
        );
        let rot = |v: &Vec3| [v[0] * chi.cos() - v[1] * chi.sin(), v[0] * chi.sin() + v[1] * chi.cos(), v[2]];
        let out = sl2c_conjugate(&a, &omega, &g, &rho).unwrap();
        assert!(vec3::distance(&out.omega, &rot(&omega)) < 1e-14);
        assert!(vec3::distance(&out.g, &rot(&g)) < 1e-14);
        assert!(out.rho.bloch().distance(&crate::state::BlochVector::new(rot(&[0.1, 0.2, -0.3])).unwrap()) < 1e-14);
    }

    #[test]
    fn conjugation_rejects_wrong_determinant() {
        let rho = crate::state::BlochVector::ORIGIN.to_density();
        let a = Complex2x2::identity().scale_real(2.0);
        assert!(sl2c_conjugate(&a, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &rho).is_err());
    }

    #[test]
    fn mesh_examples() {
        let pts = cross_section(FRAC_PI_2, 5).unwrap();
        let at = |t: f64, big: f64| {
            *pts.iter().find(|p| (p.theta - t).abs() < 1e-12 && (p.relative_angle - big).abs() < 1e-12).unwrap()
        };
        let p = at(FRAC_PI_2, FRAC_PI_2);
        assert!(p.admissible);
        assert_eq!(p.region, OutcomeRegion::Boundary);
        let p = at(3.0 * FRAC_PI_4, FRAC_PI_4);
        assert!(p.admissible);
        assert_eq!(p.region, OutcomeRegion::Aligned);
        assert_eq!(OutcomeRegion::of(FRAC_PI_3), OutcomeRegion::Aligned);
        assert!(is_admissible(FRAC_PI_2, 3.0 * FRAC_PI_4, FRAC_PI_3).unwrap());

        assert_eq!(tetrahedron_mesh(2, 2, 2).unwrap().len(), 8);
        assert!(tetrahedron_mesh(1, 2, 2).is_err());
    }

    #[test]
    fn admissible_volume_is_one_third() {
        // Monte Carlo oracle on the interval form.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| {
                let (a, t, big) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI), rng.random_range(0.0..PI));
                admissible_by_interval(a, t, big)
            })
            .count();
        let mc = hits as f64 / n as f64;
        assert!((mc - 1.0 / 3.0).abs() < 0.02 / 3.0, "monte carlo fraction {mc}");

        let mesh = tetrahedron_mesh(161, 161, 161).unwrap();
        let frac = mesh.iter().filter(|p| p.admissible).count() as f64 / mesh.len() as f64;
        assert!((frac - 1.0 / 3.0).abs() < 0.02 / 3.0 + (mc - 1.0 / 3.0).abs(), "grid fraction {frac}");
    }

    fn arb_admissible() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        (0.01f64..PI - 0.01, 0.0f64..=PI, 0.0f64..=1.0, 0.0f64..2.0 * PI).prop_map(|(a, t, u, b)| {
            let lo = (a - t).abs();
            let hi = PI - (PI - (a + t)).abs();
            (a, t, lo + u * (hi - lo), b)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn chart_satisfies_constraints((a, t, big, b) in arb_admissible()) {
            let w = unit_omega(a, b);
            for branch in [ChartBranch::Upper, ChartBranch::Lower] {
                let g = g_direction(a, b, t, big, branch).unwrap();
                prop_assert!((vec3::norm(&g) - 1.0).abs() <= 1e-12 / a.sin().min(1.0));
                prop_assert!((vec3::dot(&g, &w) - big.cos()).abs() <= 1e-12 / a.sin().min(1.0));
                prop_assert!((g[2] - t.cos()).abs() <= 1e-12);
            }
        }

        #[test]
        fn branches_coincide_on_boundary(a in 0.05f64..PI - 0.05, t in 0.0f64..=PI, b in 0.0f64..6.0) {
            let big = (a - t).abs();
            let up = g_direction(a, b, t, big, ChartBranch::Upper).unwrap();
            let down = g_direction(a, b, t, big, ChartBranch::Lower).unwrap();
            prop_assert!(vec3::distance(&up, &down) < 1e-6);
        }

        #[test]
        fn casimirs_invariant_under_conjugation(
            entries in proptest::collection::vec(-1.0f64..1.0, 6),
            w in proptest::collection::vec(-1.0f64..1.0, 3),
            g in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let a = random_sl2c(&entries);
            prop_assume!(a.is_some());
            let a = a.unwrap();
            let (w, g) = ([w[0], w[1], w[2]], [g[0], g[1], g[2]]);
            let rho = crate::state::BlochVector::ORIGIN.to_density();
            let out = sl2c_conjugate(&a, &w, &g, &rho).unwrap();
            let before = casimirs_of_vectors(&w, &g);
            let after = casimirs_of_vectors(&out.omega, &out.g);
            let scale = before.c1.abs().max(before.c2.abs()).max(1e-3);
            prop_assert!((before.c1 - after.c1).abs() <= 1e-10 * scale);
            prop_assert!((before.c2 - after.c2).abs() <= 1e-10 * scale);
        }
    }

    /// `[[a, b], [c, d]]` with d solved from det = 1, or `None` if ill-conditioned.
    fn random_sl2c(e: &[f64]) -> Option<Complex2x2> {
        let a = Complex64::new(e[0] + 1.5, e[1]);
        let b = Complex64::new(e[2], e[3]);
        let c = Complex64::new(e[4], e[5]);
        let d = (Complex64::new(1.0, 0.0) + b * c) / a;
        let m = Complex2x2::new(a, b, c, d);
        (m.max_abs() < 10.0).then_some(m)
    }

    #[test]
    fn interval_and_product_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut disagreements = 0;
        for _ in 0..1_000_000 {
            let (a, t, big) = (rng.random_range(0.0..=PI), rng.random_range(0.0..=PI), rng.random_range(0.0..=PI));
            if admissible_by_interval(a, t, big) != admissible_by_product(a, t, big) {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
    }
}
