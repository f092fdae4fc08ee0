// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Born sampling of outcomes and end-to-end selective measurement runs.
//!
//! A device whose drive makes an obtuse angle with the observable
//! (`Theta > pi/2`) steers the `lambda` branch to the `-lambda` eigenstate.
//! Runs are therefore keyed by the sampled outcome, and the generator sign
//! is chosen so that the branch ends in that outcome's eigenstate; see
//! [`generator_branch`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{integrate_bloch, DeviceConfig, DriveDirection, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{DeviceGeometry, OutcomeRegion};
use crate::potentials::PotentialProfile;
use crate::state::{born_probability, von_neumann_projected_state, BlochVector, Branch, ObservableSpec};
use crate::vec3;

/// `|cos Theta|` below which the device sits on the critical boundary.
pub const BOUNDARY_COS_TOL: f64 = 1e-12;

/// Draws per independent ChaCha stream.
const CHUNK: u64 = 1 << 14;

/// Born-rule draw: `+1` iff `u < p_plus` for one uniform `u` in `[0, 1)`.
pub fn sample_outcome<R: Rng + ?Sized>(n0: &BlochVector, spec: &ObservableSpec, rng: &mut R) -> Result<Branch> {
    let p_plus = born_probability(n0, spec, Branch::Plus)?;
    let u: f64 = rng.random();
    Ok(if u < p_plus { Branch::Plus } else { Branch::Minus })
}

/// Sign of the drive term that realizes `outcome` for a device at
/// `cos Theta = cos_relative`. On the boundary the outcome is used as is.
pub fn generator_branch(outcome: Branch, cos_relative: f64) -> Branch {
    if cos_relative < -BOUNDARY_COS_TOL {
        outcome.flip()
    } else {
        outcome
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// Sampled outcome.
    pub lambda: Branch,
    /// Sign used in the drive term.
    pub generator_lambda: Branch,
    pub p_lambda: f64,
    pub trajectory: Trajectory,
    pub final_n: BlochVector,
    /// Eigenstate `lambda omega_hat`.
    pub vn_reference: BlochVector,
    /// `|final_n - vn_reference|`
    pub deviation: f64,
}

/// Runs the branch that ends in outcome `lambda`.
pub fn run_branch(
    n0: &BlochVector,
    spec: &ObservableSpec,
    device: &DeviceConfig,
    lambda: Branch,
    cfg: &IntegratorConfig,
) -> Result<MeasurementRecord> {
    let p_lambda = born_probability(n0, spec, lambda)?;
    let vn_reference = von_neumann_projected_state(n0, spec, lambda)?;
    let generator_lambda = generator_branch(lambda, device.cos_relative_angle(spec)?);
    let trajectory = integrate_bloch(n0, spec, device, generator_lambda, cfg)?;
    let final_n = trajectory.final_state().ok_or_else(|| Error::domain("empty output grid"))?;
    Ok(MeasurementRecord {
        lambda,
        generator_lambda,
        p_lambda,
        deviation: final_n.distance(&vn_reference),
        trajectory,
        final_n,
        vn_reference,
    })
}

/// Samples an outcome from `rng` and runs its branch.
pub fn run_measurement<R: Rng + ?Sized>(
    n0: &BlochVector,
    spec: &ObservableSpec,
    device: &DeviceConfig,
    rng: &mut R,
    cfg: &IntegratorConfig,
) -> Result<MeasurementRecord> {
    let lambda = sample_outcome(n0, spec, rng)?;
    run_branch(n0, spec, device, lambda, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    pub n_runs: u64,
    pub count_plus: u64,
    pub count_minus: u64,
    pub empirical_p_plus: f64,
    pub born_p_plus: f64,
    pub z_score: f64,
}

impl EnsembleStats {
    pub fn from_counts(count_plus: u64, count_minus: u64, born_p_plus: f64) -> Self {
        let n_runs = count_plus + count_minus;
        let empirical = count_plus as f64 / n_runs as f64;
        let sd = (born_p_plus * (1.0 - born_p_plus) / n_runs as f64).sqrt();
        let diff = empirical - born_p_plus;
        let z_score = if sd > 0.0 {
            diff / sd
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Self { n_runs, count_plus, count_minus, empirical_p_plus: empirical, born_p_plus, z_score }
    }

    /// Pools two ensembles drawn from the same state.
    pub fn merge(&self, other: &EnsembleStats) -> Self {
        Self::from_counts(self.count_plus + other.count_plus, self.count_minus + other.count_minus, self.born_p_plus)
    }
}

/// Counts of run deviations in decades `[10^k, 10^(k+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationHistogram {
    /// Lowest decade exponent; smaller deviations (including 0) land in the first bin.
    pub min_exponent: i32,
    pub counts: Vec<u64>,
}

impl DeviationHistogram {
    pub const MIN_EXPONENT: i32 = -16;
    pub const MAX_EXPONENT: i32 = 1;

    pub fn new() -> Self {
        let bins = (Self::MAX_EXPONENT - Self::MIN_EXPONENT) as usize;
        Self { min_exponent: Self::MIN_EXPONENT, counts: vec![0; bins] }
    }

    pub fn add(&mut self, deviation: f64, count: u64) {
        let k = if deviation > 0.0 { deviation.log10().floor() as i32 } else { Self::MIN_EXPONENT };
        let idx = (k.clamp(Self::MIN_EXPONENT, Self::MAX_EXPONENT - 1) - Self::MIN_EXPONENT) as usize;
        self.counts[idx] += count;
    }

    /// `(lower edge, upper edge, count)` per bin.
    pub fn bins(&self) -> Vec<(f64, f64, u64)> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = self.min_exponent + i as i32;
                (10f64.powi(k), 10f64.powi(k + 1), c)
            })
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl Default for DeviationHistogram {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleReport {
    pub stats: EnsembleStats,
    pub histogram: DeviationHistogram,
    /// One record per outcome that occurred. Branch dynamics are
    /// deterministic, so every run with that outcome shares it.
    pub records: Vec<MeasurementRecord>,
}

/// Born draws for `n_runs` runs. Draw `i` comes from ChaCha8 stream
/// `i / 2^14` of `seed`, so the result does not depend on the thread count.
pub fn sample_outcomes(p_plus: f64, n_runs: u64, seed: u64) -> Vec<Branch> {
    let chunks = n_runs.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n_runs - c * CHUNK);
            (0..len).map(move |_| if rng.random::<f64>() < p_plus { Branch::Plus } else { Branch::Minus })
        })
        .collect()
}

/// `(count_plus, count_minus)` of [`sample_outcomes`] without storing the draws.
pub fn sample_counts(p_plus: f64, n_runs: u64, seed: u64) -> (u64, u64) {
    let chunks = n_runs.div_ceil(CHUNK);
    let plus: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n_runs - c * CHUNK);
            (0..len).filter(|_| rng.random::<f64>() < p_plus).count() as u64
        })
        .sum();
    (plus, n_runs - plus)
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// `n_runs` independent selective measurements of `n0`.
pub fn ensemble_run(
    n0: &BlochVector,
    spec: &ObservableSpec,
    device: &DeviceConfig,
    n_runs: u64,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<EnsembleReport> {
    if n_runs == 0 {
        return Err(Error::domain("n_runs must be >= 1"));
    }
    let born_p_plus = born_probability(n0, spec, Branch::Plus)?;
    let (count_plus, count_minus) = sample_counts(born_p_plus, n_runs, seed);
    let occurring: Vec<(Branch, u64)> =
        [(Branch::Plus, count_plus), (Branch::Minus, count_minus)].into_iter().filter(|&(_, c)| c > 0).collect();
    let records =
        occurring.par_iter().map(|&(b, _)| run_branch(n0, spec, device, b, cfg)).collect::<Result<Vec<_>>>()?;
    let mut histogram = DeviationHistogram::new();
    for (rec, &(_, count)) in records.iter().zip(&occurring) {
        histogram.add(rec.deviation, count);
    }
    Ok(EnsembleReport { stats: EnsembleStats::from_counts(count_plus, count_minus, born_p_plus), histogram, records })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRow {
    pub relative_angle: f64,
    pub region: OutcomeRegion,
    /// Sign used in the drive term.
    pub generator_lambda: Branch,
    /// Outcome this branch is expected to realize: `lambda` for
    /// `Theta <= pi/2`, `-lambda` above.
    pub expected_outcome: Branch,
    /// `omega_hat . n` at the end of the run.
    pub final_projection: f64,
    /// Distance of the final state from the expected eigenstate.
    pub deviation: f64,
    /// `|dn/dt|` at the last sample.
    pub final_rate: f64,
}

/// Runs both drive signs for each `Theta` in `relative_angles`, keeping the
/// rest of `geometry` and `profile` fixed.
pub fn critical_sweep(
    spec: &ObservableSpec,
    geometry: &DeviceGeometry,
    profile: &PotentialProfile,
    relative_angles: &[f64],
    n0: &BlochVector,
    cfg: &IntegratorConfig,
) -> Result<Vec<CriticalRow>> {
    for &t in relative_angles {
        DeviceGeometry { relative_angle: t, ..*geometry }.check_admissible(spec.alpha)?;
    }
    let jobs: Vec<(f64, Branch)> = relative_angles.iter().flat_map(|&t| Branch::BOTH.map(move |b| (t, b))).collect();
    jobs.par_iter()
        .map(|&(relative_angle, generator_lambda)| {
            let device = DeviceConfig::chart(DeviceGeometry { relative_angle, ..*geometry }, profile.clone());
            let cos = device.cos_relative_angle(spec)?;
            let expected_outcome = generator_branch(generator_lambda, cos);
            let traj = integrate_bloch(n0, spec, &device, generator_lambda, cfg)?;
            let last = traj.last().ok_or_else(|| Error::domain("empty output grid"))?;
            Ok(CriticalRow {
                relative_angle,
                region: OutcomeRegion::of(relative_angle),
                generator_lambda,
                expected_outcome,
                final_projection: last.n.dot(&spec.unit_direction()),
                deviation: last.n.distance(&spec.eigenstate(expected_outcome)),
                final_rate: last.rate,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct WeakDriveReport {
    pub record: MeasurementRecord,
    /// `|n - lambda omega_hat|` at the end of the run.
    pub residual: f64,
    /// `|n - (omega_hat . n) omega_hat|` at the end, the amplitude of the
    /// surviving precession.
    pub transverse_amplitude: f64,
    /// First sample with `|dn/dt| < omega / 100`, if any.
    pub approach_time: Option<f64>,
}

/// Runs outcome `lambda` with an inverted Morse drive of peak
/// `g0_fraction * omega` on the device `geometry`.
#[allow(clippy::too_many_arguments)]
pub fn weak_g_run(
    spec: &ObservableSpec,
    geometry: &DeviceGeometry,
    kappa: f64,
    g0_fraction: f64,
    n0: &BlochVector,
    lambda: Branch,
    cfg: &IntegratorConfig,
) -> Result<WeakDriveReport> {
    if !(g0_fraction > 0.0 && g0_fraction.is_finite()) {
        return Err(Error::domain(format!("g0_fraction = {g0_fraction} must be positive")));
    }
    let profile = PotentialProfile::inverted_morse(g0_fraction * spec.omega_rate, kappa)?;
    let device = DeviceConfig::new(DriveDirection::Chart(*geometry), profile);
    let record = run_branch(n0, spec, &device, lambda, cfg)?;
    let w = spec.unit_direction();
    let n = record.final_n.as_array();
    let along = vec3::scale(&w, vec3::dot(&w, n));
    Ok(WeakDriveReport {
        residual: record.deviation,
        transverse_amplitude: vec3::distance(n, &along),
        approach_time: record.trajectory.first_time_below(1e-2 * spec.omega_rate),
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartBranch;
    use std::f64::consts::PI;

    fn spec() -> ObservableSpec {
        ObservableSpec::new(1e8, PI / 2.0, -PI / 6.0).unwrap()
    }

    #[test]
    fn sampling_extremes() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let up = s.eigenstate(Branch::Plus);
        let down = s.eigenstate(Branch::Minus);
        for _ in 0..1000 {
            assert_eq!(sample_outcome(&up, &s, &mut rng).unwrap(), Branch::Plus);
            assert_eq!(sample_outcome(&down, &s, &mut rng).unwrap(), Branch::Minus);
        }
    }

    #[test]
    fn maximally_mixed_frequencies() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let plus =
            (0..n).filter(|_| sample_outcome(&BlochVector::ORIGIN, &s, &mut rng).unwrap() == Branch::Plus).count();
        assert!((plus as f64 / n as f64 - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn counts_ignore_chunking() {
        let (p, m) = sample_counts(0.3, 3 * CHUNK + 17, 5);
        assert_eq!(p + m, 3 * CHUNK + 17);
        let serial: u64 = (0..4)
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                rng.set_stream(c);
                let len = CHUNK.min(3 * CHUNK + 17 - c * CHUNK);
                (0..len).filter(|_| rng.random::<f64>() < 0.3).count() as u64
            })
            .sum();
        assert_eq!(p, serial);
        assert_eq!(sample_counts(0.3, 1000, 5), sample_counts(0.3, 1000, 5));
        assert_ne!(sample_counts(0.3, 1000, 5), sample_counts(0.3, 1000, 6));
        let draws = sample_outcomes(0.3, 3 * CHUNK + 17, 5);
        assert_eq!(draws.iter().filter(|&&b| b == Branch::Plus).count() as u64, p);
    }

    #[test]
    fn stats_and_merge() {
        let a = EnsembleStats::from_counts(60, 40, 0.5);
        assert_eq!(a.n_runs, 100);
        assert!((a.z_score - 2.0).abs() < 1e-12);
        let b = EnsembleStats::from_counts(40, 60, 0.5);
        let m = a.merge(&b);
        assert_eq!(m, b.merge(&a));
        assert_eq!(m.z_score, 0.0);
        assert_eq!(EnsembleStats::from_counts(10, 0, 1.0).z_score, 0.0);
        assert_eq!(EnsembleStats::from_counts(9, 1, 1.0).z_score, f64::NEG_INFINITY);
    }

    #[test]
    fn histogram_bins() {
        let mut h = DeviationHistogram::new();
        h.add(0.0, 2);
        h.add(3e-9, 5);
        h.add(2.0, 1);
        h.add(1e3, 1);
        assert_eq!(h.total(), 9);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[(-9 - DeviationHistogram::MIN_EXPONENT) as usize], 5);
        assert_eq!(*h.counts.last().unwrap(), 2);
        let bins = h.bins();
        assert_eq!(bins[7].0, 1e-9);
    }

    #[test]
    fn generator_sign_by_region() {
        assert_eq!(generator_branch(Branch::Plus, 0.5), Branch::Plus);
        assert_eq!(generator_branch(Branch::Plus, -0.5), Branch::Minus);
        assert_eq!(generator_branch(Branch::Minus, -0.5), Branch::Plus);
        assert_eq!(generator_branch(Branch::Minus, 1e-17), Branch::Minus);
        assert_eq!(generator_branch(Branch::Minus, -1e-17), Branch::Minus);
    }

    #[test]
    fn inputs_are_validated() {
        let s = spec();
        let device = DeviceConfig::chart(
            DeviceGeometry::new(3.0 * PI / 4.0, PI / 3.0, ChartBranch::Upper),
            PotentialProfile::inverted_morse(1e8, 1e5).unwrap(),
        );
        let cfg = IntegratorConfig::default();
        assert!(ensemble_run(&BlochVector::ORIGIN, &s, &device, 0, 1, &cfg).is_err());
        let up = s.eigenstate(Branch::Plus);
        assert!(matches!(run_branch(&up, &s, &device, Branch::Minus, &cfg), Err(Error::DegenerateBranch(_))));
        let geom = DeviceGeometry::new(3.0 * PI / 4.0, PI / 3.0, ChartBranch::Upper);
        let profile = PotentialProfile::inverted_morse(1e8, 1e5).unwrap();
        assert!(critical_sweep(&s, &geom, &profile, &[0.1], &up, &cfg).is_err());
        assert!(weak_g_run(&s, &geom, 1e5, 0.0, &up, Branch::Plus, &cfg).is_err());
    }
}
