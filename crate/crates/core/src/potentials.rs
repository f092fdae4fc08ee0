// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive magnitudes `g(t)` (stored as rates, rad/s) and their integrals
//! `Gamma(t) = int_0^t g`.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quadrature;

/// Default relative tolerance for `Gamma` quadrature.
pub const GAMMA_REL_TOL: f64 = 1e-10;

pub type RateFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied profile with a declared support bound: `g` should be
/// negligible beyond about `10 * support`.
#[derive(Clone)]
pub struct CustomProfile {
    pub label: String,
    pub support: f64,
    rate: Arc<RateFn>,
}

impl CustomProfile {
    pub fn new(
        label: impl Into<String>,
        support: f64,
        rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::domain("custom profile support must be positive and finite"));
        }
        Ok(Self { label: label.into(), support, rate: Arc::new(rate) })
    }

    /// Profile from an expression in `t`, for example `"1e8*exp(-((t-2e-5)/5e-6)^2)"`.
    pub fn from_expression(source: &str, support: f64) -> Result<Self> {
        let expr = Expr::parse(source, &["t"])?;
        Self::new(source, support, move |t| expr.eval(&["t"], &[t]))
    }

    pub fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile").field("label", &self.label).field("support", &self.support).finish()
    }
}

#[derive(Debug, Clone)]
pub enum PotentialProfile {
    /// `g0 (1 - (1 - 2 e^{-kappa t})^2)`
    InvertedMorse {
        g0_rate: f64,
        kappa: f64,
    },
    /// `P t^2 S(t)` with the logistic switch-off `S`.
    SternGerlachTime {
        prefactor_rate_per_s2: f64,
        t_end: f64,
        t_w: f64,
    },
    /// Identically zero drive.
    Zero,
    Custom(CustomProfile),
}

impl PotentialProfile {
    pub fn inverted_morse(g0_rate: f64, kappa: f64) -> Result<Self> {
        if !(g0_rate >= 0.0 && g0_rate.is_finite()) {
            return Err(Error::domain(format!("g0_rate = {g0_rate} must be finite and >= 0")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::domain(format!("kappa = {kappa} must be positive")));
        }
        Ok(Self::InvertedMorse { g0_rate, kappa })
    }

    pub fn stern_gerlach_time(prefactor_rate_per_s2: f64, t_end: f64, t_w: f64) -> Result<Self> {
        if !(prefactor_rate_per_s2 >= 0.0 && prefactor_rate_per_s2.is_finite()) {
            return Err(Error::domain("Stern-Gerlach prefactor must be finite and >= 0"));
        }
        if !(t_end > 0.0 && t_w > 0.0 && t_end.is_finite() && t_w.is_finite()) {
            return Err(Error::domain("t_end and t_w must be positive"));
        }
        Ok(Self::SternGerlachTime { prefactor_rate_per_s2, t_end, t_w })
    }

    /// `g(t)` in rad/s, for `t >= 0`.
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Self::InvertedMorse { g0_rate, kappa } => morse_rate(t, *g0_rate, *kappa),
            Self::SternGerlachTime { prefactor_rate_per_s2, t_end, t_w } => {
                prefactor_rate_per_s2 * t * t * switch_off(t, *t_end, *t_w)
            }
            Self::Zero => 0.0,
            Self::Custom(c) => c.rate(t),
        }
    }

    /// Time scale after which `g` has essentially decayed, up to a factor of ten.
    pub fn support(&self) -> f64 {
        match self {
            Self::InvertedMorse { kappa, .. } => 1.0 / kappa,
            Self::SternGerlachTime { t_end, t_w, .. } => t_end + 40.0 * t_w,
            Self::Zero => 0.0,
            Self::Custom(c) => c.support,
        }
    }

    /// Samples `g` on a logarithmic grid: it must be nonnegative and finite,
    /// and have decayed below `1e-3` of its sampled peak at `10 * support`.
    pub fn validate(&self) -> Result<()> {
        let support = self.support();
        if support == 0.0 {
            return Ok(());
        }
        let mut peak = 0.0f64;
        for k in 0..=400 {
            let t = support * 10f64.powf(-12.0 + 13.0 * k as f64 / 400.0);
            let g = self.rate(t);
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::domain(format!("drive profile gives g({t:e}) = {g}")));
            }
            peak = peak.max(g);
        }
        let tail = self.rate(10.0 * support);
        if tail > 1e-3 * peak {
            return Err(Error::domain(format!(
                "drive profile has not decayed at t = {:e}: g = {tail:e}, peak = {peak:e}",
                10.0 * support
            )));
        }
        Ok(())
    }

    /// `Gamma(t)` by adaptive quadrature with relative tolerance `rel_tol`.
    pub fn gamma(&self, t: f64, rel_tol: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("gamma requires t >= 0, got {t}")));
        }
        Ok(gamma_between(self, 0.0, t, rel_tol))
    }

    /// `Gamma(t)` in closed form where one exists.
    pub fn gamma_closed_form(&self, t: f64) -> Option<f64> {
        match self {
            Self::InvertedMorse { g0_rate, kappa } => Some(inverted_morse_gamma(t, *g0_rate, *kappa)),
            Self::Zero => Some(0.0),
            _ => None,
        }
    }

    /// Peak rate, if known analytically.
    pub fn peak_rate(&self) -> Option<f64> {
        match self {
            Self::InvertedMorse { g0_rate, .. } => Some(*g0_rate),
            Self::Zero => Some(0.0),
            _ => None,
        }
    }
}

fn gamma_between(profile: &PotentialProfile, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a || matches!(profile, PotentialProfile::Zero) {
        return 0.0;
    }
    // Split at the support scale so the peak region is resolved from the start.
    let s = profile.support();
    let mut knots = vec![a];
    for k in [0.5, 1.0, 2.0, 5.0, 20.0] {
        let x = k * s;
        if x > a && x < b {
            knots.push(x);
        }
    }
    knots.push(b);
    knots.windows(2).map(|w| quadrature::integrate(|t| profile.rate(t), w[0], w[1], rel_tol, 1e-300)).sum()
}

fn morse_rate(t: f64, g0_rate: f64, kappa: f64) -> f64 {
    // 1 - (1 - 2x)^2 = 4x(1 - x) with x = e^{-kappa t}
    let x = (-kappa * t).exp();
    4.0 * g0_rate * x * (1.0 - x)
}

pub fn g_inverted_morse(t: f64, g0_rate: f64, kappa: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t = {t} must be >= 0")));
    }
    PotentialProfile::inverted_morse(g0_rate, kappa)?;
    Ok(morse_rate(t, g0_rate, kappa))
}

/// `(2 g0 / kappa) (1 - e^{-kappa t})^2`
pub fn inverted_morse_gamma(t: f64, g0_rate: f64, kappa: f64) -> f64 {
    let one_minus = -(-kappa * t).exp_m1();
    2.0 * g0_rate / kappa * one_minus * one_minus
}

/// `ln 2 / kappa`
pub fn morse_peak_time(kappa: f64) -> f64 {
    LN_2 / kappa
}

/// Times `(t_minus, t_plus)` at which the inverted Morse rate equals `omega_rate`.
pub fn morse_crossing_times(g0_rate: f64, kappa: f64, omega_rate: f64) -> Result<(f64, f64)> {
    PotentialProfile::inverted_morse(g0_rate, kappa)?;
    if !(omega_rate > 0.0) {
        return Err(Error::domain("omega_rate must be positive"));
    }
    if g0_rate < omega_rate {
        return Err(Error::NoCrossing { g0: g0_rate, omega: omega_rate });
    }
    let root = (1.0 - omega_rate / g0_rate).sqrt();
    let scale = 2.0 * g0_rate / omega_rate;
    Ok(((scale * (1.0 - root)).ln() / kappa, (scale * (1.0 + root)).ln() / kappa))
}

/// `1 - 1 / (1 + exp(-(t - t_end) / t_w))`, evaluated without overflow.
pub fn switch_off(t: f64, t_end: f64, t_w: f64) -> f64 {
    let x = (t - t_end) / t_w;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

pub fn g_stern_gerlach(t: f64, prefactor_rate_per_s2: f64, t_end: f64, t_w: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t = {t} must be >= 0")));
    }
    Ok(PotentialProfile::stern_gerlach_time(prefactor_rate_per_s2, t_end, t_w)?.rate(t))
}

/// Times where `g(t)` crosses `level`, located between consecutive `times`
/// and refined by bisection. Crossings inside one grid interval that cancel
/// out are missed.
pub fn rate_crossings(profile: &PotentialProfile, level: f64, times: &[f64]) -> Vec<f64> {
    let f = |t: f64| profile.rate(t) - level;
    let mut out = Vec::new();
    for w in times.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        let neg_at_a = fa < 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (f(m) < 0.0) == neg_at_a {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// `Gamma` tabulated on a time grid, cumulative over grid intervals.
#[derive(Debug, Clone)]
pub struct IntegratedPotential {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl IntegratedPotential {
    pub fn tabulate(profile: &PotentialProfile, times: &[f64], rel_tol: f64) -> Result<Self> {
        if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("time grid must be nonnegative and strictly increasing"));
        }
        let mut values = Vec::with_capacity(times.len());
        let (mut acc, mut prev) = (0.0, 0.0);
        for &t in times {
            acc = match profile.gamma_closed_form(t) {
                Some(g) => g.max(acc),
                None => acc + gamma_between(profile, prev, t, rel_tol),
            };
            prev = t;
            values.push(acc);
        }
        Ok(Self { times: times.to_vec(), values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn crossings_match_closed_form() {
        let p = PotentialProfile::inverted_morse(2e8, 1e5).unwrap();
        let grid = crate::dynamics::log_grid(1e-9, 1e-3, 50);
        let found = rate_crossings(&p, 1e8, &grid);
        let (lo, hi) = morse_crossing_times(2e8, 1e5, 1e8).unwrap();
        assert_eq!(found.len(), 2);
        assert!((found[0] / lo - 1.0).abs() < 1e-12);
        assert!((found[1] / hi - 1.0).abs() < 1e-12);
        assert!(rate_crossings(&p, 3e8, &grid).is_empty());
    }

    #[test]
    fn morse_examples() {
        assert_eq!(g_inverted_morse(0.0, 1e8, 1e5).unwrap(), 0.0);
        let peak = g_inverted_morse(LN_2 / 1e5, 1e8, 1e5).unwrap();
        assert!((peak - 1e8).abs() < 1e-6);
        let v = g_inverted_morse(1e-5, 1e8, 1e5).unwrap();
        let oracle = 1e8 * (1.0 - (1.0 - 2.0 * (-1f64).exp()).powi(2));
        assert!((v - oracle).abs() < 1e-6);
        assert!((v - 9.3018e7).abs() < 1e4);
        assert!(g_inverted_morse(-1.0, 1e8, 1e5).is_err());
    }

    #[test]
    fn morse_peak_by_golden_section() {
        let (g0, kappa) = (1e8, 1e5);
        let f = |t: f64| -morse_rate(t, g0, kappa);
        let (mut a, mut b) = (0.0, 5.0 / kappa);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let (c, d) = (b - r * (b - a), a + r * (b - a));
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        assert!((0.5 * (a + b) - morse_peak_time(kappa)).abs() < 1e-9 / kappa * 1e3);
    }

    #[test]
    fn crossing_times() {
        let (t1, t2) = morse_crossing_times(1e8, 1e5, 1e8).unwrap();
        assert!((t1 - LN_2 / 1e5).abs() < 1e-18 && (t2 - LN_2 / 1e5).abs() < 1e-18);

        let (tm, tp) = morse_crossing_times(2e8, 1e5, 1e8).unwrap();
        assert!(tm < LN_2 / 1e5 && LN_2 / 1e5 < tp);
        for t in [tm, tp] {
            assert!((morse_rate(t, 2e8, 1e5) / 1e8 - 1.0).abs() < 1e-9);
        }
        // bisection oracle on the rising flank
        let (mut a, mut b) = (0.0, LN_2 / 1e5);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if morse_rate(m, 2e8, 1e5) < 1e8 {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((a - tm).abs() < 1e-9 * tm);
        assert!(matches!(morse_crossing_times(1e7, 1e5, 1e8), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn switch_off_examples() {
        assert_eq!(switch_off(1e-4, 1e-4, 5e-6), 0.5);
        assert!((1.0 - switch_off(1e-4 - 40.0 * 5e-6, 1e-4, 5e-6)).abs() <= 1e-17);
        let v = switch_off(1e-4 + 5e-6, 1e-4, 5e-6);
        assert!((v - (1.0 - 1.0 / (1.0 + (-1f64).exp()))).abs() < 1e-15);
        assert!((v - 0.26894).abs() < 1e-5);

        let (t_end, t_w) = (1e-4, 5e-6);
        let grid: Vec<f64> = (0..=6000).map(|k| t_end - 30.0 * t_w + k as f64 * 1e-2 * t_w).collect();
        for w in grid.windows(2) {
            assert!(switch_off(w[1], t_end, t_w) < switch_off(w[0], t_end, t_w));
        }
        let wide: Vec<f64> = (0..=20000).map(|k| k as f64 * 1e-8).collect();
        for w in wide.windows(2) {
            assert!(switch_off(w[1], t_end, t_w) <= switch_off(w[0], t_end, t_w));
        }
    }

    #[test]
    fn stern_gerlach_examples() {
        assert_eq!(g_stern_gerlach(0.0, 4.585e18, 1e-4, 5e-6).unwrap(), 0.0);
        let p = 5.788e-5f64.powi(2) * 1e6 / (1.11e-6 * 6.582e-16);
        let g = g_stern_gerlach(1e-5, p, 1e-4, 5e-6).unwrap();
        assert!((g / 4.59e8 - 1.0).abs() < 2e-3, "{g}");
        for k in 0..50 {
            let t = 1e-4 + 40.0 * 5e-6 + k as f64 * 1e-5;
            let g = g_stern_gerlach(t, p, 1e-4, 5e-6).unwrap();
            assert!(g >= 0.0 && g < 1e-8 * p * t * t);
        }
    }

    #[test]
    fn gamma_limits() {
        let im = PotentialProfile::inverted_morse(1e8, 1e5).unwrap();
        assert_eq!(im.gamma(0.0, GAMMA_REL_TOL).unwrap(), 0.0);
        assert_eq!(inverted_morse_gamma(f64::INFINITY, 1e8, 1e5), 2000.0);
        assert!((im.gamma(1e-2, GAMMA_REL_TOL).unwrap() - 2000.0).abs() < 1e-6);
        assert!(im.gamma(-1.0, 1e-10).is_err());
    }

    #[test]
    fn gamma_quadrature_matches_closed_form() {
        let (g0, kappa) = (1e8, 1e5);
        let im = PotentialProfile::inverted_morse(g0, kappa).unwrap();
        for k in 1..=200 {
            let t = 20.0 / kappa * k as f64 / 200.0;
            let q = im.gamma(t, GAMMA_REL_TOL).unwrap();
            let exact = inverted_morse_gamma(t, g0, kappa);
            assert!((q - exact).abs() <= 1e-10 * exact, "t = {t}: {q} vs {exact}");
        }
        let small = 1e-9;
        let q = im.gamma(small, GAMMA_REL_TOL).unwrap();
        assert!((q / inverted_morse_gamma(small, g0, kappa) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tabulation_is_monotone() {
        let sg = PotentialProfile::stern_gerlach_time(4.585e18, 1e-4, 5e-6).unwrap();
        let times: Vec<f64> = (0..=300).map(|k| 1e-9 * 10f64.powf(k as f64 / 50.0)).collect();
        let tab = IntegratedPotential::tabulate(&sg, &times, GAMMA_REL_TOL).unwrap();
        assert!(tab.values().windows(2).all(|w| w[1] >= w[0]));
        let direct = sg.gamma(*times.last().unwrap(), GAMMA_REL_TOL).unwrap();
        assert!((tab.values().last().unwrap() / direct - 1.0).abs() < 1e-9);
        // closed-form oracle: int_0^T P t^2 dt when T << t_end
        let late = PotentialProfile::stern_gerlach_time(4.585e18, 1e-3, 5e-6).unwrap();
        let t = 1e-5;
        let oracle = 4.585e18 * t * t * t / 3.0;
        assert!((late.gamma(t, GAMMA_REL_TOL).unwrap() / oracle - 1.0).abs() < 1e-9);

        let im = PotentialProfile::inverted_morse(1e8, 1e5).unwrap();
        let tab = IntegratedPotential::tabulate(&im, &times, GAMMA_REL_TOL).unwrap();
        for (t, g) in tab.times().iter().zip(tab.values()) {
            assert!((g - inverted_morse_gamma(*t, 1e8, 1e5)).abs() <= 1e-12 * g.max(1.0));
        }
        assert!(IntegratedPotential::tabulate(&im, &[1.0, 0.5], 1e-10).is_err());
    }

    #[test]
    fn validation() {
        PotentialProfile::inverted_morse(1e8, 1e5).unwrap().validate().unwrap();
        PotentialProfile::stern_gerlach_time(4.585e18, 1e-4, 5e-6).unwrap().validate().unwrap();
        let bump = CustomProfile::from_expression("1e8*exp(-((t-2e-5)/5e-6)^2)", 1e-4).unwrap();
        PotentialProfile::Custom(bump).validate().unwrap();
        let flat = CustomProfile::new("flat", 1e-5, |_| 1e8).unwrap();
        assert!(PotentialProfile::Custom(flat).validate().is_err());
        let negative = CustomProfile::new("neg", 1e-5, |t| -t).unwrap();
        assert!(PotentialProfile::Custom(negative).validate().is_err());
        assert!(PotentialProfile::inverted_morse(1e8, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn morse_rate_bounded(t in 0.0f64..1e-2, g0 in 1e3f64..1e10, kappa in 1e3f64..1e8) {
            let g = g_inverted_morse(t, g0, kappa).unwrap();
            prop_assert!(g >= 0.0 && g <= g0 * (1.0 + 1e-15));
        }

        #[test]
        fn gamma_monotone(t1 in 0.0f64..1e-3, dt in 0.0f64..1e-3) {
            let sg = PotentialProfile::stern_gerlach_time(4.585e18, 1e-4, 5e-6).unwrap();
            let a = sg.gamma(t1, 1e-12).unwrap();
            let b = sg.gamma(t1 + dt, 1e-12).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-11));
        }
    }
}
