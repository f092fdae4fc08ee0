// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use quasilinear::analytic::{
    bloch_parallel, distance_up_to_phase, k_parallel_normalized, saturated_propagator, ParallelScenario,
};
use quasilinear::dynamics::{
    epsilon_via_integral, epsilon_via_propagator, integrate_bloch, integrate_density, integrate_propagator, recombine,
};
use quasilinear::geometry::{
    admissible_by_interval, admissible_by_product, casimirs_of_vectors, g_direction, sl2c_conjugate,
};
use quasilinear::measurement::{generator_branch, run_branch, sample_counts, weak_g_run, EnsembleStats};
use quasilinear::potentials::inverted_morse_gamma;
use quasilinear::scenario::{LambdaChoice, Scenario};
use quasilinear::state::born_probability;
use quasilinear::sterngerlach::{bloch_sg_analytic, integrate_bloch_l, transition_length};
use quasilinear::vec3;
use quasilinear::{
    BlochVector, Branch, ChartBranch, Complex2x2, DeviceConfig, DeviceGeometry, DriveDirection, IntegratorConfig,
    ObservableSpec, PotentialProfile, Trajectory,
};

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    Scenario::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn fixed_lambda(s: &Scenario) -> Branch {
    match s.lambda {
        LambdaChoice::Fixed(b) => b,
        LambdaChoice::Sample => panic!("{} samples lambda", s.name),
    }
}

fn baseline_spec() -> ObservableSpec {
    ObservableSpec::new(1e8, FRAC_PI_2, -PI / 6.0).unwrap()
}

fn baseline_geometry() -> DeviceGeometry {
    DeviceGeometry::new(3.0 * PI / 4.0, PI / 3.0, ChartBranch::Upper)
}

/// Tighter tolerances for cross-representation comparisons.
fn tight() -> IntegratorConfig {
    IntegratorConfig { rtol: 1e-11, atol: 1e-14, ..Default::default() }
}

fn random_state(rng: &mut ChaCha8Rng, max_norm: f64) -> BlochVector {
    loop {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if vec3::norm(&v) <= max_norm {
            return BlochVector::new(v).unwrap();
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn projection_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for state in ["pure", "mixed", "depolarized"] {
        for tag in ["plus", "minus"] {
            let s = scenario(&format!("baseline_{state}_{tag}"));
            assert_eq!(s.integrator.t_final, 1e-3);
            let start = Instant::now();
            let rec = run_branch(&s.n0, &s.spec, &s.device, fixed_lambda(&s), &s.integrator).unwrap();
            slowest = slowest.max(start.elapsed().as_secs_f64());
            worst = worst.max(rec.final_n.distance(&s.spec.eigenstate(fixed_lambda(&s))));
        }
    }
    check(
        worst <= 1e-5 && slowest < 5.0,
        format!("max |n(1e-3 s) - lambda omega_hat| = {worst:.2e} (<= 1e-5), slowest run {slowest:.2} s (< 5 s)"),
    )
}

/// Random admissible device with `|Theta - pi/2| >= 0.15`.
fn random_device(rng: &mut ChaCha8Rng) -> (ObservableSpec, DeviceConfig) {
    loop {
        let alpha = rng.random_range(0.0..PI);
        let beta = rng.random_range(-PI..PI);
        let theta = rng.random_range(0.0..PI);
        let rel = rng.random_range(0.0..PI);
        if !admissible_by_interval(alpha, theta, rel) || (rel - FRAC_PI_2).abs() < 0.15 {
            continue;
        }
        let branch = if rng.random::<bool>() { ChartBranch::Upper } else { ChartBranch::Lower };
        let geom = DeviceGeometry::new(theta, rel, branch);
        let spec = ObservableSpec::new(1e8, alpha, beta).unwrap();
        if geom.g_direction(alpha, beta).is_err() {
            continue;
        }
        let g0 = 1e8 * 10f64.powf(rng.random_range(-0.5..1.0));
        let kappa = 10f64.powf(rng.random_range(5.0..6.0));
        let profile = PotentialProfile::inverted_morse(g0, kappa).unwrap();
        return (spec, DeviceConfig::chart(geom, profile));
    }
}

fn representation_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = tight();
    let (mut worst_rho, mut worst_k): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let (spec, device) = random_device(&mut rng);
        let branch = if rng.random::<bool>() { Branch::Plus } else { Branch::Minus };
        let n0 = loop {
            let n = random_state(&mut rng, 1.0);
            if born_probability(&n, &spec, branch).unwrap() > 0.05 {
                break n;
            }
        };
        let bloch = integrate_bloch(&n0, &spec, &device, branch, &cfg).unwrap();
        let density = integrate_density(&n0.to_density(), &spec, &device, branch, &cfg).unwrap();
        let history = integrate_propagator(&spec, &device, branch, &cfg).unwrap();
        let from_k = history.trajectory(&n0.to_density()).unwrap();
        worst_rho = worst_rho.max(bloch.sup_distance(&density.trajectory).unwrap());
        worst_k = worst_k.max(bloch.sup_distance(&from_k).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_rho <= 1e-7 && worst_k <= 1e-7 && secs < 120.0,
        format!(
            "20 random devices: sup |n_bloch - n_rho| = {worst_rho:.2e}, sup |n_bloch - n_K| = {worst_k:.2e} (<= 1e-7), {secs:.1} s (< 120 s)"
        ),
    )
}

fn quasilinearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = tight();
    let spec = baseline_spec();
    let device = DeviceConfig::chart(baseline_geometry(), PotentialProfile::inverted_morse(1e8, 1e5).unwrap());
    let (mut worst_mix, mut worst_eps, mut eps_lo, mut eps_hi) = (0.0f64, 0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    let histories = [Branch::Plus, Branch::Minus].map(|b| integrate_propagator(&spec, &device, b, &cfg).unwrap());
    for _ in 0..50 {
        let branch = if rng.random::<bool>() { Branch::Plus } else { Branch::Minus };
        let na = random_state(&mut rng, 0.95);
        let nb = random_state(&mut rng, 0.95);
        let eps0: f64 = rng.random_range(0.05..0.95);
        let n0 =
            BlochVector::new([0, 1, 2].map(|k| eps0 * na.as_array()[k] + (1.0 - eps0) * nb.as_array()[k])).unwrap();
        let ta = integrate_bloch(&na, &spec, &device, branch, &cfg).unwrap();
        let tb = integrate_bloch(&nb, &spec, &device, branch, &cfg).unwrap();
        let t0 = integrate_bloch(&n0, &spec, &device, branch, &cfg).unwrap();
        let history = &histories[if branch == Branch::Plus { 0 } else { 1 }];
        let eps_k = epsilon_via_propagator(history, &na.to_density(), &n0.to_density(), eps0).unwrap();
        let eps_w = epsilon_via_integral(&ta, &tb, branch, eps0).unwrap();
        for eps in [&eps_k, &eps_w] {
            let mixed = recombine(&ta, &tb, eps).unwrap();
            for (m, s) in mixed.iter().zip(&t0.samples) {
                worst_mix = worst_mix.max(vec3::distance(m, s.n.as_array()));
            }
            for &e in eps.iter() {
                eps_lo = eps_lo.min(e);
                eps_hi = eps_hi.max(e);
            }
        }
        for (a, b) in eps_k.iter().zip(&eps_w) {
            worst_eps = worst_eps.max((a - b).abs());
        }
    }
    check(
        worst_mix <= 1e-7 && worst_eps <= 1e-8 && eps_lo >= 0.0 && eps_hi <= 1.0,
        format!(
            "50 splits: sup recombination error = {worst_mix:.2e} (<= 1e-7), sup |eps_K - eps_W| = {worst_eps:.2e} (<= 1e-8), eps in [{eps_lo:.3}, {eps_hi:.3}]"
        ),
    )
}

fn purity_and_trace() -> Outcome {
    // Norm drift in undamped precession scales with rtol.
    let tol = |s: &Scenario| IntegratorConfig { rtol: 1e-12, atol: 1e-15, ..s.integrator };
    let pure =
        [BlochVector::new([0.0, -FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap(), BlochVector::new([0.6, 0.0, 0.8]).unwrap()];
    let names = [
        "baseline_pure_plus",
        "baseline_mixed_plus",
        "scale_strong",
        "scale_slow",
        "weak_drive",
        "orientation_parallel",
        "orientation_tilted",
        "form_fast_morse",
        "form_stern_gerlach_time",
        "critical_below",
        "critical_above",
        "critical_near_below",
        "critical_exact",
        "critical_near_above",
    ];
    let mixed = BlochVector::new([0.0, -0.5, -0.5]).unwrap();
    let mut jobs: Vec<(Scenario, BlochVector, bool, Branch)> = Vec::new();
    for name in names {
        let s = scenario(name);
        let with_mixed =
            ["baseline_mixed_plus", "critical_exact", "weak_drive"].contains(&name).then_some((mixed, false));
        for (n0, is_pure) in pure.iter().map(|&n| (n, true)).chain(with_mixed) {
            for b in Branch::BOTH {
                if born_probability(&n0, &s.spec, b).unwrap() >= 1e-3 {
                    jobs.push((s.clone(), n0, is_pure, b));
                }
            }
        }
    }
    let stats: Vec<(f64, f64, f64)> = jobs
        .par_iter()
        .map(|(s, n0, is_pure, b)| {
            let t = integrate_bloch(n0, &s.spec, &s.device, *b, &tol(s)).unwrap();
            let ball = t.samples.iter().map(|x| x.norm).fold(0.0, f64::max);
            let purity =
                if *is_pure { t.samples.iter().map(|x| (x.norm - 1.0).abs()).fold(0.0, f64::max) } else { 0.0 };
            let d = integrate_density(&n0.to_density(), &s.spec, &s.device, *b, &s.integrator).unwrap();
            (purity, ball, d.max_trace_drift())
        })
        .collect();
    let runs = stats.len();
    let purity = stats.iter().map(|x| x.0).fold(0.0, f64::max);
    let ball = stats.iter().map(|x| x.1).fold(1.0, f64::max);
    let trace = stats.iter().map(|x| x.2).fold(0.0, f64::max);
    check(
        purity <= 1e-8 && trace <= 1e-9 && ball <= 1.0 + 1e-8,
        format!(
            "{runs} runs: max ||n| - 1| (pure, rtol 1e-12) = {purity:.2e} (<= 1e-8), max trace drift = {trace:.2e} (<= 1e-9), max |n| = 1 + {:.2e} (<= 1 + 1e-8)",
            ball - 1.0
        ),
    )
}

fn analytic_oracle() -> Outcome {
    let spec = baseline_spec();
    let profile = PotentialProfile::inverted_morse(1e8, 1e5).unwrap();
    let device = DeviceConfig::new(DriveDirection::Parallel, profile.clone());
    let cfg = tight();
    let gamma = |t: f64| inverted_morse_gamma(t, 1e8, 1e5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pre, mut sat_num, mut sat_ana, mut proj, mut proj_num) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for branch in Branch::BOTH {
        let sc = ParallelScenario::new(spec, profile.clone(), branch).unwrap();
        let target = spec.eigenstate(branch);
        for _ in 0..4 {
            let n0 = loop {
                let n = random_state(&mut rng, 1.0);
                if born_probability(&n, &spec, branch).unwrap() > 0.05 {
                    break n;
                }
            };
            let traj = integrate_bloch(&n0, &spec, &device, branch, &cfg).unwrap();
            for s in &traj.samples {
                let exact = bloch_parallel(s.t, &n0, &sc, gamma).unwrap();
                if gamma(s.t) <= 30.0 {
                    pre = pre.max(exact.distance(&s.n));
                } else {
                    sat_num = sat_num.max(s.n.distance(&target));
                    sat_ana = sat_ana.max(exact.distance(&target));
                }
            }
        }
        let history = integrate_propagator(&spec, &device, branch, &cfg).unwrap();
        for (t, state) in history.times.iter().zip(&history.states) {
            if gamma(*t) >= 50.0 {
                let pi = saturated_propagator(*t, &sc).unwrap();
                proj = proj.max(distance_up_to_phase(&k_parallel_normalized(*t, &sc, gamma), &pi));
                proj_num = proj_num.max(distance_up_to_phase(&state.unit_trace(), &pi));
            }
        }
    }
    check(
        pre <= 1e-6 && sat_num <= 1e-9 && sat_ana <= 1e-9 && proj <= 1e-5 && proj_num <= 1e-5,
        format!(
            "closed form vs numeric (Gamma <= 30) = {pre:.2e} (<= 1e-6); saturated |n - lambda omega_hat| numeric {sat_num:.2e}, closed form {sat_ana:.2e} (<= 1e-9); |K - Pi| up to phase (Gamma >= 50) closed form {proj:.2e}, numeric {proj_num:.2e} (<= 1e-5)"
        ),
    )
}

fn born_statistics() -> Outcome {
    let start = Instant::now();
    let n_runs = 100_000;
    let depolarized = scenario("born_depolarized");
    let mixed = scenario("born_mixed");
    let mut lines = Vec::new();
    let mut pass = true;
    for (s, expected) in [(&depolarized, 0.5), (&mixed, 0.625)] {
        let p = born_probability(&s.n0, &s.spec, Branch::Plus).unwrap();
        let (plus, minus) = sample_counts(p, n_runs, s.seed);
        let st = EnsembleStats::from_counts(plus, minus, p);
        let bound = 3.0 * (expected * (1.0 - expected) / n_runs as f64).sqrt();
        let ok = (p - expected).abs() < 1e-15 && (st.empirical_p_plus - expected).abs() <= bound;
        pass &= ok;
        lines.push(format!("p+ = {:.5} vs {expected} (3 sigma = {bound:.4})", st.empirical_p_plus));
    }
    let secs = start.elapsed().as_secs_f64();
    check(pass && secs < 60.0, format!("1e5 draws each: {}; {secs:.2} s", lines.join(", ")))
}

fn critical_regime() -> Outcome {
    let spec = baseline_spec();
    let profile = PotentialProfile::inverted_morse(2e8, 1e5).unwrap();
    let geom = baseline_geometry();
    let n0 = BlochVector::new([0.0, -0.5, -0.5]).unwrap();
    let cfg = IntegratorConfig::default();
    let w = spec.unit_direction();
    let run = |theta: f64, drive_sign: Branch| {
        let device = DeviceConfig::chart(DeviceGeometry { relative_angle: theta, ..geom }, profile.clone());
        integrate_bloch(&n0, &spec, &device, drive_sign, &cfg).unwrap()
    };
    let (mut exact_proj, mut exact_rate) = (0.0f64, f64::INFINITY);
    let (mut far, mut far_literal) = (0.0f64, 0.0f64);
    let mut near = f64::INFINITY;
    for b in Branch::BOTH {
        let t = run(FRAC_PI_2, b);
        exact_proj = exact_proj.max(t.final_state().unwrap().dot(&w).abs());
        exact_rate = exact_rate.min(tail_min_rate(&t, 1e-4));
        for theta in [FRAC_PI_2 - 0.01, FRAC_PI_2 + 0.01] {
            let f = run(theta, b).final_state().unwrap();
            let outcome = generator_branch(b, theta.cos());
            far = far.max(f.distance(&spec.eigenstate(outcome)));
            far_literal = far_literal.max(f.distance(&spec.eigenstate(b)));
        }
        for theta in [FRAC_PI_2 - 1e-3, FRAC_PI_2 + 1e-3] {
            let f = run(theta, b).final_state().unwrap();
            near =
                near.min(f.distance(&spec.eigenstate(Branch::Plus)).min(f.distance(&spec.eigenstate(Branch::Minus))));
        }
    }
    let pass = exact_proj < 0.5 && exact_rate >= 1e-3 * spec.omega_rate && far <= 1e-3 && near > 1e-2;
    check(
        pass,
        format!(
            "Theta = pi/2: max |omega_hat . n(end)| = {exact_proj:.3} (< 0.5), min rate for t >= 1e-4 s = {exact_rate:.2e} /s (>= 1e5 /s); \
             Theta = pi/2 -+ 0.01: max distance from outcome eigenstate = {far:.2e} (<= 1e-3), max distance from drive-sign eigenstate = {far_literal:.3}; \
             Theta = pi/2 -+ 1e-3: min distance to either eigenstate = {near:.3} (> 1e-2)"
        ),
    )
}

fn tail_min_rate(t: &Trajectory, from: f64) -> f64 {
    t.samples.iter().filter(|s| s.t >= from).map(|s| s.rate).fold(f64::INFINITY, f64::min)
}

fn weak_driving() -> Outcome {
    let spec = baseline_spec();
    let geom = baseline_geometry();
    let n0 = BlochVector::new([0.0, -0.5, -0.5]).unwrap();
    let cfg = IntegratorConfig::default();
    let w = spec.unit_direction();
    let mut pass = true;
    let mut parts = Vec::new();
    for b in Branch::BOTH {
        let weak = weak_g_run(&spec, &geom, 1e5, 10f64.powf(-2.5), &n0, b, &cfg).unwrap();
        let slow = weak_g_run(&spec, &geom, 1e5, 1e-2, &n0, b, &cfg).unwrap();
        let unit = weak_g_run(&spec, &geom, 1e5, 1.0, &n0, b, &cfg).unwrap();
        let sign_ok = weak.record.final_n.dot(&w).signum() == b.sign();
        let slower = match (slow.approach_time, unit.approach_time) {
            (Some(s), Some(u)) => s > u,
            _ => false,
        };
        pass &= weak.residual > 1e-3 && sign_ok && slow.residual <= 1e-3 && slower && unit.residual <= 1e-5;
        parts.push(format!(
            "lambda {b}: weak residual {:.2e} (> 1e-3), sign ok {sign_ok}; omega/100 residual {:.2e} (<= 1e-3), approach {:.2e} s vs {:.2e} s at g0 = omega",
            weak.residual,
            slow.residual,
            slow.approach_time.unwrap_or(f64::NAN),
            unit.approach_time.unwrap_or(f64::NAN)
        ));
    }
    check(pass, parts.join("; "))
}

fn stern_gerlach() -> Outcome {
    let s = scenario("sg_depolarized");
    let mut cfg = s.sg.unwrap();
    let (mut transverse, mut gap, mut transition) = (0.0f64, 0.0f64, 0.0f64);
    for b in Branch::BOTH {
        cfg.branch = b;
        let t = integrate_bloch_l(&BlochVector::ORIGIN, &cfg, &s.integrator).unwrap();
        for smp in &t.samples {
            let n = smp.n.as_array();
            transverse = transverse.max(n[0].abs()).max(n[1].abs());
            let exact = bloch_sg_analytic(smp.t, &BlochVector::ORIGIN, &cfg).unwrap();
            gap = gap.max((n[2] - exact.as_array()[2]).abs());
        }
        transition = transition.max(transition_length(&t, 0.999).unwrap_or(f64::INFINITY));
    }
    let pol = scenario("sg_polarized");
    let mut pcfg = pol.sg.unwrap();
    pcfg.branch = fixed_lambda(&pol);
    let opposing = pcfg.branch.sign() * pol.n0.as_array()[2] < 0.0;
    let t = integrate_bloch_l(&pol.n0, &pcfg, &pol.integrator).unwrap();
    let min_norm = t.samples.iter().map(|x| x.norm).fold(f64::INFINITY, f64::min);
    let n0_norm = pol.n0.norm();
    check(
        transverse <= 1e-12 && gap <= 1e-6 && transition < 1e-3 && opposing && min_norm < n0_norm,
        format!(
            "n0 = 0: max |n1|, |n2| = {transverse:.1e} (<= 1e-12), max |n3 - closed form| = {gap:.2e} (<= 1e-6), transition length {:.3} mm (< 1 mm); polarized start, opposing branch: min |n| = {min_norm:.3} < |n0| = {n0_norm:.3}",
            transition * 1e3
        ),
    )
}

fn random_sl2c(rng: &mut ChaCha8Rng) -> Complex2x2 {
    loop {
        let mut c = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let m = Complex2x2::new(c(), c(), c(), c());
        let det = m.det();
        if det.norm() > 1e-2 {
            return m.scale(det.sqrt().inv());
        }
    }
}

fn geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut disagreements = 0usize;
    for _ in 0..1_000_000 {
        let (a, t, r) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        if admissible_by_interval(a, t, r) != admissible_by_product(a, t, r) {
            disagreements += 1;
        }
    }
    let mut worst_casimir: f64 = 0.0;
    for _ in 0..100 {
        let a = random_sl2c(&mut rng);
        let omega = vec3::scale(&random_state(&mut rng, 1.0).into_array(), 1e8);
        let g = vec3::scale(&random_state(&mut rng, 1.0).into_array(), 1e8);
        let rho = random_state(&mut rng, 1.0).to_density();
        let c = sl2c_conjugate(&a, &omega, &g, &rho).unwrap();
        let before = casimirs_of_vectors(&omega, &g);
        let after = casimirs_of_vectors(&c.omega, &c.g);
        worst_casimir = worst_casimir
            .max((before.c1 - after.c1).abs() / before.scale)
            .max((before.c2 - after.c2).abs() / before.scale);
    }
    let g_hat = g_direction(FRAC_PI_2, -PI / 6.0, 3.0 * PI / 4.0, PI / 3.0, ChartBranch::Upper).unwrap();
    let s3 = 3f64.sqrt();
    let expected = [(s3 - 1.0) / 4.0, -(s3 + 1.0) / 4.0, -FRAC_1_SQRT_2];
    let g_err = vec3::distance(&g_hat, &expected);
    check(
        disagreements == 0 && worst_casimir <= 1e-10 && g_err <= 4.0 * f64::EPSILON,
        format!(
            "1e6 triples: {disagreements} admissibility disagreements; 100 SL(2,C) conjugations: max relative Casimir change {worst_casimir:.1e} (<= 1e-10); chart g_hat error {g_err:.1e}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("projection agreement", projection_agreement),
        ("representation equivalence", representation_equivalence),
        ("quasilinearity", quasilinearity),
        ("purity and trace", purity_and_trace),
        ("analytic oracle", analytic_oracle),
        ("Born statistics", born_statistics),
        ("critical regime", critical_regime),
        ("weak driving", weak_driving),
        ("Stern-Gerlach", stern_gerlach),
        ("geometry", geometry),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        println!("{verdict} {:>2} {name} [{:.1} s]: {}", i + 1, start.elapsed().as_secs_f64(), out.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
