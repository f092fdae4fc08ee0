// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use quasilinear::dynamics::Abscissa;
use quasilinear::expr::eval_constant;
use quasilinear::geometry::{cross_section, OutcomeRegion};
use quasilinear::measurement::{ensemble_run, run_branch, sample_outcomes, MeasurementRecord};
use quasilinear::potentials::{rate_crossings, GAMMA_REL_TOL};
use quasilinear::scenario::{LambdaChoice, Scenario, Sweep, SweepPoint, SweepValue, SweepVariable};
use quasilinear::state::born_probability;
use quasilinear::sterngerlach::{bloch_sg_analytic, integrate_bloch_l, transition_length};
use quasilinear::{BlochVector, Branch, DriveDirection};

use crate::output::{self, float};
use crate::svg::{self, LinePlot, Reference, Series, COLORS};
use crate::CliError;

/// `Gamma` above which the closed form is saturated.
const SATURATION_GAMMA: f64 = 30.0;
/// `|n3|` marking the end of the Stern–Gerlach transition.
const TRANSITION_THRESHOLD: f64 = 0.999;

fn prepare_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn pick_lambda(sc: &Scenario, seed: u64) -> Result<Branch, CliError> {
    match sc.lambda {
        LambdaChoice::Fixed(b) => Ok(b),
        LambdaChoice::Sample => {
            let p = born_probability(&sc.n0, &sc.spec, Branch::Plus)?;
            Ok(sample_outcomes(p, 1, seed)[0])
        }
    }
}

fn vec3(n: &BlochVector) -> [f64; 3] {
    *n.as_array()
}

fn fmt_vec(v: &[f64; 3]) -> String {
    format!("{} {} {}", float(v[0]), float(v[1]), float(v[2]))
}

fn trajectory_comments(sc: &Scenario, rec: &MeasurementRecord) -> Vec<String> {
    vec![
        format!("scenario = {}", sc.name),
        format!("lambda = {}", rec.lambda),
        format!("generator_lambda = {}", rec.generator_lambda),
        format!("n0 = {}", fmt_vec(&vec3(&sc.n0))),
        format!("reference = {}", fmt_vec(&vec3(&rec.vn_reference))),
    ]
}

#[derive(Serialize)]
struct RunReport {
    scenario: String,
    lambda: i32,
    generator_lambda: i32,
    p_lambda: f64,
    n0: [f64; 3],
    final_state: [f64; 3],
    vn_reference: [f64; 3],
    deviation: f64,
    final_norm: f64,
    final_rate_per_s: f64,
    /// Times where `g = omega`, i.e. `C1 = 0`.
    c1_crossing_times_s: Vec<f64>,
    gamma_final: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    wall_clock_s: f64,
}

pub fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let sc = Scenario::load(config)?;
    prepare_out(out)?;
    let started = Instant::now();
    let lambda = pick_lambda(&sc, seed.unwrap_or(sc.seed))?;
    let rec = run_branch(&sc.n0, &sc.spec, &sc.device, lambda, &sc.integrator)?;
    let traj_path = out.join("trajectory.csv");
    output::write_trajectory(&traj_path, &rec.trajectory, &trajectory_comments(&sc, &rec))?;

    let last = rec.trajectory.last().expect("grid is never empty");
    let report = RunReport {
        scenario: sc.name.clone(),
        lambda: rec.lambda.sign() as i32,
        generator_lambda: rec.generator_lambda.sign() as i32,
        p_lambda: rec.p_lambda,
        n0: vec3(&sc.n0),
        final_state: vec3(&rec.final_n),
        vn_reference: vec3(&rec.vn_reference),
        deviation: rec.deviation,
        final_norm: last.norm,
        final_rate_per_s: last.rate,
        c1_crossing_times_s: rate_crossings(&sc.device.profile, sc.spec.omega_rate, &rec.trajectory.times()),
        gamma_final: sc.device.profile.gamma(last.t, GAMMA_REL_TOL)?,
        accepted_steps: rec.trajectory.diagnostics.accepted_steps,
        rejected_steps: rec.trajectory.diagnostics.rejected_steps,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    output::write_report(&out.join("report.toml"), &report)?;
    println!(
        "{}: lambda = {}, final n = [{:.9}, {:.9}, {:.9}], deviation = {:.3e}",
        sc.name, rec.lambda, report.final_state[0], report.final_state[1], report.final_state[2], rec.deviation
    );
    Ok(())
}

/// Parses `--values`: comma-separated expressions, or for `n0`,
/// comma-separated triples of space-separated expressions.
fn parse_values(variable: SweepVariable, text: &str) -> Result<Vec<SweepValue>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            if variable == SweepVariable::InitialState {
                let parts: Vec<&str> = item.trim_matches(['[', ']']).split_whitespace().collect();
                let [a, b, c] = parts[..] else {
                    return Err(CliError::config(format!("n0 value `{item}` needs three components")));
                };
                Ok(SweepValue::Vector([a.into(), b.into(), c.into()]))
            } else {
                Ok(SweepValue::Scalar(item.into()))
            }
        })
        .collect()
}

fn approach_threshold(sc: &Scenario) -> f64 {
    1e-2 * sc.spec.omega_rate
}

pub fn sweep(
    config: &Path,
    out: &Path,
    variable: Option<&str>,
    values: Option<&str>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let sc = Scenario::load(config)?;
    let grid = match (variable, values) {
        (Some(var), Some(vals)) => {
            let var = SweepVariable::parse(var)?;
            Sweep::resolve(var, &parse_values(var, vals)?, Some(sc.spec.omega_rate))?
        }
        (None, None) => {
            sc.sweep.clone().ok_or_else(|| CliError::config("no [sweep] section and no --variable/--values"))?
        }
        _ => return Err(CliError::config("--variable and --values go together")),
    };
    prepare_out(out)?;
    let seed = seed.unwrap_or(sc.seed);
    let rows: Vec<(SweepPoint, MeasurementRecord)> = grid
        .points
        .par_iter()
        .map(|p| {
            let s = sc.with(grid.variable, p)?;
            let lambda = pick_lambda(&s, seed)?;
            Ok((p.clone(), run_branch(&s.n0, &s.spec, &s.device, lambda, &s.integrator)?))
        })
        .collect::<Result<_, CliError>>()?;

    let path = out.join("sweep.csv");
    let mut comments = vec![format!("scenario = {}", sc.name), format!("variable = {}", grid.variable.name())];
    comments.extend(grid.points.iter().map(|p| format!("grid = {p}")));
    let header = [
        "index",
        grid.variable.name(),
        "lambda",
        "generator_lambda",
        "region",
        "n1",
        "n2",
        "n3",
        "projection",
        "deviation",
        "final_rate_per_s",
        "approach_time_s",
        "settling_time_s",
    ];
    let mut w = output::create(&path, &comments, &header)?;
    for (i, (p, rec)) in rows.iter().enumerate() {
        let s = sc.with(grid.variable, p)?;
        let region = match s.device.direction {
            DriveDirection::Chart(g) => OutcomeRegion::of(g.relative_angle).label().to_string(),
            _ => {
                let c = s.device.cos_relative_angle(&s.spec)?;
                OutcomeRegion::of(c.clamp(-1.0, 1.0).acos()).label().to_string()
            }
        };
        let n = vec3(&rec.final_n);
        let last = rec.trajectory.last().expect("grid is never empty");
        let thr = approach_threshold(&s);
        w.write_record([
            i.to_string(),
            p.to_string(),
            rec.lambda.to_string(),
            rec.generator_lambda.to_string(),
            region,
            float(n[0]),
            float(n[1]),
            float(n[2]),
            float(rec.final_n.dot(&s.spec.unit_direction())),
            float(rec.deviation),
            float(last.rate),
            rec.trajectory.first_time_below(thr).map_or(String::new(), float),
            rec.trajectory.settling_time(thr).map_or(String::new(), float),
        ])?;
    }
    output::finish(w, &path)?;
    println!("{}: {} rows written to {}", sc.name, rows.len(), path.display());
    Ok(())
}

pub fn sample(config: &Path, out: &Path, runs: u64, seed: Option<u64>) -> Result<(), CliError> {
    let sc = Scenario::load(config)?;
    if sc.lambda != LambdaChoice::Sample {
        return Err(CliError::config("`sample` needs lambda = \"sample\" in the scenario"));
    }
    if runs == 0 {
        return Err(CliError::config("--runs must be at least 1"));
    }
    prepare_out(out)?;
    let seed = seed.unwrap_or(sc.seed);
    let report = ensemble_run(&sc.n0, &sc.spec, &sc.device, runs, seed, &sc.integrator)?;
    let st = report.stats;
    let comments = vec![format!("scenario = {}", sc.name), format!("seed = {seed}")];

    let path = out.join("ensemble.csv");
    let mut w = output::create(
        &path,
        &comments,
        &[
            "n_runs",
            "count_plus",
            "count_minus",
            "empirical_p_plus",
            "born_p_plus",
            "z_score",
            "deviation_plus",
            "deviation_minus",
        ],
    )?;
    let dev = |b: Branch| report.records.iter().find(|r| r.lambda == b).map_or(String::new(), |r| float(r.deviation));
    w.write_record([
        st.n_runs.to_string(),
        st.count_plus.to_string(),
        st.count_minus.to_string(),
        float(st.empirical_p_plus),
        float(st.born_p_plus),
        float(st.z_score),
        dev(Branch::Plus),
        dev(Branch::Minus),
    ])?;
    output::finish(w, &path)?;

    let path = out.join("outcomes.csv");
    let mut w = output::create(&path, &comments, &["run", "lambda"])?;
    for (i, b) in sample_outcomes(st.born_p_plus, runs, seed).iter().enumerate() {
        w.write_record([i.to_string(), b.to_string()])?;
    }
    output::finish(w, &path)?;

    let path = out.join("deviation_histogram.csv");
    let mut w = output::create(&path, &comments, &["lower", "upper", "count"])?;
    for (lo, hi, c) in report.histogram.bins() {
        w.write_record([float(lo), float(hi), c.to_string()])?;
    }
    output::finish(w, &path)?;

    println!(
        "{}: {} runs, p+ = {:.5} (Born {:.5}), z = {:.3}",
        sc.name, st.n_runs, st.empirical_p_plus, st.born_p_plus, st.z_score
    );
    Ok(())
}

#[derive(Serialize)]
struct SgReport {
    scenario: String,
    lambda: i32,
    n0: [f64; 3],
    final_state: [f64; 3],
    /// Smallest sampled `L` with `|n3| > 0.999`.
    transition_length_m: Option<f64>,
    /// Largest numeric/analytic gap while `Gamma <= 30`.
    max_gap_presaturation: f64,
    max_gap: f64,
    min_norm: f64,
    omega_rate: f64,
    speed_m_per_s: f64,
    wall_clock_s: f64,
}

pub fn sg(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let sc = Scenario::load(config)?;
    let mut cfg = sc.sg.ok_or_else(|| CliError::config("scenario has no [stern_gerlach] section"))?;
    prepare_out(out)?;
    let started = Instant::now();
    cfg.branch = pick_lambda(&sc, seed.unwrap_or(sc.seed))?;
    let traj = integrate_bloch_l(&sc.n0, &cfg, &sc.integrator)?;

    let mut comments = vec![
        format!("scenario = {}", sc.name),
        format!("lambda = {}", cfg.branch),
        format!("n0 = {}", fmt_vec(&vec3(&sc.n0))),
        format!("reference = 0 0 {}", float(cfg.branch.sign())),
        format!("V_m_per_s = {}", float(cfg.speed)),
    ];
    output::write_trajectory(&out.join("sg_trajectory.csv"), &traj, &comments)?;

    let path = out.join("sg_analytic.csv");
    comments.truncate(3);
    let mut w = output::create(&path, &comments, &["L_m", "n1", "n2", "n3", "gamma", "gap"])?;
    let (mut max_gap, mut max_gap_pre) = (0.0f64, 0.0f64);
    for s in &traj.samples {
        let gamma = cfg.gamma(s.t)?;
        let a = bloch_sg_analytic(s.t, &sc.n0, &cfg)?;
        let gap = a.distance(&s.n);
        max_gap = max_gap.max(gap);
        if gamma <= SATURATION_GAMMA {
            max_gap_pre = max_gap_pre.max(gap);
        }
        let n = vec3(&a);
        w.write_record([float(s.t), float(n[0]), float(n[1]), float(n[2]), float(gamma), float(gap)])?;
    }
    output::finish(w, &path)?;

    let report = SgReport {
        scenario: sc.name.clone(),
        lambda: cfg.branch.sign() as i32,
        n0: vec3(&sc.n0),
        final_state: traj.final_state().map(|n| vec3(&n)).unwrap_or([f64::NAN; 3]),
        transition_length_m: transition_length(&traj, TRANSITION_THRESHOLD),
        max_gap_presaturation: max_gap_pre,
        max_gap,
        min_norm: traj.samples.iter().map(|s| s.norm).fold(f64::INFINITY, f64::min),
        omega_rate: cfg.omega_rate(),
        speed_m_per_s: cfg.speed,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    output::write_report(&out.join("report.toml"), &report)?;
    println!(
        "{}: lambda = {}, transition length = {}, max analytic gap (Gamma <= 30) = {:.3e}",
        sc.name,
        cfg.branch,
        report.transition_length_m.map_or("none".into(), |l| format!("{l:.3e} m")),
        max_gap_pre
    );
    Ok(())
}

pub fn param_space(alpha: &str, resolution: usize, out: &Path, with_svg: bool) -> Result<(), CliError> {
    let alpha = eval_constant(alpha)?;
    let points = cross_section(alpha, resolution)?;
    prepare_out(out)?;
    let path = out.join("cross_section.csv");
    let mut w =
        output::create(&path, &[format!("alpha = {}", float(alpha))], &["theta", "Theta", "admissible", "region"])?;
    for p in &points {
        w.write_record([
            float(p.theta),
            float(p.relative_angle),
            p.admissible.to_string(),
            p.region.label().to_string(),
        ])?;
    }
    output::finish(w, &path)?;
    if with_svg {
        let class = |r: OutcomeRegion| -> Vec<(f64, f64)> {
            points.iter().filter(|p| p.admissible && p.region == r).map(|p| (p.theta, p.relative_angle)).collect()
        };
        let classes = [
            ("Theta < pi/2", "#1b9e9e", class(OutcomeRegion::Aligned)),
            ("Theta > pi/2", "#7b3fa0", class(OutcomeRegion::Opposed)),
            ("Theta = pi/2", "#1f3fff", class(OutcomeRegion::Boundary)),
        ];
        let svg = svg::scatter(&format!("admissible (theta, Theta) at alpha = {alpha:.4}"), "theta", "Theta", &classes)
            .ok_or_else(|| CliError::config("cross-section has no admissible points"))?;
        let svg_path = out.join("cross_section.svg");
        fs::write(&svg_path, svg).map_err(|e| CliError::io(&svg_path, e))?;
    }
    let admissible = points.iter().filter(|p| p.admissible).count();
    println!("alpha = {alpha:.6}: {admissible} of {} grid points admissible", points.len());
    Ok(())
}

pub fn plot(csv_path: &Path, out: &Path, log_axis: bool) -> Result<(), CliError> {
    let text = fs::read_to_string(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let reference: Option<Vec<f64>> = text
        .lines()
        .filter_map(|l| l.strip_prefix("# reference = "))
        .map(|r| r.split_whitespace().map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .next();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let abscissa = match headers.get(0) {
        Some("t_s") => Abscissa::Time,
        Some("L_m") => Abscissa::Distance,
        other => return Err(CliError::config(format!("{}: unknown first column {other:?}", csv_path.display()))),
    };
    let cols: Vec<usize> = ["n1", "n2", "n3", "norm"]
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| CliError::config(format!("{}: missing column `{c}`", csv_path.display())))
        })
        .collect::<Result<_, _>>()?;
    let mut series: Vec<Series> = ["n1", "n2", "n3", "|n|"]
        .iter()
        .enumerate()
        .map(|(i, l)| Series { label: l.to_string(), color: COLORS[i], dashed: i == 3, points: vec![] })
        .collect();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, CliError> {
            rec.get(i).unwrap_or("").parse().map_err(|_| {
                CliError::config(format!("{}: bad number in row {:?}", csv_path.display(), rec.position()))
            })
        };
        let x = parse(0)?;
        for (s, &c) in series.iter_mut().zip(&cols) {
            s.points.push((x, parse(c)?));
        }
    }
    if series[0].points.is_empty() {
        return Err(CliError::config(format!("{}: no data rows", csv_path.display())));
    }
    let references = reference
        .map(|r| {
            r.iter().zip(COLORS).filter(|(y, _)| y.is_finite()).map(|(&y, color)| Reference { y, color }).collect()
        })
        .unwrap_or_default();
    let plot = LinePlot {
        title: csv_path.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned()),
        x_label: match abscissa {
            Abscissa::Time => "t [s]".into(),
            Abscissa::Distance => "L [m]".into(),
        },
        log_x: log_axis,
        series,
        references,
    };
    let svg = plot.render().ok_or_else(|| CliError::config("nothing to plot on this axis"))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        prepare_out(dir)?;
    }
    fs::write(out, svg).map_err(|e| CliError::io(out, e))?;
    Ok(())
}
