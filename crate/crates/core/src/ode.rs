// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) with PI step-size control and dense output.
//!
//! Follows the DOPRI5 scheme of Hairer, Nørsett and Wanner: FSAL stages,
//! fourth-order continuous extension, Hairer's initial-step heuristic.
//! Trailing state components may be declared as quadratures; they are
//! integrated but excluded from the error norm.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// A first-order system `y' = f(t, y)` on `[f64; N]`.
pub trait OdeSystem<const N: usize> {
    /// Leading components that take part in step-size control.
    const CONTROLLED: usize = N;

    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);

    /// Called after every accepted step. May rescale `y` in place; returns
    /// the natural log of the factor that was divided out, if any.
    fn renormalize(&self, _y: &mut [f64; N]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, h_init: None, h_max: f64::INFINITY, max_steps: 20_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub renormalizations: usize,
}

#[derive(Debug, Clone)]
pub struct OdeOutput<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    /// Accumulated log of all factors removed by `renormalize` before each sample.
    pub log_scales: Vec<f64>,
    pub stats: OdeStats,
}

#[derive(Debug, Clone)]
pub struct OdeFailure<const N: usize> {
    pub reason: String,
    pub t: f64,
    pub partial: OdeOutput<N>,
}

struct Controller {
    facold: f64,
    last_rejected: bool,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

impl Controller {
    /// Returns `(accepted, next_h)`.
    fn propose(&mut self, err: f64, h: f64) -> (bool, f64) {
        let expo1 = 0.2 - BETA * 0.75;
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let fac = (fac11 / self.facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if self.last_rejected {
                h_new = h_new.min(h);
            }
            self.facold = err.max(1e-4);
            self.last_rejected = false;
            (true, h_new)
        } else {
            self.last_rejected = true;
            (false, h / (fac11 / SAFETY).min(1.0 / FAC_MIN))
        }
    }
}

fn error_norm<const N: usize>(
    controlled: usize,
    y: &[f64; N],
    y_new: &[f64; N],
    e: &[f64; N],
    opts: &Dopri5Options,
) -> f64 {
    if controlled == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..controlled {
        let sk = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        acc += (e[i] / sk).powi(2);
    }
    (acc / controlled as f64).sqrt()
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    opts: &Dopri5Options,
    stats: &mut OdeStats,
) -> f64 {
    let m = S::CONTROLLED.max(1);
    let (mut dnf, mut dny) = (0.0, 0.0);
    for i in 0..m.min(N) {
        let sk = opts.atol + opts.rtol * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf).sqrt() };
    h = h.min(opts.h_max).min(span);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h * f0[i];
    }
    let mut f1 = [0.0; N];
    sys.rhs(t0 + h, &y1, &mut f1);
    stats.rhs_evals += 1;
    let mut der2 = 0.0;
    for i in 0..m.min(N) {
        let sk = opts.atol + opts.rtol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 { (1e-6f64).max(h * 1e-3) } else { (0.01 / der12).powf(0.2) };
    (100.0 * h).min(h1).min(opts.h_max).min(span)
}

/// Integrates from `(t0, y0)` and reports the state at each of `sample_times`
/// (nondecreasing, all `>= t0`), using dense output between steps.
#[allow(clippy::result_large_err)]
pub fn integrate<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    sample_times: &[f64],
    opts: &Dopri5Options,
) -> Result<OdeOutput<N>, OdeFailure<N>> {
    let mut out = OdeOutput {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        log_scales: Vec::with_capacity(sample_times.len()),
        stats: OdeStats::default(),
    };
    let fail = |out: OdeOutput<N>, t: f64, reason: String| Err(OdeFailure { reason, t, partial: out });

    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&s| s < t0) {
        return fail(out, t0, "sample times must be nondecreasing and >= t0".into());
    }
    let Some(&t_end) = sample_times.last() else {
        return Ok(out);
    };

    let mut next = 0;
    let mut t = t0;
    let mut y = y0;
    let mut log_scale = 0.0;
    while next < sample_times.len() && sample_times[next] == t0 {
        out.times.push(t0);
        out.states.push(y);
        out.log_scales.push(0.0);
        next += 1;
    }
    if next == sample_times.len() {
        return Ok(out);
    }

    let mut k1 = [0.0; N];
    sys.rhs(t, &y, &mut k1);
    out.stats.rhs_evals += 1;
    let mut h = match opts.h_init {
        Some(h) => h.min(t_end - t0),
        None => initial_step(sys, t, &y, &k1, t_end - t0, opts, &mut out.stats),
    };
    let mut ctl = Controller { facold: 1e-4, last_rejected: false };
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);
    let mut ys = [0.0; N];
    let mut y_new = [0.0; N];
    let mut err_v = [0.0; N];

    loop {
        if out.stats.accepted + out.stats.rejected >= opts.max_steps {
            return fail(out, t, format!("maximum number of steps ({}) exceeded", opts.max_steps));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if !(h > 0.0) || t + h == t {
            return fail(out, t, format!("step size underflow (h = {h:e})"));
        }

        for i in 0..N {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, &ys, &mut k2);
        for i in 0..N {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, &ys, &mut k3);
        for i in 0..N {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, &ys, &mut k4);
        for i in 0..N {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, &ys, &mut k5);
        for i in 0..N {
            ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        sys.rhs(t_new, &ys, &mut k6);
        for i in 0..N {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t_new, &y_new, &mut k7);
        out.stats.rhs_evals += 6;
        for i in 0..N {
            err_v[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = error_norm(S::CONTROLLED, &y, &y_new, &err_v, opts);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            out.stats.rejected += 1;
            ctl.last_rejected = true;
            h *= 0.1;
            continue;
        }
        let (accepted, h_next) = ctl.propose(err, h);
        if !accepted {
            out.stats.rejected += 1;
            h = h_next;
            continue;
        }
        out.stats.accepted += 1;

        if next < sample_times.len() && sample_times[next] <= t_new {
            // Hairer's continuous extension.
            let mut r2 = [0.0; N];
            let mut r3 = [0.0; N];
            let mut r4 = [0.0; N];
            let mut r5 = [0.0; N];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r2[i] = ydiff;
                r3[i] = bspl;
                r4[i] = ydiff - h * k7[i] - bspl;
                r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            while next < sample_times.len() && sample_times[next] <= t_new {
                let ts = sample_times[next];
                let state = if ts == t_new {
                    y_new
                } else {
                    let th = (ts - t) / h;
                    let th1 = 1.0 - th;
                    let mut s = [0.0; N];
                    for i in 0..N {
                        s[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                    }
                    s
                };
                out.times.push(ts);
                out.states.push(state);
                out.log_scales.push(log_scale);
                next += 1;
            }
        }

        y = y_new;
        t = t_new;
        k1 = k7;
        if let Some(removed) = sys.renormalize(&mut y) {
            out.stats.renormalizations += 1;
            log_scale += removed;
            sys.rhs(t, &y, &mut k1);
            out.stats.rhs_evals += 1;
        }
        if last || next >= sample_times.len() {
            return Ok(out);
        }
        h = h_next.min(opts.h_max);
    }
}
