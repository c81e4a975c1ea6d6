//! Dormand–Prince 5(4) integration of autonomous flows ẋ = u(x).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{BeltramiError, Result};
use crate::r3_fields::R3Field;
use crate::s3_construct::S3Field;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// fifth-order weights minus the embedded fourth-order ones
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub tol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { tol: 1e-10, initial_step: None, max_step: f64::INFINITY, max_steps: 10_000_000 }
    }
}

impl TraceOptions {
    pub fn with_tol(tol: f64) -> Self {
        TraceOptions { tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(BeltramiError::Domain { what: "tol", value: self.tol });
        }
        if !(self.max_step > 0.0) {
            return Err(BeltramiError::Domain { what: "max_step", value: self.max_step });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// largest scaled error estimate among accepted steps
    pub max_error_estimate: f64,
}

/// One accepted step, before and after.
pub(crate) struct StepEvent<'a, const N: usize> {
    pub t0: f64,
    pub x0: &'a [f64; N],
    pub h: f64,
    pub x1: &'a [f64; N],
}

pub(crate) struct Flow<'a, const N: usize> {
    pub f: &'a (dyn Fn(&[f64; N]) -> [f64; N] + Sync),
    pub project: Option<fn(&mut [f64; N])>,
}

impl<const N: usize> Flow<'_, N> {
    /// One explicit step of size h; returns the new state, its right-hand side and the error vector.
    pub fn step(&self, x: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N]) {
        let mut k = [[0.0; N]; 7];
        k[0] = *k1;
        for s in 1..7 {
            let mut y = *x;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        y[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = (self.f)(&y);
        }
        let mut x1 = *x;
        let mut err = [0.0; N];
        for i in 0..N {
            x1[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
            err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        }
        let mut f1 = k[6];
        if let Some(p) = self.project {
            p(&mut x1);
            f1 = (self.f)(&x1);
        }
        (x1, f1, err)
    }
}

fn scaled_error<const N: usize>(err: &[f64; N], x0: &[f64; N], x1: &[f64; N], tol: f64) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = tol * (1.0 + x0[i].abs().max(x1[i].abs()));
            (err[i] / sc).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

/// Outcome of an integration run.
pub(crate) struct RunEnd {
    pub stats: IntegratorStats,
    pub diagnostic: Option<String>,
}

/// Integrates from x0 until t_end or until the observer returns false.
pub(crate) fn integrate<const N: usize>(
    flow: &Flow<'_, N>,
    x0: [f64; N],
    t_end: f64,
    opts: &TraceOptions,
    mut observer: impl FnMut(&StepEvent<'_, N>) -> bool,
) -> RunEnd {
    let mut stats = IntegratorStats::default();
    let mut x = x0;
    if let Some(p) = flow.project {
        p(&mut x);
    }
    let mut fx = (flow.f)(&x);
    stats.evaluations += 1;
    let mut t = 0.0;
    let speed = fx.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut h = opts.initial_step.unwrap_or(if speed > 0.0 { 0.01 * (1.0 + norm(&x)) / speed } else { t_end });
    h = h.min(opts.max_step).min(t_end);
    let mut diagnostic = None;
    while t < t_end {
        if stats.steps >= opts.max_steps {
            diagnostic = Some(format!("step budget {} exhausted at t = {t}", opts.max_steps));
            break;
        }
        let last = t + h >= t_end;
        let hh = if last { t_end - t } else { h };
        if hh <= 1e-14 * t.abs().max(1.0) {
            if last {
                break;
            }
            diagnostic = Some(format!("step size underflow at t = {t}"));
            break;
        }
        let (x1, f1, err) = flow.step(&x, &fx, hh);
        stats.evaluations += if flow.project.is_some() { 7 } else { 6 };
        let e = scaled_error(&err, &x, &x1, opts.tol);
        let finite = e.is_finite() && x1.iter().all(|v| v.is_finite()) && f1.iter().all(|v| v.is_finite());
        if !finite || e > 1.0 {
            stats.rejected += 1;
            let fac = if finite { (0.9 * e.powf(-0.2)).clamp(0.2, 1.0) } else { 0.25 };
            h = hh * fac;
            continue;
        }
        stats.steps += 1;
        stats.max_error_estimate = stats.max_error_estimate.max(e);
        let go_on = observer(&StepEvent { t0: t, x0: &x, h: hh, x1: &x1 });
        t = if last { t_end } else { t + hh };
        x = x1;
        fx = f1;
        if !go_on {
            break;
        }
        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = (hh * fac).min(opts.max_step);
    }
    RunEnd { stats, diagnostic }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn renormalize4(x: &mut [f64; 4]) {
    let n = norm(x);
    for v in x.iter_mut() {
        *v /= n;
    }
}

/// The flow to trace and where it lives.
#[derive(Clone, Copy)]
pub enum FlowField<'a> {
    R3(&'a dyn R3Field),
    /// integrated in the ℝ⁴ embedding with renormalization
    S3(&'a dyn S3Field),
    /// a 2π-periodic field, coordinates wrapped with winding counters
    T3(&'a dyn R3Field),
}

impl FlowField<'_> {
    pub fn dim(&self) -> usize {
        match self {
            FlowField::S3(_) => 4,
            _ => 3,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, FlowField::T3(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// ℝ³, unit ℝ⁴, or [0, 2π)³ on the torus
    pub x: Vec<f64>,
    pub winding: Option<[i64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: IntegratorStats,
    /// set when integration stopped before T
    pub diagnostic: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has its initial sample")
    }

    pub fn completed(&self) -> bool {
        self.diagnostic.is_none()
    }
}

fn torus_sample(t: f64, x: &[f64; 3]) -> Sample {
    let winding = x.map(|v| (v / TAU).floor() as i64);
    let wrapped: Vec<f64> = (0..3)
        .map(|i| {
            let w = x[i] - winding[i] as f64 * TAU;
            if w >= TAU { w - TAU } else { w.max(0.0) }
        })
        .collect();
    Sample { t, x: wrapped, winding: Some(winding) }
}

pub(crate) fn r3_rhs(field: &dyn R3Field) -> impl Fn(&[f64; 3]) -> [f64; 3] + Sync + '_ {
    move |x| field.eval(*x)
}

pub(crate) fn s3_rhs(field: &dyn S3Field) -> impl Fn(&[f64; 4]) -> [f64; 4] + Sync + '_ {
    move |x| field.eval(*x)
}

/// Integrates ẋ = u(x) from x0 over [0, T], recording every accepted step.
pub fn trace_field_line(field: FlowField<'_>, x0: &[f64], t_end: f64, opts: &TraceOptions) -> Result<Trajectory> {
    opts.validate()?;
    if !(t_end >= 0.0) {
        return Err(BeltramiError::Domain { what: "T", value: t_end });
    }
    if x0.len() != field.dim() {
        return Err(BeltramiError::Precondition(format!("start point has {} coordinates, need {}", x0.len(), field.dim())));
    }
    match field {
        FlowField::S3(f) => {
            let p: [f64; 4] = std::array::from_fn(|i| x0[i]);
            let n = norm(&p);
            if (n - 1.0).abs() > 1e-9 {
                return Err(BeltramiError::Domain { what: "|x0|", value: n });
            }
            let rhs = s3_rhs(f);
            let flow = Flow { f: &rhs, project: Some(renormalize4) };
            let mut samples = vec![Sample { t: 0.0, x: p.map(|v| v / n).to_vec(), winding: None }];
            let end = integrate(&flow, p, t_end, opts, |ev| {
                samples.push(Sample { t: ev.t0 + ev.h, x: ev.x1.to_vec(), winding: None });
                true
            });
            finish(samples, end, t_end)
        }
        FlowField::R3(f) | FlowField::T3(f) => {
            let torus = field.is_torus();
            let x: [f64; 3] = std::array::from_fn(|i| x0[i]);
            let rhs = r3_rhs(f);
            let flow = Flow { f: &rhs, project: None };
            let make = |t: f64, x: &[f64; 3]| if torus { torus_sample(t, x) } else { Sample { t, x: x.to_vec(), winding: None } };
            let mut samples = vec![make(0.0, &x)];
            let end = integrate(&flow, x, t_end, opts, |ev| {
                samples.push(make(ev.t0 + ev.h, ev.x1));
                true
            });
            finish(samples, end, t_end)
        }
    }
}

fn finish(mut samples: Vec<Sample>, end: RunEnd, t_end: f64) -> Result<Trajectory> {
    // the clipped final step lands on T exactly
    if end.diagnostic.is_none() {
        if let Some(s) = samples.last_mut() {
            if (s.t - t_end).abs() <= 1e-12 * t_end.max(1.0) {
                s.t = t_end;
            }
        }
    }
    Ok(Trajectory { samples, stats: end.stats, diagnostic: end.diagnostic })
}
