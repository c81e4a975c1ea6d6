//! Poincaré sections, return maps and closed-orbit detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{integrate, r3_rhs, renormalize4, s3_rhs, Flow, FlowField, TraceOptions};
use crate::error::{BeltramiError, Result};

pub const DEFAULT_CLOSURE_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_MIN_RETURNS: usize = 3;

/// The hyperplane n·(x − point) = 0 crossed in the direction of n, with section coordinates
/// sᵢ = axesᵢ·(x − point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub axes: [Vec<f64>; 2],
    /// only count crossings with s₁ > 0
    #[serde(default)]
    pub half_plane: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

impl SectionSpec {
    /// A plane in ℝ³; the first axis is the component of `toward` orthogonal to the normal.
    pub fn plane(point: [f64; 3], normal: [f64; 3], toward: [f64; 3]) -> Result<Self> {
        let n = unit(&normal);
        let t: Vec<f64> = (0..3).map(|i| toward[i] - dot(&toward, &n) * n[i]).collect();
        if !(dot(&t, &t).sqrt() > 1e-12) || !n.iter().all(|v| v.is_finite()) {
            return Err(BeltramiError::Precondition("section axis parallel to its normal".into()));
        }
        let e1 = unit(&t);
        let e2 = vec![n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]];
        Ok(SectionSpec { point: point.to_vec(), normal: n, axes: [e1, e2], half_plane: false })
    }

    pub fn with_half_plane(mut self) -> Self {
        self.half_plane = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let lens = [self.point.len(), self.normal.len(), self.axes[0].len(), self.axes[1].len()];
        if lens.iter().any(|&l| l != dim) {
            return Err(BeltramiError::Precondition(format!("section vectors must have {dim} coordinates")));
        }
        if !(dot(&self.normal, &self.normal) > 0.0) {
            return Err(BeltramiError::Precondition("section normal is zero".into()));
        }
        Ok(())
    }

    /// Signed distance-like section function g(x) = n·(x − point).
    pub fn g(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.point).zip(&self.normal).map(|((a, p), n)| (a - p) * n).sum()
    }

    pub fn coords(&self, x: &[f64]) -> [f64; 2] {
        let d: Vec<f64> = x.iter().zip(&self.point).map(|(a, p)| a - p).collect();
        [dot(&d, &self.axes[0]), dot(&d, &self.axes[1])]
    }

    /// point + s₁e₁ + s₂e₂, projected to the unit sphere for four-dimensional sections.
    pub fn lift(&self, s: [f64; 2]) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.dim()).map(|i| self.point[i] + s[0] * self.axes[0][i] + s[1] * self.axes[1][i]).collect();
        if self.dim() == 4 {
            let n = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v /= n);
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    pub x: Vec<f64>,
    pub s: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSection {
    pub spec: SectionSpec,
    pub seeds: Vec<Vec<f64>>,
    /// crossings[seed][return]
    pub crossings: Vec<Vec<Crossing>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionOptions {
    pub trace: TraceOptions,
    /// give up on a seed after this much time without completing its returns
    pub max_time: f64,
    /// minimum |u·n|/|u| at a crossing
    pub min_transversality: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions { trace: TraceOptions::default(), max_time: 1e6, min_transversality: 1e-6 }
    }
}

/// Illinois iteration for g(τ) − level = 0 on [0, h] given g0 < 0 ≤ g1 (both already shifted), each
/// trial point a fresh step of size τ.
#[allow(clippy::too_many_arguments)]
fn polish<const N: usize>(
    flow: &Flow<'_, N>,
    spec: &SectionSpec,
    x0: &[f64; N],
    h: f64,
    g0: f64,
    g1: f64,
    level: f64,
) -> (f64, [f64; N]) {
    let f0 = (flow.f)(x0);
    let at = |tau: f64| {
        let (x, _, _) = flow.step(x0, &f0, tau);
        (spec.g(&x) - level, x)
    };
    let (mut a, mut ga, mut b, mut gb) = (0.0, g0, h, g1);
    let mut side = 0i8;
    let mut tau = h;
    let mut x = at(h).1;
    for _ in 0..100 {
        let trial = (a * gb - b * ga) / (gb - ga);
        tau = if trial.is_finite() && trial > a && trial < b { trial } else { 0.5 * (a + b) };
        let (g, xt) = at(tau);
        x = xt;
        if g.abs() <= 1e-13 || (b - a) <= 1e-15 * h.max(1.0) {
            break;
        }
        if g < 0.0 {
            (a, ga) = (tau, g);
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            (b, gb) = (tau, g);
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    (tau, x)
}

/// Spacing in g between the lattice translates of a torus section.
fn torus_layer_spacing(normal: &[f64]) -> Result<f64> {
    let smallest = normal.iter().map(|v| v.abs()).filter(|v| *v > 1e-12).fold(f64::INFINITY, f64::min);
    let reject = || BeltramiError::Precondition("torus section normal must be parallel to an integer vector".into());
    if !smallest.is_finite() {
        return Err(reject());
    }
    for mult in 1..=12u32 {
        let c = smallest / mult as f64;
        let nu: Vec<f64> = normal.iter().map(|v| v / c).collect();
        if nu.iter().all(|v| (v - v.round()).abs() <= 1e-9 * v.abs().max(1.0)) {
            let g = nu.iter().map(|v| v.round().abs() as u64).fold(0, gcd);
            return Ok(std::f64::consts::TAU * c * g as f64);
        }
    }
    Err(reject())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn crossings_for_seed<const N: usize>(
    flow: &Flow<'_, N>,
    spec: &SectionSpec,
    seed: [f64; N],
    seed_id: usize,
    n_returns: usize,
    opts: &SectionOptions,
    torus_spacing: Option<f64>,
) -> Result<Vec<Crossing>> {
    let mut out = Vec::with_capacity(n_returns);
    if n_returns == 0 {
        return Ok(out);
    }
    let mut failure: Option<BeltramiError> = None;
    integrate(flow, seed, opts.max_time, &opts.trace, |ev| {
        let (g0, g1) = (spec.g(ev.x0), spec.g(ev.x1));
        // on the torus every translate of the plane is the same section, and one step may cross several
        let levels: Vec<f64> = match torus_spacing {
            None => vec![0.0],
            Some(p) => ((g0 / p).floor() as i64 + 1..=(g1 / p).floor() as i64).map(|m| m as f64 * p).collect(),
        };
        for level in levels {
            let (a, b) = (g0 - level, g1 - level);
            if !(a < 0.0 && b >= 0.0) {
                continue;
            }
            let (tau, mut x) = polish(flow, spec, ev.x0, ev.h, a, b, level);
            if torus_spacing.is_some() {
                x.iter_mut().for_each(|v| *v = v.rem_euclid(std::f64::consts::TAU));
            }
            let s = spec.coords(&x);
            if spec.half_plane && s[0] <= 0.0 {
                continue;
            }
            let u = (flow.f)(&x);
            let un = dot(&u, &spec.normal).abs() / dot(&u, &u).sqrt();
            if !(un >= opts.min_transversality) {
                failure = Some(BeltramiError::Transversality { seed: seed_id, dot: un });
                return false;
            }
            out.push(Crossing { t: ev.t0 + tau, x: x.to_vec(), s });
            if out.len() == n_returns {
                return false;
            }
        }
        true
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if out.len() < n_returns {
        return Err(BeltramiError::Escape { seed: seed_id, returns: out.len(), requested: n_returns });
    }
    Ok(out)
}

fn seed_array<const N: usize>(x: &[f64]) -> Result<[f64; N]> {
    if x.len() != N {
        return Err(BeltramiError::Precondition(format!("seed has {} coordinates, need {N}", x.len())));
    }
    Ok(std::array::from_fn(|i| x[i]))
}

/// n_returns oriented, root-polished crossings per seed. On the torus every lattice translate of the
/// plane counts, and crossing points are reported wrapped into [0, 2π)³.
pub fn poincare_section(
    field: FlowField<'_>,
    spec: &SectionSpec,
    seeds: &[Vec<f64>],
    n_returns: usize,
    opts: &SectionOptions,
) -> Result<PoincareSection> {
    opts.trace.validate()?;
    spec.validate(field.dim())?;
    let crossings: Result<Vec<Vec<Crossing>>> = match field {
        FlowField::S3(f) => {
            let rhs = s3_rhs(f);
            let flow = Flow { f: &rhs, project: Some(renormalize4) };
            seeds
                .par_iter()
                .enumerate()
                .map(|(i, s)| crossings_for_seed(&flow, spec, seed_array::<4>(s)?, i, n_returns, opts, None))
                .collect()
        }
        FlowField::R3(f) | FlowField::T3(f) => {
            let spacing = if field.is_torus() { Some(torus_layer_spacing(&spec.normal)?) } else { None };
            let rhs = r3_rhs(f);
            let flow = Flow { f: &rhs, project: None };
            seeds
                .par_iter()
                .enumerate()
                .map(|(i, s)| crossings_for_seed(&flow, spec, seed_array::<3>(s)?, i, n_returns, opts, spacing))
                .collect()
        }
    };
    Ok(PoincareSection { spec: spec.clone(), seeds: seeds.to_vec(), crossings: crossings? })
}

/// The first return of the orbit through spec.lift(s).
pub fn return_map(field: FlowField<'_>, spec: &SectionSpec, s: [f64; 2], opts: &SectionOptions) -> Result<Crossing> {
    let seed = spec.lift(s);
    let sec = poincare_section(field, spec, &[seed], 1, opts)?;
    Ok(sec.crossings.into_iter().next().and_then(|c| c.into_iter().next()).expect("one return requested"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    /// number of returns per period
    pub period: usize,
    /// max |s_{j+period} − s_j| over the recorded returns
    pub closure: f64,
}

/// Smallest period q whose return-map displacement stays under `threshold` over at least `min_returns` comparisons.
/// `origin`, when given, is prepended as return zero.
pub fn detect_closed_orbit(
    crossings: &[Crossing],
    origin: Option<[f64; 2]>,
    threshold: f64,
    min_returns: usize,
) -> Option<ClosedOrbit> {
    let pts: Vec<[f64; 2]> = origin.into_iter().chain(crossings.iter().map(|c| c.s)).collect();
    let n = pts.len();
    (1..n).find_map(|q| {
        if n - q < min_returns {
            return None;
        }
        let closure = (0..n - q)
            .map(|j| ((pts[j + q][0] - pts[j][0]).powi(2) + (pts[j + q][1] - pts[j][1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        (closure <= threshold).then_some(ClosedOrbit { period: q, closure })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub s: [f64; 2],
    /// |P(s) − s|
    pub residual: f64,
    pub iterations: usize,
}

fn defect(field: FlowField<'_>, spec: &SectionSpec, s: [f64; 2], opts: &SectionOptions) -> Result<[f64; 2]> {
    let c = return_map(field, spec, s, opts)?;
    Ok([c.s[0] - s[0], c.s[1] - s[1]])
}

/// Central-difference Jacobian of the return map at s.
pub fn return_map_jacobian(
    field: FlowField<'_>,
    spec: &SectionSpec,
    s: [f64; 2],
    opts: &SectionOptions,
    step: f64,
) -> Result<[[f64; 2]; 2]> {
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        let mut sp = s;
        let mut sm = s;
        sp[k] += step;
        sm[k] -= step;
        let (cp, cm) = (return_map(field, spec, sp, opts)?, return_map(field, spec, sm, opts)?);
        for i in 0..2 {
            jac[i][k] = (cp.s[i] - cm.s[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Newton iteration on s ↦ P(s) − s with a central-difference Jacobian.
pub fn find_fixed_point(
    field: FlowField<'_>,
    spec: &SectionSpec,
    guess: [f64; 2],
    opts: &SectionOptions,
    step: f64,
    max_iterations: usize,
) -> Result<FixedPoint> {
    let mut s = guess;
    let mut d = defect(field, spec, s, opts)?;
    let mut residual = d[0].hypot(d[1]);
    for it in 0..max_iterations {
        if residual <= 1e-11 {
            return Ok(FixedPoint { s, residual, iterations: it });
        }
        let mut jac = return_map_jacobian(field, spec, s, opts, step)?;
        jac[0][0] -= 1.0;
        jac[1][1] -= 1.0;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            return Err(BeltramiError::Precondition("return map is degenerate at the fixed-point guess".into()));
        }
        let delta = [(jac[1][1] * d[0] - jac[0][1] * d[1]) / det, (-jac[1][0] * d[0] + jac[0][0] * d[1]) / det];
        let next = [s[0] - delta[0], s[1] - delta[1]];
        let dn = defect(field, spec, next, opts)?;
        let rn = dn[0].hypot(dn[1]);
        if rn >= residual && it > 0 {
            return Ok(FixedPoint { s, residual, iterations: it });
        }
        s = next;
        d = dn;
        residual = rn;
    }
    Ok(FixedPoint { s, residual, iterations: max_iterations })
}

/// The quadratic form preserved by an elliptic 2×2 map, positive definite.
pub fn invariant_form(jac: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if !(det > 0.0) {
        return Err(BeltramiError::Precondition(format!("linearized return map has determinant {det}")));
    }
    let sd = det.sqrt();
    let j = jac.map(|r| r.map(|v| v / sd));
    let c = 0.5 * (j[0][0] + j[1][1]);
    if !(c.abs() < 1.0) {
        return Err(BeltramiError::Precondition(format!("fixed point is not elliptic (half trace {c})")));
    }
    let sn = (1.0 - c * c).sqrt();
    // Ĵ = cos ω I + sin ω K with K² = −I; QK antisymmetric makes Q invariant
    let k = [[(j[0][0] - c) / sn, j[0][1] / sn], [j[1][0] / sn, (j[1][1] - c) / sn]];
    let q = [[-k[1][0], k[0][0]], [k[0][0], k[0][1]]];
    Ok(if q[0][0] > 0.0 { q } else { q.map(|r| r.map(|v| -v)) })
}

/// `count` points on the invariant ellipse of the linearized map about `center`, major semi-axis `radius`.
pub fn invariant_ellipse_seeds(jac: &[[f64; 2]; 2], center: [f64; 2], radius: f64, count: usize) -> Result<Vec<[f64; 2]>> {
    let q = invariant_form(jac)?;
    let tr = q[0][0] + q[1][1];
    let disc = ((q[0][0] - q[1][1]).powi(2) + 4.0 * q[0][1] * q[0][1]).sqrt();
    let (l1, l2) = (0.5 * (tr - disc), 0.5 * (tr + disc));
    // eigenvector of the small eigenvalue is the major axis
    let phi = 0.5 * (2.0 * q[0][1]).atan2(q[0][0] - q[1][1]) + std::f64::consts::FRAC_PI_2;
    let (major, minor) = (radius, radius * (l1 / l2).sqrt());
    let (cp, sp) = (phi.cos(), phi.sin());
    Ok((0..count)
        .map(|n| {
            let th = std::f64::consts::TAU * n as f64 / count as f64;
            let (a, b) = (major * th.cos(), minor * th.sin());
            [center[0] + cp * a - sp * b, center[1] + sp * a + cp * b]
        })
        .collect())
}

/// max over crossings of |s − center|.
pub fn tube_radius(crossings: &[Crossing], center: [f64; 2]) -> f64 {
    crossings.iter().map(|c| (c.s[0] - center[0]).hypot(c.s[1] - center[1])).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Partials;
    use crate::r3_fields::R3Field;
    use crate::s3_construct::LinearHopf;

    fn hopf_spec() -> SectionSpec {
        // h₁ at the north pole is −e₁; cross the plane x₁ = 0 going negative
        SectionSpec {
            point: vec![0.0, 0.0, 0.0, 1.0],
            normal: vec![-1.0, 0.0, 0.0, 0.0],
            axes: [vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
            half_plane: false,
        }
    }

    #[test]
    fn hopf_orbit_is_a_fixed_point() {
        let h1 = LinearHopf([1.0, 0.0, 0.0]);
        let spec = hopf_spec();
        let opts = SectionOptions { trace: TraceOptions::with_tol(1e-11), ..Default::default() };
        let sec = poincare_section(FlowField::S3(&h1), &spec, &[vec![0.0, 0.0, 0.0, 1.0]], 5, &opts).unwrap();
        let cr = &sec.crossings[0];
        assert_eq!(cr.len(), 5);
        for (j, c) in cr.iter().enumerate() {
            let d: f64 = (0..4).map(|i| (c.x[i] - [0.0, 0.0, 0.0, 1.0][i]).powi(2)).sum::<f64>().sqrt();
            assert!(d < 1e-7, "return {j}: {d}");
            assert!(spec.g(&c.x).abs() <= 1e-9);
            assert!((c.t - std::f64::consts::TAU * (j + 1) as f64).abs() < 1e-6);
        }
        let closed = detect_closed_orbit(cr, Some([0.0, 0.0]), DEFAULT_CLOSURE_THRESHOLD, DEFAULT_MIN_RETURNS).unwrap();
        assert_eq!(closed.period, 1);
    }

    #[test]
    fn zero_returns_is_empty() {
        let h1 = LinearHopf([1.0, 0.0, 0.0]);
        let sec = poincare_section(FlowField::S3(&h1), &hopf_spec(), &[vec![0.0, 0.0, 0.0, 1.0]], 0, &SectionOptions::default()).unwrap();
        assert!(sec.crossings[0].is_empty());
    }

    /// Rigid rotation about the z axis with a small vertical twist: ẋ = (−y, x, 0).
    struct Rotation;
    impl R3Field for Rotation {
        fn eval(&self, x: [f64; 3]) -> [f64; 3] {
            [-x[1], x[0], 0.0]
        }
        fn partials(&self, _: [f64; 3], _: usize) -> Result<Partials> {
            unreachable!()
        }
    }

    #[test]
    fn rotation_returns_and_newton() {
        let spec = SectionSpec::plane([0.0; 3], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]).unwrap().with_half_plane();
        let opts = SectionOptions { trace: TraceOptions::with_tol(1e-11), ..Default::default() };
        let seeds = vec![vec![1.0, 0.0, 0.5], vec![2.0, 0.0, -0.5]];
        let sec = poincare_section(FlowField::R3(&Rotation), &spec, &seeds, 4, &opts).unwrap();
        for (seed, cr) in seeds.iter().zip(&sec.crossings) {
            for c in cr {
                assert!((c.s[0] - seed[0]).abs() < 1e-8 && (c.s[1] + seed[2]).abs() < 1e-8, "{:?}", c.s);
            }
        }
        // an identity return map has a singular Newton system
        let fp = find_fixed_point(FlowField::R3(&Rotation), &spec, [1.5, 0.2], &opts, 1e-5, 5);
        assert!(matches!(fp, Err(BeltramiError::Precondition(_))));
    }

    /// Constant drift (1, 0.3, 0) on the torus.
    struct Drift;
    impl R3Field for Drift {
        fn eval(&self, _: [f64; 3]) -> [f64; 3] {
            [1.0, 0.3, 0.0]
        }
        fn partials(&self, _: [f64; 3], _: usize) -> Result<Partials> {
            unreachable!()
        }
    }

    #[test]
    fn torus_sections_count_every_translate() {
        let spec = SectionSpec::plane([3.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        let opts = SectionOptions { trace: TraceOptions::with_tol(1e-11), ..Default::default() };
        let sec = poincare_section(FlowField::T3(&Drift), &spec, &[vec![0.5, 6.0, 1.0]], 4, &opts).unwrap();
        for (j, c) in sec.crossings[0].iter().enumerate() {
            let t = 2.5 + std::f64::consts::TAU * j as f64;
            assert!((c.t - t).abs() < 1e-9, "{} vs {t}", c.t);
            assert!((c.x[0] - 3.0).abs() < 1e-9);
            assert!((c.s[0] - (6.0 + 0.3 * t).rem_euclid(std::f64::consts::TAU)).abs() < 1e-9);
            assert!(c.x.iter().all(|v| (0.0..std::f64::consts::TAU).contains(v)));
        }
        // the same plane in ℝ³ is crossed once
        let r3 = poincare_section(FlowField::R3(&Drift), &spec, &[vec![0.5, 6.0, 1.0]], 2, &SectionOptions { max_time: 50.0, ..opts });
        assert!(matches!(r3, Err(BeltramiError::Escape { returns: 1, .. })));
    }

    #[test]
    fn torus_layer_spacings() {
        let tau = std::f64::consts::TAU;
        assert!((torus_layer_spacing(&[0.0, 0.0, 1.0]).unwrap() - tau).abs() < 1e-15);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!((torus_layer_spacing(&[d, d, 0.0]).unwrap() - tau * d).abs() < 1e-14);
        assert!((torus_layer_spacing(&[1.0, 0.5, 0.0]).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        assert!((torus_layer_spacing(&[2.0, 4.0, 0.0]).unwrap() - tau * 2.0).abs() < 1e-14);
        assert!(torus_layer_spacing(&[1.0, 2f64.sqrt(), 0.0]).is_err());
    }

    /// Linear focus-free twist: ẋ = (−y, x, 0) + (0, 0, −(z − 0.3)) contracts onto z = 0.3.
    struct Sink;
    impl R3Field for Sink {
        fn eval(&self, x: [f64; 3]) -> [f64; 3] {
            [-x[1] - 0.1 * (x[0].hypot(x[1]) - 1.0) * x[0], x[0] - 0.1 * (x[0].hypot(x[1]) - 1.0) * x[1], -(x[2] - 0.3)]
        }
        fn partials(&self, _: [f64; 3], _: usize) -> Result<Partials> {
            unreachable!()
        }
    }

    #[test]
    fn newton_finds_limit_cycle() {
        let spec = SectionSpec::plane([0.0; 3], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]).unwrap().with_half_plane();
        let opts = SectionOptions { trace: TraceOptions::with_tol(1e-12), ..Default::default() };
        let fp = find_fixed_point(FlowField::R3(&Sink), &spec, [1.2, 0.1], &opts, 1e-5, 20).unwrap();
        assert!((fp.s[0] - 1.0).abs() < 1e-8 && (fp.s[1] + 0.3).abs() < 1e-8, "{fp:?}");
        assert!(fp.residual < 1e-9);
    }

    #[test]
    fn tangent_section_rejected() {
        let spec = SectionSpec::plane([0.0; 3], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
        let opts = SectionOptions { max_time: 50.0, ..Default::default() };
        let r = poincare_section(FlowField::R3(&Rotation), &spec, &[vec![1.0, 0.0, -0.1]], 1, &opts);
        assert!(matches!(r, Err(BeltramiError::Escape { seed: 0, returns: 0, requested: 1 })));
    }

    #[test]
    fn invariant_form_is_preserved() {
        // a sheared rotation, conjugate to rotation by 0.7
        let (c, sn) = (0.7f64.cos(), 0.7f64.sin());
        let m = [[2.0, 0.5], [0.0, 0.5]];
        let minv = [[0.5, -0.5], [0.0, 2.0]];
        let r = [[c, -sn], [sn, c]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| -> [[f64; 2]; 2] {
            std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
        };
        let jac = mul(mul(m, r), minv);
        let q = invariant_form(&jac).unwrap();
        let jt = [[jac[0][0], jac[1][0]], [jac[0][1], jac[1][1]]];
        let back = mul(mul(jt, q), jac);
        for i in 0..2 {
            for j in 0..2 {
                assert!((back[i][j] - q[i][j]).abs() < 1e-12);
            }
        }
        let seeds = invariant_ellipse_seeds(&jac, [1.0, 2.0], 0.1, 8).unwrap();
        let form = |s: [f64; 2]| {
            let d = [s[0] - 1.0, s[1] - 2.0];
            q[0][0] * d[0] * d[0] + 2.0 * q[0][1] * d[0] * d[1] + q[1][1] * d[1] * d[1]
        };
        let f0 = form(seeds[0]);
        assert!(seeds.iter().all(|&s| (form(s) - f0).abs() < 1e-12 * f0));
        let rmax = seeds.iter().map(|s| (s[0] - 1.0).hypot(s[1] - 2.0)).fold(0.0, f64::max);
        assert!((rmax - 0.1).abs() < 1e-12);
        // images of seeds stay on the ellipse
        let img = [jac[0][0] * (seeds[3][0] - 1.0) + jac[0][1] * (seeds[3][1] - 2.0) + 1.0, jac[1][0] * (seeds[3][0] - 1.0) + jac[1][1] * (seeds[3][1] - 2.0) + 2.0];
        assert!((form(img) - f0).abs() < 1e-12);
        assert!(invariant_form(&[[2.0, 0.0], [0.0, 0.5]]).is_err());
    }

    #[test]
    fn closed_orbit_detection_rules() {
        let mk = |s: [f64; 2]| Crossing { t: 0.0, x: vec![], s };
        let period_two = vec![mk([1.0, 0.0]), mk([-1.0, 0.0]), mk([1.0, 0.0]), mk([-1.0, 0.0]), mk([1.0, 0.0])];
        let c = detect_closed_orbit(&period_two, None, 1e-6, 3).unwrap();
        assert_eq!(c.period, 2);
        assert!(detect_closed_orbit(&period_two[..3], None, 1e-6, 3).is_none());
        let drift: Vec<Crossing> = (0..10).map(|j| mk([j as f64 * 1e-3, 0.0])).collect();
        assert!(detect_closed_orbit(&drift, None, 1e-6, 3).is_none());
    }
}
