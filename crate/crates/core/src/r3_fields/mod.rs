//! Beltrami fields of ℝ³ and their approximation by Helmholtz atoms.

pub mod atoms;
pub mod fourier_bessel;
pub mod herglotz;
pub mod lsq;
pub mod reference;
pub mod sphere;

use crate::error::{BeltramiError, Result};
use crate::jet::Partials;

pub use atoms::{
    fit_bessel_atoms, fit_planewave_atoms, BesselAtom, BesselAtomField, BesselFit, Cutoff, FitOptions,
    PlaneWaveAtom, PlaneWaveAtomField, PlaneWaveFit,
};
pub use fourier_bessel::{fourier_bessel_expand, FourierBesselSeries, QuadratureSpec};
pub use herglotz::{herglotz_density, HerglotzDensity, SphereDensity};
pub use reference::{reference_beltrami, AbcField, CkField, ReferenceSpec};

/// What a field is known to satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldTag {
    /// curl v = c v
    Beltrami(f64),
    /// Δv + v = 0
    Helmholtz,
    Other,
}

/// A vector field on ℝ³ with analytic partials.
pub trait R3Field: Send + Sync {
    fn eval(&self, x: [f64; 3]) -> [f64; 3];

    /// All partials up to `order` at `x`.
    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials>;

    fn max_order(&self) -> usize {
        6
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Other
    }
}

/// Partials of an atom field or any other analytic field, order at most 4.
pub fn eval_with_derivatives(field: &dyn R3Field, x: [f64; 3], order: usize) -> Result<Partials> {
    if order > 4 {
        return Err(BeltramiError::DerivativeOrder { requested: order, available: 4 });
    }
    field.partials(x, order)
}

/// |curl v - c v| at `x`.
pub fn beltrami_residual(field: &dyn R3Field, x: [f64; 3], c: f64) -> Result<f64> {
    let p = field.partials(x, 1)?;
    let curl = p.curl();
    let v = p.value();
    Ok(norm3([curl[0] - c * v[0], curl[1] - c * v[1], curl[2] - c * v[2]]))
}

/// |Δv + v| at `x`.
pub fn helmholtz_residual(field: &dyn R3Field, x: [f64; 3]) -> Result<f64> {
    let p = field.partials(x, 2)?;
    let v = p.value();
    let mut r = [0.0; 3];
    for axis in 0..3 {
        let mut a = [0; 3];
        a[axis] = 2;
        let d = p.get(a);
        for i in 0..3 {
            r[i] += d[i];
        }
    }
    Ok(norm3([r[0] + v[0], r[1] + v[1], r[2] + v[2]]))
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Points of a uniform n³ grid on [-r, r]³ that lie in the closed ball of radius r.
pub fn ball_grid(n: usize, r: f64) -> Vec<[f64; 3]> {
    let mut pts = Vec::new();
    if n == 0 {
        return pts;
    }
    let h = if n > 1 { 2.0 * r / (n - 1) as f64 } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = if n > 1 { [-r + i as f64 * h, -r + j as f64 * h, -r + k as f64 * h] } else { [0.0; 3] };
                if norm3(x) <= r * (1.0 + 1e-12) {
                    pts.push(x);
                }
            }
        }
    }
    pts
}
