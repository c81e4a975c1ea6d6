//! Geodesic normal coordinates Ψ: B_π → S³ \ {−p₀} with frame fᵢ = hᵢ(p₀).

use serde::{Deserialize, Serialize};

use super::{dot4, matvec, S3Point, HOPF};
use crate::error::{BeltramiError, Result};
use crate::r3_fields::norm3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalChart {
    base: S3Point,
    frame: [[f64; 4]; 3],
}

/// sin r / r, accurate near 0.
fn sinc(r: f64) -> f64 {
    if r.abs() < 1e-4 {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    }
}

pub fn exp_chart(base: S3Point) -> NormalChart {
    let p = base.coords();
    NormalChart { base, frame: std::array::from_fn(|i| matvec(&HOPF[i], p)) }
}

impl Default for NormalChart {
    fn default() -> Self {
        exp_chart(S3Point::north())
    }
}

impl NormalChart {
    pub fn base(&self) -> S3Point {
        self.base
    }

    pub fn frame(&self) -> &[[f64; 4]; 3] {
        &self.frame
    }

    fn combine(&self, a: f64, x: [f64; 3]) -> [f64; 4] {
        let p = self.base.coords();
        std::array::from_fn(|k| a * p[k] + x[0] * self.frame[0][k] + x[1] * self.frame[1][k] + x[2] * self.frame[2][k])
    }

    /// Ψ⁻¹(x) = cos|x| p₀ + sin|x| Σ x̂ᵢ fᵢ.
    pub fn to_sphere(&self, x: [f64; 3]) -> [f64; 4] {
        let r = norm3(x);
        let s = sinc(r);
        self.combine(r.cos(), [x[0] * s, x[1] * s, x[2] * s])
    }

    /// Ψ(q), valid away from −p₀; the result has |x| < π.
    pub fn to_chart(&self, q: [f64; 4]) -> [f64; 3] {
        let y: [f64; 3] = std::array::from_fn(|i| dot4(q, self.frame[i]));
        let y0 = dot4(q, self.base.coords());
        let ny = norm3(y);
        if ny == 0.0 {
            return [0.0; 3];
        }
        let r = ny.atan2(y0);
        y.map(|v| v * r / ny)
    }

    /// Columns ∂Ψ⁻¹/∂xⱼ.
    pub fn inverse_jacobian(&self, x: [f64; 3]) -> [[f64; 4]; 3] {
        let r = norm3(x);
        let xh = if r > 0.0 { x.map(|v| v / r) } else { [1.0, 0.0, 0.0] };
        let n = self.combine(0.0, xh);
        let p = self.base.coords();
        let s = sinc(r);
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let f = self.frame[j][k];
                xh[j] * (-r.sin() * p[k] + r.cos() * n[k]) + s * (f - xh[j] * n[k])
            })
        })
    }

    /// dΨ at Ψ⁻¹(x) applied to a tangent vector v there.
    pub fn push_vector(&self, x: [f64; 3], v: [f64; 4]) -> [f64; 3] {
        let r = norm3(x);
        let xh = if r > 0.0 { x.map(|c| c / r) } else { [1.0, 0.0, 0.0] };
        let n = self.combine(0.0, xh);
        let p = self.base.coords();
        let tr: [f64; 4] = std::array::from_fn(|k| -r.sin() * p[k] + r.cos() * n[k]);
        let a = dot4(v, tr);
        let vf: [f64; 3] = std::array::from_fn(|i| dot4(v, self.frame[i]));
        let inv = 1.0 / sinc(r);
        std::array::from_fn(|i| a * xh[i] + inv * (vf[i] - r.cos() * xh[i] * a))
    }

    /// Checked variant of `to_sphere` for points that must lie in the injectivity ball.
    pub fn to_sphere_checked(&self, x: [f64; 3]) -> Result<[f64; 4]> {
        let r = norm3(x);
        if !(r < std::f64::consts::PI) {
            return Err(BeltramiError::Domain { what: "|x| in chart", value: r });
        }
        Ok(self.to_sphere(x))
    }
}
