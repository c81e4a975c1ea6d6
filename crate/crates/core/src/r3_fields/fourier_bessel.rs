//! Fourier–Bessel expansion v ≈ Σ b_lm j_l(r) Y_lm(ω) on the ball of radius 2.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::sphere::{lm_count, lm_index, lm_pairs, real_sph_harm_all, SphereGrid};
use super::{norm3, R3Field};
use crate::error::{BeltramiError, Result};
use crate::specfun::sph_j;

pub const FB_DEGREE_CAP: usize = 32;
pub const FB_RADIUS: f64 = 2.0;

/// Radial Gauss–Legendre nodes times a Gauss product rule on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl QuadratureSpec {
    /// Exact on the angular part for fields whose components have degree at most l0 + 2.
    pub fn for_degree(l0: usize) -> Self {
        QuadratureSpec { n_r: 32, n_theta: l0 + 3, n_phi: 2 * l0 + 6 }
    }

    pub fn sphere_nodes(&self) -> usize {
        self.n_theta * self.n_phi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierBesselSeries {
    pub l0: usize,
    /// b_lm indexed by `lm_index`.
    pub coeffs: Vec<[f64; 3]>,
}

struct BallRule {
    radii: Vec<(f64, f64)>,
    sphere: SphereGrid,
}

impl BallRule {
    fn new(spec: &QuadratureSpec) -> Result<Self> {
        let gl = GaussLegendre::new(spec.n_r.max(2))
            .map_err(|e| BeltramiError::Precondition(format!("radial rule: {e}")))?;
        let h = FB_RADIUS / 2.0;
        let radii = gl.as_node_weight_pairs().iter().map(|&(t, w)| (h * (t + 1.0), h * w)).collect();
        Ok(BallRule { radii, sphere: SphereGrid::gauss_product(spec.n_theta, spec.n_phi) })
    }
}

/// Projects `v` onto j_l Y_lm in L²(B₂), l <= l0.
pub fn fourier_bessel_expand(v: &dyn R3Field, l0: usize, grid: &QuadratureSpec) -> Result<FourierBesselSeries> {
    if l0 > FB_DEGREE_CAP {
        return Err(BeltramiError::UnsupportedDegree { degree: l0, cap: FB_DEGREE_CAP });
    }
    let required = 2 * (l0 + 1) * (l0 + 1);
    if grid.sphere_nodes() < required {
        return Err(BeltramiError::Aliasing { nodes: grid.sphere_nodes(), required });
    }
    let rule = BallRule::new(grid)?;
    let ylm: Vec<Vec<f64>> = rule.sphere.nodes.iter().map(|&d| real_sph_harm_all(l0, d)).collect();
    let n = lm_count(l0);
    let mut num = vec![[0.0; 3]; n];
    let mut den = vec![0.0; l0 + 1];
    for &(r, wr) in &rule.radii {
        let jl: Vec<f64> = (0..=l0).map(|l| sph_j(l, r)).collect();
        for l in 0..=l0 {
            den[l] += wr * r * r * jl[l] * jl[l];
        }
        for (k, (&d, &wa)) in rule.sphere.nodes.iter().zip(&rule.sphere.weights).enumerate() {
            let val = v.eval([r * d[0], r * d[1], r * d[2]]);
            let w = wr * wa * r * r;
            for (l, m) in lm_pairs(l0) {
                let idx = lm_index(l, m);
                let f = w * jl[l] * ylm[k][idx];
                for i in 0..3 {
                    num[idx][i] += f * val[i];
                }
            }
        }
    }
    let coeffs = lm_pairs(l0)
        .map(|(l, m)| {
            let b = num[lm_index(l, m)];
            [b[0] / den[l], b[1] / den[l], b[2] / den[l]]
        })
        .collect();
    Ok(FourierBesselSeries { l0, coeffs })
}

impl FourierBesselSeries {
    pub fn zero(l0: usize) -> Self {
        FourierBesselSeries { l0, coeffs: vec![[0.0; 3]; lm_count(l0)] }
    }

    pub fn coeff(&self, l: usize, m: i64) -> [f64; 3] {
        self.coeffs[lm_index(l, m)]
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let r = norm3(x);
        let dir = if r > 0.0 { [x[0] / r, x[1] / r, x[2] / r] } else { [0.0, 0.0, 1.0] };
        let y = real_sph_harm_all(self.l0, dir);
        let mut out = [0.0; 3];
        for l in 0..=self.l0 {
            let jl = sph_j(l, r);
            if jl == 0.0 {
                continue;
            }
            for m in -(l as i64)..=l as i64 {
                let idx = lm_index(l, m);
                for i in 0..3 {
                    out[i] += self.coeffs[idx][i] * jl * y[idx];
                }
            }
        }
        out
    }

    /// Largest |b_lm| over all m at degree l.
    pub fn degree_norm(&self, l: usize) -> f64 {
        (-(l as i64)..=l as i64).map(|m| norm3(self.coeff(l, m))).fold(0.0, f64::max)
    }

    /// ‖v - series‖ in L²(B₂) measured with the quadrature `grid`.
    pub fn l2_residual(&self, v: &dyn R3Field, grid: &QuadratureSpec) -> Result<f64> {
        let rule = BallRule::new(grid)?;
        let mut acc = 0.0;
        for &(r, wr) in &rule.radii {
            for (&d, &wa) in rule.sphere.nodes.iter().zip(&rule.sphere.weights) {
                let x = [r * d[0], r * d[1], r * d[2]];
                let a = v.eval(x);
                let b = self.eval(x);
                let e = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                acc += wr * wa * r * r * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
            }
        }
        Ok(acc.sqrt())
    }
}
