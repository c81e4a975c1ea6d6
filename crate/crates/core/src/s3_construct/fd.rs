//! Finite-difference operators on S³, independent of the closed-form jets.
//!
//! Two routes for the curl: differences along the Hopf great circles exp(tHⱼ)p, and
//! coordinate differences in stereographic coordinates with metric φ²δ, φ = 2/(1+|y|²).

use super::{ambient_to_frame, frame_to_ambient, matvec, S3Field, HOPF};

fn great_circle(p: [f64; 4], j: usize, t: f64) -> [f64; 4] {
    let v = matvec(&HOPF[j], p);
    std::array::from_fn(|k| t.cos() * p[k] + t.sin() * v[k])
}

/// Fourth-order central first derivative of f at 0.
fn d1(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative of f at 0.
fn d2(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

/// hⱼ(Uᵢ) for all i, j by differences along great circles.
fn frame_derivatives(field: &dyn S3Field, p: [f64; 4], h: f64) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (j, row) in out.iter_mut().enumerate() {
        let samples: Vec<[f64; 3]> = [2.0, 1.0, -1.0, -2.0]
            .iter()
            .map(|&s| {
                let q = great_circle(p, j, s * h);
                ambient_to_frame(q, field.eval(q))
            })
            .collect();
        for (i, r) in row.iter_mut().enumerate() {
            *r = (-samples[0][i] + 8.0 * samples[1][i] - 8.0 * samples[2][i] + samples[3][i]) / (12.0 * h);
        }
    }
    out
}

/// curl U from G_l = Σ ε_jil hⱼ(Uᵢ) + 2U_l with differenced hⱼ(Uᵢ).
pub fn fd_frame_curl(field: &dyn S3Field, p: [f64; 4], h: f64) -> [f64; 4] {
    let d = frame_derivatives(field, p, h);
    let u = ambient_to_frame(p, field.eval(p));
    let g: [f64; 3] = std::array::from_fn(|l| {
        let (a, b) = ((l + 1) % 3, (l + 2) % 3);
        d[a][b] - d[b][a] + 2.0 * u[l]
    });
    frame_to_ambient(p, g)
}

/// div U = Σ hᵢ(Uᵢ); the Hopf fields are divergence free.
pub fn fd_divergence(field: &dyn S3Field, p: [f64; 4], h: f64) -> f64 {
    let d = frame_derivatives(field, p, h);
    d[0][0] + d[1][1] + d[2][2]
}

/// Δf = Σᵢ hᵢhᵢ f.
pub fn fd_laplacian(f: &dyn Fn([f64; 4]) -> f64, p: [f64; 4], h: f64) -> f64 {
    (0..3).map(|j| d2(|t| f(great_circle(p, j, t)), h)).sum()
}

struct Stereo {
    sigma: f64,
}

impl Stereo {
    /// Projection from −σe₄: y = x/(1 + σx₄).
    fn for_point(p: [f64; 4]) -> Self {
        Stereo { sigma: if p[3] >= -0.5 { 1.0 } else { -1.0 } }
    }

    fn to_y(&self, p: [f64; 4]) -> [f64; 3] {
        let d = 1.0 + self.sigma * p[3];
        [p[0] / d, p[1] / d, p[2] / d]
    }

    fn to_p(&self, y: [f64; 3]) -> [f64; 4] {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let d = 1.0 + r2;
        [2.0 * y[0] / d, 2.0 * y[1] / d, 2.0 * y[2] / d, self.sigma * (1.0 - r2) / d]
    }

    /// Coordinate components dyᵏ(v) of an ambient tangent vector at p.
    fn components(&self, p: [f64; 4], v: [f64; 4]) -> [f64; 3] {
        let d = 1.0 + self.sigma * p[3];
        std::array::from_fn(|k| v[k] / d - self.sigma * p[k] * v[3] / (d * d))
    }

    /// Columns ∂p/∂yᵢ.
    fn basis(&self, y: [f64; 3]) -> [[f64; 4]; 3] {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let d = 1.0 + r2;
        std::array::from_fn(|i| {
            std::array::from_fn(|k| {
                if k < 3 {
                    let delta = if i == k { 2.0 / d } else { 0.0 };
                    delta - 4.0 * y[k] * y[i] / (d * d)
                } else {
                    -4.0 * self.sigma * y[i] / (d * d)
                }
            })
        })
    }
}

/// curlⁱ = σ φ⁻³ ε_ijk ∂ⱼ(φ² Uᵏ) in stereographic coordinates, returned in ℝ⁴.
pub fn stereographic_curl(field: &dyn S3Field, p: [f64; 4], h: f64) -> [f64; 4] {
    let st = Stereo::for_point(p);
    let y0 = st.to_y(p);
    // lowered components φ²Uᵏ at a coordinate point
    let lowered = |y: [f64; 3]| -> [f64; 3] {
        let q = st.to_p(y);
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let phi = 2.0 / (1.0 + r2);
        st.components(q, field.eval(q)).map(|c| phi * phi * c)
    };
    let mut grad = [[0.0; 3]; 3]; // grad[j][k] = ∂ⱼ(φ²Uᵏ)
    for (j, row) in grad.iter_mut().enumerate() {
        for (k, g) in row.iter_mut().enumerate() {
            *g = d1(
                |t| {
                    let mut y = y0;
                    y[j] += t;
                    lowered(y)[k]
                },
                h,
            );
        }
    }
    let r2 = y0[0] * y0[0] + y0[1] * y0[1] + y0[2] * y0[2];
    let phi = 2.0 / (1.0 + r2);
    let c = st.sigma / (phi * phi * phi);
    let curl = [c * (grad[1][2] - grad[2][1]), c * (grad[2][0] - grad[0][2]), c * (grad[0][1] - grad[1][0])];
    let basis = st.basis(y0);
    std::array::from_fn(|k| (0..3).map(|i| curl[i] * basis[i][k]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s3_construct::beltrami::tests::five_atoms;
    use crate::s3_construct::{norm4, random_s3, LinearHopf, NormalChart, S3BeltramiField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hopf_fields_have_curl_two_by_both_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = random_s3(&mut rng);
            for i in 0..3 {
                let mut a = [0.0; 3];
                a[i] = 1.0;
                let f = LinearHopf(a);
                let want = f.eval(p).map(|v| 2.0 * v);
                let s = stereographic_curl(&f, p, 1e-3);
                let g = fd_frame_curl(&f, p, 1e-3);
                for k in 0..4 {
                    assert!((s[k] - want[k]).abs() < 1e-8, "stereo {s:?} {want:?}");
                    assert!((g[k] - want[k]).abs() < 1e-8);
                }
                assert!(fd_divergence(&f, p, 1e-3).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn stereographic_curl_matches_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for degree in [6u32, 40] {
            let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), degree, &NormalChart::default()).unwrap();
            let lam = u.eigenvalue();
            let h = 0.02 / lam;
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for _ in 0..20 {
                let p = random_s3(&mut rng);
                let c = stereographic_curl(&u, p, h);
                let v = u.eval(p);
                worst = worst.max(norm4(std::array::from_fn(|k| c[k] - lam * v[k])));
                scale = scale.max(lam * norm4(v));
                assert!(fd_divergence(&u, p, h).abs() <= 1e-3 * scale.max(1.0));
            }
            assert!(worst <= 1e-3 * scale, "degree {degree}: {worst} vs {scale}");
        }
    }

    #[test]
    fn negative_control_gradient_field() {
        // the tangential part of a constant ambient vector is a gradient and not solenoidal
        let a = [0.3, -0.2, 0.9, 0.1];
        let f = move |p: [f64; 4]| {
            let d = a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + a[3] * p[3];
            std::array::from_fn::<f64, 4, _>(|k| a[k] - d * p[k])
        };
        let p = [0.5, 0.5, 0.5, 0.5];
        // div of the tangential projection of a is −3 a·p
        let div = fd_divergence(&f, p, 1e-3);
        assert!((div + 3.0 * 0.55).abs() < 1e-8, "{div}");
    }

    #[test]
    fn fd_laplacian_of_degree_two_harmonic() {
        // x₁x₂ restricted to S³ has eigenvalue Λ(Λ+2) = 8
        let f = |p: [f64; 4]| p[0] * p[1];
        let p = [0.1, 0.7, -0.5, 0.5];
        let p = p.map(|v| v / norm4(p));
        assert!((fd_laplacian(&f, p, 1e-3) + 8.0 * f(p)).abs() < 1e-8);
    }
}
