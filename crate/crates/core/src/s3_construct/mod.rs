//! The round unit sphere S³ ⊂ ℝ⁴: Hopf frame, normal charts, harmonic sums and Beltrami fields.
//!
//! Orientation: (v₁, v₂, v₃) at p is positive when det[v₁, v₂, v₃, p] > 0. With it, curl hᵢ = 2hᵢ.

pub mod beltrami;
pub mod chart;
pub mod fd;
pub mod harmonic;
pub mod isometry;

pub use beltrami::{
    assemble_beltrami, hopf_frame_curl, multi_center_field, pushforward_rescale, ConstantFrame, CurlOf, FrameJet,
    FrameSource, HarmonicFrame, RescaledPushforward, S3BeltramiField,
};
pub use chart::{exp_chart, NormalChart};
pub use fd::{fd_divergence, fd_frame_curl, fd_laplacian, stereographic_curl};
pub use harmonic::{degree_one_basis, lift_harmonic, S3HarmonicSum, WordJet};
pub use isometry::{
    chart_isometry, equivariant_sum, isometry_pushforward, lens_generator, EquivariantSum, IsometryPushforward,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BeltramiError, Result};

pub type Mat4 = [[f64; 4]; 4];

/// hᵢ(p) = Hᵢ p.
pub const HOPF: [Mat4; 3] = [
    // h₁ = (−x₄, x₃, −x₂, x₁)
    [[0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]],
    // h₂ = (−x₃, −x₄, x₁, x₂)
    [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
    // h₃ = (−x₂, x₁, x₄, −x₃)
    [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]],
];

pub const NORTH: [f64; 4] = [0.0, 0.0, 0.0, 1.0];

/// A point of S³, renormalized on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct S3Point([f64; 4]);

impl S3Point {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let n = norm4(p);
        if !(n.is_finite() && n > 1e-300) {
            return Err(BeltramiError::Domain { what: "|p|", value: n });
        }
        Ok(S3Point(p.map(|v| v / n)))
    }

    pub fn north() -> Self {
        S3Point(NORTH)
    }

    pub fn coords(&self) -> [f64; 4] {
        self.0
    }

    /// Uniform on S³.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        S3Point(random_s3(rng))
    }

    /// Geodesic distance.
    pub fn distance(&self, other: &S3Point) -> f64 {
        geodesic_distance(self.0, other.0)
    }
}

impl TryFrom<[f64; 4]> for S3Point {
    type Error = BeltramiError;
    fn try_from(p: [f64; 4]) -> Result<Self> {
        S3Point::new(p)
    }
}

impl From<S3Point> for [f64; 4] {
    fn from(p: S3Point) -> Self {
        p.0
    }
}

/// Hᵢ p, i ∈ {1, 2, 3}.
pub fn hopf_field(i: usize, p: &S3Point) -> Result<[f64; 4]> {
    if !(1..=3).contains(&i) {
        return Err(BeltramiError::Precondition(format!("Hopf field index {i} not in 1..=3")));
    }
    Ok(matvec(&HOPF[i - 1], p.0))
}

/// A tangent vector field on S³ evaluated in the ℝ⁴ embedding.
pub trait S3Field: Send + Sync {
    fn eval(&self, p: [f64; 4]) -> [f64; 4];

    /// Closed-form curl when the field provides one.
    fn curl(&self, _p: [f64; 4]) -> Option<[f64; 4]> {
        None
    }
}

/// Σ aᵢ hᵢ, an eigenfield with eigenvalue 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearHopf(pub [f64; 3]);

impl S3Field for LinearHopf {
    fn eval(&self, p: [f64; 4]) -> [f64; 4] {
        frame_to_ambient(p, self.0)
    }

    fn curl(&self, p: [f64; 4]) -> Option<[f64; 4]> {
        Some(frame_to_ambient(p, self.0).map(|v| 2.0 * v))
    }
}

impl<F: Fn([f64; 4]) -> [f64; 4] + Send + Sync> S3Field for F {
    fn eval(&self, p: [f64; 4]) -> [f64; 4] {
        self(p)
    }
}

/// Σ uᵢ hᵢ(p).
pub fn frame_to_ambient(p: [f64; 4], u: [f64; 3]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, h) in HOPF.iter().enumerate() {
        let v = matvec(h, p);
        for k in 0..4 {
            out[k] += u[i] * v[k];
        }
    }
    out
}

/// (v·h₁(p), v·h₂(p), v·h₃(p)).
pub fn ambient_to_frame(p: [f64; 4], v: [f64; 4]) -> [f64; 3] {
    std::array::from_fn(|i| dot4(v, matvec(&HOPF[i], p)))
}

#[inline]
pub(crate) fn matvec(m: &Mat4, p: [f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3] * p[3])
}

pub(crate) fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

pub(crate) fn transpose(a: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub(crate) fn identity4() -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

pub(crate) fn det4(m: &Mat4) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

#[inline]
pub(crate) fn dot4(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub(crate) fn norm4(a: [f64; 4]) -> f64 {
    dot4(a, a).sqrt()
}

pub(crate) fn geodesic_distance(p: [f64; 4], q: [f64; 4]) -> f64 {
    // atan2 form stays accurate for nearby and nearly antipodal points
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2], p[3] - q[3]];
    let s = [p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]];
    2.0 * norm4(d).atan2(norm4(s))
}

pub fn random_s3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    loop {
        let p = [std_normal(rng), std_normal(rng), std_normal(rng), std_normal(rng)];
        let n = norm4(p);
        if n > 1e-8 {
            return p.map(|v| v / n);
        }
    }
}

/// Box–Muller.
pub(crate) fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hopf_field_at_north_pole() {
        assert_eq!(hopf_field(1, &S3Point::north()).unwrap(), [-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(hopf_field(2, &S3Point::north()).unwrap(), [0.0, -1.0, 0.0, 0.0]);
        assert_eq!(hopf_field(3, &S3Point::north()).unwrap(), [0.0, 0.0, 1.0, 0.0]);
        assert!(hopf_field(4, &S3Point::north()).is_err());
    }

    #[test]
    fn hopf_frame_is_orthonormal_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = S3Point::random(&mut rng);
            let h: Vec<[f64; 4]> = (1..=3).map(|i| hopf_field(i, &p).unwrap()).collect();
            for i in 0..3 {
                assert!(dot4(h[i], p.coords()).abs() < 1e-15);
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot4(h[i], h[j]) - want).abs() < 1e-15);
                }
            }
            let m: Mat4 = std::array::from_fn(|r| [h[0][r], h[1][r], h[2][r], p.coords()[r]]);
            assert!((det4(&m) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hopf_brackets() {
        // [hᵢ, hⱼ] as vector fields is (HⱼHᵢ − HᵢHⱼ)p, and equals −2ε_ijl h_l
        for (i, j, l) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let a = matmul(&HOPF[j], &HOPF[i]);
            let b = matmul(&HOPF[i], &HOPF[j]);
            for r in 0..4 {
                for c in 0..4 {
                    assert_eq!(a[r][c] - b[r][c], -2.0 * HOPF[l][r][c]);
                }
            }
        }
        // finite-difference Lie bracket at a point
        let p = S3Point::new([0.3, -0.5, 0.7, 0.2]).unwrap().coords();
        let flow = |m: &Mat4, q: [f64; 4], t: f64| {
            let v = matvec(m, q);
            std::array::from_fn::<f64, 4, _>(|k| t.cos() * q[k] + t.sin() * v[k])
        };
        // [X,Y] = d/dt Y(p) along X minus d/dt X(p) along Y for linear fields
        let h = 1e-5;
        let d = |m: &Mat4, along: &Mat4| -> [f64; 4] {
            let a = matvec(m, flow(along, p, h));
            let b = matvec(m, flow(along, p, -h));
            std::array::from_fn(|k| (a[k] - b[k]) / (2.0 * h))
        };
        let x = d(&HOPF[1], &HOPF[0]);
        let y = d(&HOPF[0], &HOPF[1]);
        let h3 = matvec(&HOPF[2], p);
        for k in 0..4 {
            assert!((x[k] - y[k] + 2.0 * h3[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn point_renormalizes_and_rejects_zero() {
        let p = S3Point::new([1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((norm4(p.coords()) - 1.0).abs() < 1e-15);
        assert!(S3Point::new([0.0; 4]).is_err());
        let q: S3Point = serde_json::from_str("[0, 0, 2, 0]").unwrap();
        assert_eq!(q.coords(), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn geodesic_distance_extremes() {
        let n = S3Point::north();
        assert!((n.distance(&S3Point::new([0.0, 0.0, 0.0, -1.0]).unwrap()) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(n.distance(&n), 0.0);
        let q = S3Point::new([1e-9, 0.0, 0.0, 1.0]).unwrap();
        assert!((n.distance(&q) - 1e-9).abs() < 1e-22);
    }
}
