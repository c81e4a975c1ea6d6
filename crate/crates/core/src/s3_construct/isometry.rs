//! Orientation-preserving isometries of S³ acting on fields, and ℤ_p-equivariant sums.

use super::{det4, identity4, matmul, matvec, transpose, Mat4, S3Field, S3Point};
use crate::error::{BeltramiError, Result};

/// Right-multiplication isometries; each commutes with every Hopf matrix.
const K: [Mat4; 3] = [
    [[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]],
    [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]],
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]],
];

/// G(P) = P₄ I + Σ P_a K_a: maps the north pole to P and the Hopf frame at the pole to the Hopf frame at P.
pub fn chart_isometry(p: &S3Point) -> Mat4 {
    let c = p.coords();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { c[3] } else { 0.0 };
            d + c[0] * K[0][i][j] + c[1] * K[1][i][j] + c[2] * K[2][i][j]
        })
    })
}

fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    (0..4).flat_map(|i| (0..4).map(move |j| (a[i][j] - b[i][j]).abs())).fold(0.0, f64::max)
}

pub(crate) fn check_rotation(g: &Mat4) -> Result<()> {
    let e = max_abs_diff(&matmul(&transpose(g), g), &identity4());
    if !(e <= 1e-12) {
        return Err(BeltramiError::NotRotation(format!("|gᵀg − I| = {e:.3e}")));
    }
    let d = det4(g);
    if d < 0.0 {
        return Err(BeltramiError::NotRotation(format!("det g = {d:.6}")));
    }
    Ok(())
}

/// p ↦ g u(g⁻¹p).
pub struct IsometryPushforward<'a> {
    field: &'a dyn S3Field,
    g: Mat4,
    gt: Mat4,
}

pub fn isometry_pushforward(u: &dyn S3Field, g: Mat4) -> Result<IsometryPushforward<'_>> {
    check_rotation(&g)?;
    Ok(IsometryPushforward { field: u, g, gt: transpose(&g) })
}

impl IsometryPushforward<'_> {
    pub fn matrix(&self) -> &Mat4 {
        &self.g
    }
}

impl S3Field for IsometryPushforward<'_> {
    fn eval(&self, p: [f64; 4]) -> [f64; 4] {
        matvec(&self.g, self.field.eval(matvec(&self.gt, p)))
    }

    fn curl(&self, p: [f64; 4]) -> Option<[f64; 4]> {
        self.field.curl(matvec(&self.gt, p)).map(|c| matvec(&self.g, c))
    }
}

/// Rotation by 2π/p in the (x₁,x₂)-plane and by 2πq/p in the (x₃,x₄)-plane.
pub fn lens_generator(p: u32, q: u32) -> Result<Mat4> {
    if p == 0 {
        return Err(BeltramiError::Group("order must be positive".into()));
    }
    let a = 2.0 * std::f64::consts::PI / p as f64;
    let b = a * q as f64;
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    Ok([[ca, -sa, 0.0, 0.0], [sa, ca, 0.0, 0.0], [0.0, 0.0, cb, -sb], [0.0, 0.0, sb, cb]])
}

/// u = Σ_{j<p′} (gʲ)_* ũ.
pub struct EquivariantSum<'a> {
    field: &'a dyn S3Field,
    powers: Vec<(Mat4, Mat4)>,
}

impl EquivariantSum<'_> {
    pub fn terms(&self) -> usize {
        self.powers.len()
    }

    /// |u(g q) − g u(q)|.
    pub fn equivariance_residual(&self, g: &Mat4, q: [f64; 4]) -> f64 {
        let a = self.eval(matvec(g, q));
        let b = matvec(g, self.eval(q));
        (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
    }
}

/// Averages ũ (eigenvalue λ) over the cyclic group generated by g of order p. For even p with
/// g^{p/2} = −I the antipodal map already acts through the parity of ũ and p′ = p/2 terms suffice.
pub fn equivariant_sum(u: &dyn S3Field, eigenvalue: u32, g: Mat4, p: u32) -> Result<EquivariantSum<'_>> {
    check_rotation(&g)?;
    if p == 0 {
        return Err(BeltramiError::Group("order must be positive".into()));
    }
    let mut pow = identity4();
    let mut powers = vec![identity4()];
    for _ in 1..p {
        pow = matmul(&g, &pow);
        powers.push(pow);
    }
    let full = matmul(&g, &pow);
    let e = max_abs_diff(&full, &identity4());
    if !(e <= 1e-10) {
        return Err(BeltramiError::Group(format!("g^{p} differs from I by {e:.3e}")));
    }
    let mut terms = p as usize;
    if p % 2 == 0 {
        if eigenvalue % 2 == 1 {
            return Err(BeltramiError::Group(format!("odd eigenvalue {eigenvalue} with even order {p}")));
        }
        let minus: Mat4 = identity4().map(|r| r.map(|v| -v));
        if max_abs_diff(&powers[p as usize / 2], &minus) <= 1e-10 {
            terms = p as usize / 2;
        }
    }
    let powers = powers.into_iter().take(terms).map(|m| (m, transpose(&m))).collect();
    Ok(EquivariantSum { field: u, powers })
}

impl S3Field for EquivariantSum<'_> {
    fn eval(&self, q: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (g, gt) in &self.powers {
            let v = matvec(g, self.field.eval(matvec(gt, q)));
            for k in 0..4 {
                out[k] += v[k];
            }
        }
        out
    }

    fn curl(&self, q: [f64; 4]) -> Option<[f64; 4]> {
        let mut out = [0.0; 4];
        for (g, gt) in &self.powers {
            let v = matvec(g, self.field.curl(matvec(gt, q))?);
            for k in 0..4 {
                out[k] += v[k];
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s3_construct::beltrami::tests::five_atoms;
    use crate::s3_construct::fd::fd_frame_curl;
    use crate::s3_construct::{exp_chart, norm4, random_s3, NormalChart, S3BeltramiField, HOPF, NORTH};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eigen_fd(f: &dyn S3Field, lam: f64, rng: &mut ChaCha8Rng, n: usize) -> f64 {
        let h = 0.02 / lam;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for _ in 0..n {
            let p = random_s3(rng);
            let c = fd_frame_curl(f, p, h);
            let v = f.eval(p);
            worst = worst.max(norm4(std::array::from_fn(|k| c[k] - lam * v[k])));
            scale = scale.max(lam * norm4(v));
        }
        worst / scale
    }

    #[test]
    fn chart_isometry_moves_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let p = S3Point::random(&mut rng);
            let g = chart_isometry(&p);
            check_rotation(&g).unwrap();
            let gp = matvec(&g, NORTH);
            assert!((0..4).all(|k| (gp[k] - p.coords()[k]).abs() < 1e-15));
            for h in &HOPF {
                assert!(max_abs_diff(&matmul(&g, h), &matmul(h, &g)) < 1e-15);
            }
            // the chart at P is the pushed chart at the pole
            let x = [0.3, -0.2, 0.5];
            let a = exp_chart(p).to_sphere(x);
            let b = matvec(&g, NormalChart::default().to_sphere(x));
            assert!((0..4).all(|k| (a[k] - b[k]).abs() < 1e-15));
        }
    }

    #[test]
    fn identity_and_rejection() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), 12, &NormalChart::default()).unwrap();
        let same = isometry_pushforward(&u, identity4()).unwrap();
        let p = random_s3(&mut rng);
        assert_eq!(same.eval(p), u.eval(p));
        let mut bad = identity4();
        bad[0][0] = 1.1;
        assert!(matches!(isometry_pushforward(&u, bad), Err(BeltramiError::NotRotation(_))));
        let mut refl = identity4();
        refl[0][0] = -1.0;
        assert!(isometry_pushforward(&u, refl).is_err());
    }

    #[test]
    fn antipodal_map_on_even_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        // Λ = 10: λ = 12 is even, u is odd, and (−I)_* u = u
        let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), 10, &NormalChart::default()).unwrap();
        let minus: Mat4 = identity4().map(|r| r.map(|v| -v));
        let f = isometry_pushforward(&u, minus).unwrap();
        for _ in 0..20 {
            let p = random_s3(&mut rng);
            let (a, b) = (f.eval(p), u.eval(p));
            assert!((0..4).all(|k| (a[k] - b[k]).abs() < 1e-12));
        }
    }

    #[test]
    fn pushforward_preserves_eigen_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), 15, &NormalChart::default()).unwrap();
        let g = matmul(&lens_generator(5, 2).unwrap(), &chart_isometry(&S3Point::random(&mut rng)));
        let f = isometry_pushforward(&u, g).unwrap();
        let lam = u.eigenvalue();
        let base = eigen_fd(&u, lam, &mut rng, 20);
        let pushed = eigen_fd(&f, lam, &mut rng, 20);
        assert!(pushed <= 1e-4 && pushed <= base + 1e-6 + 1e-5, "{pushed} {base}");
    }

    #[test]
    fn lens_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), 10, &NormalChart::default()).unwrap();
        // p = 1 passes through
        let one = equivariant_sum(&u, 12, identity4(), 1).unwrap();
        let p = random_s3(&mut rng);
        assert_eq!(one.eval(p), u.eval(p));
        // p = 2 with −I on an odd field is the field itself
        let minus: Mat4 = identity4().map(|r| r.map(|v| -v));
        let two = equivariant_sum(&u, 12, minus, 2).unwrap();
        assert_eq!(two.terms(), 1);
        assert_eq!(two.eval(p), u.eval(p));
        // p = 4, rotation by π/2 in both planes
        let g = lens_generator(4, 1).unwrap();
        let four = equivariant_sum(&u, 12, g, 4).unwrap();
        assert_eq!(four.terms(), 2);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            worst = worst.max(four.equivariance_residual(&g, random_s3(&mut rng)));
        }
        assert!(worst <= 1e-9, "{worst}");
        assert!(equivariant_sum(&u, 13, g, 4).is_err());
        assert!(equivariant_sum(&u, 12, lens_generator(5, 1).unwrap(), 4).is_err());
    }
}
