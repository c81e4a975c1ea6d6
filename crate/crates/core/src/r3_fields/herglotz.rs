//! Densities f on S² with v(x) = ∫ f(ξ) e^{i x·ξ} dσ(ξ).

use num_complex::Complex64;

use super::fourier_bessel::FourierBesselSeries;
use super::sphere::{lm_count, lm_index, real_sph_harm_all, SphereGrid};

pub type C3 = [Complex64; 3];

pub trait SphereDensity: Send + Sync {
    /// f(ξ) for a unit vector ξ.
    fn eval(&self, xi: [f64; 3]) -> C3;
}

/// f(ξ) = (1/4π) Σ b_lm (-i)^l Y_lm(ξ).
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzDensity {
    pub l0: usize,
    pub coeffs: Vec<C3>,
}

pub fn herglotz_density(series: &FourierBesselSeries) -> HerglotzDensity {
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut coeffs = vec![[Complex64::new(0.0, 0.0); 3]; lm_count(series.l0)];
    for l in 0..=series.l0 {
        let phase = match l % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        } / four_pi;
        for m in -(l as i64)..=l as i64 {
            let b = series.coeff(l, m);
            coeffs[lm_index(l, m)] = [phase * b[0], phase * b[1], phase * b[2]];
        }
    }
    HerglotzDensity { l0: series.l0, coeffs }
}

impl SphereDensity for HerglotzDensity {
    fn eval(&self, xi: [f64; 3]) -> C3 {
        let y = real_sph_harm_all(self.l0, xi);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (c, yv) in self.coeffs.iter().zip(&y) {
            for i in 0..3 {
                out[i] += c[i] * *yv;
            }
        }
        out
    }
}

/// Any closure ξ ↦ f(ξ).
pub struct FnDensity<F>(pub F);

impl<F: Fn([f64; 3]) -> C3 + Send + Sync> SphereDensity for FnDensity<F> {
    fn eval(&self, xi: [f64; 3]) -> C3 {
        (self.0)(xi)
    }
}

/// ∫_{S²} f(ξ) e^{i x·ξ} dσ by the rule `grid`.
pub fn herglotz_integral(f: &dyn SphereDensity, x: [f64; 3], grid: &SphereGrid) -> C3 {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (xi, w) in grid.nodes.iter().zip(&grid.weights) {
        let ph = x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2];
        let e = Complex64::from_polar(*w, ph);
        let fv = f.eval(*xi);
        for i in 0..3 {
            out[i] += fv[i] * e;
        }
    }
    out
}

pub(crate) fn c3_norm(v: &C3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// sup over the nodes of `grid` of |f|.
pub fn density_sup(f: &dyn SphereDensity, grid: &SphereGrid) -> f64 {
    grid.nodes.iter().map(|&xi| c3_norm(&f.eval(xi))).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r3_fields::fourier_bessel::{fourier_bessel_expand, QuadratureSpec};
    use crate::r3_fields::reference::CkField;
    use crate::r3_fields::{norm3, R3Field};
    use crate::specfun::sph_j;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ball(rng: &mut ChaCha8Rng, r: f64) -> [f64; 3] {
        loop {
            let x = [rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r)];
            if norm3(x) <= r {
                return x;
            }
        }
    }

    #[test]
    fn constant_density_gives_j0() {
        // Y_00 = 1/√(4π), so b_00 = √(4π) e₁ makes the series e₁ j₀
        let mut s = FourierBesselSeries::zero(0);
        s.coeffs[0] = [(4.0 * std::f64::consts::PI).sqrt(), 0.0, 0.0];
        let f = herglotz_density(&s);
        let v = f.eval([0.0, 0.6, 0.8]);
        assert!((v[0].re - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15 && v[0].im.abs() < 1e-16);
        let grid = SphereGrid::gauss_product(30, 60);
        for x in [[0.0, 0.0, 0.0], [0.5, -1.2, 0.3], [1.5, 1.0, -0.2]] {
            let w = herglotz_integral(&f, x, &grid);
            assert!((w[0].re - sph_j(0, norm3(x))).abs() < 1e-12);
            assert!(w[0].im.abs() < 1e-12 && w[1].norm() < 1e-14 && w[2].norm() < 1e-14);
        }
    }

    #[test]
    fn zero_series_zero_density() {
        let f = herglotz_density(&FourierBesselSeries::zero(3));
        assert_eq!(c3_norm(&f.eval([1.0, 0.0, 0.0])), 0.0);
    }

    #[test]
    fn density_reproduces_series_and_mode() {
        let v = CkField::new(1, 0, 1.0).unwrap();
        let s = fourier_bessel_expand(&v, 4, &QuadratureSpec::for_degree(4)).unwrap();
        let f = herglotz_density(&s);
        let grid = SphereGrid::gauss_product(30, 60);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = random_ball(&mut rng, 2.0);
            let w = herglotz_integral(&f, x, &grid);
            let a = s.eval(x);
            let b = v.eval(x);
            let scale = norm3(a).max(1e-3);
            for i in 0..3 {
                assert!((w[i].re - a[i]).abs() <= 1e-6 * scale && w[i].im.abs() <= 1e-6 * scale);
                assert!((w[i].re - b[i]).abs() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn real_field_density_is_conjugate_symmetric() {
        let v = CkField::new(2, 1, 1.0).unwrap();
        let s = fourier_bessel_expand(&v, 4, &QuadratureSpec::for_degree(4)).unwrap();
        let f = herglotz_density(&s);
        let xi = [0.48, 0.6, 0.64];
        let a = f.eval(xi);
        let b = f.eval([-xi[0], -xi[1], -xi[2]]);
        for i in 0..3 {
            assert!((a[i] - b[i].conj()).norm() < 1e-15);
        }
    }
}
