//! Spherical Bessel functions and the dimension-4 ultraspherical polynomials
//! C_Λ = U_Λ / (Λ + 1), normalized so that C_Λ(1) = 1.

use crate::error::{BeltramiError, Result};

pub const BESSEL_DEGREE_CAP: usize = 64;

/// j_l(t) for 0 <= l <= 64.
pub fn spherical_bessel(l: usize, t: f64) -> Result<f64> {
    if l > BESSEL_DEGREE_CAP {
        return Err(BeltramiError::UnsupportedDegree { degree: l, cap: BESSEL_DEGREE_CAP });
    }
    Ok(sph_j(l, t))
}

/// Unchecked j_l; callers guarantee the degree cap. Parity j_l(-t) = (-1)^l j_l(t).
pub(crate) fn sph_j(l: usize, t: f64) -> f64 {
    let a = t.abs();
    let sign = if t < 0.0 && l % 2 == 1 { -1.0 } else { 1.0 };
    sign * sph_j_pos(l, a)
}

fn sph_j_pos(l: usize, t: f64) -> f64 {
    // Taylor region: term ratio t^2 / (2(2l+3)) stays below 1/4, no cancellation.
    if t * t < (l as f64 + 1.0) {
        return t.powi(l as i32) * scaled_series(l, t);
    }
    match l {
        0 => t.sin() / t,
        1 => t.sin() / (t * t) - t.cos() / t,
        _ => miller(l, t),
    }
}

/// Σ_m (-t²/2)^m / (m! (2l+1)(2l+3)...(2l+2m+1)), i.e. j_l(t)/t^l.
fn scaled_series(l: usize, t: f64) -> f64 {
    let mut dfact = 1.0;
    for k in 0..=l {
        dfact *= (2 * k + 1) as f64;
    }
    let x = -0.5 * t * t;
    let mut term = 1.0 / dfact;
    let mut sum = term;
    for m in 1..200 {
        term *= x / (m as f64 * (2 * l + 2 * m + 1) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(l: usize, t: f64) -> f64 {
    let start = l.max(t.ceil() as usize) + 20 + (40.0 * l as f64).sqrt() as usize;
    let mut jp1 = 0.0;
    let mut j = 1e-200;
    let mut at_l = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let jm1 = (2 * n + 1) as f64 / t * j - jp1;
        jp1 = j;
        j = jm1;
        if n - 1 == l {
            at_l = j;
        }
        if n == 2 {
            j1 = j;
        }
        if j.abs() > 1e200 {
            j *= 1e-200;
            jp1 *= 1e-200;
            at_l *= 1e-200;
            j1 *= 1e-200;
        }
    }
    // j now holds the unnormalized j_0, j1 the unnormalized j_1.
    let true0 = t.sin() / t;
    let true1 = t.sin() / (t * t) - t.cos() / t;
    if true0.abs() >= true1.abs() {
        at_l * true0 / j
    } else {
        at_l * true1 / j1
    }
}

/// g_k(r) = j_k(r) / r^k, entire and even in r. Satisfies d/ds g_k = -g_{k+1}/2 with s = r².
pub(crate) fn scaled_bessel(k: usize, r: f64) -> f64 {
    let r = r.abs();
    if r * r < (k as f64 + 1.0) || r < 1.0 {
        scaled_series(k, r)
    } else {
        sph_j_pos(k, r) / r.powi(k as i32)
    }
}

/// Evaluates C_Λ and its first three derivatives.
#[derive(Debug, Clone, Copy)]
pub struct GegenbauerEvaluator {
    degree: u32,
    n: f64,
    eig: f64,
}

/// Below this value of (Λ+1) sin θ the closed trigonometric form loses digits and
/// the recurrence is used instead.
const TRIG_SWITCH: f64 = 2.0;

impl GegenbauerEvaluator {
    pub fn new(degree: u32) -> Self {
        let l = degree as f64;
        GegenbauerEvaluator { degree, n: l + 1.0, eig: l * (l + 2.0) }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivs(t, 0)[0]
    }

    /// [C, C', C'', C'''] with entries above `order` left at zero. `t` is clamped to [-1, 1].
    pub fn derivs(&self, t: f64, order: usize) -> [f64; 4] {
        let t = t.clamp(-1.0, 1.0);
        let s2 = (1.0 - t) * (1.0 + t);
        let s = s2.sqrt();
        if self.n * s >= TRIG_SWITCH {
            self.trig(t, s, s2, order)
        } else {
            self.recurrence(t, order)
        }
    }

    fn trig(&self, t: f64, s: f64, s2: f64, order: usize) -> [f64; 4] {
        let theta = t.acos();
        let (sn, cn) = (self.n * theta).sin_cos();
        let mut out = [0.0; 4];
        out[0] = sn / (self.n * s);
        if order >= 1 {
            out[1] = (t * sn - self.n * s * cn) / (self.n * s * s2);
        }
        if order >= 2 {
            out[2] = (3.0 * t * out[1] - self.eig * out[0]) / s2;
        }
        if order >= 3 {
            out[3] = (5.0 * t * out[2] - (self.eig - 3.0) * out[1]) / s2;
        }
        out
    }

    /// U_{n+1}^{(k)} = 2t U_n^{(k)} + 2k U_n^{(k-1)} - U_{n-1}^{(k)}.
    pub fn recurrence(&self, t: f64, order: usize) -> [f64; 4] {
        let mut prev = [0.0f64; 4];
        let mut cur = [1.0f64, 0.0, 0.0, 0.0];
        for _ in 0..self.degree {
            let mut next = [0.0; 4];
            next[0] = 2.0 * t * cur[0] - prev[0];
            for k in 1..=order.min(3) {
                next[k] = 2.0 * t * cur[k] + 2.0 * k as f64 * cur[k - 1] - prev[k];
            }
            prev = cur;
            cur = next;
        }
        let mut out = [0.0; 4];
        for k in 0..=order.min(3) {
            out[k] = cur[k] / self.n;
        }
        out
    }
}

/// d^order C_Λ / dt^order at t in [-1, 1]; order 3 is also accepted.
pub fn gegenbauer4(degree: u32, t: f64, order: usize) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(BeltramiError::Domain { what: "t", value: t });
    }
    if order > 3 {
        return Err(BeltramiError::DerivativeOrder { requested: order, available: 3 });
    }
    Ok(GegenbauerEvaluator::new(degree).derivs(t, order)[order])
}

/// sup over 1000 points of t in [0, 2R] of |C_Λ(cos(t/Λ)) - j_0(t)|.
pub fn darboux_residual(degree: u32, radius: f64) -> Result<f64> {
    if degree == 0 || !(radius > 0.0) || degree as f64 <= radius {
        return Err(BeltramiError::Precondition(format!(
            "darboux residual needs 0 < R < degree (degree {degree}, R {radius})"
        )));
    }
    let ev = GegenbauerEvaluator::new(degree);
    let l = degree as f64;
    let mut sup = 0.0f64;
    for i in 0..1000 {
        let t = 2.0 * radius * i as f64 / 999.0;
        sup = sup.max((ev.eval((t / l).cos()) - sph_j(0, t)).abs());
    }
    Ok(sup)
}

/// max over θ in [π/4, 3π/4] (`samples` points) of |C_Λ(cos θ)|.
pub fn gegenbauer_band_max(degree: u32, samples: usize) -> f64 {
    let ev = GegenbauerEvaluator::new(degree);
    let samples = samples.max(2);
    (0..samples)
        .map(|i| {
            let th = std::f64::consts::FRAC_PI_4
                + std::f64::consts::FRAC_PI_2 * i as f64 / (samples - 1) as f64;
            ev.eval(th.cos()).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn j1_taylor_oracle(t: f64) -> f64 {
        // sin t/t² − cos t/t = Σ_{k≥1} (−1)^{k+1} 2k t^{2k−1}/(2k+1)!
        let mut sum = 0.0;
        let mut fact = 1.0; // (2k+1)!
        for k in 1..=25 {
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * 2.0 * k as f64 * t.powi(2 * k as i32 - 1) / fact;
        }
        sum
    }

    #[test]
    fn bessel_trivial_values() {
        assert_eq!(spherical_bessel(0, 0.0).unwrap(), 1.0);
        assert!(spherical_bessel(0, std::f64::consts::PI).unwrap().abs() < 1e-15);
        for l in 1..10 {
            assert_eq!(spherical_bessel(l, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn bessel_j1_at_one_matches_taylor_oracle() {
        let oracle = j1_taylor_oracle(1.0);
        assert!((oracle - 0.301_168_678_939_756_8).abs() < 1e-15);
        assert!((spherical_bessel(1, 1.0).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn bessel_frozen_high_precision_values() {
        let cases = [
            (2, 0.5, 0.016_371_106_607_993_413),
            (10, 5.0, 0.000_407_344_244_249_460_4),
            (10, 12.5, 0.105_110_311_492_815_74),
            (30, 20.0, 2.106_357_694_361_038_5e-5),
            (30, 45.0, 0.017_774_163_828_437_106),
            (64, 3.0, 1.561_078_525_583_260_9e-79),
            (64, 50.0, 7.718_892_642_796_774e-6),
            (64, 100.0, 0.008_898_732_227_125_486),
            (5, 1e-3, 9.620_009_250_009_257e-20),
            (3, 2.0, 0.060_722_097_662_874_83),
            (40, 6.4, 2.134_798_072_129_674_5e-29),
        ];
        for (l, t, want) in cases {
            let got = spherical_bessel(l, t).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "j_{l}({t}) = {got}, want {want}");
        }
    }

    #[test]
    fn bessel_degree_cap() {
        assert!(matches!(
            spherical_bessel(65, 1.0),
            Err(BeltramiError::UnsupportedDegree { degree: 65, cap: 64 })
        ));
    }

    #[test]
    fn bessel_parity() {
        for l in 0..8 {
            let a = sph_j(l, 3.7);
            let b = sph_j(l, -3.7);
            assert!((b - if l % 2 == 0 { a } else { -a }).abs() < 1e-16);
        }
    }

    #[test]
    fn scaled_bessel_derivative_identity() {
        // d/ds g_l = -g_{l+1}/2 with s = r², checked by central differences in s.
        for l in 0..6 {
            for &r in &[0.3, 1.2, 2.9, 7.5] {
                let s: f64 = r * r;
                let h = 1e-5;
                let fd = (scaled_bessel(l, (s + h).sqrt()) - scaled_bessel(l, (s - h).sqrt())) / (2.0 * h);
                assert!((fd + 0.5 * scaled_bessel(l + 1, r)).abs() < 1e-8, "l={l} r={r}");
            }
        }
    }

    #[test]
    fn scaled_bessel_continuous_at_switch() {
        for k in 0..10 {
            let rs = ((k as f64) + 1.0).sqrt().max(1.0);
            let a = scaled_bessel(k, rs * (1.0 - 1e-12));
            let b = scaled_bessel(k, rs * (1.0 + 1e-12));
            assert!(((a - b) / a).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn gegenbauer_low_degree() {
        for &t in &[-1.0, -0.4, 0.0, 0.3, 1.0] {
            assert!((gegenbauer4(1, t, 0).unwrap() - t).abs() < 1e-15);
            assert!((gegenbauer4(1, t, 1).unwrap() - 1.0).abs() < 1e-14);
            assert_eq!(gegenbauer4(0, t, 0).unwrap(), 1.0);
        }
        for l in [0, 1, 7, 100, 1000, 10000] {
            assert!((gegenbauer4(l, 1.0, 0).unwrap() - 1.0).abs() < 1e-15 * (l as f64 + 1.0));
        }
    }

    #[test]
    fn gegenbauer_chebyshev_oracle_degree_seven() {
        for &th in &[0.3f64, 1.0, 2.5] {
            let want = (8.0 * th).sin() / (8.0 * th.sin());
            let got = gegenbauer4(7, th.cos(), 0).unwrap();
            assert!((got - want).abs() < 1e-14);
            let rec = GegenbauerEvaluator::new(7).recurrence(th.cos(), 0)[0];
            assert!((rec - want).abs() < 1e-14);
        }
    }

    #[test]
    fn gegenbauer_domain() {
        assert!(gegenbauer4(3, 1.0 + 1e-9, 0).is_err());
        assert!(gegenbauer4(3, -1.5, 0).is_err());
    }

    #[test]
    fn gegenbauer_trig_and_recurrence_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &l in &[2u32, 5, 20, 101, 400, 2000] {
            let ev = GegenbauerEvaluator::new(l);
            let n = l as f64 + 1.0;
            let at_one = ev.recurrence(1.0, 3);
            for i in 0..400 {
                // half of the samples cluster just above the switch point
                let s: f64 = if i % 2 == 0 {
                    rng.gen_range(TRIG_SWITCH / n..(TRIG_SWITCH + 20.0) / n)
                } else {
                    rng.gen_range(TRIG_SWITCH / n..1.0)
                };
                if s >= 1.0 {
                    continue;
                }
                let t = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * (1.0 - s * s).sqrt();
                let a = ev.trig(t, s, s * s, 3);
                let b = ev.recurrence(t, 3);
                for k in 0..4 {
                    let tol = 1e-12 * n * at_one[k].abs().max(1.0);
                    assert!((a[k] - b[k]).abs() <= tol, "l={l} s={s} k={k} {} vs {}", a[k], b[k]);
                }
            }
        }
    }

    #[test]
    fn gegenbauer_ode_holds_on_recurrence_path() {
        for &l in &[3u32, 50, 300] {
            let ev = GegenbauerEvaluator::new(l);
            let eig = l as f64 * (l as f64 + 2.0);
            for &t in &[-0.9999, -0.3, 0.2, 0.99995] {
                let c = ev.recurrence(t, 3);
                let r2 = (1.0 - t * t) * c[2] - 3.0 * t * c[1] + eig * c[0];
                let r3 = (1.0 - t * t) * c[3] - 5.0 * t * c[2] + (eig - 3.0) * c[1];
                let sc = eig * eig * eig;
                assert!(r2.abs() < 1e-12 * sc && r3.abs() < 1e-12 * sc * eig);
            }
        }
    }

    #[test]
    fn gegenbauer_large_closed_form_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in [32u32, 64, 128, 256, 512] {
            for _ in 0..200 {
                let th: f64 = rng.gen_range(0.01..std::f64::consts::PI - 0.01);
                let want = ((l as f64 + 1.0) * th).sin() / ((l as f64 + 1.0) * th.sin());
                assert!((gegenbauer4(l, th.cos(), 0).unwrap() - want).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn gegenbauer_derivative_fd_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let l: u32 = rng.gen_range(1..60);
            let t: f64 = rng.gen_range(-0.95..0.95);
            let h = 1e-6;
            for k in 1..=3 {
                let fd = (gegenbauer4(l, t + h, k - 1).unwrap() - gegenbauer4(l, t - h, k - 1).unwrap()) / (2.0 * h);
                let an = gegenbauer4(l, t, k).unwrap();
                let scale = 1.0 + an.abs();
                assert!((fd - an).abs() < 1e-6 * scale.max((l as f64).powi(2 * k as i32 + 2) * 1e-7), "l={l} k={k}");
            }
        }
    }

    #[test]
    fn darboux_small_case() {
        let r = darboux_residual(100, 2.0).unwrap();
        assert!(r > 0.0 && r <= 5.0 / 100.0);
        let r50 = darboux_residual(50, 2.0).unwrap();
        let ratio = r50 / r;
        assert!((1.4..=2.8).contains(&ratio), "ratio {ratio}");
        assert!(darboux_residual(2, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn gegenbauer_bounded_on_interval(l in 0u32..3000, t in -1.0f64..=1.0) {
            let c = GegenbauerEvaluator::new(l).eval(t);
            prop_assert!(c.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn bessel_bounded(l in 0usize..=64, t in -200.0f64..200.0) {
            prop_assert!(sph_j(l, t).abs() <= 1.0 + 1e-14);
        }

        #[test]
        fn bessel_three_term_recurrence(l in 1usize..60, t in 0.5f64..120.0) {
            // j_{l-1} + j_{l+1} = (2l+1)/t j_l
            let lhs = sph_j(l - 1, t) + sph_j(l + 1, t);
            let rhs = (2 * l + 1) as f64 / t * sph_j(l, t);
            let scale = sph_j(l - 1, t).abs() + sph_j(l + 1, t).abs() + 1e-300;
            prop_assert!((lhs - rhs).abs() <= 1e-11 * scale.max(rhs.abs()));
        }
    }
}
