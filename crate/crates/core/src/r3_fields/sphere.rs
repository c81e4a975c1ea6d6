//! Real orthonormal spherical harmonics on S², product quadrature and an equal-area partition.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;

use crate::jet::Jet;

/// Flat index of (l, m), -l <= m <= l.
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

pub fn lm_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Iterates (l, m) in flat-index order.
pub fn lm_pairs(lmax: usize) -> impl Iterator<Item = (usize, i64)> {
    (0..=lmax).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m)))
}

fn ab(l: usize, m: usize) -> (f64, f64) {
    let (l, m) = (l as f64, m as f64);
    let a = ((4.0 * l * l - 1.0) / (l * l - m * m)).sqrt();
    let b = (((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0)).sqrt();
    (a, b)
}

/// Y_lm at a unit vector, for all l <= lmax. Real basis: m > 0 uses cos mφ, m < 0 uses sin |m|φ,
/// no Condon-Shortley phase.
pub fn real_sph_harm_all(lmax: usize, dir: [f64; 3]) -> Vec<f64> {
    let [x, y, z] = dir;
    let mut out = vec![0.0; lm_count(lmax)];
    // (x + i y)^m
    let mut cm = 1.0;
    let mut sm = 0.0;
    let mut qmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            qmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let (c, s) = (cm * x - sm * y, cm * y + sm * x);
            cm = c;
            sm = s;
        }
        let (fc, fs) = if m == 0 { (1.0, 0.0) } else { (2f64.sqrt() * cm, 2f64.sqrt() * sm) };
        let mut q2 = 0.0;
        let mut q1 = qmm;
        for l in m..=lmax {
            let q = if l == m {
                qmm
            } else if l == m + 1 {
                (2.0 * m as f64 + 3.0).sqrt() * z * qmm
            } else {
                let (a, b) = ab(l, m);
                a * (z * q1 - b * q2)
            };
            if l > m {
                q2 = q1;
                q1 = q;
            }
            out[lm_index(l, m as i64)] = q * fc;
            if m > 0 {
                out[lm_index(l, -(m as i64))] = q * fs;
            }
        }
    }
    out
}

/// The regular solid harmonic r^l Y_lm(x/|x|) as a jet about `x0`.
pub fn solid_harmonic_jet(l: usize, m: i64, order: usize, x0: [f64; 3]) -> Jet {
    let [x, y, z] = crate::jet::coordinates(order, x0);
    let r2 = &(&(&x * &x) + &(&y * &y)) + &(&z * &z);
    let am = m.unsigned_abs() as usize;
    let mut re = Jet::constant(order, 1.0);
    let mut im = Jet::zero(order);
    let mut qmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=am {
        qmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
        let nre = &(&re * &x) - &(&im * &y);
        let nim = &(&re * &y) + &(&im * &x);
        re = nre;
        im = nim;
    }
    let mut q2 = Jet::zero(order);
    let mut q1 = Jet::constant(order, qmm);
    for ll in am + 1..=l {
        let q = if ll == am + 1 {
            z.scale((2.0 * am as f64 + 3.0).sqrt() * qmm)
        } else {
            let (a, b) = ab(ll, am);
            (&(&z * &q1) - &(&r2 * &q2).scale(b)).scale(a)
        };
        q2 = q1;
        q1 = q;
    }
    let angular = match m {
        0 => re,
        m if m > 0 => re.scale(2f64.sqrt()),
        _ => im.scale(2f64.sqrt()),
    };
    &q1 * &angular
}

/// Nodes and weights of a quadrature rule on S² (weights sum to 4π).
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    /// Gauss–Legendre in cos θ times the uniform rule in φ; exact for spherical harmonics of
    /// degree below min(2 n_theta, n_phi).
    pub fn gauss_product(n_theta: usize, n_phi: usize) -> Self {
        let gl = GaussLegendre::new(n_theta.max(2)).expect("gauss-legendre degree >= 2");
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let dphi = 2.0 * PI / n_phi as f64;
        for &(t, w) in gl.as_node_weight_pairs() {
            let s = ((1.0 - t) * (1.0 + t)).sqrt();
            for k in 0..n_phi {
                let phi = (k as f64 + 0.5) * dphi;
                nodes.push([s * phi.cos(), s * phi.sin(), t]);
                weights.push(w * dphi);
            }
        }
        SphereGrid { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One region of an equal-area partition: a colatitude/longitude box or a polar cap.
#[derive(Debug, Clone, Copy)]
pub struct SphereCell {
    pub center: [f64; 3],
    pub area: f64,
    pub theta: (f64, f64),
    pub phi: (f64, f64),
}

impl SphereCell {
    /// Largest chord between sample points on the cell boundary.
    pub fn diameter(&self) -> f64 {
        let mut pts = Vec::new();
        let k = 8;
        for i in 0..=k {
            for j in 0..=k {
                let th = self.theta.0 + (self.theta.1 - self.theta.0) * i as f64 / k as f64;
                let ph = self.phi.0 + (self.phi.1 - self.phi.0) * j as f64 / k as f64;
                if i == 0 || i == k || j == 0 || j == k {
                    pts.push(spherical(th, ph));
                }
            }
        }
        let mut d = 0.0f64;
        for a in &pts {
            for b in &pts {
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt());
            }
        }
        d
    }
}

fn spherical(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Recursive zonal equal-area partition of S² into `n` regions: two polar caps and collars of
/// equal-longitude boxes, every region of area 4π/n.
pub fn equal_area_partition(n: usize) -> Vec<SphereCell> {
    let n = n.max(1);
    let area = 4.0 * PI / n as f64;
    if n == 1 {
        return vec![SphereCell { center: [0.0, 0.0, 1.0], area, theta: (0.0, PI), phi: (0.0, 2.0 * PI) }];
    }
    if n == 2 {
        return vec![
            SphereCell { center: [0.0, 0.0, 1.0], area, theta: (0.0, PI / 2.0), phi: (0.0, 2.0 * PI) },
            SphereCell { center: [0.0, 0.0, -1.0], area, theta: (PI / 2.0, PI), phi: (0.0, 2.0 * PI) },
        ];
    }
    let cap = (1.0 - area / (2.0 * PI)).acos();
    let ideal = area.sqrt();
    let n_collars = (((PI - 2.0 * cap) / ideal).round() as usize).max(1);
    let fit = (PI - 2.0 * cap) / n_collars as f64;
    let band_area = |a: f64, b: f64| 2.0 * PI * (a.cos() - b.cos());
    let mut counts = Vec::with_capacity(n_collars);
    let mut carry = 0.0;
    for i in 0..n_collars {
        let a = cap + i as f64 * fit;
        let y = band_area(a, a + fit) / area + carry;
        let m = y.round().max(1.0);
        carry = y - m;
        counts.push(m as usize);
    }
    // absorb any rounding mismatch in the widest collar
    let total: usize = counts.iter().sum::<usize>() + 2;
    if total != n {
        let widest = (0..n_collars).max_by_key(|&i| counts[i]).unwrap_or(0);
        counts[widest] = (counts[widest] as i64 + n as i64 - total as i64).max(1) as usize;
    }
    let mut cells = vec![SphereCell { center: [0.0, 0.0, 1.0], area, theta: (0.0, cap), phi: (0.0, 2.0 * PI) }];
    let mut upper = cap;
    let mut cum = 1usize;
    for (i, &m) in counts.iter().enumerate() {
        cum += m;
        // colatitude with cap area equal to cum regions
        let lower = (1.0 - cum as f64 * area / (2.0 * PI)).clamp(-1.0, 1.0).acos();
        let lower = if i + 1 == n_collars { PI - cap } else { lower };
        let offset = if i % 2 == 0 { 0.0 } else { 0.5 };
        let dphi = 2.0 * PI / m as f64;
        let tmid = ((upper.cos() + lower.cos()) / 2.0).acos();
        let a = band_area(upper, lower) / m as f64;
        for j in 0..m {
            let p0 = (j as f64 + offset) * dphi;
            cells.push(SphereCell {
                center: spherical(tmid, p0 + 0.5 * dphi),
                area: a,
                theta: (upper, lower),
                phi: (p0, p0 + dphi),
            });
        }
        upper = lower;
    }
    cells.push(SphereCell { center: [0.0, 0.0, -1.0], area, theta: (PI - cap, PI), phi: (0.0, 2.0 * PI) });
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_under_exact_quadrature() {
        let lmax = 8;
        let grid = SphereGrid::gauss_product(lmax + 2, 2 * lmax + 3);
        let mut gram = vec![0.0; lm_count(lmax) * lm_count(lmax)];
        let n = lm_count(lmax);
        for (p, w) in grid.nodes.iter().zip(&grid.weights) {
            let y = real_sph_harm_all(lmax, *p);
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * y[i] * y[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * n + j] - want).abs() < 1e-12, "({i},{j}) {}", gram[i * n + j]);
            }
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let d = [0.36, -0.48, 0.8];
        let y = real_sph_harm_all(2, d);
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        assert!((y[lm_index(1, 0)] - c1 * d[2]).abs() < 1e-15);
        assert!((y[lm_index(1, 1)] - c1 * d[0]).abs() < 1e-15);
        assert!((y[lm_index(1, -1)] - c1 * d[1]).abs() < 1e-15);
        let c20 = (5.0 / (16.0 * PI)).sqrt();
        assert!((y[lm_index(2, 0)] - c20 * (3.0 * d[2] * d[2] - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn solid_harmonic_matches_surface_values() {
        let x0: [f64; 3] = [0.7, -0.2, 1.3];
        let r: f64 = (x0[0] * x0[0] + x0[1] * x0[1] + x0[2] * x0[2]).sqrt();
        let dir = [x0[0] / r, x0[1] / r, x0[2] / r];
        let y = real_sph_harm_all(6, dir);
        for (l, m) in lm_pairs(6) {
            let j = solid_harmonic_jet(l, m, 2, x0);
            let want = r.powi(l as i32) * y[lm_index(l, m)];
            assert!((j.value() - want).abs() < 1e-13, "l={l} m={m}");
            // harmonic polynomial
            assert!(j.laplacian().value().abs() < 1e-12 * r.powi(l as i32).max(1.0));
        }
    }

    #[test]
    fn partition_areas_and_count() {
        for n in [12, 50, 128, 512, 2048] {
            let cells = equal_area_partition(n);
            assert_eq!(cells.len(), n);
            let total: f64 = cells.iter().map(|c| c.area).sum();
            assert!((total - 4.0 * PI).abs() < 1e-10);
            for c in &cells {
                assert!((c.area * n as f64 / (4.0 * PI) - 1.0).abs() < 1e-9);
            }
        }
        let d1 = equal_area_partition(128).iter().map(|c| c.diameter()).fold(0.0, f64::max);
        let d2 = equal_area_partition(512).iter().map(|c| c.diameter()).fold(0.0, f64::max);
        assert!(d2 < 0.7 * d1);
    }
}
