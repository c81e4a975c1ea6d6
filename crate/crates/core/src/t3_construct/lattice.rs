//! Integer points on spheres |k|² = n and nearest-direction snapping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BeltramiError, Result};

/// Desk-scale cap on Λ for brute-force enumeration.
pub const LATTICE_CAP: u64 = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDirectionSet {
    /// n = |k|², so Λ = √n.
    pub norm2: u64,
    pub points: Vec<[i64; 3]>,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// All k ∈ ℤ³ with |k|² = Λ².
pub fn enumerate_sphere_lattice(lambda: u64) -> Result<LatticeDirectionSet> {
    if lambda == 0 || lambda > LATTICE_CAP {
        return Err(BeltramiError::UnsupportedDegree { degree: lambda as usize, cap: LATTICE_CAP as usize });
    }
    enumerate_norm2(lambda * lambda)
}

/// All k ∈ ℤ³ with |k|² = n, ordered by (k₁, k₂, k₃).
pub fn enumerate_norm2(n: u64) -> Result<LatticeDirectionSet> {
    if n == 0 || n > LATTICE_CAP * LATTICE_CAP {
        return Err(BeltramiError::Precondition(format!("lattice norm² {n} outside 1..={}", LATTICE_CAP * LATTICE_CAP)));
    }
    let m = isqrt(n) as i64;
    let points = (-m..=m)
        .into_par_iter()
        .flat_map_iter(|k1| {
            let r1 = n - (k1 * k1) as u64;
            let m2 = isqrt(r1) as i64;
            (-m2..=m2).flat_map(move |k2| {
                let r2 = r1 - (k2 * k2) as u64;
                let k3 = isqrt(r2);
                let hit = k3 * k3 == r2;
                let k3 = k3 as i64;
                let pts: Vec<[i64; 3]> = match (hit, k3) {
                    (false, _) => vec![],
                    (true, 0) => vec![[k1, k2, 0]],
                    (true, _) => vec![[k1, k2, -k3], [k1, k2, k3]],
                };
                pts
            })
        })
        .collect();
    Ok(LatticeDirectionSet { norm2: n, points })
}

impl LatticeDirectionSet {
    pub fn lambda(&self) -> f64 {
        (self.norm2 as f64).sqrt()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn directions(&self) -> Vec<[f64; 3]> {
        let l = self.lambda();
        self.points.iter().map(|k| k.map(|v| v as f64 / l)).collect()
    }

    pub fn contains(&self, k: &[i64; 3]) -> bool {
        self.points.binary_search(k).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub target: [f64; 3],
    pub k: [i64; 3],
    /// angle between the target and k/|k|
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapping {
    pub assignments: Vec<Assignment>,
    pub max_displacement: f64,
}

fn angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cr = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let s = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
    let c = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    s.atan2(c)
}

/// For each target direction the lattice direction of smallest angle; ties go to the first in order.
pub fn select_nearest_directions(targets: &[[f64; 3]], lattice: &LatticeDirectionSet) -> Result<Snapping> {
    if lattice.is_empty() {
        return Err(BeltramiError::Precondition(format!("no lattice points of norm² {}", lattice.norm2)));
    }
    let dirs = lattice.directions();
    let assignments: Vec<Assignment> = targets
        .par_iter()
        .map(|&t| {
            let n = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
            let t = t.map(|v| v / n);
            let mut best = 0usize;
            let mut best_dot = f64::NEG_INFINITY;
            for (i, d) in dirs.iter().enumerate() {
                let dot = d[0] * t[0] + d[1] * t[1] + d[2] * t[2];
                if dot > best_dot {
                    best_dot = dot;
                    best = i;
                }
            }
            Assignment { target: t, k: lattice.points[best], displacement: angle(t, dirs[best]) }
        })
        .collect();
    let max_displacement = assignments.iter().map(|a| a.displacement).fold(0.0, f64::max);
    Ok(Snapping { assignments, max_displacement })
}

pub fn is_square_free(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % (p * p) == 0 {
            return false;
        }
        if m % p == 0 {
            m /= p;
        }
        p += 1;
    }
    true
}

/// Square-free values of n = λ² in the range; these are the eigenvalues λ = √n the equidistribution
/// remark applies to.
pub fn square_free_filter(range: std::ops::RangeInclusive<u64>) -> Vec<u64> {
    range.filter(|&n| is_square_free(n)).collect()
}
