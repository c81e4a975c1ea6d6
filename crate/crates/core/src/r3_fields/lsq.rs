//! Least-squares refinement of real atom weights against a density on S².
//!
//! The operator is A c = (1/4π) Σ_n c_n e^{-i x_n·ξ_j} √w_j. Atoms on the cell-center lattice
//! use per-axis exponential tables; the remaining atoms store their rows explicitly.

use num_complex::Complex64;
use rayon::prelude::*;

use super::herglotz::C3;

const INV_FOUR_PI: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// Where an atom sits relative to the cell lattice x_a = -R + (a + 1/2) h.
#[derive(Debug, Clone, Copy)]
pub(crate) enum AtomSite {
    Lattice([usize; 3]),
    Free([f64; 3]),
}

pub(crate) struct ExpSumOperator {
    m: usize,
    sqrt_w: Vec<f64>,
    /// tables[axis][a * m + j] = e^{-i x_a ξ_{j,axis}}
    tables: [Vec<Complex64>; 3],
    sites: Vec<AtomSite>,
    /// explicit rows for free atoms, indexed by position among free atoms
    free_rows: Vec<Vec<Complex64>>,
    free_slot: Vec<usize>,
}

impl ExpSumOperator {
    pub(crate) fn new(nodes: &[[f64; 3]], weights: Option<&[f64]>, axis_coords: &[f64], sites: Vec<AtomSite>) -> Self {
        let m = nodes.len();
        let sqrt_w = match weights {
            Some(w) => w.iter().map(|v| v.sqrt()).collect(),
            None => vec![1.0; m],
        };
        let table = |axis: usize| {
            let mut t = Vec::with_capacity(axis_coords.len() * m);
            for &x in axis_coords {
                for node in nodes {
                    t.push(Complex64::from_polar(1.0, -x * node[axis]));
                }
            }
            t
        };
        let tables = [table(0), table(1), table(2)];
        let mut free_rows = Vec::new();
        let mut free_slot = vec![usize::MAX; sites.len()];
        for (n, s) in sites.iter().enumerate() {
            if let AtomSite::Free(x) = s {
                free_slot[n] = free_rows.len();
                free_rows.push(
                    nodes
                        .iter()
                        .map(|xi| Complex64::from_polar(1.0, -(x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2])))
                        .collect(),
                );
            }
        }
        ExpSumOperator { m, sqrt_w, tables, sites, free_rows, free_slot }
    }

    #[inline]
    fn entry(&self, n: usize, j: usize) -> Complex64 {
        match self.sites[n] {
            AtomSite::Lattice([a, b, c]) => {
                self.tables[0][a * self.m + j] * self.tables[1][b * self.m + j] * self.tables[2][c * self.m + j]
            }
            AtomSite::Free(_) => self.free_rows[self.free_slot[n]][j],
        }
    }

    pub(crate) fn apply(&self, c: &[[f64; 3]]) -> Vec<C3> {
        (0..self.m)
            .into_par_iter()
            .map(|j| {
                let mut acc = [Complex64::new(0.0, 0.0); 3];
                for (n, cn) in c.iter().enumerate() {
                    if cn[0] == 0.0 && cn[1] == 0.0 && cn[2] == 0.0 {
                        continue;
                    }
                    let e = self.entry(n, j);
                    for i in 0..3 {
                        acc[i] += e * cn[i];
                    }
                }
                let s = self.sqrt_w[j] * INV_FOUR_PI;
                [acc[0] * s, acc[1] * s, acc[2] * s]
            })
            .collect()
    }

    /// Real part of Aᴴ r.
    pub(crate) fn adjoint(&self, r: &[C3]) -> Vec<[f64; 3]> {
        let scaled: Vec<C3> = r
            .iter()
            .zip(&self.sqrt_w)
            .map(|(v, w)| {
                let s = w * INV_FOUR_PI;
                [v[0] * s, v[1] * s, v[2] * s]
            })
            .collect();
        (0..self.sites.len())
            .into_par_iter()
            .map(|n| {
                let mut acc = [0.0; 3];
                for (j, rj) in scaled.iter().enumerate() {
                    let e = self.entry(n, j).conj();
                    for i in 0..3 {
                        acc[i] += (e * rj[i]).re;
                    }
                }
                acc
            })
            .collect()
    }
}

fn c3_sq(v: &[C3]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for x in v {
        for i in 0..3 {
            s[i] += x[i].norm_sqr();
        }
    }
    s
}

fn r3_sq(v: &[[f64; 3]]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for x in v {
        for i in 0..3 {
            s[i] += x[i] * x[i];
        }
    }
    s
}

/// CGLS on each component, started from `c0`; `target[j]` = f(ξ_j)·√w_j.
pub(crate) fn cgls(op: &ExpSumOperator, target: &[C3], c0: &[[f64; 3]], iterations: usize) -> Vec<[f64; 3]> {
    let mut x = c0.to_vec();
    let ax = op.apply(&x);
    let mut r: Vec<C3> = target
        .iter()
        .zip(&ax)
        .map(|(b, a)| [b[0] - a[0], b[1] - a[1], b[2] - a[2]])
        .collect();
    let mut s = op.adjoint(&r);
    let mut p = s.clone();
    let mut gamma = r3_sq(&s);
    let gamma0 = gamma;
    for _ in 0..iterations {
        if (0..3).all(|i| gamma[i] <= 1e-28 * gamma0[i].max(1e-300)) {
            break;
        }
        let q = op.apply(&p);
        let qq = c3_sq(&q);
        let alpha: [f64; 3] = std::array::from_fn(|i| if qq[i] > 0.0 { gamma[i] / qq[i] } else { 0.0 });
        for (xn, pn) in x.iter_mut().zip(&p) {
            for i in 0..3 {
                xn[i] += alpha[i] * pn[i];
            }
        }
        for (rj, qj) in r.iter_mut().zip(&q) {
            for i in 0..3 {
                rj[i] -= qj[i] * alpha[i];
            }
        }
        s = op.adjoint(&r);
        let g_new = r3_sq(&s);
        let beta: [f64; 3] = std::array::from_fn(|i| if gamma[i] > 0.0 { g_new[i] / gamma[i] } else { 0.0 });
        for (pn, sn) in p.iter_mut().zip(&s) {
            for i in 0..3 {
                pn[i] = sn[i] + beta[i] * pn[i];
            }
        }
        gamma = g_new;
    }
    x
}
