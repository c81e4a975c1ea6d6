//! Beltrami fields on the flat torus (ℝ/2πℤ)³ as finite Fourier sums.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{select_nearest_directions, LatticeDirectionSet, Snapping};
use crate::error::{BeltramiError, Result};
use crate::jet::{self, Partials};
use crate::r3_fields::herglotz::C3;
use crate::r3_fields::{eval_with_derivatives, FieldTag, PlaneWaveAtom, PlaneWaveAtomField, R3Field};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Per-mode invariants hold to this multiple of max(1, |k||ĉ|).
pub const MODE_TOLERANCE: f64 = 1e-13;

fn kf(k: &[i64; 3]) -> [f64; 3] {
    k.map(|v| v as f64)
}

fn cross_rc(k: [f64; 3], c: &C3) -> C3 {
    [k[1] * c[2] - k[2] * c[1], k[2] * c[0] - k[0] * c[2], k[0] * c[1] - k[1] * c[0]]
}

fn cnorm(c: &C3) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ĉ = (−k×(k×c) + iΛ k×c)/(2Λ²), the projection onto the +Λ eigenspace of i k×·.
pub fn beltrami_projection(k: [f64; 3], c: &C3, lambda: f64) -> C3 {
    let kc = cross_rc(k, c);
    let kkc = cross_rc(k, &kc);
    let s = 1.0 / (2.0 * lambda * lambda);
    std::array::from_fn(|i| (-kkc[i] + I * lambda * kc[i]) * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusMode {
    pub k: [i64; 3],
    pub c: C3,
}

impl TorusMode {
    /// |i k×ĉ − Λĉ|
    pub fn eigen_residual(&self, lambda: f64) -> f64 {
        let kc = cross_rc(kf(&self.k), &self.c);
        cnorm(&std::array::from_fn(|i| I * kc[i] - lambda * self.c[i]))
    }

    /// |k·ĉ|
    pub fn divergence_residual(&self) -> f64 {
        let k = kf(&self.k);
        (self.c[0] * k[0] + self.c[1] * k[1] + self.c[2] * k[2]).norm()
    }

    fn tolerance(&self) -> f64 {
        MODE_TOLERANCE * (norm3(kf(&self.k)) * cnorm(&self.c)).max(1.0)
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// u(x) = Σ ĉ_k e^{ik·x} over explicit conjugate pairs, all |k|² = norm2, curl u = √norm2 · u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusBeltramiField {
    norm2: u64,
    modes: Vec<TorusMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub max_eigen_residual: f64,
    pub max_divergence_residual: f64,
    pub max_conjugate_mismatch: f64,
}

impl TorusBeltramiField {
    pub fn zero(norm2: u64) -> Self {
        TorusBeltramiField { norm2, modes: Vec::new() }
    }

    /// Validates |k|², the eigen relation, transversality and conjugate symmetry.
    pub fn from_modes(norm2: u64, modes: Vec<TorusMode>) -> Result<Self> {
        let lambda = (norm2 as f64).sqrt();
        let mut map: BTreeMap<[i64; 3], C3> = BTreeMap::new();
        for (idx, m) in modes.iter().enumerate() {
            let n = m.k.iter().map(|v| v * v).sum::<i64>();
            if n as u64 != norm2 {
                return Err(BeltramiError::NonLatticeDirection { index: idx, norm2 });
            }
            if m.eigen_residual(lambda) > m.tolerance() || m.divergence_residual() > m.tolerance() {
                return Err(BeltramiError::Precondition(format!("mode {idx} ({:?}) is not in the +{lambda} eigenspace", m.k)));
            }
            if map.insert(m.k, m.c).is_some() {
                return Err(BeltramiError::Precondition(format!("mode {:?} listed twice", m.k)));
            }
        }
        for (k, c) in &map {
            let neg = k.map(|v| -v);
            let ok = map.get(&neg).is_some_and(|d| {
                let diff: C3 = std::array::from_fn(|i| d[i] - c[i].conj());
                cnorm(&diff) <= MODE_TOLERANCE * cnorm(c).max(1.0)
            });
            if !ok {
                return Err(BeltramiError::Precondition(format!("mode {k:?} lacks its conjugate partner")));
            }
        }
        Ok(TorusBeltramiField { norm2, modes: map.into_iter().map(|(k, c)| TorusMode { k, c }).collect() })
    }

    pub fn norm2(&self) -> u64 {
        self.norm2
    }

    pub fn eigenvalue(&self) -> f64 {
        (self.norm2 as f64).sqrt()
    }

    pub fn modes(&self) -> &[TorusMode] {
        &self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| cnorm(&m.c) == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        TorusBeltramiField {
            norm2: self.norm2,
            modes: self.modes.iter().map(|m| TorusMode { k: m.k, c: m.c.map(|z| z * s) }).collect(),
        }
    }

    pub fn mode_report(&self) -> ModeReport {
        let lambda = self.eigenvalue();
        let mut r = ModeReport { max_eigen_residual: 0.0, max_divergence_residual: 0.0, max_conjugate_mismatch: 0.0 };
        for m in &self.modes {
            r.max_eigen_residual = r.max_eigen_residual.max(m.eigen_residual(lambda));
            r.max_divergence_residual = r.max_divergence_residual.max(m.divergence_residual());
            let neg = m.k.map(|v| -v);
            let mis = match self.modes.binary_search_by(|q| q.k.cmp(&neg)) {
                Ok(j) => cnorm(&std::array::from_fn(|i| self.modes[j].c[i] - m.c[i].conj())),
                Err(_) => f64::INFINITY,
            };
            r.max_conjugate_mismatch = r.max_conjugate_mismatch.max(mis);
        }
        r
    }

    /// The rescaled field x ↦ u(x/Λ).
    pub fn rescaled(&self) -> RescaledTorusField<'_> {
        RescaledTorusField { field: self }
    }

    fn partials_raw(&self, x: [f64; 3], order: usize) -> Partials {
        let x = x.map(|v| v.rem_euclid(TAU));
        let monos = jet::monomials(order);
        let mut out = vec![[ZERO; 3]; monos.len()];
        for m in &self.modes {
            let k = kf(&m.k);
            let e = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            let ik = k.map(|v| I * v);
            for (slot, alpha) in out.iter_mut().zip(monos) {
                let f = e * ik[0].powu(alpha[0] as u32) * ik[1].powu(alpha[1] as u32) * ik[2].powu(alpha[2] as u32);
                for c in 0..3 {
                    slot[c] += m.c[c] * f;
                }
            }
        }
        Partials { order, values: out.iter().map(|v| v.map(|z| z.re)).collect() }
    }
}

impl R3Field for TorusBeltramiField {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        self.partials_raw(x, 0).value()
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        if order > jet::MAX_JET_ORDER {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: jet::MAX_JET_ORDER });
        }
        Ok(self.partials_raw(x, order))
    }

    fn max_order(&self) -> usize {
        jet::MAX_JET_ORDER
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Beltrami(self.eigenvalue())
    }
}

/// x ↦ u(x/Λ), curl = 1.
#[derive(Debug, Clone, Copy)]
pub struct RescaledTorusField<'a> {
    field: &'a TorusBeltramiField,
}

impl R3Field for RescaledTorusField<'_> {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let l = self.field.eigenvalue();
        self.field.eval(x.map(|v| v / l))
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        let l = self.field.eigenvalue();
        let mut p = self.field.partials(x.map(|v| v / l), order)?;
        for (v, alpha) in p.values.iter_mut().zip(jet::monomials(order)) {
            let s = l.powi(-((alpha[0] + alpha[1] + alpha[2]) as i32));
            *v = v.map(|c| c * s);
        }
        Ok(p)
    }

    fn max_order(&self) -> usize {
        jet::MAX_JET_ORDER
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Beltrami(1.0)
    }
}

/// Value and partials up to order 4; x is taken mod 2π.
pub fn eval_torus_field(field: &TorusBeltramiField, x: [f64; 3], order: usize) -> Result<Partials> {
    eval_with_derivatives(field, x, order)
}

/// Moves every atom direction to its nearest lattice direction k/Λ.
pub fn snap_atoms(atoms: &PlaneWaveAtomField, lattice: &LatticeDirectionSet) -> Result<(PlaneWaveAtomField, Snapping)> {
    let targets: Vec<[f64; 3]> = atoms.atoms.iter().map(|a| a.xi).collect();
    let snapping = select_nearest_directions(&targets, lattice)?;
    let l = lattice.lambda();
    let snapped = atoms
        .atoms
        .iter()
        .zip(&snapping.assignments)
        .map(|(a, s)| PlaneWaveAtom { xi: s.k.map(|v| v as f64 / l), c: a.c })
        .collect();
    Ok((PlaneWaveAtomField { atoms: snapped }, snapping))
}

/// Projects ũ(x) = Re Σ cₙ e^{iΛξₙ·x} to u = (curl curl ũ + Λ curl ũ)/(2Λ²).
///
/// Every ξₙ must satisfy Λξₙ ∈ ℤ³ with |Λξₙ|² = norm2.
pub fn build_torus_beltrami(atoms: &PlaneWaveAtomField, norm2: u64) -> Result<TorusBeltramiField> {
    if norm2 == 0 {
        return Err(BeltramiError::Domain { what: "lattice norm²", value: 0.0 });
    }
    let lambda = (norm2 as f64).sqrt();
    let mut acc: BTreeMap<[i64; 3], C3> = BTreeMap::new();
    for (idx, a) in atoms.atoms.iter().enumerate() {
        let scaled = a.xi.map(|v| v * lambda);
        let k = scaled.map(|v| v.round() as i64);
        let off = (0..3).map(|i| (scaled[i] - k[i] as f64).abs()).fold(0.0, f64::max);
        let n: i64 = k.iter().map(|v| v * v).sum();
        if off > 1e-9 * lambda.max(1.0) || n as u64 != norm2 {
            return Err(BeltramiError::NonLatticeDirection { index: idx, norm2 });
        }
        // the real part splits into c/2 at k and conj(c)/2 at −k
        let half = beltrami_projection(kf(&k), &a.c, lambda).map(|z| z * 0.5);
        for (key, amp) in [(k, half), (k.map(|v| -v), half.map(|z| z.conj()))] {
            let e = acc.entry(key).or_insert([ZERO; 3]);
            for i in 0..3 {
                e[i] += amp[i];
            }
        }
    }
    Ok(TorusBeltramiField { norm2, modes: acc.into_iter().map(|(k, c)| TorusMode { k, c }).collect() })
}

/// ∫u·curl u / ∫|u|² by Parseval, with curl taken mode by mode as i k×ĉ.
pub fn torus_helicity_ratio(field: &TorusBeltramiField) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for m in &field.modes {
        let curl: C3 = cross_rc(kf(&m.k), &m.c).map(|z| I * z);
        num += (0..3).map(|i| (m.c[i] * curl[i].conj()).re).sum::<f64>();
        den += m.c.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    if den == 0.0 {
        return Err(BeltramiError::ZeroField);
    }
    Ok(num / den)
}
