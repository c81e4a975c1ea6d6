//! Helmholtz atom fields and their fitting from a Herglotz density.
//!
//! Convention: v(x) = ∫ f(ξ) e^{i x·ξ} dσ and ∫ e^{i y·ξ} dσ = 4π j₀(|y|), so a density
//! f(ξ) ≈ (1/4π) Σ c_n e^{-i x_n·ξ} corresponds to w(x) = Σ c_n j₀(|x - x_n|).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::herglotz::{c3_norm, herglotz_integral, SphereDensity, C3};
use super::lsq::{cgls, AtomSite, ExpSumOperator};
use super::sphere::{equal_area_partition, SphereGrid};
use super::{ball_grid, norm3, FieldTag, R3Field};
use crate::error::{BeltramiError, Result};
use crate::jet::{self, Jet, Partials};
use crate::specfun::scaled_bessel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselAtom {
    pub x: [f64; 3],
    pub c: [f64; 3],
}

/// w(x) = Σ c_n j₀(|x - x_n|), all |x_n| <= radius.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BesselAtomField {
    pub radius: f64,
    pub atoms: Vec<BesselAtom>,
}

#[inline]
fn j0(r: f64) -> f64 {
    if r < 1e-4 {
        let r2 = r * r;
        1.0 - r2 / 6.0 + r2 * r2 / 120.0
    } else {
        r.sin() / r
    }
}

/// Jet of j₀(|x - center|) about x.
pub(crate) fn j0_atom_jet(x: [f64; 3], center: [f64; 3], order: usize) -> Jet {
    let y = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
    let r = norm3(y);
    let mut c = vec![0.0; jet::n_monomials(order)];
    c[0] = r * r;
    if order >= 1 {
        for i in 0..3 {
            c[1 + i] = 2.0 * y[i];
        }
    }
    if order >= 2 {
        c[jet::monomial_index([2, 0, 0])] = 1.0;
        c[jet::monomial_index([0, 2, 0])] = 1.0;
        c[jet::monomial_index([0, 0, 2])] = 1.0;
    }
    let s = Jet::from_coeffs(order, c);
    let mut taylor = Vec::with_capacity(order + 1);
    let mut f = 1.0;
    for k in 0..=order {
        if k > 0 {
            f *= -0.5 / k as f64;
        }
        taylor.push(f * scaled_bessel(k, r));
    }
    s.compose(&taylor)
}

impl BesselAtomField {
    pub fn new(radius: f64, atoms: Vec<BesselAtom>) -> Result<Self> {
        if let Some((i, _)) = atoms.iter().enumerate().find(|(_, a)| norm3(a.x) > radius * (1.0 + 1e-12)) {
            return Err(BeltramiError::Precondition(format!("atom {i} lies outside radius {radius}")));
        }
        Ok(BesselAtomField { radius, atoms })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Component i as (centers, scalar weights).
    pub fn component(&self, i: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
        (self.atoms.iter().map(|a| a.x).collect(), self.atoms.iter().map(|a| a.c[i]).collect())
    }

    /// Values on many points, parallel over points.
    pub fn eval_many(&self, pts: &[[f64; 3]]) -> Vec<[f64; 3]> {
        pts.par_iter().map(|&x| self.eval(x)).collect()
    }
}

impl R3Field for BesselAtomField {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in &self.atoms {
            let r = norm3([x[0] - a.x[0], x[1] - a.x[1], x[2] - a.x[2]]);
            let j = j0(r);
            for i in 0..3 {
                out[i] += a.c[i] * j;
            }
        }
        out
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        if order > self.max_order() {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: self.max_order() });
        }
        let mut acc = [Jet::zero(order), Jet::zero(order), Jet::zero(order)];
        for a in &self.atoms {
            let j = j0_atom_jet(x, a.x, order);
            for i in 0..3 {
                if a.c[i] != 0.0 {
                    acc[i] += &j.scale(a.c[i]);
                }
            }
        }
        Ok(Partials::from_jets(&acc, order))
    }

    fn max_order(&self) -> usize {
        crate::jet::MAX_JET_ORDER
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Helmholtz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveAtom {
    pub xi: [f64; 3],
    pub c: [Complex64; 3],
}

/// w(x) = Σ c_n e^{i ξ_n·x} with |ξ_n| = 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlaneWaveAtomField {
    pub atoms: Vec<PlaneWaveAtom>,
}

impl PlaneWaveAtomField {
    /// Directions are normalized; a zero direction is rejected.
    pub fn new(atoms: Vec<PlaneWaveAtom>) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for (i, mut a) in atoms.into_iter().enumerate() {
            let n = norm3(a.xi);
            if !(n > 0.0) {
                return Err(BeltramiError::Precondition(format!("plane-wave atom {i} has zero direction")));
            }
            if (n - 1.0).abs() > 1e-14 {
                a.xi = [a.xi[0] / n, a.xi[1] / n, a.xi[2] / n];
            }
            out.push(a);
        }
        Ok(PlaneWaveAtomField { atoms: out })
    }

    pub fn eval_complex(&self, x: [f64; 3]) -> C3 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for a in &self.atoms {
            let e = Complex64::from_polar(1.0, a.xi[0] * x[0] + a.xi[1] * x[1] + a.xi[2] * x[2]);
            for i in 0..3 {
                out[i] += a.c[i] * e;
            }
        }
        out
    }

    /// ∂^α w = Σ c_n (iξ_n)^α e^{i ξ_n·x}, indexed like `jet::monomials(order)`.
    pub fn partials_complex(&self, x: [f64; 3], order: usize) -> Vec<C3> {
        let monos = jet::monomials(order);
        let mut out = vec![[Complex64::new(0.0, 0.0); 3]; monos.len()];
        let i = Complex64::new(0.0, 1.0);
        for a in &self.atoms {
            let e = Complex64::from_polar(1.0, a.xi[0] * x[0] + a.xi[1] * x[1] + a.xi[2] * x[2]);
            let ik = [i * a.xi[0], i * a.xi[1], i * a.xi[2]];
            for (k, alpha) in monos.iter().enumerate() {
                let f = e * ik[0].powu(alpha[0] as u32) * ik[1].powu(alpha[1] as u32) * ik[2].powu(alpha[2] as u32);
                for c in 0..3 {
                    out[k][c] += a.c[c] * f;
                }
            }
        }
        out
    }
}

impl R3Field for PlaneWaveAtomField {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let v = self.eval_complex(x);
        [v[0].re, v[1].re, v[2].re]
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        let c = self.partials_complex(x, order);
        Ok(Partials { order, values: c.iter().map(|v| [v[0].re, v[1].re, v[2].re]).collect() })
    }

    fn max_order(&self) -> usize {
        crate::jet::MAX_JET_ORDER
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Helmholtz
    }
}

/// Radial cutoff χ: 1 on ||ξ|-1| < plateau, 0 on ||ξ|-1| > support, C^∞ in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub plateau: f64,
    pub support: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { plateau: 0.25, support: 0.5 }
    }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

impl Cutoff {
    pub fn chi(&self, s: f64) -> f64 {
        smooth_step((self.support - (s - 1.0).abs()) / (self.support - self.plateau))
    }

    fn validate(&self) -> Result<()> {
        if !(self.plateau >= 0.0 && self.support > self.plateau && self.support < 1.0) {
            return Err(BeltramiError::Precondition(format!(
                "cutoff needs 0 <= plateau < support < 1, got {} / {}",
                self.plateau, self.support
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// spacing of the frequency grid used for the discrete Fourier transform of g
    pub xi_spacing: f64,
    /// least-squares weight refinement after the Riemann weights
    pub refine: bool,
    pub refine_iterations: usize,
    /// Gauss product grid (n_theta, n_phi) for the least-squares residual
    pub refine_grid: (usize, usize),
    /// grid on which the S² sup-error is reported
    pub report_grid: (usize, usize),
    /// fail if the relative S² sup-error exceeds this
    pub tolerance: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            xi_spacing: 1.0 / 16.0,
            refine: false,
            refine_iterations: 60,
            refine_grid: (20, 40),
            report_grid: (28, 56),
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub cells_per_axis: usize,
    pub atoms: usize,
    pub density_sup: f64,
    /// sup over S² of |(1/4π) Σ c_n e^{-i x_n·ξ} - f(ξ)| with the Riemann weights
    pub riemann_sup_error: f64,
    pub refined_sup_error: Option<f64>,
    pub refinement_accepted: bool,
}

impl FitReport {
    pub fn achieved_sup_error(&self) -> f64 {
        match (self.refinement_accepted, self.refined_sup_error) {
            (true, Some(e)) => e,
            _ => self.riemann_sup_error,
        }
    }

    pub fn relative_sup_error(&self) -> f64 {
        if self.density_sup > 0.0 {
            self.achieved_sup_error() / self.density_sup
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct BesselFit {
    pub field: BesselAtomField,
    pub report: FitReport,
}

fn sup_diff(a: &[C3], b: &[C3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| c3_norm(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]]))
        .fold(0.0, f64::max)
}

/// Discretizes the Herglotz integral into shifted-Bessel atoms on `cells`³ cubes covering B_R.
pub fn fit_bessel_atoms(
    density: &dyn SphereDensity,
    radius: f64,
    cells: usize,
    cutoff: &Cutoff,
    opts: &FitOptions,
) -> Result<BesselFit> {
    if !(radius >= 4.0) {
        return Err(BeltramiError::Precondition(format!("atom radius {radius} below 4")));
    }
    if cells < 8 {
        return Err(BeltramiError::Precondition(format!("{cells} cells per axis, need at least 8")));
    }
    if !(opts.xi_spacing > 0.0 && opts.xi_spacing <= 0.25) {
        return Err(BeltramiError::Precondition(format!("frequency spacing {} not in (0, 1/4]", opts.xi_spacing)));
    }
    cutoff.validate()?;

    let report_grid = SphereGrid::gauss_product(opts.report_grid.0, opts.report_grid.1);
    let f_report: Vec<C3> = report_grid.nodes.par_iter().map(|&xi| density.eval(xi)).collect();
    let density_sup = f_report.iter().map(c3_norm).fold(0.0, f64::max);
    let empty_report = FitReport {
        cells_per_axis: cells,
        atoms: 0,
        density_sup,
        riemann_sup_error: density_sup,
        refined_sup_error: None,
        refinement_accepted: false,
    };
    if density_sup < 1e-14 {
        return Ok(BesselFit { field: BesselAtomField { radius, atoms: Vec::new() }, report: empty_report });
    }

    // g(ξ) = χ(|ξ|) f(ξ/|ξ|) on a cube grid covering its support
    let dxi = opts.xi_spacing;
    let kmax = ((1.0 + cutoff.support) / dxi).ceil() as i64;
    let mx = (2 * kmax + 1) as usize;
    let xis: Vec<f64> = (-kmax..=kmax).map(|k| k as f64 * dxi).collect();
    let g: Vec<C3> = (0..mx * mx * mx)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c) = (idx / (mx * mx), (idx / mx) % mx, idx % mx);
            let xi = [xis[a], xis[b], xis[c]];
            let s = norm3(xi);
            let chi = if s > 0.0 { cutoff.chi(s) } else { 0.0 };
            if chi == 0.0 {
                return [Complex64::new(0.0, 0.0); 3];
            }
            let f = density.eval([xi[0] / s, xi[1] / s, xi[2] / s]);
            [f[0] * chi, f[1] * chi, f[2] * chi]
        })
        .collect();
    let norm = dxi.powi(3) / (2.0 * std::f64::consts::PI).powi(3);

    // ĝ on cell centers, one axis at a time
    let h = 2.0 * radius / cells as f64;
    let centers: Vec<f64> = (0..cells).map(|a| -radius + (a as f64 + 0.5) * h).collect();
    let e_tab: Vec<Complex64> = centers
        .iter()
        .flat_map(|&x| xis.iter().map(move |&k| Complex64::from_polar(1.0, x * k)))
        .collect();
    let n = cells;
    let zero = [Complex64::new(0.0, 0.0); 3];
    let pass = |src: &[C3], outer: usize, inner_len: usize| -> Vec<C3> {
        // src[o][k][rest] -> out[o][a][rest]; rest has length `inner_len`
        let mut out = vec![zero; outer * n * inner_len];
        out.par_chunks_mut(n * inner_len).enumerate().for_each(|(o, chunk)| {
            for a in 0..n {
                for k in 0..mx {
                    let e = e_tab[a * mx + k];
                    let s = &src[(o * mx + k) * inner_len..(o * mx + k + 1) * inner_len];
                    let d = &mut chunk[a * inner_len..(a + 1) * inner_len];
                    for (di, si) in d.iter_mut().zip(s) {
                        for c in 0..3 {
                            di[c] += si[c] * e;
                        }
                    }
                }
            }
        });
        out
    };
    // transform the last axis by treating it as the "middle" of a transposed layout
    let mut t: Vec<C3> = vec![zero; mx * mx * n];
    t.par_chunks_mut(n).enumerate().for_each(|(row, out)| {
        let src = &g[row * mx..(row + 1) * mx];
        for (a, o) in out.iter_mut().enumerate() {
            for (k, s) in src.iter().enumerate() {
                let e = e_tab[a * mx + k];
                for c in 0..3 {
                    o[c] += s[c] * e;
                }
            }
        }
    });
    let t = pass(&t, mx, n); // [k1][a2][a3]
    let ghat = pass(&t, 1, n * n); // [a1][a2][a3]

    // Re ĝ at an arbitrary point, for atoms moved off the lattice
    let ghat_at = |x: [f64; 3]| -> [f64; 3] {
        let ex: Vec<[Complex64; 3]> = xis
            .iter()
            .map(|&k| std::array::from_fn(|d| Complex64::from_polar(1.0, x[d] * k)))
            .collect();
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for a in 0..mx {
            for b in 0..mx {
                let row = &g[(a * mx + b) * mx..(a * mx + b + 1) * mx];
                let mut inner = [Complex64::new(0.0, 0.0); 3];
                for (c, s) in row.iter().enumerate() {
                    let e = ex[c][2];
                    for i in 0..3 {
                        inner[i] += s[i] * e;
                    }
                }
                let eab = ex[a][0] * ex[b][1];
                for i in 0..3 {
                    acc[i] += inner[i] * eab;
                }
            }
        }
        [acc[0].re * norm, acc[1].re * norm, acc[2].re * norm]
    };

    // cubes clipped to the ball, volumes by 5³ sub-sampling
    let four_pi = 4.0 * std::f64::consts::PI;
    let cell_list: Vec<(AtomSite, BesselAtom)> = (0..n * n * n)
        .into_par_iter()
        .filter_map(|idx| {
            let ia = [idx / (n * n), (idx / n) % n, idx % n];
            let center = [centers[ia[0]], centers[ia[1]], centers[ia[2]]];
            let mut count = 0usize;
            let mut centroid = [0.0; 3];
            for s in 0..125 {
                let off = [s / 25, (s / 5) % 5, s % 5];
                let p: [f64; 3] = std::array::from_fn(|d| center[d] + ((off[d] as f64 + 0.5) / 5.0 - 0.5) * h);
                if norm3(p) <= radius {
                    count += 1;
                    for d in 0..3 {
                        centroid[d] += p[d];
                    }
                }
            }
            if count == 0 {
                return None;
            }
            let w = four_pi * h * h * h * count as f64 / 125.0;
            let (site, x, gh) = if norm3(center) <= radius {
                let v = ghat[(ia[0] * n + ia[1]) * n + ia[2]];
                (AtomSite::Lattice(ia), center, [v[0].re * norm, v[1].re * norm, v[2].re * norm])
            } else {
                let x = centroid.map(|v| v / count as f64);
                (AtomSite::Free(x), x, ghat_at(x))
            };
            Some((site, BesselAtom { x, c: [gh[0] * w, gh[1] * w, gh[2] * w] }))
        })
        .collect();
    let (sites, mut atoms): (Vec<AtomSite>, Vec<BesselAtom>) = cell_list.into_iter().unzip();

    let report_op = ExpSumOperator::new(&report_grid.nodes, None, &centers, sites.clone());
    let weights: Vec<[f64; 3]> = atoms.iter().map(|a| a.c).collect();
    let riemann_sup_error = sup_diff(&report_op.apply(&weights), &f_report);

    let mut report = FitReport {
        cells_per_axis: cells,
        atoms: atoms.len(),
        density_sup,
        riemann_sup_error,
        refined_sup_error: None,
        refinement_accepted: false,
    };
    if opts.refine {
        let ls_grid = SphereGrid::gauss_product(opts.refine_grid.0, opts.refine_grid.1);
        let op = ExpSumOperator::new(&ls_grid.nodes, Some(&ls_grid.weights), &centers, sites);
        let target: Vec<C3> = ls_grid
            .nodes
            .par_iter()
            .zip(&ls_grid.weights)
            .map(|(&xi, &w)| {
                let f = density.eval(xi);
                let s = w.sqrt();
                [f[0] * s, f[1] * s, f[2] * s]
            })
            .collect();
        let refined = cgls(&op, &target, &weights, opts.refine_iterations);
        let err = sup_diff(&report_op.apply(&refined), &f_report);
        report.refined_sup_error = Some(err);
        if err < riemann_sup_error {
            report.refinement_accepted = true;
            for (a, c) in atoms.iter_mut().zip(refined) {
                a.c = c;
            }
        }
    }
    if let Some(tol) = opts.tolerance {
        if report.relative_sup_error() > tol {
            return Err(BeltramiError::FitFailure { achieved: report.relative_sup_error(), tolerance: tol });
        }
    }
    Ok(BesselFit { field: BesselAtomField { radius, atoms }, report })
}

#[derive(Debug, Clone)]
pub struct PlaneWaveFit {
    pub field: PlaneWaveAtomField,
    /// sup over a grid in the unit ball of |w - ∫ f e^{i x·ξ} dσ|
    pub sup_error: f64,
    pub max_cell_diameter: f64,
}

/// ξ_n = centers of an equal-area partition, c_n = f(ξ_n)|U_n|.
pub fn fit_planewave_atoms(density: &dyn SphereDensity, cell_count: usize) -> Result<PlaneWaveFit> {
    if cell_count < 12 {
        return Err(BeltramiError::Precondition(format!("{cell_count} sphere cells, need at least 12")));
    }
    let cells = equal_area_partition(cell_count);
    let max_cell_diameter = cells.iter().map(|c| c.diameter()).fold(0.0, f64::max);
    let atoms: Vec<PlaneWaveAtom> = cells
        .iter()
        .filter_map(|cell| {
            let f = density.eval(cell.center);
            if c3_norm(&f) == 0.0 {
                return None;
            }
            Some(PlaneWaveAtom { xi: cell.center, c: [f[0] * cell.area, f[1] * cell.area, f[2] * cell.area] })
        })
        .collect();
    let field = PlaneWaveAtomField::new(atoms)?;
    let grid = SphereGrid::gauss_product(40, 80);
    let sup_error = ball_grid(9, 1.0)
        .par_iter()
        .map(|&x| {
            let a = field.eval_complex(x);
            let b = herglotz_integral(density, x, &grid);
            c3_norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        })
        .reduce(|| 0.0, f64::max);
    Ok(PlaneWaveFit { field, sup_error, max_cell_diameter })
}
