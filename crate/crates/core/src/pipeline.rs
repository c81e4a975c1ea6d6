//! End-to-end constructions: reference field to atoms to a Beltrami field on S³ or T³.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{sup_error_norm, Ball, ErrorReport};
use crate::error::{BeltramiError, Result};
use crate::r3_fields::{
    fit_bessel_atoms, fit_planewave_atoms, fourier_bessel_expand, herglotz_density, reference_beltrami, BesselFit,
    Cutoff, FitOptions, HerglotzDensity, PlaneWaveAtomField, QuadratureSpec, R3Field, ReferenceSpec,
};
use crate::s3_construct::{exp_chart, random_s3, RescaledPushforward, S3BeltramiField, S3Field, S3Point};
use crate::t3_construct::{build_torus_beltrami, enumerate_sphere_lattice, snap_atoms, ModeReport, Snapping, TorusBeltramiField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitParams {
    /// radius of the ball carrying the atoms
    pub radius: f64,
    /// cells per axis of the atom lattice
    pub cells: usize,
    pub cutoff: Cutoff,
    pub refine: bool,
    /// truncation degree of the Fourier–Bessel series; by default l + 1 for CK fields, 12 otherwise
    pub fb_degree: Option<usize>,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams { radius: 6.0, cells: 16, cutoff: Cutoff::default(), refine: true, fb_degree: None }
    }
}

fn default_fb_degree(reference: &ReferenceSpec) -> usize {
    match reference {
        ReferenceSpec::ChandrasekharKendall { l, .. } => l + 1,
        ReferenceSpec::Abc { .. } => 12,
    }
}

/// The reference field and its Herglotz density.
pub fn reference_density(reference: &ReferenceSpec, fb_degree: Option<usize>) -> Result<(Box<dyn R3Field>, HerglotzDensity)> {
    let v = reference_beltrami(reference).map_err(|e| e.at_stage("reference"))?;
    let l0 = fb_degree.unwrap_or_else(|| default_fb_degree(reference));
    let series = fourier_bessel_expand(v.as_ref(), l0, &QuadratureSpec::for_degree(l0)).map_err(|e| e.at_stage("fourier_bessel"))?;
    Ok((v, herglotz_density(&series)))
}

/// Fits Bessel atoms to a reference field.
pub fn fit_reference(reference: &ReferenceSpec, fit: &FitParams) -> Result<(Box<dyn R3Field>, BesselFit)> {
    let (v, density) = reference_density(reference, fit.fb_degree)?;
    let opts = FitOptions { refine: fit.refine, ..Default::default() };
    let f = fit_bessel_atoms(&density, fit.radius, fit.cells, &fit.cutoff, &opts).map_err(|e| e.at_stage("atom_fit"))?;
    Ok((v, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub points: usize,
    /// max |curl u − λu| / max |λu|
    pub relative: f64,
    pub absolute: f64,
}

/// Relative sup of the closed-form eigen-identity over uniformly random points.
pub fn s3_eigen_check(u: &S3BeltramiField, points: usize, seed: u64) -> EigenCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lam = u.eigenvalue();
    let (mut res, mut scale) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let p = random_s3(&mut rng);
        res = res.max(u.eigen_residual(p));
        let v = u.frame_components(p);
        scale = scale.max(lam * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
    }
    EigenCheck { points, relative: if scale > 0.0 { res / scale } else { 0.0 }, absolute: res }
}

pub struct S3Build {
    pub field: S3BeltramiField,
    pub fit: BesselFit,
    pub reference: Box<dyn R3Field>,
    pub base: S3Point,
    pub eigen: EigenCheck,
}

/// reference → atoms → lift at degree Λ through the normal chart at `base` → assemble.
pub fn build_s3(reference: &ReferenceSpec, fit: &FitParams, degree: u32, base: S3Point, seed: u64) -> Result<S3Build> {
    let (v, f) = fit_reference(reference, fit)?;
    let field = S3BeltramiField::from_atoms(&f.field, degree, &exp_chart(base)).map_err(|e| e.at_stage("lift"))?;
    let eigen = s3_eigen_check(&field, 200, seed);
    Ok(S3Build { field, fit: f, reference: v, base, eigen })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub degree: u32,
    pub report: ErrorReport,
}

/// Order-m sup error of Ψ_*u(·/Λ) against v for each degree, all from one atom fit.
pub fn rate_sweep(
    reference: &dyn R3Field,
    fit: &BesselFit,
    degrees: &[u32],
    base: S3Point,
    order: usize,
    grid_n: usize,
) -> Result<Vec<RateRow>> {
    let chart = exp_chart(base);
    degrees
        .iter()
        .map(|&degree| {
            let u = S3BeltramiField::from_atoms(&fit.field, degree, &chart).map_err(|e| e.at_stage("lift"))?;
            let pushed = RescaledPushforward { field: &u as &dyn S3Field, chart, degree };
            let report = sup_error_norm(&pushed, reference, Ball::default(), order, grid_n).map_err(|e| e.at_stage("norms"))?;
            Ok(RateRow { degree, report })
        })
        .collect()
}

/// err(Λ) / err(2Λ) for each Λ whose double is also in the table.
pub fn halving_ratios(rows: &[RateRow]) -> Vec<(u32, f64)> {
    rows.iter()
        .filter_map(|r| {
            let d = rows.iter().find(|q| q.degree == 2 * r.degree)?;
            Some((r.degree, r.report.per_order[0] / d.report.per_order[0]))
        })
        .collect()
}

/// Where the torus construction takes its plane-wave atoms from.
#[derive(Debug, Clone, PartialEq)]
pub enum T3Source {
    /// Herglotz density of a reference field sampled on an equal-area partition of S²
    Reference { reference: ReferenceSpec, sphere_cells: usize, fb_degree: Option<usize> },
    Atoms(PlaneWaveAtomField),
}

pub struct T3Build {
    pub field: TorusBeltramiField,
    pub lattice_points: usize,
    pub snapping: Snapping,
    /// sup error of the unsnapped plane-wave fit in the unit ball, when fitted
    pub fit_error: Option<f64>,
    pub modes: ModeReport,
}

/// atoms → snap to the lattice of radius Λ → Beltrami projection and realification.
pub fn build_t3(source: &T3Source, lambda: u64) -> Result<T3Build> {
    let (atoms, fit_error) = match source {
        T3Source::Reference { reference, sphere_cells, fb_degree } => {
            let (_, density) = reference_density(reference, *fb_degree)?;
            let fit = fit_planewave_atoms(&density, *sphere_cells).map_err(|e| e.at_stage("plane_wave_fit"))?;
            (fit.field, Some(fit.sup_error))
        }
        T3Source::Atoms(a) => (a.clone(), None),
    };
    let lattice = enumerate_sphere_lattice(lambda).map_err(|e| e.at_stage("lattice"))?;
    let (snapped, snapping) = snap_atoms(&atoms, &lattice).map_err(|e| e.at_stage("snap"))?;
    let field = build_torus_beltrami(&snapped, lambda * lambda).map_err(|e| e.at_stage("project"))?;
    if field.is_zero() {
        return Err(BeltramiError::ZeroField.at_stage("project"));
    }
    let modes = field.mode_report();
    Ok(T3Build { field, lattice_points: lattice.len(), snapping, fit_error, modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r3_fields::PlaneWaveAtom;
    use num_complex::Complex64;

    #[test]
    fn degree_below_radius_fails_at_lift() {
        let fit = FitParams { cells: 8, refine: false, ..Default::default() };
        match build_s3(&ReferenceSpec::default(), &fit, 5, S3Point::north(), 1) {
            Err(BeltramiError::Stage { stage: "lift", .. }) => {}
            Err(e) => panic!("{e}"),
            Ok(_) => panic!("expected failure"),
        }
    }

    #[test]
    fn s3_build_is_an_eigenfield() {
        let fit = FitParams { cells: 8, refine: false, ..Default::default() };
        let b = build_s3(&ReferenceSpec::default(), &fit, 101, S3Point::north(), 1).unwrap();
        assert!(b.eigen.relative <= 1e-9, "{:?}", b.eigen);
        assert!(b.fit.field.len() > 100);
    }

    #[test]
    fn t3_single_direction() {
        let atoms = PlaneWaveAtomField {
            atoms: vec![PlaneWaveAtom {
                xi: [0.1, 0.2, 0.97],
                c: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            }],
        };
        let b = build_t3(&T3Source::Atoms(atoms), 3).unwrap();
        assert_eq!(b.lattice_points, 30);
        assert_eq!(b.snapping.assignments[0].k, [0, 0, 3]);
        assert!(b.modes.max_eigen_residual <= 1e-13);
        assert_eq!(b.field.modes().len(), 2);
    }

    #[test]
    fn t3_from_reference() {
        let src = T3Source::Reference { reference: ReferenceSpec::default(), sphere_cells: 64, fb_degree: None };
        let b = build_t3(&src, 11).unwrap();
        assert!(b.fit_error.unwrap() < 0.1);
        assert!(b.modes.max_eigen_residual <= 1e-13 * 11.0);
        assert!(b.snapping.max_displacement > 0.0 && b.snapping.max_displacement < 1.0);
    }
}
