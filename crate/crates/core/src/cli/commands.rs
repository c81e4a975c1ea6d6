use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{AnnulusShape, Format, FlowSpace, Manifold, PipelineConfig};
use crate::dynamics::{
    detect_closed_orbit, find_fixed_point, invariant_ellipse_seeds, poincare_section, return_map_jacobian, s3_helicity_ratio,
    sup_error_norm, trace_field_line, tube_radius, Ball, ClosedOrbit, FixedPoint, FlowField, SectionOptions, SectionSpec,
};
use crate::error::{BeltramiError, Result};
use crate::io::{write_grid_csv, write_section_csv, write_trajectory_csv, write_vtk, Document, FieldDescriptor, LoadedField, Provenance};
use crate::pipeline::{build_s3, build_t3, fit_reference, halving_ratios, rate_sweep, T3Source};
use crate::r3_fields::{reference_beltrami, PlaneWaveAtom, PlaneWaveAtomField, R3Field};
use crate::s3_construct::{exp_chart, pushforward_rescale, NormalChart, RescaledPushforward, S3Field, S3Point};
use crate::t3_construct::{enumerate_sphere_lattice, is_square_free, square_free_filter, torus_helicity_ratio};

/// Relative eigen-identity tolerance a fresh S³ build must meet.
pub const BUILD_EIGEN_TOLERANCE: f64 = 1e-9;

pub struct Context {
    pub config: PipelineConfig,
    pub provenance: Provenance,
}

/// Files written and a one-line summary for the terminal.
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Context {
    pub fn new(command: &str, config: PipelineConfig, threads: usize) -> Result<Self> {
        let value = serde_json::to_value(&config)?;
        let provenance = Provenance::new(command, config.seed, threads, value);
        Ok(Context { config, provenance })
    }

    fn out_dir(&self) -> Result<&Path> {
        let dir = self.config.output.dir.as_path();
        fs::create_dir_all(dir).map_err(|e| BeltramiError::io(dir, e).at_stage("io"))?;
        Ok(dir)
    }

    fn header(&self) -> Vec<String> {
        vec![format!("provenance: {}", serde_json::to_string(&self.provenance).unwrap_or_default())]
    }

    fn write_report(&self, name: &str, report: &impl Serialize) -> Result<PathBuf> {
        let path = self.out_dir()?.join(name);
        let doc = json!({ "provenance": self.provenance, "report": report });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| BeltramiError::io(&path, e).at_stage("io"))?;
        Ok(path)
    }

    fn write_descriptor(&self, name: &str, field: FieldDescriptor) -> Result<PathBuf> {
        let path = self.out_dir()?.join(name);
        Document { field, provenance: Some(self.provenance.clone()) }.write(&path).map_err(|e| e.at_stage("io"))?;
        Ok(path)
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.out_dir()?.join(name);
        let f = File::create(&path).map_err(|e| BeltramiError::io(&path, e).at_stage("io"))?;
        Ok((path, BufWriter::new(f)))
    }

    fn chart(&self) -> Result<NormalChart> {
        Ok(exp_chart(S3Point::new(self.config.chart.base).map_err(|e| e.at_stage("config"))?))
    }

    /// Reads the descriptor named by the config.
    pub fn load_field(&self) -> Result<LoadedField> {
        let path = self.config.field_path();
        let doc = Document::read(&path).map_err(|e| e.at_stage("io"))?;
        doc.field.to_field().map_err(|e| e.at_stage("descriptor"))
    }
}

fn flush(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| BeltramiError::io(path, e).at_stage("io"))
}

fn t3_source(cfg: &PipelineConfig) -> T3Source {
    match &cfg.torus.atoms {
        Some(entries) => T3Source::Atoms(PlaneWaveAtomField {
            atoms: entries
                .iter()
                .map(|a| PlaneWaveAtom {
                    xi: a.xi,
                    c: std::array::from_fn(|i| num_complex::Complex64::new(a.c_re[i], a.c_im[i])),
                })
                .collect(),
        }),
        None => T3Source::Reference {
            reference: cfg.reference.clone(),
            sphere_cells: cfg.torus.sphere_cells,
            fb_degree: cfg.fit.fb_degree,
        },
    }
}

fn degree_u32(v: u64) -> Result<u32> {
    u32::try_from(v).map_err(|_| BeltramiError::Config(format!("degree {v} is too large")))
}

pub fn cmd_build(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let lambda = cfg.require_lambda().map_err(|e| e.at_stage("config"))?;
    match cfg.manifold {
        Manifold::S3 => {
            let base = S3Point::new(cfg.chart.base).map_err(|e| e.at_stage("config"))?;
            let b = build_s3(&cfg.reference, &cfg.fit, degree_u32(lambda).map_err(|e| e.at_stage("config"))?, base, cfg.seed)?;
            if !(b.eigen.relative <= BUILD_EIGEN_TOLERANCE) {
                return Err(BeltramiError::Invariant {
                    check: "relative eigen residual",
                    value: b.eigen.relative,
                    bound: BUILD_EIGEN_TOLERANCE,
                }
                .at_stage("lift"));
            }
            let files = vec![
                ctx.write_descriptor("field.json", (&b.field).into())?,
                ctx.write_descriptor("atoms.json", (&b.fit.field).into())?,
                ctx.write_report(
                    "build_report.json",
                    &json!({
                        "manifold": "s3",
                        "Lambda": b.field.degree,
                        "eigenvalue": b.field.eigenvalue(),
                        "centers": b.field.centers.len(),
                        "eigen_check": b.eigen,
                        "fit": b.fit.report,
                        "fit_sup_error": b.fit.report.achieved_sup_error(),
                    }),
                )?,
            ];
            Ok(Outcome {
                files,
                summary: format!(
                    "s3 Lambda={} centers={} eigen residual {:.3e} fit error {:.3e}",
                    b.field.degree,
                    b.field.centers.len(),
                    b.eigen.relative,
                    b.fit.report.achieved_sup_error()
                ),
            })
        }
        Manifold::T3 => {
            let b = build_t3(&t3_source(cfg), lambda)?;
            let files = vec![
                ctx.write_descriptor("field.json", (&b.field).into())?,
                ctx.write_report(
                    "build_report.json",
                    &json!({
                        "manifold": "t3",
                        "Lambda": b.field.eigenvalue(),
                        "norm2": b.field.norm2(),
                        "lattice_points": b.lattice_points,
                        "modes": b.field.modes().len(),
                        "mode_residuals": b.modes,
                        "snapping": b.snapping,
                        "fit_sup_error": b.fit_error,
                    }),
                )?,
            ];
            Ok(Outcome {
                files,
                summary: format!(
                    "t3 Lambda={} lattice={} modes={} max eigen residual {:.3e} max displacement {:.3e}",
                    lambda,
                    b.lattice_points,
                    b.field.modes().len(),
                    b.modes.max_eigen_residual,
                    b.snapping.max_displacement
                ),
            })
        }
    }
}

/// Field values at grid points, in the coordinates selected by `rescaled`.
pub fn eval_points(field: &LoadedField, chart: &NormalChart, rescaled: bool, points: &[[f64; 3]]) -> Result<Vec<[f64; 3]>> {
    match field {
        LoadedField::S3(u) => {
            points
                .par_iter()
                .map(|&x| {
                    if rescaled {
                        pushforward_rescale(u, chart, u.degree, x)
                    } else {
                        let q = chart.to_sphere_checked(x)?;
                        Ok(chart.push_vector(x, S3Field::eval(u, q)))
                    }
                })
                .collect()
        }
        LoadedField::T3(u) => {
            let r = u.rescaled();
            Ok(points.par_iter().map(|&x| if rescaled { r.eval(x) } else { u.eval(x) }).collect())
        }
        LoadedField::Bessel(w) => Ok(points.par_iter().map(|&x| w.eval(x)).collect()),
        LoadedField::PlaneWaves(w) => Ok(points.par_iter().map(|&x| w.eval(x)).collect()),
    }
}

pub fn cmd_eval(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let field = ctx.load_field()?;
    let grid = cfg.eval.grid;
    let values = eval_points(&field, &ctx.chart()?, cfg.eval.rescaled, &grid.points()).map_err(|e| e.at_stage("eval"))?;
    let mut files = Vec::new();
    for fmt in &cfg.output.formats {
        match fmt {
            Format::Csv => {
                let (p, mut w) = ctx.create("eval.csv")?;
                write_grid_csv(&mut w, &grid, &values, &ctx.header()).map_err(|e| e.at_stage("io"))?;
                flush(&p, w)?;
                files.push(p);
            }
            Format::Vtk => {
                let (p, mut w) = ctx.create("eval.vtk")?;
                write_vtk(&mut w, &ctx.provenance.summary(), &grid, "u", &values).map_err(|e| e.at_stage("io"))?;
                flush(&p, w)?;
                files.push(p);
            }
        }
    }
    let sup = values.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(0.0, f64::max);
    Ok(Outcome { files, summary: format!("{} grid of {} points, sup |u| {:.6e}", field.kind(), values.len(), sup) })
}

/// Runs `f` on the flow of `field` in the configured space.
fn with_flow<R>(field: &LoadedField, chart: &NormalChart, space: Option<FlowSpace>, f: impl FnOnce(FlowField<'_>) -> Result<R>) -> Result<R> {
    let bad = |what: &str| Err(BeltramiError::Config(format!("{what} fields cannot be traced in the {space:?} space")).at_stage("config"));
    match field {
        LoadedField::S3(u) => match space.unwrap_or(FlowSpace::Chart) {
            FlowSpace::Chart => f(FlowField::R3(&RescaledPushforward { field: u, chart: *chart, degree: u.degree })),
            FlowSpace::Sphere => f(FlowField::S3(u)),
            FlowSpace::Torus => bad("s3"),
        },
        LoadedField::T3(u) => match space.unwrap_or(FlowSpace::Torus) {
            FlowSpace::Torus => f(FlowField::T3(u)),
            FlowSpace::Chart => f(FlowField::R3(&u.rescaled())),
            FlowSpace::Sphere => bad("t3"),
        },
        LoadedField::Bessel(w) => match space.unwrap_or(FlowSpace::Chart) {
            FlowSpace::Chart => f(FlowField::R3(w)),
            _ => bad("atom"),
        },
        LoadedField::PlaneWaves(w) => match space.unwrap_or(FlowSpace::Chart) {
            FlowSpace::Chart => f(FlowField::R3(w)),
            _ => bad("atom"),
        },
    }
}

pub fn cmd_trace(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let dynamics = &cfg.dynamics;
    if dynamics.seeds.is_empty() {
        return Err(BeltramiError::Config("dynamics.seeds is empty".into()).at_stage("config"));
    }
    let field = ctx.load_field()?;
    let opts = dynamics.trace_options();
    let trajectories = with_flow(&field, &ctx.chart()?, dynamics.space, |flow| {
        dynamics
            .seeds
            .par_iter()
            .map(|x0| trace_field_line(flow, x0, dynamics.time, &opts))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.at_stage("dynamics"))
    })?;
    let mut files = Vec::new();
    let mut stats = Vec::new();
    for (i, traj) in trajectories.iter().enumerate() {
        let (p, mut w) = ctx.create(&format!("trace_{i}.csv"))?;
        write_trajectory_csv(&mut w, traj, &ctx.header()).map_err(|e| e.at_stage("io"))?;
        flush(&p, w)?;
        files.push(p);
        stats.push(json!({ "seed": i, "samples": traj.samples.len(), "end_time": traj.last().t, "stats": traj.stats, "diagnostic": traj.diagnostic }));
    }
    files.push(ctx.write_report("trace_report.json", &stats)?);
    if let Some((i, t)) = trajectories.iter().enumerate().find(|(_, t)| !t.completed()) {
        return Err(BeltramiError::Precondition(format!(
            "seed {i} stopped at t = {}: {}",
            t.last().t,
            t.diagnostic.as_deref().unwrap_or("")
        ))
        .at_stage("dynamics"));
    }
    Ok(Outcome { files, summary: format!("{} trajectories to t = {}", trajectories.len(), dynamics.time) })
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// The configured section in a space of dimension `dim`.
pub fn section_spec(cfg: &PipelineConfig, dim: usize) -> Result<SectionSpec> {
    let s = &cfg.dynamics.section;
    let point = if s.point.is_empty() { vec![0.0; dim] } else { s.point.clone() };
    let spec = match (&s.axis2, dim) {
        (None, 3) => {
            let arr = |v: &[f64], what: &str| -> Result<[f64; 3]> {
                v.try_into().map_err(|_| BeltramiError::Config(format!("dynamics.section.{what} needs 3 coordinates")))
            };
            SectionSpec::plane(arr(&point, "point")?, arr(&s.normal, "normal")?, arr(&s.axis, "axis")?)?
        }
        (Some(axis2), _) => SectionSpec { point, normal: unit(&s.normal), axes: [unit(&s.axis), unit(axis2)], half_plane: false },
        (None, _) => return Err(BeltramiError::Config("dynamics.section.axis2 is required outside R^3".into())),
    };
    let spec = if s.half_plane { spec.with_half_plane() } else { spec };
    spec.validate(dim)?;
    Ok(spec)
}

#[derive(Debug, Clone, Serialize)]
struct SeedReport {
    seed: usize,
    start: [f64; 2],
    returns: usize,
    closed_orbit: Option<ClosedOrbit>,
}

#[derive(Debug, Clone, Serialize)]
struct TubeReport {
    center: [f64; 2],
    fixed_point: Option<FixedPoint>,
    jacobian: Option<[[f64; 2]; 2]>,
    ring_seeds: usize,
    initial_radius: f64,
    max_radius: f64,
    ratio: f64,
}

pub fn cmd_section(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let sc = &cfg.dynamics.section;
    let field = ctx.load_field()?;
    let opts = SectionOptions { trace: cfg.dynamics.trace_options(), max_time: sc.max_time, min_transversality: sc.min_transversality };
    let (sec, tube) = with_flow(&field, &ctx.chart()?, cfg.dynamics.space, |flow| {
        let spec = section_spec(cfg, flow.dim()).map_err(|e| e.at_stage("config"))?;
        let mut seeds: Vec<[f64; 2]> = Vec::new();
        let mut tube = None;
        if let Some(a) = &sc.annulus {
            let fixed = if a.newton {
                Some(find_fixed_point(flow, &spec, a.center, &opts, a.newton_step, a.newton_iterations).map_err(|e| e.at_stage("section"))?)
            } else {
                None
            };
            let center = fixed.as_ref().map_or(a.center, |f| f.s);
            let (ring, jacobian) = match a.shape {
                AnnulusShape::Ellipse => {
                    let jac = return_map_jacobian(flow, &spec, center, &opts, a.jacobian_step).map_err(|e| e.at_stage("section"))?;
                    (invariant_ellipse_seeds(&jac, center, a.radius, a.count).map_err(|e| e.at_stage("section"))?, Some(jac))
                }
                AnnulusShape::Circle => {
                    let ring = (0..a.count)
                        .map(|n| {
                            let th = std::f64::consts::TAU * n as f64 / a.count as f64;
                            [center[0] + a.radius * th.cos(), center[1] + a.radius * th.sin()]
                        })
                        .collect();
                    (ring, None)
                }
            };
            seeds.extend(&ring);
            seeds.push(center);
            tube = Some(TubeReport {
                center,
                fixed_point: fixed,
                jacobian,
                ring_seeds: ring.len(),
                initial_radius: 0.0,
                max_radius: 0.0,
                ratio: 0.0,
            });
        }
        seeds.extend(&sc.seeds);
        if seeds.is_empty() {
            return Err(BeltramiError::Config("no section seeds: set dynamics.section.seeds or annulus".into()).at_stage("config"));
        }
        let lifted: Vec<Vec<f64>> = seeds.iter().map(|s| spec.lift(*s)).collect();
        let sec = poincare_section(flow, &spec, &lifted, sc.returns, &opts).map_err(|e| e.at_stage("section"))?;
        Ok((sec, tube))
    })?;
    let tube = tube.map(|mut t| {
        let ring = 0..t.ring_seeds;
        t.initial_radius = ring.clone().map(|i| tube_radius_point(sec.spec.coords(&sec.seeds[i]), t.center)).fold(0.0, f64::max);
        t.max_radius = ring.map(|i| tube_radius(&sec.crossings[i], t.center)).fold(t.initial_radius, f64::max);
        t.ratio = t.max_radius / t.initial_radius;
        t
    });
    let seeds: Vec<SeedReport> = sec
        .seeds
        .iter()
        .zip(&sec.crossings)
        .enumerate()
        .map(|(i, (x, cs))| {
            let start = sec.spec.coords(x);
            SeedReport { seed: i, start, returns: cs.len(), closed_orbit: detect_closed_orbit(cs, Some(start), sc.closure_threshold, sc.min_returns) }
        })
        .collect();
    let (p, mut w) = ctx.create("section.csv")?;
    write_section_csv(&mut w, &sec, &ctx.header()).map_err(|e| e.at_stage("io"))?;
    flush(&p, w)?;
    let closed = seeds.iter().filter(|s| s.closed_orbit.is_some()).count();
    let summary = match &tube {
        Some(t) => format!("{} seeds x {} returns, tube ratio {:.4}, {closed} closed", seeds.len(), sc.returns, t.ratio),
        None => format!("{} seeds x {} returns, {closed} closed", seeds.len(), sc.returns),
    };
    let report = ctx.write_report("section_report.json", &json!({ "spec": sec.spec, "returns": sc.returns, "seeds": seeds, "tube": tube }))?;
    Ok(Outcome { files: vec![p, report], summary })
}

fn tube_radius_point(s: [f64; 2], c: [f64; 2]) -> f64 {
    (s[0] - c[0]).hypot(s[1] - c[1])
}

pub fn cmd_norms(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let field = ctx.load_field()?;
    let chart = ctx.chart()?;
    let v = reference_beltrami(&cfg.reference).map_err(|e| e.at_stage("reference"))?;
    let region = Ball { center: [0.0; 3], radius: cfg.norms.radius };
    let n = &cfg.norms;
    let report = match &field {
        LoadedField::S3(u) => {
            let view = RescaledPushforward { field: u, chart, degree: u.degree };
            sup_error_norm(&view, v.as_ref(), region, n.order, n.grid_n)
        }
        LoadedField::T3(u) => sup_error_norm(&u.rescaled(), v.as_ref(), region, n.order, n.grid_n),
        LoadedField::Bessel(w) => sup_error_norm(w, v.as_ref(), region, n.order, n.grid_n),
        LoadedField::PlaneWaves(w) => sup_error_norm(w, v.as_ref(), region, n.order, n.grid_n),
    }
    .map_err(|e| e.at_stage("norms"))?;
    let path = ctx.write_report("norms.json", &json!({ "field": field.kind(), "error": report }))?;
    Ok(Outcome { files: vec![path], summary: format!("C^{} error {:.6e} ({:?})", report.order, report.aggregate, report.derivatives) })
}

pub fn cmd_helicity(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let field = ctx.load_field()?;
    let (ratio, expected, nodes) = match &field {
        LoadedField::S3(u) => {
            (s3_helicity_ratio(u, cfg.helicity.nodes, cfg.seed).map_err(|e| e.at_stage("helicity"))?, u.eigenvalue(), Some(cfg.helicity.nodes))
        }
        LoadedField::T3(u) => (torus_helicity_ratio(u).map_err(|e| e.at_stage("helicity"))?, u.eigenvalue(), None),
        _ => return Err(BeltramiError::Precondition("helicity needs an s3 or t3 field".into()).at_stage("helicity")),
    };
    let rel = (ratio - expected).abs() / expected;
    let path = ctx.write_report("helicity.json", &json!({ "field": field.kind(), "ratio": ratio, "eigenvalue": expected, "relative_deviation": rel, "nodes": nodes }))?;
    Ok(Outcome { files: vec![path], summary: format!("helicity ratio {ratio:.12} (eigenvalue {expected})") })
}

pub fn cmd_lattice(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let radii = if cfg.lattice.radii.is_empty() { vec![cfg.require_lambda().map_err(|e| e.at_stage("config"))?] } else { cfg.lattice.radii.clone() };
    let mut entries = Vec::new();
    let mut parts = Vec::new();
    for r in radii {
        let set = enumerate_sphere_lattice(r).map_err(|e| e.at_stage("lattice"))?;
        parts.push(format!("{r}:{}", set.len()));
        entries.push(json!({
            "lambda": r,
            "norm2": set.norm2,
            "count": set.len(),
            "points": if cfg.lattice.list_points { Some(&set.points) } else { None },
        }));
    }
    let square_free = cfg.lattice.square_free.map(|[a, b]| {
        let ns = square_free_filter(a..=b);
        debug_assert!(ns.iter().all(|&n| is_square_free(n)));
        ns
    });
    let path = ctx.write_report("lattice.json", &json!({ "radii": entries, "square_free": square_free }))?;
    Ok(Outcome { files: vec![path], summary: format!("lattice counts {}", parts.join(" ")) })
}

pub fn cmd_rates(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let rc = &cfg.rates;
    let rows: Vec<(u64, f64, serde_json::Value)> = match cfg.manifold {
        Manifold::S3 => {
            let (v, fit) = fit_reference(&cfg.reference, &cfg.fit)?;
            let degrees = rc.degrees.iter().map(|&d| degree_u32(d)).collect::<Result<Vec<_>>>().map_err(|e| e.at_stage("config"))?;
            let base = S3Point::new(cfg.chart.base).map_err(|e| e.at_stage("config"))?;
            let table = rate_sweep(v.as_ref(), &fit, &degrees, base, rc.order, rc.grid_n)?;
            let ratios = halving_ratios(&table);
            debug_assert!(ratios.iter().all(|r| r.1.is_finite()));
            table.into_iter().map(|r| (r.degree as u64, r.report.per_order[rc.order], serde_json::to_value(&r.report).unwrap_or_default())).collect()
        }
        Manifold::T3 => {
            let v = reference_beltrami(&cfg.reference).map_err(|e| e.at_stage("reference"))?;
            let src = t3_source(cfg);
            rc.degrees
                .iter()
                .map(|&l| {
                    let b = build_t3(&src, l)?;
                    let r = sup_error_norm(&b.field.rescaled(), v.as_ref(), Ball::default(), rc.order, rc.grid_n).map_err(|e| e.at_stage("norms"))?;
                    Ok((l, r.per_order[rc.order], serde_json::to_value(&r)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let ratio_to_double = |d: u64, e: f64| rows.iter().find(|r| r.0 == 2 * d).map(|r| e / r.1);
    let (p, mut w) = ctx.create("rates.csv")?;
    let io = |e| BeltramiError::io(&p, e).at_stage("io");
    for line in ctx.header() {
        writeln!(w, "# {line}").map_err(io)?;
    }
    writeln!(w, "degree,error,ratio_to_double").map_err(io)?;
    let mut table = Vec::new();
    for (d, e, report) in &rows {
        let ratio = ratio_to_double(*d, *e);
        let rs = ratio.map(crate::io::fmt_f64).unwrap_or_default();
        writeln!(w, "{d},{},{rs}", crate::io::fmt_f64(*e)).map_err(io)?;
        table.push(json!({ "degree": d, "error": e, "ratio_to_double": ratio, "report": report }));
    }
    flush(&p, w)?;
    let summary = rows
        .iter()
        .map(|(d, e, _)| match ratio_to_double(*d, *e) {
            Some(r) => format!("{d}:{e:.3e} (x{r:.3})"),
            None => format!("{d}:{e:.3e}"),
        })
        .collect::<Vec<_>>()
        .join(" ");
    let report = ctx.write_report("rates.json", &json!({ "order": rc.order, "grid_n": rc.grid_n, "rows": table }))?;
    Ok(Outcome { files: vec![p, report], summary })
}
