use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{PoincareSection, Trajectory};
use crate::error::{BeltramiError, Result};

/// Legacy VTK readers truncate the title line here.
pub const VTK_TITLE_MAX: usize = 255;

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// Uniform grid; lower and upper corners are both sampled, x₁ varies fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub n: [usize; 3],
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lower: [-1.0; 3], upper: [1.0; 3], n: [9; 3] }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            if self.n[i] == 0 || (self.n[i] > 1 && !(self.upper[i] > self.lower[i])) {
                return Err(BeltramiError::Precondition(format!("grid axis {i} is empty or inverted")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        std::array::from_fn(|i| if self.n[i] > 1 { (self.upper[i] - self.lower[i]) / (self.n[i] - 1) as f64 } else { 0.0 })
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        let h = self.spacing();
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.n[2] {
            for j in 0..self.n[1] {
                for i in 0..self.n[0] {
                    let idx = [i, j, k];
                    // the last sample sits exactly on the upper corner
                    out.push(std::array::from_fn(|a| {
                        if idx[a] + 1 == self.n[a] && self.n[a] > 1 { self.upper[a] } else { self.lower[a] + idx[a] as f64 * h[a] }
                    }));
                }
            }
        }
        out
    }
}

fn io_err(e: std::io::Error) -> BeltramiError {
    BeltramiError::io("<output stream>", e)
}

fn comments(w: &mut dyn Write, header: &[String]) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}").map_err(io_err)?;
    }
    Ok(())
}

fn row(w: &mut dyn Write, vals: impl IntoIterator<Item = String>) -> Result<()> {
    let s: Vec<String> = vals.into_iter().collect();
    writeln!(w, "{}", s.join(",")).map_err(io_err)
}

/// `t,x1,x2,x3[,x4][,w1,w2,w3]`; winding columns appear only for torus trajectories.
pub fn write_trajectory_csv(w: &mut dyn Write, traj: &Trajectory, header: &[String]) -> Result<()> {
    comments(w, header)?;
    let first = &traj.samples[0];
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend((1..=first.x.len()).map(|i| format!("x{i}")));
    if first.winding.is_some() {
        cols.extend(["w1", "w2", "w3"].map(String::from));
    }
    row(w, cols)?;
    for s in &traj.samples {
        let mut vals = vec![fmt_f64(s.t)];
        vals.extend(s.x.iter().map(|v| fmt_f64(*v)));
        if let Some(wd) = s.winding {
            vals.extend(wd.iter().map(|v| v.to_string()));
        }
        row(w, vals)?;
    }
    Ok(())
}

/// `seed_id,return_idx,s1,s2`; return 0 is the seed itself.
pub fn write_section_csv(w: &mut dyn Write, sec: &PoincareSection, header: &[String]) -> Result<()> {
    comments(w, header)?;
    row(w, ["seed_id", "return_idx", "s1", "s2"].map(String::from))?;
    for (id, (seed, cs)) in sec.seeds.iter().zip(&sec.crossings).enumerate() {
        let s0 = sec.spec.coords(seed);
        row(w, [id.to_string(), "0".into(), fmt_f64(s0[0]), fmt_f64(s0[1])])?;
        for (r, c) in cs.iter().enumerate() {
            row(w, [id.to_string(), (r + 1).to_string(), fmt_f64(c.s[0]), fmt_f64(c.s[1])])?;
        }
    }
    Ok(())
}

fn check_len(grid: &GridSpec, values: &[[f64; 3]]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(BeltramiError::Precondition(format!("{} values for {} grid points", values.len(), grid.len())));
    }
    Ok(())
}

/// `x1,x2,x3,u1,u2,u3` in grid order.
pub fn write_grid_csv(w: &mut dyn Write, grid: &GridSpec, values: &[[f64; 3]], header: &[String]) -> Result<()> {
    check_len(grid, values)?;
    comments(w, header)?;
    row(w, ["x1", "x2", "x3", "u1", "u2", "u3"].map(String::from))?;
    for (p, v) in grid.points().iter().zip(values) {
        row(w, p.iter().chain(v).map(|c| fmt_f64(*c)))?;
    }
    Ok(())
}

/// Legacy ASCII structured points with one vector attribute.
pub fn write_vtk(w: &mut dyn Write, title: &str, grid: &GridSpec, name: &str, values: &[[f64; 3]]) -> Result<()> {
    check_len(grid, values)?;
    let title: String = title.chars().filter(|c| *c != '\n').take(VTK_TITLE_MAX).collect();
    let h = grid.spacing().map(|v| if v == 0.0 { 1.0 } else { v });
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(&title);
    out.push_str("\nASCII\nDATASET STRUCTURED_POINTS\n");
    out.push_str(&format!("DIMENSIONS {} {} {}\n", grid.n[0], grid.n[1], grid.n[2]));
    out.push_str(&format!("ORIGIN {} {} {}\n", fmt_f64(grid.lower[0]), fmt_f64(grid.lower[1]), fmt_f64(grid.lower[2])));
    out.push_str(&format!("SPACING {} {} {}\n", fmt_f64(h[0]), fmt_f64(h[1]), fmt_f64(h[2])));
    out.push_str(&format!("POINT_DATA {}\nVECTORS {name} double\n", grid.len()));
    for v in values {
        out.push_str(&format!("{} {} {}\n", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2])));
    }
    w.write_all(out.as_bytes()).map_err(io_err)
}
