//! C^m sup-norms of field differences over balls, plus divergence checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BeltramiError, Result};
use crate::jet::{monomials, Partials};
use crate::r3_fields::{ball_grid, R3Field};
use crate::s3_construct::{fd_divergence, S3Field};

pub const DEFAULT_NORM_GRID: usize = 33;
pub const FD_STEP: f64 = 1e-3;
pub const MAX_NORM_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Default for Ball {
    fn default() -> Self {
        Ball { center: [0.0; 3], radius: 1.0 }
    }
}

impl Ball {
    /// grid_n³ lattice on the bounding cube, restricted to the ball.
    pub fn grid(&self, grid_n: usize) -> Vec<[f64; 3]> {
        ball_grid(grid_n, self.radius)
            .into_iter()
            .map(|x| [x[0] + self.center[0], x[1] + self.center[1], x[2] + self.center[2]])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    Analytic,
    /// at least one field differentiated by the fourth-order central stencil
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub region: Ball,
    pub order: usize,
    pub grid_n: usize,
    pub points: usize,
    /// per_order[k] = sup over the grid and |α| = k of max_i |∂^α(a − b)_i|
    pub per_order: Vec<f64>,
    /// C^m aggregate, the max of per_order
    pub aggregate: f64,
    pub derivatives: DerivativeSource,
    pub fd_step: Option<f64>,
}

/// Weights of fourth-order central stencils on offsets −3..=3 for derivative orders 0..=4.
fn stencil(order: usize) -> ([f64; 7], i32) {
    match order {
        0 => ([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 0),
        1 => ([0.0, 1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0, 0.0], 1),
        2 => ([0.0, -1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0, 0.0], 2),
        3 => ([1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0], 3),
        _ => ([-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0], 4),
    }
}

/// All partials up to `order` by tensor-product central differences of step h.
pub fn fd_partials(field: &dyn R3Field, x: [f64; 3], order: usize, h: f64) -> Result<Partials> {
    if order > MAX_NORM_ORDER {
        return Err(BeltramiError::DerivativeOrder { requested: order, available: MAX_NORM_ORDER });
    }
    let cache: std::collections::HashMap<[i32; 3], [f64; 3]> = {
        let r = if order <= 2 { 2 } else { 3 };
        let mut m = std::collections::HashMap::new();
        for alpha in monomials(order) {
            let reach: [i32; 3] = alpha.map(|a| if a == 0 { 0 } else { r });
            for i in -reach[0]..=reach[0] {
                for j in -reach[1]..=reach[1] {
                    for k in -reach[2]..=reach[2] {
                        m.entry([i, j, k]).or_insert_with(|| {
                            field.eval([x[0] + i as f64 * h, x[1] + j as f64 * h, x[2] + k as f64 * h])
                        });
                    }
                }
            }
        }
        m
    };
    let mut p = Partials::zero(order);
    for (slot, alpha) in p.values.iter_mut().zip(monomials(order)) {
        let sts = alpha.map(stencil);
        let mut acc = [0.0; 3];
        for i in -3i32..=3 {
            let wi = sts[0].0[(i + 3) as usize];
            if wi == 0.0 {
                continue;
            }
            for j in -3i32..=3 {
                let wj = sts[1].0[(j + 3) as usize];
                if wj == 0.0 {
                    continue;
                }
                for k in -3i32..=3 {
                    let wk = sts[2].0[(k + 3) as usize];
                    if wk == 0.0 {
                        continue;
                    }
                    let v = cache[&[i, j, k]];
                    for c in 0..3 {
                        acc[c] += wi * wj * wk * v[c];
                    }
                }
            }
        }
        let scale = h.powi(sts[0].1 + sts[1].1 + sts[2].1);
        *slot = acc.map(|a| a / scale);
    }
    Ok(p)
}

fn partials_of(field: &dyn R3Field, x: [f64; 3], order: usize, use_fd: bool) -> Result<Partials> {
    if use_fd {
        fd_partials(field, x, order, FD_STEP)
    } else {
        field.partials(x, order)
    }
}

/// sup over a grid_n³ lattice in the ball of |∂^α(a − b)|, |α| ≤ m; analytic partials unless a
/// field lacks them, in which case the report is labeled as finite-difference.
pub fn sup_error_norm(a: &dyn R3Field, b: &dyn R3Field, region: Ball, m: usize, grid_n: usize) -> Result<ErrorReport> {
    if m > MAX_NORM_ORDER {
        return Err(BeltramiError::DerivativeOrder { requested: m, available: MAX_NORM_ORDER });
    }
    if !(region.radius > 0.0) || grid_n == 0 {
        return Err(BeltramiError::Precondition(format!("empty region (radius {}, grid {grid_n})", region.radius)));
    }
    let (fd_a, fd_b) = (a.max_order() < m, b.max_order() < m);
    let pts = region.grid(grid_n);
    let monos = monomials(m);
    let rows: Result<Vec<Vec<f64>>> = pts
        .par_iter()
        .map(|&x| {
            let pa = partials_of(a, x, m, fd_a)?;
            let pb = partials_of(b, x, m, fd_b)?;
            let mut row = vec![0.0f64; m + 1];
            for (k, alpha) in monos.iter().enumerate() {
                let d = (0..3).map(|i| (pa.values[k][i] - pb.values[k][i]).abs()).fold(0.0, f64::max);
                let o = alpha[0] + alpha[1] + alpha[2];
                row[o] = row[o].max(if d.is_nan() { f64::INFINITY } else { d });
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;
    let per_order: Vec<f64> = (0..=m).map(|o| rows.iter().map(|r| r[o]).fold(0.0, f64::max)).collect();
    let aggregate = per_order.iter().copied().fold(0.0, f64::max);
    let fd = fd_a || fd_b;
    Ok(ErrorReport {
        region,
        order: m,
        grid_n,
        points: pts.len(),
        per_order,
        aggregate,
        derivatives: if fd { DerivativeSource::FiniteDifference } else { DerivativeSource::Analytic },
        fd_step: fd.then_some(FD_STEP),
    })
}

/// max |div u| over the samples, analytic when the field has first partials.
pub fn divergence_residual(field: &dyn R3Field, samples: &[[f64; 3]]) -> Result<f64> {
    let fd = field.max_order() < 1;
    samples
        .par_iter()
        .map(|&x| {
            let p = partials_of(field, x, 1, fd)?;
            Ok((p.get([1, 0, 0])[0] + p.get([0, 1, 0])[1] + p.get([0, 0, 1])[2]).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// max |div u| over points of S³ by differences along the Hopf great circles.
pub fn s3_divergence_residual(field: &dyn S3Field, samples: &[[f64; 4]], h: f64) -> f64 {
    samples.par_iter().map(|&p| fd_divergence(field, p, h).abs()).reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::monomial_index;
    use crate::r3_fields::{AbcField, CkField, FieldTag};

    struct Shifted<'a> {
        inner: &'a dyn R3Field,
        delta: f64,
    }
    impl R3Field for Shifted<'_> {
        fn eval(&self, x: [f64; 3]) -> [f64; 3] {
            self.inner.eval(x).map(|v| v + self.delta)
        }
        fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
            let mut p = self.inner.partials(x, order)?;
            p.values[0] = p.values[0].map(|v| v + self.delta);
            Ok(p)
        }
        fn max_order(&self) -> usize {
            self.inner.max_order()
        }
    }

    /// Value-only wrapper forcing the finite-difference path.
    struct ValuesOnly<'a>(&'a dyn R3Field);
    impl R3Field for ValuesOnly<'_> {
        fn eval(&self, x: [f64; 3]) -> [f64; 3] {
            self.0.eval(x)
        }
        fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
            if order > 0 {
                return Err(BeltramiError::DerivativeOrder { requested: order, available: 0 });
            }
            Ok(Partials { order: 0, values: vec![self.0.eval(x)] })
        }
        fn max_order(&self) -> usize {
            0
        }
        fn tag(&self) -> FieldTag {
            FieldTag::Other
        }
    }

    #[test]
    fn identical_fields_give_zero() {
        let v = CkField::new(1, 0, 1.0).unwrap();
        let r = sup_error_norm(&v, &v, Ball::default(), 3, 9).unwrap();
        assert!(r.per_order.iter().all(|&e| e == 0.0));
        assert_eq!(r.derivatives, DerivativeSource::Analytic);
        assert!(r.fd_step.is_none());
    }

    #[test]
    fn constant_shift_only_changes_order_zero() {
        let v = AbcField { a: 1.0, b: 0.7, c: 0.4 };
        let w = Shifted { inner: &v, delta: 0.125 };
        let r = sup_error_norm(&v, &w, Ball::default(), 2, 9).unwrap();
        assert!((r.per_order[0] - 0.125).abs() < 1e-15);
        assert!(r.per_order[1] == 0.0 && r.per_order[2] == 0.0);
        assert!(r.per_order[0] <= r.aggregate);
    }

    #[test]
    fn fd_fallback_is_flagged_and_accurate() {
        let v = CkField::new(2, 1, 1.0).unwrap();
        let vo = ValuesOnly(&v);
        let r = sup_error_norm(&v, &vo, Ball::default(), 2, 5).unwrap();
        assert_eq!(r.derivatives, DerivativeSource::FiniteDifference);
        assert_eq!(r.fd_step, Some(FD_STEP));
        assert!(r.aggregate < 1e-7, "{:?}", r.per_order);
        let x = [0.2, -0.3, 0.1];
        let exact = v.partials(x, 4).unwrap();
        let fd = fd_partials(&vo, x, 4, 1e-2).unwrap();
        for alpha in monomials(4) {
            let k = monomial_index(*alpha);
            for c in 0..3 {
                assert!((exact.values[k][c] - fd.values[k][c]).abs() < 1e-5, "{alpha:?}");
            }
        }
    }

    #[test]
    fn order_cap() {
        let v = CkField::new(1, 0, 1.0).unwrap();
        assert!(matches!(sup_error_norm(&v, &v, Ball::default(), 5, 5), Err(BeltramiError::DerivativeOrder { .. })));
    }

    #[test]
    fn divergence_checks_discriminate() {
        let v = CkField::new(3, 2, 1.0).unwrap();
        let pts = Ball::default().grid(7);
        assert!(divergence_residual(&v, &pts).unwrap() < 1e-12);
        assert!(divergence_residual(&ValuesOnly(&v), &pts).unwrap() < 1e-8);
        // x ↦ x has divergence 3
        let radial = |p: [f64; 4]| {
            let a = [0.0, 0.0, 1.0, 0.0];
            let d: f64 = (0..4).map(|i| a[i] * p[i]).sum();
            std::array::from_fn::<f64, 4, _>(|k| a[k] - d * p[k])
        };
        let s = [[0.5, 0.5, 0.5, 0.5]];
        assert!(s3_divergence_residual(&radial, &s, 1e-3) > 1.0);
        let h = crate::s3_construct::LinearHopf([0.3, -0.1, 0.7]);
        assert!(s3_divergence_residual(&h, &s, 1e-3) < 1e-10);
    }
}
