//! Truncated Taylor polynomials in three variables.
//!
//! Monomials are ordered by total degree, then by descending exponent of x, then of y,
//! so the index of a multi-index does not depend on the truncation order.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

pub const MAX_JET_ORDER: usize = 10;

pub fn n_monomials(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

pub fn monomial_index(alpha: [usize; 3]) -> usize {
    let [a, b, _] = alpha;
    let d = alpha[0] + alpha[1] + alpha[2];
    d * (d + 1) * (d + 2) / 6 + (d - a) * (d - a + 1) / 2 + (d - a - b)
}

/// Multi-indices of total degree at most `order`, in storage order.
pub fn monomials(order: usize) -> &'static [[usize; 3]] {
    &tables()[order.min(MAX_JET_ORDER)].exps
}

pub fn factorial_multi(alpha: [usize; 3]) -> f64 {
    alpha.iter().map(|&k| (1..=k).map(|i| i as f64).product::<f64>()).product()
}

struct Table {
    exps: Vec<[usize; 3]>,
    mul: Vec<(u32, u32, u32)>,
    deriv: [Vec<(u32, u32, f64)>; 3],
}

fn tables() -> &'static [Table] {
    static TABLES: OnceLock<Vec<Table>> = OnceLock::new();
    TABLES.get_or_init(|| (0..=MAX_JET_ORDER).map(build_table).collect())
}

fn build_table(order: usize) -> Table {
    let mut exps = Vec::with_capacity(n_monomials(order));
    for d in 0..=order {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                exps.push([a, b, d - a - b]);
            }
        }
    }
    debug_assert!(exps.iter().enumerate().all(|(i, &e)| monomial_index(e) == i));
    let mut mul = Vec::new();
    for (i, ea) in exps.iter().enumerate() {
        let da: usize = ea.iter().sum();
        for (j, eb) in exps.iter().enumerate() {
            let db: usize = eb.iter().sum();
            if da + db <= order {
                let k = monomial_index([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]);
                mul.push((i as u32, j as u32, k as u32));
            }
        }
    }
    let mut deriv: [Vec<(u32, u32, f64)>; 3] = Default::default();
    for (i, e) in exps.iter().enumerate() {
        for (axis, list) in deriv.iter_mut().enumerate() {
            if e[axis] > 0 {
                let mut lower = *e;
                lower[axis] -= 1;
                list.push((i as u32, monomial_index(lower) as u32, e[axis] as f64));
            }
        }
    }
    Table { exps, mul, deriv }
}

/// Σ c_α h^α truncated at total degree `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    c: Vec<f64>,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_JET_ORDER, "jet order {order} above {MAX_JET_ORDER}");
        Jet { order, c: vec![0.0; n_monomials(order)] }
    }

    pub fn constant(order: usize, v: f64) -> Self {
        let mut j = Jet::zero(order);
        j.c[0] = v;
        j
    }

    /// The coordinate function x_axis expanded about a point with that coordinate `x0`.
    pub fn variable(order: usize, axis: usize, x0: f64) -> Self {
        let mut j = Jet::constant(order, x0);
        if order >= 1 {
            j.c[1 + axis] = 1.0;
        }
        j
    }

    pub fn from_coeffs(order: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), n_monomials(order));
        Jet { order, c }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, alpha: [usize; 3]) -> f64 {
        self.c.get(monomial_index(alpha)).copied().unwrap_or(0.0)
    }

    /// ∂^α at the expansion point.
    pub fn partial(&self, alpha: [usize; 3]) -> f64 {
        factorial_multi(alpha) * self.coeff(alpha)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { order, c: self.c[..n_monomials(order)].to_vec() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { order: self.order, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zero(order);
        for &(i, j, k) in &tables()[order].mul {
            out.c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        out
    }

    /// ∂/∂x_axis; the result is exact to one order less.
    pub fn deriv(&self, axis: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = Jet::zero(self.order - 1);
        for &(from, to, f) in &tables()[self.order].deriv[axis] {
            if (to as usize) < out.c.len() {
                out.c[to as usize] += f * self.c[from as usize];
            }
        }
        out
    }

    /// F(self) where `taylor[k] = F^{(k)}(value)/k!`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = Jet::constant(self.order, taylor.first().copied().unwrap_or(0.0));
        let mut power = Jet::constant(self.order, 1.0);
        for &a in taylor.iter().take(self.order + 1).skip(1) {
            power = power.mul(&delta);
            out += &power.scale(a);
        }
        out
    }

    pub fn laplacian(&self) -> Jet {
        let mut out = self.deriv(0).deriv(0);
        out += &self.deriv(1).deriv(1);
        out += &self.deriv(2).deriv(2);
        out
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            self.c.truncate(n_monomials(rhs.order));
            self.order = rhs.order;
        }
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out += &rhs.scale(-1.0);
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        Jet::mul(self, rhs)
    }
}

pub type VectorJet = [Jet; 3];

pub fn curl(v: &VectorJet) -> VectorJet {
    [
        &v[2].deriv(1) - &v[1].deriv(2),
        &v[0].deriv(2) - &v[2].deriv(0),
        &v[1].deriv(0) - &v[0].deriv(1),
    ]
}

pub fn divergence(v: &VectorJet) -> Jet {
    let mut d = v[0].deriv(0);
    d += &v[1].deriv(1);
    d += &v[2].deriv(2);
    d
}

/// Jets of the coordinate functions about `x0`.
pub fn coordinates(order: usize, x0: [f64; 3]) -> VectorJet {
    [Jet::variable(order, 0, x0[0]), Jet::variable(order, 1, x0[1]), Jet::variable(order, 2, x0[2])]
}

/// All partials ∂^α v_i up to `order` at one point, indexed by `monomial_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub order: usize,
    pub values: Vec<[f64; 3]>,
}

impl Partials {
    pub fn zero(order: usize) -> Self {
        Partials { order, values: vec![[0.0; 3]; n_monomials(order)] }
    }

    pub fn from_jets(v: &VectorJet, order: usize) -> Self {
        let mut p = Partials::zero(order);
        for (k, alpha) in monomials(order).iter().enumerate() {
            for i in 0..3 {
                p.values[k][i] = v[i].partial(*alpha);
            }
        }
        p
    }

    pub fn get(&self, alpha: [usize; 3]) -> [f64; 3] {
        self.values[monomial_index(alpha)]
    }

    pub fn value(&self) -> [f64; 3] {
        self.values[0]
    }

    /// curl from first partials.
    pub fn curl(&self) -> [f64; 3] {
        let d = |axis: usize, comp: usize| {
            let mut a = [0; 3];
            a[axis] = 1;
            self.get(a)[comp]
        };
        [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
    }
}
