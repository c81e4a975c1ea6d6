//! Closed-form Beltrami fields of ℝ³ (curl v = v) used as approximation targets.

use serde::{Deserialize, Serialize};

use super::sphere::solid_harmonic_jet;
use super::{FieldTag, R3Field};
use crate::error::{BeltramiError, Result};
use crate::jet::{self, Jet, Partials};
use crate::specfun::scaled_bessel;

pub const CK_DEGREE_CAP: usize = 32;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// v = (a sin z + c cos y, b sin x + a cos z, c sin y + b cos x)
    #[serde(rename = "abc")]
    Abc {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "one")]
        c: f64,
    },
    /// v = curl(ψx) + curl curl(ψx) with ψ = amplitude · j_l(r) Y_lm(ω)
    #[serde(rename = "chandrasekhar-kendall")]
    ChandrasekharKendall {
        #[serde(default = "ck_l")]
        l: usize,
        #[serde(default)]
        m: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn ck_l() -> usize {
    1
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec::ChandrasekharKendall { l: 1, m: 0, amplitude: 1.0 }
    }
}

/// Builds the reference field described by `spec`.
pub fn reference_beltrami(spec: &ReferenceSpec) -> Result<Box<dyn R3Field>> {
    match *spec {
        ReferenceSpec::Abc { a, b, c } => Ok(Box::new(AbcField { a, b, c })),
        ReferenceSpec::ChandrasekharKendall { l, m, amplitude } => Ok(Box::new(CkField::new(l, m, amplitude)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcField {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn trig_jet(order: usize, axis: usize, x0: f64, sine: bool) -> Jet {
    let mut taylor = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        let phase = if sine { k } else { k + 1 };
        let d = match phase % 4 {
            0 => x0.sin(),
            1 => x0.cos(),
            2 => -x0.sin(),
            _ => -x0.cos(),
        };
        taylor.push(d / fact);
    }
    Jet::variable(order, axis, x0).compose(&taylor)
}

impl R3Field for AbcField {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        [
            self.a * x[2].sin() + self.c * x[1].cos(),
            self.b * x[0].sin() + self.a * x[2].cos(),
            self.c * x[1].sin() + self.b * x[0].cos(),
        ]
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        let s = |axis: usize| trig_jet(order, axis, x[axis], true);
        let c = |axis: usize| trig_jet(order, axis, x[axis], false);
        let v = [
            &s(2).scale(self.a) + &c(1).scale(self.c),
            &s(0).scale(self.b) + &c(2).scale(self.a),
            &s(1).scale(self.c) + &c(0).scale(self.b),
        ];
        Ok(Partials::from_jets(&v, order))
    }

    fn max_order(&self) -> usize {
        8
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Beltrami(1.0)
    }
}

/// Chandrasekhar–Kendall field generated by ψ = amplitude · j_l(r) Y_lm(ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkField {
    pub l: usize,
    pub m: i64,
    pub amplitude: f64,
}

impl CkField {
    pub fn new(l: usize, m: i64, amplitude: f64) -> Result<Self> {
        if l == 0 || l > CK_DEGREE_CAP {
            return Err(BeltramiError::UnsupportedDegree { degree: l, cap: CK_DEGREE_CAP });
        }
        if m.unsigned_abs() as usize > l {
            return Err(BeltramiError::Precondition(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(CkField { l, m, amplitude })
    }

    /// Jet of the generating potential ψ about `x`.
    pub fn potential_jet(&self, x: [f64; 3], order: usize) -> Jet {
        let [a, b, c] = jet::coordinates(order, x);
        let s = &(&(&a * &a) + &(&b * &b)) + &(&c * &c);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        // G(s) = g_l(√s); G^{(k)} = (-1/2)^k g_{l+k}
        let mut taylor = Vec::with_capacity(order + 1);
        let mut f = 1.0;
        for k in 0..=order {
            if k > 0 {
                f *= -0.5 / k as f64;
            }
            taylor.push(f * scaled_bessel(self.l + k, r));
        }
        let radial = s.compose(&taylor);
        (&solid_harmonic_jet(self.l, self.m, order, x) * &radial).scale(self.amplitude)
    }
}

impl R3Field for CkField {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        self.partials(x, 0).map(|p| p.value()).unwrap_or([0.0; 3])
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        if order > self.max_order() {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: self.max_order() });
        }
        let psi = self.potential_jet(x, order + 2);
        let coords = jet::coordinates(order + 2, x);
        let a = [&psi * &coords[0], &psi * &coords[1], &psi * &coords[2]];
        let t = jet::curl(&a);
        let s = jet::curl(&t);
        let v = [&t[0] + &s[0], &t[1] + &s[1], &t[2] + &s[2]];
        Ok(Partials::from_jets(&v, order))
    }

    fn max_order(&self) -> usize {
        crate::jet::MAX_JET_ORDER - 2
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Beltrami(1.0)
    }
}
