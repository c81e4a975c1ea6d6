//! Degree-Λ harmonics Y(p) = Σ cₙ C_Λ(p·pₙ) and their Hopf-frame derivatives.

use serde::{Deserialize, Serialize};

use super::chart::NormalChart;
use super::{dot4, matvec, HOPF};
use crate::error::{BeltramiError, Result};
use crate::r3_fields::BesselAtomField;
use crate::specfun::GegenbauerEvaluator;

pub const MAX_WORD_ORDER: usize = 3;

#[inline]
fn word_offset(len: usize) -> usize {
    (3usize.pow(len as u32) - 1) / 2
}

fn word_count(order: usize) -> usize {
    word_offset(order + 1)
}

/// Index of the word w = (w₁, …, w_r), letters in 0..3.
pub fn word_index(w: &[usize]) -> usize {
    word_offset(w.len()) + w.iter().fold(0, |acc, &l| 3 * acc + l)
}

/// Iterated frame derivatives D[w] = h_{w₁}(h_{w₂}(… h_{w_r} F)) for all words of length ≤ order.
/// The last letter acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct WordJet {
    order: usize,
    d: Vec<f64>,
}

impl WordJet {
    pub fn zero(order: usize) -> Self {
        WordJet { order, d: vec![0.0; word_count(order)] }
    }

    pub fn constant(order: usize, v: f64) -> Self {
        let mut j = WordJet::zero(order);
        j.d[0] = v;
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn get(&self, w: &[usize]) -> f64 {
        debug_assert!(w.len() <= self.order);
        self.d[word_index(w)]
    }

    /// Jet of h_j F, one order lower.
    pub fn derivative(&self, j: usize) -> WordJet {
        assert!(self.order >= 1);
        let order = self.order - 1;
        let mut d = Vec::with_capacity(word_count(order));
        for len in 0..=order {
            let base = word_offset(len + 1);
            for code in 0..3usize.pow(len as u32) {
                d.push(self.d[base + 3 * code + j]);
            }
        }
        WordJet { order, d }
    }

    pub fn truncate(&self, order: usize) -> WordJet {
        let order = order.min(self.order);
        WordJet { order, d: self.d[..word_count(order)].to_vec() }
    }

    pub fn scale(&self, s: f64) -> WordJet {
        WordJet { order: self.order, d: self.d.iter().map(|v| v * s).collect() }
    }

    /// self += s·other on the common order.
    pub fn axpy(&mut self, s: f64, other: &WordJet) {
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        for (a, b) in self.d.iter_mut().zip(&other.d) {
            *a += s * b;
        }
    }

    /// Δ F = Σᵢ hᵢ hᵢ F.
    pub fn laplacian(&self) -> f64 {
        (0..3).map(|i| self.get(&[i, i])).sum()
    }
}

/// Hᵢp, HᵢHⱼp, HᵢHⱼH_k p at a fixed point.
struct Tower {
    p: [f64; 4],
    a: [[f64; 4]; 3],
    b: [[[f64; 4]; 3]; 3],
    c: Option<Box<[[[[f64; 4]; 3]; 3]; 3]>>,
}

impl Tower {
    fn new(p: [f64; 4], order: usize) -> Self {
        let a: [[f64; 4]; 3] = std::array::from_fn(|j| matvec(&HOPF[j], p));
        let b: [[[f64; 4]; 3]; 3] = std::array::from_fn(|x| std::array::from_fn(|y| matvec(&HOPF[x], a[y])));
        let c = (order >= 3).then(|| {
            Box::new(std::array::from_fn(|x| std::array::from_fn(|y| std::array::from_fn(|z| matvec(&HOPF[x], b[y][z])))))
        });
        Tower { p, a, b, c }
    }

    /// Word values of C_Λ(p·q) for one center, written into `out`.
    fn kernel_words(&self, ev: &GegenbauerEvaluator, q: [f64; 4], order: usize, out: &mut [f64]) {
        let t = dot4(self.p, q);
        let cd = ev.derivs(t, order);
        out[0] = cd[0];
        if order == 0 {
            return;
        }
        let a: [f64; 3] = std::array::from_fn(|j| dot4(self.a[j], q));
        for j in 0..3 {
            out[1 + j] = cd[1] * a[j];
        }
        if order == 1 {
            return;
        }
        let b: [[f64; 3]; 3] = std::array::from_fn(|x| std::array::from_fn(|y| dot4(self.b[x][y], q)));
        // D[(k, j)] = C'' a_k a_j + C' b_jk
        for k in 0..3 {
            for j in 0..3 {
                out[4 + 3 * k + j] = cd[2] * a[k] * a[j] + cd[1] * b[j][k];
            }
        }
        if order == 2 {
            return;
        }
        let c = self.c.as_ref().expect("tower built for order 3");
        // D[(x, y, z)] = C''' a_x a_y a_z + C'' (b_yx a_z + a_y b_zx + a_x b_zy) + C' c_zyx
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    out[13 + 9 * x + 3 * y + z] = cd[3] * a[x] * a[y] * a[z]
                        + cd[2] * (b[y][x] * a[z] + a[y] * b[z][x] + a[x] * b[z][y])
                        + cd[1] * dot4(c[z][y][x], q);
                }
            }
        }
    }
}

/// Word jets of M harmonics sharing centers, Y_m(p) = Σₙ wₙ[m] C_Λ(p·pₙ).
pub(crate) fn harmonic_jets<const M: usize>(
    ev: &GegenbauerEvaluator,
    centers: &[[f64; 4]],
    weights: &[[f64; M]],
    p: [f64; 4],
    order: usize,
) -> [WordJet; M] {
    assert!(order <= MAX_WORD_ORDER);
    let tower = Tower::new(p, order);
    let n = word_count(order);
    let mut acc: [Vec<f64>; M] = std::array::from_fn(|_| vec![0.0; n]);
    let mut buf = vec![0.0; n];
    for (q, w) in centers.iter().zip(weights) {
        if w.iter().all(|v| *v == 0.0) {
            continue;
        }
        tower.kernel_words(ev, *q, order, &mut buf);
        for m in 0..M {
            if w[m] != 0.0 {
                for (a, b) in acc[m].iter_mut().zip(&buf) {
                    *a += w[m] * b;
                }
            }
        }
    }
    acc.map(|d| WordJet { order, d })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S3HarmonicSum {
    pub degree: u32,
    pub centers: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl S3HarmonicSum {
    pub fn new(degree: u32, centers: Vec<[f64; 4]>, weights: Vec<f64>) -> Result<Self> {
        if centers.len() != weights.len() {
            return Err(BeltramiError::Precondition(format!(
                "{} centers but {} weights",
                centers.len(),
                weights.len()
            )));
        }
        Ok(S3HarmonicSum { degree, centers, weights })
    }

    pub fn zero(degree: u32) -> Self {
        S3HarmonicSum { degree, centers: Vec::new(), weights: Vec::new() }
    }

    pub fn evaluator(&self) -> GegenbauerEvaluator {
        GegenbauerEvaluator::new(self.degree)
    }

    pub fn eval(&self, p: [f64; 4]) -> f64 {
        let ev = self.evaluator();
        self.centers.iter().zip(&self.weights).map(|(q, w)| w * ev.eval(dot4(p, *q))).sum()
    }

    /// Frame derivatives up to `order` ≤ 3.
    pub fn jet(&self, p: [f64; 4], order: usize) -> Result<WordJet> {
        if order > MAX_WORD_ORDER {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: MAX_WORD_ORDER });
        }
        let w: Vec<[f64; 1]> = self.weights.iter().map(|v| [*v]).collect();
        let [j] = harmonic_jets(&self.evaluator(), &self.centers, &w, p, order);
        Ok(j)
    }

    /// Y(Ψ⁻¹(x/Λ)).
    pub fn rescaled_pullback(&self, chart: &NormalChart, x: [f64; 3]) -> f64 {
        let l = self.degree as f64;
        self.eval(chart.to_sphere(x.map(|v| v / l)))
    }
}

/// Yᵢ(p) = Σₙ cₙⁱ C_Λ(p·pₙ) with pₙ = Ψ⁻¹(xₙ/Λ); `component` is 0-based.
pub fn lift_harmonic(atoms: &BesselAtomField, component: usize, degree: u32, chart: &NormalChart) -> Result<S3HarmonicSum> {
    if component > 2 {
        return Err(BeltramiError::Precondition(format!("component {component} not in 0..3")));
    }
    let (centers, weights) = lift_centers(atoms, degree, chart)?;
    Ok(S3HarmonicSum { degree, centers, weights: weights.iter().map(|w| w[component]).collect() })
}

pub(crate) fn lift_centers(
    atoms: &BesselAtomField,
    degree: u32,
    chart: &NormalChart,
) -> Result<(Vec<[f64; 4]>, Vec<[f64; 3]>)> {
    let l = degree as f64;
    let r_max = atoms.atoms.iter().map(|a| crate::r3_fields::norm3(a.x)).fold(atoms.radius, f64::max);
    if !(l > r_max) {
        return Err(BeltramiError::Precondition(format!("degree {degree} must exceed atom radius {r_max}")));
    }
    let centers = atoms.atoms.iter().map(|a| chart.to_sphere(a.x.map(|v| v / l))).collect();
    let weights = atoms.atoms.iter().map(|a| a.c).collect();
    Ok((centers, weights))
}

/// Orthonormal degree-1 harmonics (√2/π) x_j, j = 1..4.
pub fn degree_one_basis(p: [f64; 4]) -> [f64; 4] {
    let c = std::f64::consts::SQRT_2 / std::f64::consts::PI;
    p.map(|v| c * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r3_fields::{BesselAtom, R3Field};
    use crate::s3_construct::{random_s3, S3Point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sum(rng: &mut ChaCha8Rng, degree: u32, n: usize) -> S3HarmonicSum {
        let centers = (0..n).map(|_| random_s3(rng)).collect();
        let weights = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        S3HarmonicSum::new(degree, centers, weights).unwrap()
    }

    fn great_circle(p: [f64; 4], j: usize, t: f64) -> [f64; 4] {
        let v = matvec(&HOPF[j], p);
        std::array::from_fn(|k| t.cos() * p[k] + t.sin() * v[k])
    }

    #[test]
    fn word_indexing() {
        assert_eq!(word_index(&[]), 0);
        assert_eq!(word_index(&[2]), 3);
        assert_eq!(word_index(&[0, 0]), 4);
        assert_eq!(word_index(&[2, 2, 2]), 39);
        let mut j = WordJet::zero(2);
        for (i, v) in j.d.iter_mut().enumerate() {
            *v = i as f64;
        }
        let d = j.derivative(1);
        assert_eq!(d.value(), j.get(&[1]));
        assert_eq!(d.get(&[2]), j.get(&[2, 1]));
    }

    #[test]
    fn jets_match_great_circle_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = random_sum(&mut rng, 9, 4);
        let p = random_s3(&mut rng);
        let jet = y.jet(p, 3).unwrap();
        assert!((jet.value() - y.eval(p)).abs() < 1e-14);
        let h = 1e-4;
        // D[(k, j)] = h_k(h_j Y): differentiate the first-order jet along h_k
        for k in 0..3 {
            let plus = y.jet(great_circle(p, k, h), 2).unwrap();
            let minus = y.jet(great_circle(p, k, -h), 2).unwrap();
            for j in 0..3 {
                let fd = (plus.get(&[j]) - minus.get(&[j])) / (2.0 * h);
                assert!((fd - jet.get(&[k, j])).abs() < 1e-6 * (1.0 + fd.abs()), "k={k} j={j}");
                for l in 0..3 {
                    let fd = (plus.get(&[j, l]) - minus.get(&[j, l])) / (2.0 * h);
                    assert!((fd - jet.get(&[k, j, l])).abs() < 1e-5 * (1.0 + fd.abs()));
                }
            }
            let fd = (y.eval(great_circle(p, k, h)) - y.eval(great_circle(p, k, -h))) / (2.0 * h);
            assert!((fd - jet.get(&[k])).abs() < 1e-7 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn closed_form_laplacian_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for degree in [1u32, 4, 37, 200] {
            let y = random_sum(&mut rng, degree, 6);
            let l = degree as f64;
            for _ in 0..20 {
                let p = random_s3(&mut rng);
                let j = y.jet(p, 2).unwrap();
                let scale = l * (l + 2.0) * y.centers.len() as f64;
                assert!((j.laplacian() + l * (l + 2.0) * j.value()).abs() < 1e-11 * scale);
            }
        }
    }

    #[test]
    fn parity_of_harmonics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for degree in [10u32, 11] {
            let y = random_sum(&mut rng, degree, 5);
            let sign = if degree % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..50 {
                let p = random_s3(&mut rng);
                assert!((y.eval(p.map(|v| -v)) - sign * y.eval(p)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn addition_theorem_degree_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = 2.0 * std::f64::consts::PI.powi(2) / 4.0;
        for _ in 0..100 {
            let (p, q) = (random_s3(&mut rng), random_s3(&mut rng));
            let lhs = GegenbauerEvaluator::new(1).eval(dot4(p, q));
            let (a, b) = (degree_one_basis(p), degree_one_basis(q));
            let rhs = c * (0..4).map(|j| a[j] * b[j]).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn single_atom_lift_approaches_j0() {
        let atoms = BesselAtomField::new(4.0, vec![BesselAtom { x: [0.0; 3], c: [1.0, 0.0, 0.0] }]).unwrap();
        let chart = NormalChart::default();
        let y = lift_harmonic(&atoms, 0, 200, &chart).unwrap();
        let err = crate::r3_fields::ball_grid(11, 1.0)
            .into_iter()
            .map(|x| (y.rescaled_pullback(&chart, x) - atoms.eval(x)[0]).abs())
            .fold(0.0, f64::max);
        assert!(err <= 0.05, "{err}");
        assert!(lift_harmonic(&atoms, 0, 4, &chart).is_err());
        let empty = lift_harmonic(&BesselAtomField::new(4.0, vec![]).unwrap(), 1, 10, &chart).unwrap();
        assert_eq!(empty.eval(S3Point::north().coords()), 0.0);
    }

    #[test]
    fn lift_error_halves_with_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let atoms: Vec<BesselAtom> = (0..5)
            .map(|_| BesselAtom {
                x: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                c: [rng.gen_range(-1.0..1.0), 0.0, 0.0],
            })
            .collect();
        let field = BesselAtomField::new(4.0, atoms).unwrap();
        let chart = NormalChart::default();
        let err = |degree: u32| {
            let y = lift_harmonic(&field, 0, degree, &chart).unwrap();
            crate::r3_fields::ball_grid(11, 1.0)
                .into_iter()
                .map(|x| (y.rescaled_pullback(&chart, x) - field.eval(x)[0]).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(100) / err(200);
        assert!((1.4..=2.8).contains(&ratio), "ratio {ratio}");
    }
}
