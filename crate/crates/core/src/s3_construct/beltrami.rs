//! Hopf-frame curl and the eigenfield u = (1/2Λ²) curl(curl + Λ)(Y₁h₁ + Y₂h₂ + Y₃h₃).

use serde::{Deserialize, Serialize};

use super::chart::NormalChart;
use super::harmonic::{harmonic_jets, lift_centers, S3HarmonicSum, WordJet, MAX_WORD_ORDER};
use super::{ambient_to_frame, exp_chart, frame_to_ambient, geodesic_distance, norm4, S3Field, S3Point};
use crate::error::{BeltramiError, Result};
use crate::jet::Partials;
use crate::r3_fields::{norm3, BesselAtomField, FieldTag, R3Field};
use crate::specfun::GegenbauerEvaluator;

/// Word jets of the frame components F₁, F₂, F₃ of Σ Fᵢhᵢ.
pub type FrameJet = [WordJet; 3];

/// A field Σ Fᵢhᵢ whose components expose frame derivatives.
pub trait FrameSource: Send + Sync {
    fn frame_jet(&self, p: [f64; 4], order: usize) -> Result<FrameJet>;
    fn max_order(&self) -> usize;

    fn frame_value(&self, p: [f64; 4]) -> Result<[f64; 3]> {
        let j = self.frame_jet(p, 0)?;
        Ok([j[0].value(), j[1].value(), j[2].value()])
    }
}

/// G_l = Σ ε_jil hⱼ(Fᵢ) + 2F_l, one order lower than the input.
pub fn curl_jet(f: &FrameJet) -> FrameJet {
    std::array::from_fn(|l| {
        let (a, b) = ((l + 1) % 3, (l + 2) % 3);
        let mut g = f[b].derivative(a);
        g.axpy(-1.0, &f[a].derivative(b));
        g.axpy(2.0, &f[l].truncate(g.order()));
        g
    })
}

pub struct CurlOf<'a> {
    inner: &'a dyn FrameSource,
}

pub fn hopf_frame_curl(field: &dyn FrameSource) -> CurlOf<'_> {
    CurlOf { inner: field }
}

impl FrameSource for CurlOf<'_> {
    fn frame_jet(&self, p: [f64; 4], order: usize) -> Result<FrameJet> {
        if order + 1 > self.inner.max_order() {
            return Err(BeltramiError::DerivativeOrder { requested: order + 1, available: self.inner.max_order() });
        }
        Ok(curl_jet(&self.inner.frame_jet(p, order + 1)?))
    }

    fn max_order(&self) -> usize {
        self.inner.max_order().saturating_sub(1)
    }
}

/// Σ aᵢhᵢ with constant aᵢ.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFrame(pub [f64; 3]);

impl FrameSource for ConstantFrame {
    fn frame_jet(&self, _p: [f64; 4], order: usize) -> Result<FrameJet> {
        Ok(self.0.map(|a| WordJet::constant(order, a)))
    }

    fn max_order(&self) -> usize {
        MAX_WORD_ORDER
    }
}

/// Beltrami field of eigenvalue Λ+2 built from three degree-Λ harmonics on shared centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S3BeltramiField {
    pub degree: u32,
    pub centers: Vec<[f64; 4]>,
    pub weights: Vec<[f64; 3]>,
}

impl S3BeltramiField {
    pub fn new(degree: u32, centers: Vec<[f64; 4]>, weights: Vec<[f64; 3]>) -> Result<Self> {
        if degree == 0 {
            return Err(BeltramiError::Precondition("harmonic degree must be positive".into()));
        }
        if centers.len() != weights.len() {
            return Err(BeltramiError::Precondition(format!(
                "{} centers but {} weights",
                centers.len(),
                weights.len()
            )));
        }
        for (i, c) in centers.iter().enumerate() {
            if ((norm4(*c) - 1.0).abs()) > 1e-12 {
                return Err(BeltramiError::Precondition(format!("center {i} is not on the unit sphere")));
            }
        }
        Ok(S3BeltramiField { degree, centers, weights })
    }

    /// Lifts every component of `atoms` through `chart` and assembles.
    pub fn from_atoms(atoms: &BesselAtomField, degree: u32, chart: &NormalChart) -> Result<Self> {
        let (centers, weights) = lift_centers(atoms, degree, chart)?;
        S3BeltramiField::new(degree, centers, weights)
    }

    pub fn eigenvalue(&self) -> f64 {
        self.degree as f64 + 2.0
    }

    fn evaluator(&self) -> GegenbauerEvaluator {
        GegenbauerEvaluator::new(self.degree)
    }

    /// Jets of the harmonic components Y₁, Y₂, Y₃.
    pub fn harmonic_jets(&self, p: [f64; 4], order: usize) -> Result<FrameJet> {
        if order > MAX_WORD_ORDER {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: MAX_WORD_ORDER });
        }
        Ok(harmonic_jets(&self.evaluator(), &self.centers, &self.weights, p, order))
    }

    /// Frame components of u and its derivatives up to `order` ≤ 1.
    pub fn u_jet(&self, p: [f64; 4], order: usize) -> Result<FrameJet> {
        let y = self.harmonic_jets(p, order + 2)?;
        Ok(self.assemble(&y))
    }

    fn assemble(&self, y: &FrameJet) -> FrameJet {
        let l = self.degree as f64;
        let a = curl_jet(y);
        let b = curl_jet(&a);
        let s = 1.0 / (2.0 * l * l);
        std::array::from_fn(|i| {
            let mut u = b[i].scale(s);
            u.axpy(l * s, &a[i]);
            u
        })
    }

    pub fn frame_components(&self, p: [f64; 4]) -> [f64; 3] {
        let u = self.u_jet(p, 0).expect("order 0 is always available");
        [u[0].value(), u[1].value(), u[2].value()]
    }

    /// curl u by one further frame curl of the closed-form jets.
    pub fn curl_frame(&self, p: [f64; 4]) -> [f64; 3] {
        let g = curl_jet(&self.u_jet(p, 1).expect("order 1 is always available"));
        [g[0].value(), g[1].value(), g[2].value()]
    }

    /// |curl u − (Λ+2) u| at p.
    pub fn eigen_residual(&self, p: [f64; 4]) -> f64 {
        let u = self.frame_components(p);
        let c = self.curl_frame(p);
        let l = self.eigenvalue();
        norm3([c[0] - l * u[0], c[1] - l * u[1], c[2] - l * u[2]])
    }

    /// Frame components of curl curl ũ − grad div ũ − Λ(Λ+2)ũ − 2 curl ũ, which vanish for degree-Λ harmonics.
    pub fn lemma_residual(&self, p: [f64; 4]) -> [f64; 3] {
        let y = self.harmonic_jets(p, 2).expect("order 2 is always available");
        let a = curl_jet(&y);
        let b = curl_jet(&a);
        let l = self.degree as f64;
        std::array::from_fn(|k| {
            let grad_div: f64 = (0..3).map(|i| y[i].get(&[k, i])).sum();
            b[k].value() - grad_div - l * (l + 2.0) * y[k].value() - 2.0 * a[k].value()
        })
    }

    /// Scale of the terms entering `lemma_residual`, for relative tolerances.
    pub fn lemma_scale(&self, p: [f64; 4]) -> f64 {
        let y = self.harmonic_jets(p, 2).expect("order 2 is always available");
        let l = self.degree as f64;
        (0..3).map(|k| l * (l + 2.0) * y[k].value().abs() + (0..3).map(|i| y[i].get(&[k, i]).abs()).sum::<f64>()).sum()
    }

    /// The three harmonic components.
    pub fn components(&self) -> [S3HarmonicSum; 3] {
        std::array::from_fn(|i| S3HarmonicSum {
            degree: self.degree,
            centers: self.centers.clone(),
            weights: self.weights.iter().map(|w| w[i]).collect(),
        })
    }

    /// Concatenation of fields of the same degree.
    pub fn sum(fields: &[S3BeltramiField]) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(BeltramiError::Precondition("empty field list".into()));
        };
        if let Some(f) = fields.iter().find(|f| f.degree != first.degree) {
            return Err(BeltramiError::DegreeMismatch(vec![first.degree, f.degree]));
        }
        let mut out = S3BeltramiField { degree: first.degree, centers: Vec::new(), weights: Vec::new() };
        for f in fields {
            out.centers.extend_from_slice(&f.centers);
            out.weights.extend_from_slice(&f.weights);
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        S3BeltramiField {
            degree: self.degree,
            centers: self.centers.clone(),
            weights: self.weights.iter().map(|w| w.map(|v| v * s)).collect(),
        }
    }
}

impl S3Field for S3BeltramiField {
    fn eval(&self, p: [f64; 4]) -> [f64; 4] {
        frame_to_ambient(p, self.frame_components(p))
    }

    fn curl(&self, p: [f64; 4]) -> Option<[f64; 4]> {
        Some(frame_to_ambient(p, self.curl_frame(p)))
    }
}

impl FrameSource for S3BeltramiField {
    fn frame_jet(&self, p: [f64; 4], order: usize) -> Result<FrameJet> {
        if order > 1 {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: 1 });
        }
        self.u_jet(p, order)
    }

    fn max_order(&self) -> usize {
        1
    }
}

/// ũ = Y₁h₁ + Y₂h₂ + Y₃h₃ as a frame source.
pub struct HarmonicFrame<'a>(pub &'a S3BeltramiField);

impl FrameSource for HarmonicFrame<'_> {
    fn frame_jet(&self, p: [f64; 4], order: usize) -> Result<FrameJet> {
        self.0.harmonic_jets(p, order)
    }

    fn max_order(&self) -> usize {
        MAX_WORD_ORDER
    }
}

/// Assembles u from three harmonics of degree Λ.
pub fn assemble_beltrami(y: [&S3HarmonicSum; 3], degree: u32) -> Result<S3BeltramiField> {
    if y.iter().any(|h| h.degree != degree) {
        let mut d = vec![degree];
        d.extend(y.iter().map(|h| h.degree));
        return Err(BeltramiError::DegreeMismatch(d));
    }
    if y[0].centers == y[1].centers && y[1].centers == y[2].centers {
        let w = (0..y[0].centers.len()).map(|n| [y[0].weights[n], y[1].weights[n], y[2].weights[n]]).collect();
        return S3BeltramiField::new(degree, y[0].centers.clone(), w);
    }
    let mut centers = Vec::new();
    let mut weights = Vec::new();
    for (i, h) in y.iter().enumerate() {
        for (c, w) in h.centers.iter().zip(&h.weights) {
            let mut v = [0.0; 3];
            v[i] = *w;
            centers.push(*c);
            weights.push(v);
        }
    }
    S3BeltramiField::new(degree, centers, weights)
}

/// One eigenfield approximating each atom field in the normal chart at its point.
pub fn multi_center_field(inputs: &[(S3Point, &BesselAtomField)], degree: u32) -> Result<S3BeltramiField> {
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            let d = geodesic_distance(inputs[i].0.coords(), inputs[j].0.coords());
            if d < 1e-9 {
                return Err(BeltramiError::Centers { i, j, kind: "coincident" });
            }
            if d > std::f64::consts::PI - 1e-9 {
                return Err(BeltramiError::Centers { i, j, kind: "antipodal" });
            }
        }
    }
    let parts: Vec<S3BeltramiField> = inputs
        .iter()
        .map(|(p, atoms)| S3BeltramiField::from_atoms(atoms, degree, &exp_chart(*p)))
        .collect::<Result<_>>()?;
    if parts.is_empty() {
        return S3BeltramiField::new(degree, Vec::new(), Vec::new());
    }
    S3BeltramiField::sum(&parts)
}

/// Chart components of u at Ψ⁻¹(x/Λ).
pub fn pushforward_rescale(u: &dyn S3Field, chart: &NormalChart, degree: u32, x: [f64; 3]) -> Result<[f64; 3]> {
    let y = x.map(|v| v / degree as f64);
    let q = chart.to_sphere_checked(y)?;
    Ok(chart.push_vector(y, u.eval(q)))
}

/// x ↦ Ψ_* u(x/Λ) as a field on ℝ³; values only, derivatives by finite differences downstream.
pub struct RescaledPushforward<'a> {
    pub field: &'a dyn S3Field,
    pub chart: NormalChart,
    pub degree: u32,
}

impl R3Field for RescaledPushforward<'_> {
    fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        pushforward_rescale(self.field, &self.chart, self.degree, x).unwrap_or([f64::NAN; 3])
    }

    fn partials(&self, x: [f64; 3], order: usize) -> Result<Partials> {
        if order > 0 {
            return Err(BeltramiError::DerivativeOrder { requested: order, available: 0 });
        }
        let v = pushforward_rescale(self.field, &self.chart, self.degree, x)?;
        Ok(Partials { order: 0, values: vec![v] })
    }

    fn max_order(&self) -> usize {
        0
    }

    fn tag(&self) -> FieldTag {
        FieldTag::Other
    }
}

/// Frame components of an ambient field, for finite-difference curls.
pub fn frame_of(field: &dyn S3Field, p: [f64; 4]) -> [f64; 3] {
    ambient_to_frame(p, field.eval(p))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::r3_fields::BesselAtom;
    use crate::s3_construct::harmonic::lift_harmonic;
    use crate::s3_construct::{dot4, random_s3, LinearHopf};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn five_atoms(rng: &mut ChaCha8Rng) -> BesselAtomField {
        let atoms = (0..5)
            .map(|_| BesselAtom {
                x: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                c: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            })
            .collect();
        BesselAtomField::new(4.0, atoms).unwrap()
    }

    fn relative_eigen_residual(u: &S3BeltramiField, rng: &mut ChaCha8Rng, n: usize) -> f64 {
        let mut res = 0.0f64;
        let mut scale = 0.0f64;
        for _ in 0..n {
            let p = random_s3(rng);
            res = res.max(u.eigen_residual(p));
            scale = scale.max(norm3(u.frame_components(p)) * u.eigenvalue());
        }
        res / scale
    }

    #[test]
    fn constant_frame_curl_is_twice() {
        let f = ConstantFrame([0.3, -1.0, 2.0]);
        let c = hopf_frame_curl(&f);
        let v = c.frame_value([0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(v, [0.6, -2.0, 4.0]);
        let z = hopf_frame_curl(&ConstantFrame([0.0; 3])).frame_value([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(z, [0.0; 3]);
    }

    #[test]
    fn curl_order_exhaustion_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), 20, &NormalChart::default()).unwrap();
        let c = hopf_frame_curl(&u);
        assert!(c.frame_value(random_s3(&mut rng)).is_ok());
        let cc = hopf_frame_curl(&c);
        assert!(matches!(cc.frame_value(random_s3(&mut rng)), Err(BeltramiError::DerivativeOrder { .. })));
    }

    #[test]
    fn eigen_identity_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for degree in [2u32, 20, 101, 400] {
            let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), degree.max(5), &NormalChart::default()).unwrap();
            let r = relative_eigen_residual(&u, &mut rng, 200);
            assert!(r <= 1e-9, "degree {degree}: {r}");
        }
    }

    #[test]
    fn tangency_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for degree in [10u32, 11] {
            let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), degree, &NormalChart::default()).unwrap();
            let lam = degree + 2;
            let sign = if (lam + 1) % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..100 {
                let p = random_s3(&mut rng);
                let a = u.eval(p);
                let b = u.eval(p.map(|v| -v));
                assert!(dot4(a, p).abs() < 1e-12);
                for k in 0..4 {
                    assert!((b[k] - sign * a[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lemma_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for degree in [7u32, 60] {
            let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), degree, &NormalChart::default()).unwrap();
            for _ in 0..50 {
                let p = random_s3(&mut rng);
                let r = u.lemma_residual(p);
                assert!(norm3(r) <= 1e-8 * u.lemma_scale(p).max(1.0), "{r:?}");
            }
        }
    }

    #[test]
    fn zero_harmonics_give_zero_field() {
        let z = S3HarmonicSum::zero(12);
        let u = assemble_beltrami([&z, &z, &z], 12).unwrap();
        assert_eq!(u.eval([0.0, 0.6, 0.0, 0.8]), [0.0; 4]);
        assert!(matches!(assemble_beltrami([&z, &z, &S3HarmonicSum::zero(13)], 12), Err(BeltramiError::DegreeMismatch(_))));
    }

    #[test]
    fn assembly_from_separate_harmonics_matches_shared_centers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let atoms = five_atoms(&mut rng);
        let chart = NormalChart::default();
        let y: Vec<S3HarmonicSum> = (0..3).map(|i| lift_harmonic(&atoms, i, 30, &chart).unwrap()).collect();
        let a = assemble_beltrami([&y[0], &y[1], &y[2]], 30).unwrap();
        let b = S3BeltramiField::from_atoms(&atoms, 30, &chart).unwrap();
        assert_eq!(a, b);
        // distinct centers take the concatenation path
        let mut y2 = y[2].clone();
        y2.centers[0] = chart.to_sphere([0.01, 0.0, 0.0]);
        let c = assemble_beltrami([&y[0], &y[1], &y2], 30).unwrap();
        assert_eq!(c.centers.len(), 15);
        let r = relative_eigen_residual(&c, &mut rng, 50);
        assert!(r < 1e-9);
    }

    #[test]
    fn pushforward_at_origin_is_frame_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = S3BeltramiField::from_atoms(&five_atoms(&mut rng), 50, &NormalChart::default()).unwrap();
        let chart = NormalChart::default();
        let v = pushforward_rescale(&u, &chart, 50, [0.0; 3]).unwrap();
        let w = u.eval(chart.base().coords());
        for i in 0..3 {
            assert!((v[i] - dot4(w, chart.frame()[i])).abs() < 1e-15);
        }
        // Σ aᵢhᵢ pushes forward to a at the origin
        let h = LinearHopf([0.2, -0.7, 1.1]);
        let v = pushforward_rescale(&h, &chart, 50, [0.0; 3]).unwrap();
        assert!((0..3).all(|i| (v[i] - h.0[i]).abs() < 1e-15));
        assert!(pushforward_rescale(&u, &chart, 50, [200.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn multi_center_checks_and_cross_talk() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let atoms = five_atoms(&mut rng);
        let empty = BesselAtomField::new(4.0, vec![]).unwrap();
        let p1 = S3Point::north();
        let p2 = S3Point::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let single = multi_center_field(&[(p1, &atoms)], 40).unwrap();
        assert_eq!(single, S3BeltramiField::from_atoms(&atoms, 40, &NormalChart::default()).unwrap());
        assert!(multi_center_field(&[(p1, &atoms), (p1, &atoms)], 40).is_err());
        let anti = S3Point::new([0.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            multi_center_field(&[(p1, &atoms), (anti, &atoms)], 40),
            Err(BeltramiError::Centers { kind: "antipodal", .. })
        ));
        // the far center sees only the Gegenbauer tail, which decays like 1/Λ
        let ratio = |degree: u32| {
            let u = multi_center_field(&[(p1, &atoms), (p2, &empty)], degree).unwrap();
            let near = crate::r3_fields::ball_grid(5, 1.0)
                .iter()
                .map(|&x| norm3(pushforward_rescale(&u, &exp_chart(p1), degree, x).unwrap()))
                .fold(0.0, f64::max);
            let far = crate::r3_fields::ball_grid(5, 1.0)
                .iter()
                .map(|&x| norm3(pushforward_rescale(&u, &exp_chart(p2), degree, x).unwrap()))
                .fold(0.0, f64::max);
            far / near
        };
        let (a, b) = (ratio(100), ratio(400));
        assert!(a < 0.2 && b < a, "{a} {b}");
        let u = multi_center_field(&[(p1, &atoms), (p2, &atoms)], 40).unwrap();
        assert!(relative_eigen_residual(&u, &mut rng, 50) < 1e-9);
    }
}
