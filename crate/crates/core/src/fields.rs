//! Monogenic field generators with closed-form values and Jacobians.
//!
//! A harmonic potential `h` on `R^8` is turned into a left-monogenic field
//! by the conjugate-gradient lift `f0 = dh/dx0`, `fj = -dh/dxj`. Row 0 of
//! the Dirac system reduces to `Laplacian(h) = 0`; every other row pairs
//! `d_k d_j h` with `d_j d_k h` at opposite signs because imaginary basis
//! units anticommute, so the residual vanishes identically.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::herglotz::{BoundaryMeasure, Density, PoissonSamples, VectorMeasure};
use crate::octonion::Octonion;

pub type Jacobian = [[f64; 8]; 8];

/// A point `(x0, X)` of `R^8`; `x0` is the height above the boundary `R^7`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point8 {
    pub x0: f64,
    pub x: [f64; 7],
}

impl Point8 {
    pub fn new(x0: f64, x: [f64; 7]) -> Self {
        Point8 { x0, x }
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        let mut x = [0.0; 7];
        x.copy_from_slice(&a[1..]);
        Point8 { x0: a[0], x }
    }

    pub fn to_array(&self) -> [f64; 8] {
        let mut a = [0.0; 8];
        a[0] = self.x0;
        a[1..].copy_from_slice(&self.x);
        a
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite() && self.x.iter().all(|v| v.is_finite())
    }

    pub fn is_interior(&self) -> bool {
        self.x0 > 0.0 && self.is_finite()
    }

    pub fn distance(&self, other: &Point8) -> f64 {
        dist8(&self.to_array(), &other.to_array())
    }
}

fn dist8(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// A monomial `coeff * prod x_k^powers[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: [u32; 8],
}

/// A polynomial on `R^8` whose Laplacian is identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicPolynomial {
    terms: Vec<Monomial>,
}

fn collect(terms: impl IntoIterator<Item = Monomial>) -> Vec<Monomial> {
    let mut map: BTreeMap<[u32; 8], f64> = BTreeMap::new();
    for t in terms {
        *map.entry(t.powers).or_insert(0.0) += t.coeff;
    }
    map.into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(powers, coeff)| Monomial { coeff, powers })
        .collect()
}

fn derive(terms: &[Monomial], k: usize) -> Vec<Monomial> {
    collect(terms.iter().filter(|t| t.powers[k] > 0).map(|t| {
        let mut powers = t.powers;
        powers[k] -= 1;
        Monomial { coeff: t.coeff * f64::from(t.powers[k]), powers }
    }))
}

fn eval_terms(terms: &[Monomial], x: &[f64; 8]) -> f64 {
    terms
        .iter()
        .map(|t| {
            t.powers
                .iter()
                .zip(x)
                .fold(t.coeff, |acc, (&p, &xi)| acc * xi.powi(p as i32))
        })
        .sum()
}

impl HarmonicPolynomial {
    /// Builds the polynomial and checks its Laplacian symbolically.
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        if terms.iter().any(|t| !t.coeff.is_finite()) {
            return Err(Error::Rejected("non-finite polynomial coefficient".into()));
        }
        let terms = collect(terms);
        let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.coeff.abs()));
        let lap = collect((0..8).flat_map(|k| derive(&derive(&terms, k), k)));
        if let Some(bad) = lap.iter().find(|t| t.coeff.abs() > 1e-12 * scale.max(1.0)) {
            return Err(Error::Rejected(format!(
                "polynomial is not harmonic: Laplacian has term {} * x^{:?}",
                bad.coeff, bad.powers
            )));
        }
        Ok(HarmonicPolynomial { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.powers.iter().sum()).max().unwrap_or(0)
    }

    pub fn value(&self, x: &[f64; 8]) -> f64 {
        eval_terms(&self.terms, x)
    }

    pub fn gradient(&self, x: &[f64; 8]) -> [f64; 8] {
        std::array::from_fn(|k| eval_terms(&derive(&self.terms, k), x))
    }

    pub fn hessian(&self, x: &[f64; 8]) -> Jacobian {
        let first: Vec<Vec<Monomial>> = (0..8).map(|k| derive(&self.terms, k)).collect();
        std::array::from_fn(|j| std::array::from_fn(|k| eval_terms(&derive(&first[j], k), x)))
    }
}

/// Harmonic potential used as input to the lift.
#[derive(Clone, Debug, PartialEq)]
pub enum HarmonicPotential {
    /// `|x - pole|^-6`, the Newton kernel of `R^8`.
    NewtonKernel { pole: [f64; 8] },
    Polynomial(HarmonicPolynomial),
}

impl HarmonicPotential {
    pub fn newton(pole: [f64; 8]) -> Self {
        HarmonicPotential::NewtonKernel { pole }
    }

    pub fn pole(&self) -> Option<[f64; 8]> {
        match self {
            HarmonicPotential::NewtonKernel { pole } => Some(*pole),
            HarmonicPotential::Polynomial(_) => None,
        }
    }

    fn check_point(&self, x: &[f64; 8]) -> Result<()> {
        if let Some(pole) = self.pole() {
            if dist8(x, &pole) == 0.0 {
                return Err(domain(format!("evaluation at the pole {pole:?}")));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64; 8]) -> Result<f64> {
        self.check_point(x)?;
        Ok(match self {
            HarmonicPotential::NewtonKernel { pole } => dist8(x, pole).powi(-6),
            HarmonicPotential::Polynomial(p) => p.value(x),
        })
    }

    pub fn gradient(&self, x: &[f64; 8]) -> Result<[f64; 8]> {
        self.check_point(x)?;
        Ok(match self {
            HarmonicPotential::NewtonKernel { pole } => {
                let d: [f64; 8] = std::array::from_fn(|k| x[k] - pole[k]);
                let r2: f64 = d.iter().map(|v| v * v).sum();
                let f = -6.0 / (r2 * r2 * r2 * r2);
                d.map(|v| f * v)
            }
            HarmonicPotential::Polynomial(p) => p.gradient(x),
        })
    }

    pub fn hessian(&self, x: &[f64; 8]) -> Result<Jacobian> {
        self.check_point(x)?;
        Ok(match self {
            HarmonicPotential::NewtonKernel { pole } => {
                // d_j d_k r^-6 = -6 (delta_jk r^-8 - 8 d_j d_k r^-10)
                let d: [f64; 8] = std::array::from_fn(|k| x[k] - pole[k]);
                let r2: f64 = d.iter().map(|v| v * v).sum();
                let r8 = r2 * r2 * r2 * r2;
                let r10 = r8 * r2;
                std::array::from_fn(|j| {
                    std::array::from_fn(|k| {
                        let delta = if j == k { 1.0 / r8 } else { 0.0 };
                        -6.0 * (delta - 8.0 * d[j] * d[k] / r10)
                    })
                })
            }
            HarmonicPotential::Polynomial(p) => p.hessian(x),
        })
    }

    /// Uniform bound on `|grad h|` over the closed half-space `x0 >= 0`,
    /// when one can be certified.
    pub fn gradient_bound(&self) -> Option<f64> {
        match self {
            HarmonicPotential::NewtonKernel { pole } => {
                let d = -pole[0];
                (d > 0.0).then(|| 6.0 / d.powi(7))
            }
            HarmonicPotential::Polynomial(p) => match p.degree() {
                0 => Some(0.0),
                1 => {
                    let g = p.gradient(&[0.0; 8]);
                    Some(g.iter().map(|v| v * v).sum::<f64>().sqrt())
                }
                _ => None,
            },
        }
    }
}

/// One additive piece of a [`Field`].
#[derive(Clone, Debug)]
pub enum Term {
    Constant(Octonion),
    /// `weight * lift(potential)`.
    Lift { potential: HarmonicPotential, weight: f64 },
    /// Scalar Poisson extension of a boundary measure placed in one
    /// component. Evaluated by quadrature; not monogenic in general.
    PoissonExtension { samples: Arc<PoissonSamples>, component: usize },
    /// `sum x_j e_j`; a non-monogenic test fixture with identity Jacobian.
    IdentityFixture,
}

/// An octonion-valued function on `R^8`, a finite sum of [`Term`]s.
#[derive(Clone, Debug, Default)]
pub struct Field {
    terms: Vec<Term>,
}

/// Conjugate-gradient lift of a harmonic potential.
pub fn lift(h: HarmonicPotential) -> Result<Field> {
    Field::default().with_lift(h, 1.0)
}

impl Field {
    pub fn constant(c: Octonion) -> Self {
        Field { terms: vec![Term::Constant(c)] }
    }

    pub fn identity_fixture() -> Self {
        Field { terms: vec![Term::IdentityFixture] }
    }

    pub fn with_identity_fixture(mut self) -> Self {
        self.terms.push(Term::IdentityFixture);
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn with_constant(mut self, c: Octonion) -> Self {
        self.terms.push(Term::Constant(c));
        self
    }

    /// Adds `weight * lift(h)`. Potentials with a pole in the open upper
    /// half-space are rejected; a pole on the boundary is recorded as a
    /// singular point.
    pub fn with_lift(mut self, h: HarmonicPotential, weight: f64) -> Result<Self> {
        if let Some(pole) = h.pole() {
            if pole.iter().any(|v| !v.is_finite()) {
                return Err(Error::Rejected("non-finite pole".into()));
            }
            if pole[0] > 0.0 {
                return Err(Error::Rejected(format!(
                    "pole {pole:?} lies in the open upper half-space"
                )));
            }
        }
        if !weight.is_finite() {
            return Err(Error::Rejected("non-finite lift weight".into()));
        }
        self.terms.push(Term::Lift { potential: h, weight });
        Ok(self)
    }

    pub fn with_poisson_extension(mut self, samples: Arc<PoissonSamples>, component: usize) -> Result<Self> {
        if component >= 8 {
            return Err(Error::Rejected(format!("component {component} out of range")));
        }
        self.terms.push(Term::PoissonExtension { samples, component });
        Ok(self)
    }

    /// True when every term is a constant or a lift.
    pub fn is_monogenic(&self) -> bool {
        self.terms.iter().all(|t| matches!(t, Term::Constant(_) | Term::Lift { .. }))
    }

    /// True when values and Jacobians are closed-form.
    pub fn is_exact(&self) -> bool {
        !self.terms.iter().any(|t| matches!(t, Term::PoissonExtension { .. }))
    }

    /// Boundary points `(0, Y)` where some term is singular.
    pub fn singular_points(&self) -> Vec<Point8> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Lift { potential, .. } => potential.pole().filter(|a| a[0] == 0.0),
                _ => None,
            })
            .map(Point8::from_array)
            .collect()
    }

    /// Poles of lift terms, on or below the boundary.
    pub fn poles(&self) -> Vec<[f64; 8]> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Lift { potential, .. } => potential.pole(),
                _ => None,
            })
            .collect()
    }

    /// Returns the field shifted by a constant so that it vanishes at `at`.
    /// Constants preserve monogenicity.
    pub fn normalized_at(&self, at: &Point8) -> Result<Field> {
        let v = self.eval(at)?;
        Ok(self.clone().with_constant(-v))
    }

    pub fn eval(&self, p: &Point8) -> Result<Octonion> {
        if !p.is_finite() {
            return Err(domain("non-finite evaluation point"));
        }
        let x = p.to_array();
        let mut out = Octonion::ZERO;
        for t in &self.terms {
            match t {
                Term::Constant(c) => out += *c,
                Term::Lift { potential, weight } => {
                    let g = potential.gradient(&x)?;
                    out[0] += weight * g[0];
                    for j in 1..8 {
                        out[j] -= weight * g[j];
                    }
                }
                Term::PoissonExtension { samples, component } => {
                    out[*component] += samples.value(p)?.value;
                }
                Term::IdentityFixture => out += Octonion(x),
            }
        }
        Ok(out)
    }

    /// `J[j][k] = d f_j / d x_k`.
    pub fn jacobian(&self, p: &Point8) -> Result<Jacobian> {
        if !p.is_finite() {
            return Err(domain("non-finite evaluation point"));
        }
        let x = p.to_array();
        let mut jac = [[0.0; 8]; 8];
        for t in &self.terms {
            match t {
                Term::Constant(_) => {}
                Term::Lift { potential, weight } => {
                    let hess = potential.hessian(&x)?;
                    for k in 0..8 {
                        jac[0][k] += weight * hess[0][k];
                        for j in 1..8 {
                            jac[j][k] -= weight * hess[j][k];
                        }
                    }
                }
                Term::PoissonExtension { samples, component } => {
                    let g = samples.gradient(p)?;
                    for k in 0..8 {
                        jac[*component][k] += g[k];
                    }
                }
                Term::IdentityFixture => {
                    for (k, row) in jac.iter_mut().enumerate() {
                        row[k] += 1.0;
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Component `j` restricted to the boundary, `f_j(0, X)`.
    pub fn boundary_trace(&self, j: usize, x: &[f64; 7]) -> Result<f64> {
        Ok(self.eval(&Point8::new(0.0, *x))?[j])
    }
}

/// Density of the boundary trace `f_j(0, X)` for component `j` of
/// `lift(h)`, scaled and shifted.
pub fn lift_trace(h: &HarmonicPotential, j: usize, x: &[f64; 7]) -> Result<f64> {
    let mut a = [0.0; 8];
    a[1..].copy_from_slice(x);
    let g = h.gradient(&a)?;
    Ok(if j == 0 { g[0] } else { -g[j] })
}

/// A positive monogenic field `C (e0 + ... + e7) + eps lift(h)` together
/// with its componentwise boundary measures.
#[derive(Clone, Debug)]
pub struct PositiveExample {
    pub field: Field,
    pub measures: VectorMeasure,
    pub level: f64,
    pub eps: f64,
}

/// Builds a componentwise-positive monogenic field.
///
/// Positivity is certified from `eps * sup|grad h| < level` on the closed
/// half-space; each component's boundary measure is `level * Lebesgue`
/// plus `eps` times the lift's boundary trace.
pub fn positive_example(level: f64, eps: f64, h: HarmonicPotential) -> Result<PositiveExample> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::Rejected(format!("level C = {level} must be positive")));
    }
    if !eps.is_finite() {
        return Err(Error::Rejected("non-finite eps".into()));
    }
    let bound = if eps == 0.0 {
        0.0
    } else {
        h.gradient_bound().ok_or_else(|| {
            Error::Rejected("no uniform gradient bound for this potential on the closed half-space".into())
        })?
    };
    let perturbation = eps.abs() * bound;
    if perturbation >= level {
        return Err(Error::Rejected(format!(
            "positivity not certifiable: eps * sup|grad h| = {perturbation} >= C = {level}"
        )));
    }
    let field = Field::constant(Octonion([level; 8])).with_lift(h.clone(), eps)?;
    let measures = VectorMeasure::new(std::array::from_fn(|j| {
        let density = if eps == 0.0 {
            Density::Uniform { value: level }
        } else {
            match &h {
                HarmonicPotential::Polynomial(p) => {
                    // degree <= 1: the lift is constant
                    let g = p.gradient(&[0.0; 8]);
                    let trace = if j == 0 { g[0] } else { -g[j] };
                    Density::Uniform { value: level + eps * trace }
                }
                HarmonicPotential::NewtonKernel { .. } => Density::LiftTrace {
                    potential: h.clone(),
                    component: j,
                    scale: eps,
                    offset: level,
                },
            }
        };
        BoundaryMeasure::new(Vec::new(), vec![density]).expect("positivity certified above")
    }));
    Ok(PositiveExample { field, measures, level, eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn below() -> HarmonicPotential {
        HarmonicPotential::newton([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    fn mono(coeff: f64, powers: [u32; 8]) -> Monomial {
        Monomial { coeff, powers }
    }

    #[test]
    fn kernel_lift_at_origin() {
        let f = lift(below()).unwrap();
        let v = f.eval(&Point8::new(0.0, [0.0; 7])).unwrap();
        assert_relative_eq!(v[0], -6.0, epsilon = 1e-15);
        assert!(v.0[1..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn kernel_lift_is_cauchy_kernel_shape() {
        let f = lift(HarmonicPotential::newton([0.0; 8])).unwrap();
        let p = Point8::new(0.3, [0.1, -0.2, 0.5, 0.0, 0.7, -0.4, 0.2]);
        let x = Octonion(p.to_array());
        let expected = x.conj().scale(-6.0 / x.norm().powi(8));
        let got = f.eval(&p).unwrap();
        for k in 0..8 {
            assert_relative_eq!(got[k], expected[k], max_relative = 1e-13);
        }
    }

    #[test]
    fn polynomial_harmonicity_is_checked() {
        let xy = HarmonicPolynomial::new(vec![mono(1.0, [1, 1, 0, 0, 0, 0, 0, 0])]).unwrap();
        assert_eq!(xy.degree(), 2);
        let f = lift(HarmonicPotential::Polynomial(xy)).unwrap();
        let p = Point8::new(0.5, [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let v = f.eval(&p).unwrap();
        assert_eq!(v[0], 2.0); // f0 = x1
        assert_eq!(v[1], -0.5); // f1 = -x0
        assert!(HarmonicPolynomial::new(vec![mono(1.0, [2, 0, 0, 0, 0, 0, 0, 0])]).is_err());
        // x0^2 - x3^2 is harmonic
        HarmonicPolynomial::new(vec![
            mono(1.0, [2, 0, 0, 0, 0, 0, 0, 0]),
            mono(-1.0, [0, 0, 0, 2, 0, 0, 0, 0]),
        ])
        .unwrap();
    }

    #[test]
    fn rejects_interior_pole() {
        let mut pole = [0.0; 8];
        pole[0] = 0.2;
        assert!(matches!(lift(HarmonicPotential::newton(pole)), Err(Error::Rejected(_))));
    }

    #[test]
    fn singular_point_is_a_domain_error() {
        let mut pole = [0.0; 8];
        pole[3] = 1.0;
        let f = lift(HarmonicPotential::newton(pole)).unwrap();
        assert_eq!(f.singular_points().len(), 1);
        let at = Point8::from_array(pole);
        assert!(matches!(f.eval(&at), Err(Error::Domain(_))));
        assert!(matches!(f.jacobian(&at), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_and_fixture_jacobians() {
        let c = Octonion([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let p = Point8::new(0.4, [0.1; 7]);
        assert_eq!(Field::constant(c).eval(&p).unwrap(), c);
        assert_eq!(Field::constant(c).jacobian(&p).unwrap(), [[0.0; 8]; 8]);
        let j = Field::identity_fixture().jacobian(&p).unwrap();
        for (a, row) in j.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                assert_eq!(*v, if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn normalization_flag() {
        let f = lift(below()).unwrap();
        let origin = Point8::new(0.0, [0.0; 7]);
        let g = f.normalized_at(&origin).unwrap();
        assert!(g.eval(&origin).unwrap().max_abs() < 1e-15);
        assert!(g.is_monogenic());
    }

    #[test]
    fn positive_example_bounds() {
        let ok = positive_example(10.0, 0.1, below()).unwrap();
        assert!(ok.field.is_monogenic());
        assert!(matches!(positive_example(0.1, 1.0, below()), Err(Error::Rejected(_))));
        let flat = positive_example(2.0, 0.0, below()).unwrap();
        for m in flat.measures.components() {
            assert_eq!(m.densities(), &[Density::Uniform { value: 2.0 }]);
        }
        let xy = HarmonicPolynomial::new(vec![mono(1.0, [1, 1, 0, 0, 0, 0, 0, 0])]).unwrap();
        assert!(positive_example(10.0, 0.1, HarmonicPotential::Polynomial(xy)).is_err());
    }

    #[test]
    fn positive_example_components_positive_on_boundary() {
        let ex = positive_example(10.0, 0.1, below()).unwrap();
        for x in [[0.0; 7], [0.3, -0.2, 0.0, 0.1, 0.0, 0.0, 0.5], [4.0; 7]] {
            let v = ex.field.eval(&Point8::new(0.0, x)).unwrap();
            assert!(v.0.iter().all(|c| *c > 0.0));
        }
    }
}
