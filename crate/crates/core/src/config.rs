//! JSON experiment configuration.
//!
//! Unknown keys are rejected everywhere. Every sample budget can be scaled
//! uniformly with [`ExperimentConfig::scale_budgets`], and a single seed
//! drives all randomness.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::{LimitParams, TailCriterion};
use crate::error::{Error, Result};
use crate::fields::{Field, HarmonicPolynomial, HarmonicPotential, Monomial};
use crate::herglotz::{Atom, BoundaryMeasure, Density, HerglotzData, PoissonSamples};
use crate::octonion::Octonion;
use crate::quadrature::{Method, QuadratureSpec};
use crate::rng;

pub const MIN_BUDGET: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default = "default_summary")]
    pub summary: String,
}

fn default_summary() -> String {
    "summary.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { csv: None, summary: default_summary() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub terms: Vec<TermSpec>,
    /// Shift by a constant so that `f(0) = 0`.
    #[serde(default)]
    pub normalize_at_origin: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TermSpec {
    Constant {
        value: [f64; 8],
    },
    Lift {
        potential: PotentialSpec,
        #[serde(default = "one")]
        weight: f64,
    },
    PoissonExtension {
        #[serde(default)]
        component: usize,
        #[serde(default)]
        c: f64,
        measure: MeasureSpec,
        #[serde(default = "default_poisson_budget")]
        budget: usize,
    },
    IdentityFixture,
}

fn one() -> f64 {
    1.0
}

fn default_poisson_budget() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    NewtonKernel { pole: [f64; 8] },
    HarmonicPolynomial { terms: Vec<MonomialSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coeff: f64,
    pub powers: [u32; 8],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub densities: Vec<DensitySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub location: [f64; 7],
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform { value: f64 },
    Ball { center: [f64; 7], radius: f64, value: f64 },
    LiftTrace { pole: [f64; 8], component: usize, scale: f64, offset: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_area_budget")]
    pub budget: usize,
    #[serde(default)]
    pub eps0: f64,
    #[serde(default = "inf")]
    pub tol: f64,
    #[serde(default)]
    pub strata_floor: Option<f64>,
}

fn default_method() -> Method {
    Method::MonteCarlo
}

fn default_area_budget() -> usize {
    100_000
}

fn inf() -> f64 {
    f64::INFINITY
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            method: default_method(),
            budget: default_area_budget(),
            eps0: 0.0,
            tol: f64::INFINITY,
            strata_floor: None,
        }
    }
}

impl QuadratureConfig {
    pub fn spec(&self, seed: u64) -> QuadratureSpec {
        QuadratureSpec {
            method: self.method,
            budget: self.budget,
            seed,
            eps0: self.eps0,
            tol: self.tol,
            strata_floor: self.strata_floor,
        }
    }
}

/// Heights `h0 * ratio^k`, `k = 0..=steps`, and the tail criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitConfig {
    pub h0: f64,
    pub ratio: f64,
    pub steps: usize,
    pub tail: usize,
    pub rel_tol: f64,
    pub blowup: f64,
    pub spread_tol: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        let p = LimitParams::default();
        LimitConfig {
            h0: p.h0,
            ratio: p.ratio,
            steps: p.steps,
            tail: p.criterion.tail,
            rel_tol: p.criterion.rel_tol,
            blowup: p.criterion.blowup,
            spread_tol: p.spread_tol,
        }
    }
}

impl LimitConfig {
    pub fn params(&self) -> LimitParams {
        LimitParams {
            h0: self.h0,
            ratio: self.ratio,
            steps: self.steps,
            criterion: TailCriterion { tail: self.tail, rel_tol: self.rel_tol, blowup: self.blowup },
            spread_tol: self.spread_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Verify(VerifyParams),
    Area(AreaParams),
    Ntlimit(NtLimitParams),
    Herglotz(HerglotzParams),
    Subharmonic(SubharmonicParams),
    Theorem1(Theorem1Params),
    Theorem2(Theorem2Params),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Verify(_) => "verify",
            Experiment::Area(_) => "area",
            Experiment::Ntlimit(_) => "ntlimit",
            Experiment::Herglotz(_) => "herglotz",
            Experiment::Subharmonic(_) => "subharmonic",
            Experiment::Theorem1(_) => "theorem1",
            Experiment::Theorem2(_) => "theorem2",
        }
    }
}

/// Random interior points: `x0` uniform in `[x0_min, x0_max]`, `X` uniform
/// in `[-extent, extent]^7`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointCloud {
    pub count: usize,
    pub x0_min: f64,
    pub x0_max: f64,
    pub extent: f64,
    /// Points closer than this to a pole are redrawn.
    pub pole_clearance: f64,
}

impl Default for PointCloud {
    fn default() -> Self {
        PointCloud { count: 1000, x0_min: 0.05, x0_max: 2.0, extent: 2.0, pole_clearance: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    pub points: PointCloud,
    pub residual_tol: f64,
    pub fd_step: f64,
    pub fd_tol: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams { points: PointCloud::default(), residual_tol: 1e-10, fd_step: 1e-5, fd_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaParams {
    pub vertices: Vec<[f64; 7]>,
    pub alpha: f64,
    pub h: f64,
    pub quadrature: QuadratureConfig,
    /// Extra cutoffs; each vertex is integrated at every value.
    pub eps0_list: Vec<f64>,
    /// Also run the layered grid and compare within 3 combined errors.
    pub compare_grid: bool,
    pub grid_budget: usize,
}

impl Default for AreaParams {
    fn default() -> Self {
        AreaParams {
            vertices: vec![[0.0; 7]],
            alpha: 1.0,
            h: 1.0,
            quadrature: QuadratureConfig::default(),
            eps0_list: Vec::new(),
            compare_grid: false,
            grid_budget: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NtLimitParams {
    pub points: Vec<[f64; 7]>,
    pub alphas: Vec<f64>,
    pub rays: usize,
    pub limit: LimitConfig,
}

impl Default for NtLimitParams {
    fn default() -> Self {
        NtLimitParams {
            points: vec![[0.0; 7]],
            alphas: vec![0.5, 1.0, 2.0],
            rays: 16,
            limit: LimitConfig::default(),
        }
    }
}

/// Expected verdicts, turned into gating assertions when present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HerglotzExpect {
    pub infinite: Option<bool>,
    pub finite_limit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HerglotzParams {
    pub measure: MeasureSpec,
    pub c: f64,
    pub points: Vec<[f64; 7]>,
    pub radii_from: i32,
    pub radii_to: i32,
    pub a: f64,
    pub budget: usize,
    pub agree_rel: f64,
    pub limit: LimitConfig,
    pub expect: HerglotzExpect,
}

impl Default for HerglotzParams {
    fn default() -> Self {
        HerglotzParams {
            measure: MeasureSpec::default(),
            c: 0.0,
            points: vec![[0.0; 7]],
            radii_from: 3,
            radii_to: 20,
            a: 1.0,
            budget: 20_000,
            agree_rel: 0.02,
            limit: LimitConfig::default(),
            expect: HerglotzExpect::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub zero: [f64; 8],
    pub p_grid: Vec<f64>,
    #[serde(default)]
    pub nearby: Vec<[f64; 8]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubharmonicParams {
    pub ps: Vec<f64>,
    pub points: PointCloud,
    pub radii: Vec<f64>,
    pub sphere_budget: usize,
    pub probe: Option<ProbeSpec>,
}

impl Default for SubharmonicParams {
    fn default() -> Self {
        SubharmonicParams {
            ps: vec![6.0 / 7.0, 1.0, 2.0],
            points: PointCloud { count: 100, x0_min: 0.3, ..PointCloud::default() },
            radii: vec![0.05, 0.1, 0.2],
            sphere_budget: 100_000,
            probe: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem1Params {
    pub grid: Vec<[f64; 7]>,
    pub alpha: f64,
    pub rays: usize,
    pub limit: LimitConfig,
}

impl Default for Theorem1Params {
    fn default() -> Self {
        Theorem1Params { grid: vec![[0.0; 7]], alpha: 1.0, rays: 16, limit: LimitConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem2Params {
    pub level: f64,
    pub eps: f64,
    pub potential: PotentialSpec,
    pub points: Vec<[f64; 7]>,
    pub radii_from: i32,
    pub radii_to: i32,
    pub a: f64,
    pub budget: usize,
    pub agree_rel: f64,
    pub extra_atom: Option<f64>,
    pub limit: LimitConfig,
}

impl Default for Theorem2Params {
    fn default() -> Self {
        Theorem2Params {
            level: 10.0,
            eps: 0.1,
            potential: PotentialSpec::NewtonKernel { pole: [-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0] },
            points: vec![[0.0; 7]],
            radii_from: 3,
            radii_to: 20,
            a: 1.0,
            budget: 20_000,
            agree_rel: 0.02,
            extra_atom: None,
            limit: LimitConfig::default(),
        }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<HarmonicPotential> {
        Ok(match self {
            PotentialSpec::NewtonKernel { pole } => HarmonicPotential::newton(*pole),
            PotentialSpec::HarmonicPolynomial { terms } => HarmonicPotential::Polynomial(HarmonicPolynomial::new(
                terms.iter().map(|t| Monomial { coeff: t.coeff, powers: t.powers }).collect(),
            )?),
        })
    }
}

impl MeasureSpec {
    pub fn build(&self) -> Result<BoundaryMeasure> {
        let atoms = self.atoms.iter().map(|a| Atom { location: a.location, mass: a.mass }).collect();
        let densities = self
            .densities
            .iter()
            .map(|d| match d {
                DensitySpec::Uniform { value } => Density::Uniform { value: *value },
                DensitySpec::Ball { center, radius, value } => {
                    Density::Ball { center: *center, radius: *radius, value: *value }
                }
                DensitySpec::LiftTrace { pole, component, scale, offset } => Density::LiftTrace {
                    potential: HarmonicPotential::newton(*pole),
                    component: *component,
                    scale: *scale,
                    offset: *offset,
                },
            })
            .collect();
        BoundaryMeasure::new(atoms, densities)
    }
}

impl FieldSpec {
    pub fn build(&self, seed: u64) -> Result<Field> {
        let mut f = Field::default();
        for (i, t) in self.terms.iter().enumerate() {
            f = match t {
                TermSpec::Constant { value } => f.with_constant(Octonion(*value)),
                TermSpec::Lift { potential, weight } => f.with_lift(potential.build()?, *weight)?,
                TermSpec::PoissonExtension { component, c, measure, budget } => {
                    let data = HerglotzData::new(*c, measure.build()?)?;
                    let samples = PoissonSamples::new(data, *budget, rng::derive_seed(seed, 100 + i as u64));
                    f.with_poisson_extension(Arc::new(samples), *component)?
                }
                TermSpec::IdentityFixture => f.with_identity_fixture(),
            };
        }
        if self.normalize_at_origin {
            f = f.normalized_at(&crate::fields::Point8::new(0.0, [0.0; 7]))?;
        }
        Ok(f)
    }
}

fn scaled(b: usize, r: f64) -> usize {
    ((b as f64 * r).round() as usize).max(MIN_BUDGET)
}

impl ExperimentConfig {
    /// Parses a config; errors carry serde's line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let needs_field = !matches!(self.experiment, Experiment::Herglotz(_) | Experiment::Theorem2(_));
        if needs_field && self.field.is_none() {
            return Err(Error::Config(format!("experiment '{}' requires a 'field' section", self.experiment.name())));
        }
        if !needs_field && self.field.is_some() {
            return Err(Error::Config(format!(
                "experiment '{}' builds its own field; remove the 'field' section",
                self.experiment.name()
            )));
        }
        match &self.experiment {
            Experiment::Area(a) if a.vertices.is_empty() => Err(Error::Config("area: no vertices".into())),
            Experiment::Ntlimit(n) if n.alphas.iter().any(|a| !(*a > 0.0)) => {
                Err(Error::Config("ntlimit: alphas must be positive".into()))
            }
            Experiment::Subharmonic(s) if s.ps.iter().any(|p| !(*p > 0.0)) => {
                Err(Error::Config("subharmonic: exponents must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Multiplies every sample budget by `r` (floored at [`MIN_BUDGET`]).
    pub fn scale_budgets(&mut self, r: f64) {
        if let Some(f) = &mut self.field {
            for t in &mut f.terms {
                if let TermSpec::PoissonExtension { budget, .. } = t {
                    *budget = scaled(*budget, r);
                }
            }
        }
        match &mut self.experiment {
            Experiment::Area(a) => {
                a.quadrature.budget = scaled(a.quadrature.budget, r);
                a.grid_budget = scaled(a.grid_budget, r);
            }
            Experiment::Herglotz(h) => h.budget = scaled(h.budget, r),
            Experiment::Subharmonic(s) => s.sphere_budget = scaled(s.sphere_budget, r),
            Experiment::Theorem2(t) => t.budget = scaled(t.budget, r),
            Experiment::Verify(_) | Experiment::Ntlimit(_) | Experiment::Theorem1(_) => {}
        }
    }

    pub fn build_field(&self) -> Result<Option<Field>> {
        self.field.as_ref().map(|f| f.build(self.seed)).transpose()
    }
}

pub const GENERATORS: [&str; 4] = ["constant", "lift:newton-kernel", "lift:harmonic-polynomial", "poisson-extension"];

/// Schema summary and defaults for one experiment kind.
pub fn describe(kind: &str) -> Result<String> {
    let example = |e: Experiment| serde_json::to_string_pretty(&e).expect("serialisable");
    let (about, body) = match kind {
        "verify" => (
            "Dirac residual, row-0 and U = P(D)V identities, second gradient and finite-difference Jacobian check on random interior points.",
            example(Experiment::Verify(VerifyParams::default())),
        ),
        "area" => (
            "Lusin area integral over truncated cones |Y - X| < alpha x0, eps0 < x0 < h, per vertex and cutoff.",
            example(Experiment::Area(AreaParams::default())),
        ),
        "ntlimit" => (
            "Normal and non-tangential limits at boundary points for each aperture.",
            example(Experiment::Ntlimit(NtLimitParams::default())),
        ),
        "herglotz" => (
            "Poisson extension of a boundary measure, ball masses and the finite/infinite ball-mass criteria.",
            example(Experiment::Herglotz(HerglotzParams::default())),
        ),
        "subharmonic" => (
            "Mean-value test of |f|^p on spheres, optional exponent probe near a zero.",
            example(Experiment::Subharmonic(SubharmonicParams::default())),
        ),
        "theorem1" => (
            "Existence of the non-tangential limit of f0 against that of (f1..f7) on a boundary grid.",
            example(Experiment::Theorem1(Theorem1Params::default())),
        ),
        "theorem2" => (
            "Componentwise normal limits of a positive field against ball-mass limits of its measures.",
            example(Experiment::Theorem2(Theorem2Params::default())),
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown experiment '{other}'; expected one of verify, area, ntlimit, herglotz, subharmonic, theorem1, theorem2"
            )))
        }
    };
    Ok(format!(
        "{kind}: {about}\n\nTop-level keys: seed (default 1), field (terms, normalize_at_origin), experiment, output (csv, summary).\n\nexperiment with defaults:\n{body}\n"
    ))
}
