//! Normal and non-tangential boundary-limit estimators.
//!
//! Limit existence is decided by a Cauchy-tail proxy: along heights
//! `x0 = h0 * r^k` the last `tail` successive differences must all be at most
//! `rel_tol * scale`, with `scale = max(1, |f|)` at the first height. A
//! component is classified infinite when its magnitude grows monotonically
//! with constant sign past `blowup * scale`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Field, Point8};
use crate::octonion::Octonion;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitStatus {
    Finite,
    Infinite,
    Divergent,
    Inconclusive,
}

impl LimitStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LimitStatus::Finite => "finite",
            LimitStatus::Infinite => "infinite",
            LimitStatus::Divergent => "divergent",
            LimitStatus::Inconclusive => "inconclusive",
        }
    }
}

/// Thresholds of the Cauchy-tail proxy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCriterion {
    pub tail: usize,
    pub rel_tol: f64,
    pub blowup: f64,
}

impl Default for TailCriterion {
    fn default() -> Self {
        TailCriterion { tail: 5, rel_tol: 1e-6, blowup: 1e6 }
    }
}

/// Verdict for one scalar sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentLimit {
    pub status: LimitStatus,
    /// Last sampled value for finite limits, `±inf` for infinite ones.
    pub value: f64,
    /// Largest successive difference over the tail.
    pub tail_oscillation: f64,
}

impl ComponentLimit {
    fn inconclusive() -> Self {
        ComponentLimit { status: LimitStatus::Inconclusive, value: f64::NAN, tail_oscillation: f64::NAN }
    }

    pub fn is_finite(&self) -> bool {
        self.status == LimitStatus::Finite
    }
}

/// Classifies a sequence sampled at decreasing heights.
pub fn classify_tail(values: &[f64], scale: f64, crit: &TailCriterion) -> ComponentLimit {
    if values.len() < crit.tail + 1 || values.iter().any(|v| v.is_nan()) {
        return ComponentLimit::inconclusive();
    }
    let tail = &values[values.len() - crit.tail - 1..];
    let diffs: Vec<f64> = tail.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let osc = diffs.iter().fold(0.0_f64, |a, b| a.max(*b));
    let last = *tail.last().expect("non-empty tail");
    if diffs.iter().all(|dv| *dv <= crit.rel_tol * scale) {
        return ComponentLimit { status: LimitStatus::Finite, value: last, tail_oscillation: osc };
    }
    let same_sign = tail.iter().all(|v| v.signum() == last.signum() && *v != 0.0);
    let growing = tail.windows(2).all(|w| w[1].abs() > w[0].abs());
    if same_sign && growing && (last.abs() > crit.blowup * scale || last.is_infinite()) {
        return ComponentLimit {
            status: LimitStatus::Infinite,
            value: f64::INFINITY.copysign(last),
            tail_oscillation: osc,
        };
    }
    let shrinking = diffs.windows(2).all(|w| w[1] < w[0]);
    let status = if shrinking { LimitStatus::Inconclusive } else { LimitStatus::Divergent };
    ComponentLimit { status, value: last, tail_oscillation: osc }
}

/// Heights `h0 * ratio^k`, `k = 0..=steps`, and the tail criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitParams {
    pub h0: f64,
    pub ratio: f64,
    pub steps: usize,
    pub criterion: TailCriterion,
    /// Cross-ray spread allowed for a non-tangential limit, relative to scale.
    pub spread_tol: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams { h0: 1.0, ratio: 0.5, steps: 40, criterion: TailCriterion::default(), spread_tol: 1e-5 }
    }
}

impl LimitParams {
    pub fn heights(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.h0 * self.ratio.powi(k as i32)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0) || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Config("heights need h0 > 0 and 0 < ratio < 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Approach {
    Normal,
    NonTangential { alpha: f64, rays: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub approach: Approach,
    pub status: LimitStatus,
    /// Present only when every component is finite.
    pub value: Option<Octonion>,
    pub components: [ComponentLimit; 8],
    pub scale: f64,
    pub tail_oscillation: f64,
    /// Largest cross-ray difference of finite ray limits (0 for the normal approach).
    pub spread: f64,
    /// Heights entering the tail test.
    pub last_heights: Vec<f64>,
    /// Sample points dropped because the field is singular there.
    pub skipped: usize,
}

impl LimitReport {
    pub fn is_finite(&self) -> bool {
        self.status == LimitStatus::Finite
    }

    /// Whether components `range` all have finite limits.
    pub fn finite_on(&self, range: std::ops::Range<usize>) -> bool {
        self.components[range].iter().all(ComponentLimit::is_finite)
    }
}

fn overall(components: &[ComponentLimit; 8]) -> LimitStatus {
    let has = |s| components.iter().any(|c| c.status == s);
    if components.iter().all(ComponentLimit::is_finite) {
        LimitStatus::Finite
    } else if has(LimitStatus::Divergent) {
        LimitStatus::Divergent
    } else if has(LimitStatus::Infinite) {
        LimitStatus::Infinite
    } else {
        LimitStatus::Inconclusive
    }
}

struct Sequence {
    values: Vec<Octonion>,
    heights: Vec<f64>,
    skipped: usize,
}

fn sample_sequence(f: &Field, heights: &[f64], at: impl Fn(f64) -> Point8) -> Result<Sequence> {
    let mut seq = Sequence { values: Vec::new(), heights: Vec::new(), skipped: 0 };
    for &h in heights {
        match f.eval(&at(h)) {
            Ok(v) => {
                seq.values.push(v);
                seq.heights.push(h);
            }
            Err(Error::Domain(_)) => seq.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(seq)
}

fn classify_sequence(seq: &Sequence, scale: f64, crit: &TailCriterion) -> [ComponentLimit; 8] {
    std::array::from_fn(|j| {
        let comp: Vec<f64> = seq.values.iter().map(|v| v[j]).collect();
        classify_tail(&comp, scale, crit)
    })
}

fn start_scale(seq: &Sequence) -> f64 {
    seq.values.first().map_or(1.0, |v| v.norm().max(1.0))
}

fn tail_heights(seq: &Sequence, crit: &TailCriterion) -> Vec<f64> {
    let n = seq.heights.len();
    seq.heights[n.saturating_sub(crit.tail + 1)..].to_vec()
}

/// Limit of `f(x0, X)` as `x0 -> 0+` along the normal.
pub fn normal_limit(f: &Field, x: &[f64; 7], params: &LimitParams) -> Result<LimitReport> {
    params.validate()?;
    let seq = sample_sequence(f, &params.heights(), |h| Point8::new(h, *x))?;
    let scale = start_scale(&seq);
    let components = classify_sequence(&seq, scale, &params.criterion);
    let status = overall(&components);
    Ok(LimitReport {
        approach: Approach::Normal,
        status,
        value: (status == LimitStatus::Finite).then(|| Octonion(components.map(|c| c.value))),
        tail_oscillation: components.iter().fold(0.0_f64, |a, c| a.max(c.tail_oscillation)),
        components,
        scale,
        spread: 0.0,
        last_heights: tail_heights(&seq, &params.criterion),
        skipped: seq.skipped,
    })
}

/// Ray directions `v` with `|v| < alpha`, drawn uniformly from the cone's
/// unit-height cross-section.
pub fn ray_directions(alpha: f64, count: usize, seed: u64) -> Vec<[f64; 7]> {
    let mut rng = rng::stream(seed, 0);
    (0..count).map(|_| rng::in_unit_ball::<7>(&mut rng).map(|u| alpha * u)).collect()
}

/// Limit of `f` at `(0, Y)` inside the cone `|Y - X| < alpha x0`, probed
/// along `ray_count` seeded rays `X = Y + x0 v`.
pub fn nontangential_limit(
    f: &Field,
    y: &[f64; 7],
    alpha: f64,
    ray_count: usize,
    seed: u64,
    params: &LimitParams,
) -> Result<LimitReport> {
    params.validate()?;
    if !(alpha > 0.0) || ray_count == 0 {
        return Err(Error::Config("non-tangential limit needs alpha > 0 and at least one ray".into()));
    }
    let heights = params.heights();
    let seqs: Vec<Sequence> = ray_directions(alpha, ray_count, seed)
        .par_iter()
        .map(|v| {
            sample_sequence(f, &heights, |h| {
                Point8::new(h, std::array::from_fn(|i| y[i] + h * v[i]))
            })
        })
        .collect::<Result<_>>()?;
    let scale = seqs.iter().map(start_scale).fold(1.0_f64, f64::max);
    let per_ray: Vec<[ComponentLimit; 8]> =
        seqs.iter().map(|s| classify_sequence(s, scale, &params.criterion)).collect();
    let mut spread = 0.0_f64;
    let components: [ComponentLimit; 8] = std::array::from_fn(|j| {
        let rays: Vec<&ComponentLimit> = per_ray.iter().map(|r| &r[j]).collect();
        let osc = rays.iter().fold(0.0_f64, |a, c| a.max(c.tail_oscillation));
        let any = |s| rays.iter().any(|c| c.status == s);
        if rays.iter().all(|c| c.is_finite()) {
            let lo = rays.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
            let hi = rays.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
            spread = spread.max(hi - lo);
            if hi - lo <= params.spread_tol * scale {
                let mean = rays.iter().map(|c| c.value).sum::<f64>() / rays.len() as f64;
                return ComponentLimit { status: LimitStatus::Finite, value: mean, tail_oscillation: osc };
            }
            // rays converge to different values
            return ComponentLimit { status: LimitStatus::Divergent, value: f64::NAN, tail_oscillation: osc };
        }
        let status = if any(LimitStatus::Divergent) {
            LimitStatus::Divergent
        } else if any(LimitStatus::Infinite) {
            LimitStatus::Infinite
        } else {
            LimitStatus::Inconclusive
        };
        let value = match status {
            LimitStatus::Infinite => rays
                .iter()
                .find(|c| c.status == LimitStatus::Infinite)
                .map_or(f64::NAN, |c| c.value),
            _ => f64::NAN,
        };
        ComponentLimit { status, value, tail_oscillation: osc }
    });
    let status = overall(&components);
    Ok(LimitReport {
        approach: Approach::NonTangential { alpha, rays: ray_count },
        status,
        value: (status == LimitStatus::Finite).then(|| Octonion(components.map(|c| c.value))),
        tail_oscillation: components.iter().fold(0.0_f64, |a, c| a.max(c.tail_oscillation)),
        components,
        scale,
        spread,
        last_heights: seqs.first().map(|s| tail_heights(s, &params.criterion)).unwrap_or_default(),
        skipped: seqs.iter().map(|s| s.skipped).sum(),
    })
}

/// One boundary point of the scalar/vector consistency experiment.
#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Row {
    pub point: [f64; 7],
    /// `f0` has a non-tangential limit.
    pub scalar_exists: bool,
    /// Each of `f1..f7` has a non-tangential limit.
    pub vector_exists: bool,
    pub agree: bool,
    pub report: LimitReport,
}

/// Compares existence of the non-tangential limit of the scalar part with
/// that of the vector part at every grid point.
pub fn theorem1_experiment(
    f: &Field,
    grid: &[[f64; 7]],
    alpha: f64,
    ray_count: usize,
    seed: u64,
    params: &LimitParams,
) -> Result<Vec<Theorem1Row>> {
    grid.par_iter()
        .map(|y| {
            let report = nontangential_limit(f, y, alpha, ray_count, seed, params)?;
            let scalar_exists = report.components[0].is_finite();
            let vector_exists = report.finite_on(1..8);
            Ok(Theorem1Row { point: *y, scalar_exists, vector_exists, agree: scalar_exists == vector_exists, report })
        })
        .collect()
}
