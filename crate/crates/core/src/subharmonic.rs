//! Mean-value test for subharmonicity of `|f|^p`.
//!
//! `|f|^p` is subharmonic when `|f(x)|^p <= mean over S(x, r) of |f|^p` for
//! every sphere in the domain. Spherical means are estimated with antithetic
//! pairs `x ± r w`; a violation is recorded only when the centre value
//! exceeds the mean by more than `3 stderr + 1e-9`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Field, Point8};
use crate::rng::{self, Moments};

/// Critical exponent `(n - 2) / (n - 1)` at `n = 8`.
pub const CRITICAL_EXPONENT: f64 = 6.0 / 7.0;

pub const ABS_TOL: f64 = 1e-9;

/// Norms of `f` at a centre and on antithetic pairs of a sphere around it.
#[derive(Clone, Debug)]
pub struct SphereSample {
    pub center: Point8,
    pub radius: f64,
    pub center_norm: f64,
    pairs: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanValueRow {
    pub p: f64,
    pub point: [f64; 8],
    pub radius: f64,
    pub center_value: f64,
    pub mean: f64,
    pub stderr: f64,
    /// `mean - center_value`; negative values are deficits.
    pub margin: f64,
    pub violation: bool,
}

impl SphereSample {
    /// Samples `budget` points (in `budget / 2` antithetic pairs).
    pub fn new(f: &Field, center: Point8, radius: f64, budget: usize, seed: u64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("sphere radius {radius} must be positive")));
        }
        let center_norm = f.eval(&center)?.norm();
        let pairs = rng::par_chunks(seed, (budget / 2).max(1), |g, len| {
            (0..len)
                .map(|_| {
                    let w = rng::unit_vector::<8>(g);
                    let c = center.to_array();
                    let plus = Point8::from_array(std::array::from_fn(|i| c[i] + radius * w[i]));
                    let minus = Point8::from_array(std::array::from_fn(|i| c[i] - radius * w[i]));
                    Ok((f.eval(&plus)?.norm(), f.eval(&minus)?.norm()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
        Ok(SphereSample { center, radius, center_norm, pairs })
    }

    pub fn row(&self, p: f64) -> MeanValueRow {
        let mut m = Moments::default();
        for (a, b) in &self.pairs {
            m.push(0.5 * (a.powf(p) + b.powf(p)));
        }
        let center_value = self.center_norm.powf(p);
        let (mean, stderr) = (m.mean(), m.stderr());
        MeanValueRow {
            p,
            point: self.center.to_array(),
            radius: self.radius,
            center_value,
            mean,
            stderr,
            margin: mean - center_value,
            violation: center_value > mean + 3.0 * stderr + ABS_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Skipped {
    pub point: [f64; 8],
    pub radius: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubharmonicityReport {
    pub p: f64,
    pub tested: usize,
    pub violations: Vec<MeanValueRow>,
    pub skipped: Vec<Skipped>,
    /// Smallest `margin` over tested spheres.
    pub min_margin: f64,
    pub rows: Vec<MeanValueRow>,
}

/// Whether the closed ball `B(x, r)` lies in the open half-space and at
/// positive distance from every pole of `f`.
pub fn sphere_in_domain(f: &Field, x: &Point8, r: f64) -> std::result::Result<(), String> {
    if x.x0 - r <= 0.0 {
        return Err(format!("sphere leaves the half-space (x0 = {}, r = {r})", x.x0));
    }
    let c = x.to_array();
    for pole in f.poles() {
        let d = c.iter().zip(&pole).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d <= r {
            return Err(format!("sphere contains pole {pole:?}"));
        }
    }
    Ok(())
}

/// Sphere samples for every `(point, radius)` pair inside the domain.
pub fn sample_spheres(
    f: &Field,
    points: &[Point8],
    radii: &[f64],
    sphere_budget: usize,
    seed: u64,
) -> Result<(Vec<SphereSample>, Vec<Skipped>)> {
    let pairs: Vec<(usize, Point8, f64)> = points
        .iter()
        .flat_map(|p| radii.iter().map(move |r| (*p, *r)))
        .enumerate()
        .map(|(i, (p, r))| (i, p, r))
        .collect();
    let results: Vec<std::result::Result<SphereSample, Skipped>> = pairs
        .par_iter()
        .map(|(i, p, r)| match sphere_in_domain(f, p, *r) {
            Err(reason) => Ok(Err(Skipped { point: p.to_array(), radius: *r, reason })),
            Ok(()) => SphereSample::new(f, *p, *r, sphere_budget, rng::derive_seed(seed, *i as u64)).map(Ok),
        })
        .collect::<Result<_>>()?;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(s) => skipped.push(s),
        }
    }
    Ok((samples, skipped))
}

fn report(p: f64, samples: &[SphereSample], skipped: &[Skipped]) -> SubharmonicityReport {
    let rows: Vec<MeanValueRow> = samples.iter().map(|s| s.row(p)).collect();
    SubharmonicityReport {
        p,
        tested: rows.len(),
        violations: rows.iter().filter(|r| r.violation).copied().collect(),
        skipped: skipped.to_vec(),
        min_margin: rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        rows,
    }
}

/// Mean-value test of `|f|^p` on every `(point, radius)` pair.
pub fn mean_value_test(
    f: &Field,
    p: f64,
    points: &[Point8],
    radii: &[f64],
    sphere_budget: usize,
    seed: u64,
) -> Result<SubharmonicityReport> {
    Ok(mean_value_test_multi(f, &[p], points, radii, sphere_budget, seed)?.remove(0))
}

/// As [`mean_value_test`] for several exponents on one shared sample set.
pub fn mean_value_test_multi(
    f: &Field,
    ps: &[f64],
    points: &[Point8],
    radii: &[f64],
    sphere_budget: usize,
    seed: u64,
) -> Result<Vec<SubharmonicityReport>> {
    if ps.is_empty() || ps.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Config("exponents must be positive".into()));
    }
    let (samples, skipped) = sample_spheres(f, points, radii, sphere_budget, seed)?;
    Ok(ps.iter().map(|&p| report(p, &samples, &skipped)).collect())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbeRow {
    pub p: f64,
    pub min_margin: f64,
    /// `min_margin` divided by the mean at the minimising sphere.
    pub min_relative_margin: f64,
    pub violations: usize,
    pub tested: usize,
}

/// Scans exponents for `g = f - f(zero)`, which vanishes at `zero`, on
/// spheres centred at `zero` and at the given nearby points.
pub fn exponent_probe(
    f: &Field,
    zero: &Point8,
    p_grid: &[f64],
    nearby: &[Point8],
    radii: &[f64],
    sphere_budget: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let g = f.normalized_at(zero)?;
    let mut points = vec![*zero];
    points.extend_from_slice(nearby);
    let reports = mean_value_test_multi(&g, p_grid, &points, radii, sphere_budget, seed)?;
    Ok(reports
        .into_iter()
        .map(|r| {
            let worst = r.rows.iter().min_by(|a, b| a.margin.total_cmp(&b.margin));
            ProbeRow {
                p: r.p,
                min_margin: r.min_margin,
                min_relative_margin: worst.map_or(f64::NAN, |w| w.margin / w.mean.abs().max(f64::MIN_POSITIVE)),
                violations: r.violations.len(),
                tested: r.tested,
            }
        })
        .collect())
}

/// Componentwise mean and standard error of `n` sampled directions on `S^7`.
pub fn direction_moments(n: usize, seed: u64) -> [(f64, f64); 8] {
    let parts = rng::par_chunks(seed, n, |g, len| {
        let mut m = [Moments::default(); 8];
        for _ in 0..len {
            for (mm, v) in m.iter_mut().zip(rng::unit_vector::<8>(g)) {
                mm.push(v);
            }
        }
        m
    });
    std::array::from_fn(|i| {
        let c = Moments::combine(&parts.iter().map(|p| p[i]).collect::<Vec<_>>());
        (c.mean(), c.stderr())
    })
}
