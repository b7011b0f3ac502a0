//! Truncated cones and the Lusin area integral
//! `A_f(Y) = int_{Gamma(Y), y0 > eps0} y0^-6 |grad f(y)|^2 dy`.
//!
//! Heights are split into eight strata with geometric boundaries. Monte
//! Carlo draws each stratum uniformly (height density proportional to
//! `y0^7`, cross-section uniform in the 7-ball of radius `alpha y0`); the
//! layered grid uses Gauss-Legendre in height and radius with a degree-5
//! spherical rule on the cross-section.

use rayon::prelude::*;
use serde::Serialize;

use crate::dirac::{component_gradient_sq, frobenius_sq};
use crate::error::{domain, Error, Result};
use crate::fields::{Field, Point8};
use crate::quadrature::{gauss_legendre_on, sphere_rule_deg5, Method, QuadratureSpec, OMEGA7};
use crate::rng::{self, Moments};

pub const STRATA: usize = 8;

/// `Gamma(Y) = {(x0, X) : |Y - X| < alpha x0, 0 < x0 < h}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cone {
    pub vertex: [f64; 7],
    pub alpha: f64,
    pub h: f64,
}

impl Cone {
    pub fn new(vertex: [f64; 7], alpha: f64, h: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(h > 0.0) || !alpha.is_finite() || !h.is_finite() {
            return Err(Error::Config(format!("cone needs alpha > 0 and h > 0, got alpha={alpha}, h={h}")));
        }
        if vertex.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite cone vertex".into()));
        }
        Ok(Cone { vertex, alpha, h })
    }

    pub fn contains(&self, p: &Point8) -> bool {
        let d2: f64 = p.x.iter().zip(&self.vertex).map(|(a, b)| (a - b) * (a - b)).sum();
        p.x0 > 0.0 && p.x0 < self.h && d2.sqrt() < self.alpha * p.x0
    }

    /// `omega_7 alpha^7 h^8 / 8`.
    pub fn volume(&self) -> f64 {
        self.slab_volume(0.0, self.h)
    }

    /// Volume of the part with `lo < x0 < hi`.
    pub fn slab_volume(&self, lo: f64, hi: f64) -> f64 {
        OMEGA7 * self.alpha.powi(7) * (hi.powi(8) - lo.powi(8)) / 8.0
    }

    /// Point at height `y0` with unit-ball cross-section coordinate `u`.
    fn point(&self, y0: f64, u: &[f64; 7]) -> Point8 {
        let r = self.alpha * y0;
        Point8::new(y0, std::array::from_fn(|i| self.vertex[i] + r * u[i]))
    }
}

/// Height strata `[0, b1], [b1, b2], ..., [b7, h]` with
/// `b_k = floor (h / floor)^(k/8)`.
pub fn strata(cone: &Cone, q: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    let floor = q.strata_floor.unwrap_or(if q.eps0 > 0.0 { q.eps0 } else { cone.h / 256.0 });
    if !(floor > 0.0 && floor < cone.h) {
        return Err(Error::Config(format!("strata floor {floor} must lie in (0, h = {})", cone.h)));
    }
    if q.eps0 >= cone.h {
        return Err(Error::Config(format!("eps0 = {} must be below h = {}", q.eps0, cone.h)));
    }
    let ratio = cone.h / floor;
    let b: Vec<f64> = (0..=STRATA)
        .map(|k| match k {
            0 => 0.0,
            k if k == STRATA => cone.h,
            k => floor * ratio.powf(k as f64 / STRATA as f64),
        })
        .collect();
    Ok(b.windows(2).map(|w| (w[0], w[1])).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct AreaResult {
    pub vertex: [f64; 7],
    pub alpha: f64,
    pub h: f64,
    pub method: Method,
    pub total: f64,
    /// `A_{f_j}` for `j = 0..8`.
    pub per_component: [f64; 8],
    /// Standard error (Monte Carlo) or error estimate (grid).
    pub stderr: f64,
    pub budget_used: usize,
    /// Lower height cutoff the integral was taken over.
    pub truncated_at: f64,
    /// `stderr` exceeded the requested tolerance.
    pub flagged: bool,
}

impl AreaResult {
    /// `|total - sum per_component| / max(total, tiny)`.
    pub fn additivity_defect(&self) -> f64 {
        let s: f64 = self.per_component.iter().sum();
        let d = (self.total - s).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.total.abs().max(f64::MIN_POSITIVE)
        }
    }
}

fn check_domain(f: &Field, cone: &Cone, q: &QuadratureSpec) -> Result<()> {
    if q.eps0 == 0.0 {
        for s in f.singular_points() {
            if s.x == cone.vertex {
                return Err(domain(format!(
                    "field is singular at the cone vertex {:?}; use eps0 > 0",
                    cone.vertex
                )));
            }
        }
    }
    Ok(())
}

/// Estimates the area integral of `f` over `cone` above `q.eps0`.
pub fn area_integral(f: &Field, cone: &Cone, q: &QuadratureSpec) -> Result<AreaResult> {
    q.validate()?;
    check_domain(f, cone, q)?;
    let layers = strata(cone, q)?;
    let (total, per_component, stderr, used) = match q.method {
        Method::MonteCarlo => monte_carlo(f, cone, q, &layers)?,
        Method::LayeredGrid => layered_grid(f, cone, q, &layers)?,
    };
    Ok(AreaResult {
        vertex: cone.vertex,
        alpha: cone.alpha,
        h: cone.h,
        method: q.method,
        total,
        per_component,
        stderr,
        budget_used: used,
        truncated_at: q.eps0,
        flagged: stderr > q.tol,
    })
}

/// Height with density proportional to `y0^7` on `[lo, hi]`.
fn sample_height(lo: f64, hi: f64, u: f64) -> f64 {
    let (a, b) = (lo.powi(8), hi.powi(8));
    (a + u * (b - a)).powf(0.125).clamp(lo, hi)
}

type Estimate = (f64, [f64; 8], f64, usize);

fn monte_carlo(f: &Field, cone: &Cone, q: &QuadratureSpec, layers: &[(f64, f64)]) -> Result<Estimate> {
    let per_layer = (q.budget / STRATA).max(1);
    let mut total = 0.0;
    let mut comps = [0.0; 8];
    let mut var = 0.0;
    let mut used = 0;
    for (k, &(lo, hi)) in layers.iter().enumerate() {
        if hi <= q.eps0 {
            continue;
        }
        let seed = rng::derive_seed(q.seed, k as u64);
        let parts = rng::par_chunks(seed, per_layer, |g, len| -> Result<[Moments; 9]> {
            let mut m = [Moments::default(); 9];
            for _ in 0..len {
                let y0 = sample_height(lo, hi, rng::uniform(g));
                let u = rng::in_unit_ball::<7>(g);
                if y0 <= q.eps0 {
                    for mm in m.iter_mut() {
                        mm.push(0.0);
                    }
                    continue;
                }
                let jac = f.jacobian(&cone.point(y0, &u))?;
                let w = y0.powi(-6);
                m[0].push(w * frobenius_sq(&jac));
                for (mm, c) in m[1..].iter_mut().zip(component_gradient_sq(&jac)) {
                    mm.push(w * c);
                }
            }
            Ok(m)
        });
        let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
        let vol = cone.slab_volume(lo, hi);
        let combined: Vec<Moments> =
            (0..9).map(|i| Moments::combine(&parts.iter().map(|p| p[i]).collect::<Vec<_>>())).collect();
        total += vol * combined[0].mean();
        var += (vol * combined[0].stderr()).powi(2);
        for j in 0..8 {
            comps[j] += vol * combined[j + 1].mean();
        }
        used += per_layer;
    }
    Ok((total, comps, var.sqrt(), used))
}

struct GridSums {
    deg5: [f64; 9],
    deg3: f64,
}

/// Cross-section integral over `B(Y, alpha y0)` of `|grad f|^2` (total and
/// per component) with `n` radial nodes.
fn cross_section(
    f: &Field,
    cone: &Cone,
    y0: f64,
    n: usize,
    sphere: &[([f64; 7], f64)],
) -> Result<GridSums> {
    let big_r = cone.alpha * y0;
    let surface = 7.0 * OMEGA7;
    let mut out = GridSums { deg5: [0.0; 9], deg3: 0.0 };
    for (rho, wr) in gauss_legendre_on(n, 0.0, big_r) {
        let radial = wr * surface * rho.powi(6);
        for (dir, ws) in sphere {
            let u: [f64; 7] = dir.map(|v| v * rho / big_r);
            let jac = f.jacobian(&cone.point(y0, &u))?;
            let tot = frobenius_sq(&jac);
            out.deg5[0] += radial * ws * tot;
            for (o, c) in out.deg5[1..].iter_mut().zip(component_gradient_sq(&jac)) {
                *o += radial * ws * c;
            }
            // the +-e_i points alone form the degree-3 rule
            if dir.iter().filter(|v| **v != 0.0).count() == 1 {
                out.deg3 += radial * tot / 14.0;
            }
        }
    }
    Ok(out)
}

fn grid_pass(
    f: &Field,
    cone: &Cone,
    q: &QuadratureSpec,
    layers: &[(f64, f64)],
    n: usize,
    sphere: &[([f64; 7], f64)],
) -> Result<(GridSums, usize)> {
    let nodes: Vec<(f64, f64)> = layers
        .iter()
        .filter(|(_, hi)| *hi > q.eps0)
        .flat_map(|&(lo, hi)| gauss_legendre_on(n, lo.max(q.eps0), hi))
        .collect();
    let sums = nodes
        .par_iter()
        .map(|&(y0, w)| {
            let s = cross_section(f, cone, y0, n, sphere)?;
            let wy = w * y0.powi(-6);
            Ok(GridSums { deg5: s.deg5.map(|v| v * wy), deg3: s.deg3 * wy })
        })
        .collect::<Result<Vec<_>>>()?;
    let deg5 = std::array::from_fn(|i| rng::pairwise_sum(&sums.iter().map(|s| s.deg5[i]).collect::<Vec<_>>()));
    let deg3 = rng::pairwise_sum(&sums.iter().map(|s| s.deg3).collect::<Vec<_>>());
    Ok((GridSums { deg5, deg3 }, nodes.len() * n * sphere.len()))
}

fn layered_grid(f: &Field, cone: &Cone, q: &QuadratureSpec, layers: &[(f64, f64)]) -> Result<Estimate> {
    let sphere = sphere_rule_deg5::<7>();
    let per_point = STRATA * sphere.len();
    let n = ((q.budget as f64 / per_point as f64).sqrt().floor() as usize).max(2);
    let (fine, used_fine) = grid_pass(f, cone, q, layers, n, &sphere)?;
    let (coarse, used_coarse) = grid_pass(f, cone, q, layers, (n / 2).max(1), &sphere)?;
    // node-halving difference plus degree-3/degree-5 angular difference
    let err = (fine.deg5[0] - coarse.deg5[0]).abs() + (fine.deg5[0] - fine.deg3).abs();
    let comps = std::array::from_fn(|j| fine.deg5[j + 1]);
    Ok((fine.deg5[0], comps, err, used_fine + used_coarse))
}

/// Area integrals at each vertex for a common aperture, height and spec.
pub fn area_scan(
    f: &Field,
    vertices: &[[f64; 7]],
    alpha: f64,
    h: f64,
    q: &QuadratureSpec,
) -> Result<Vec<AreaResult>> {
    vertices
        .iter()
        .map(|v| area_integral(f, &Cone::new(*v, alpha, h)?, q))
        .collect()
}

/// Hit-or-miss volume of the cone inside its bounding box
/// `(0, h) x [Y - alpha h, Y + alpha h]^7`; independent of the stratified
/// sampler.
pub fn cone_volume_hit_or_miss(cone: &Cone, budget: usize, seed: u64) -> (f64, f64) {
    let half = cone.alpha * cone.h;
    let box_volume = cone.h * (2.0 * half).powi(7);
    let parts = rng::par_chunks(seed, budget, |g, len| {
        let mut m = Moments::default();
        for _ in 0..len {
            let x0 = cone.h * rng::uniform(g);
            let x: [f64; 7] = std::array::from_fn(|i| cone.vertex[i] + half * (2.0 * rng::uniform(g) - 1.0));
            m.push(if cone.contains(&Point8::new(x0, x)) { 1.0 } else { 0.0 });
        }
        m
    });
    let m = Moments::combine(&parts);
    (box_volume * m.mean(), box_volume * m.stderr())
}

/// Draws `n` points with the stratified cone sampler of stratum `k`.
pub fn sample_stratum(cone: &Cone, q: &QuadratureSpec, k: usize, n: usize) -> Result<Vec<Point8>> {
    let layers = strata(cone, q)?;
    let (lo, hi) = *layers.get(k).ok_or_else(|| Error::Config(format!("no stratum {k}")))?;
    let seed = rng::derive_seed(q.seed, k as u64);
    Ok(rng::par_chunks(seed, n, |g, len| {
        (0..len)
            .map(|_| {
                let y0 = sample_height(lo, hi, rng::uniform(g));
                let u = rng::in_unit_ball::<7>(g);
                cone.point(y0, &u)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::octonion::Octonion;

    fn unit_cone() -> Cone {
        Cone::new([0.0; 7], 1.0, 1.0).unwrap()
    }

    #[test]
    fn volume_formula() {
        let c = Cone::new([0.0; 7], 2.0, 0.5).unwrap();
        assert!((c.volume() - OMEGA7 * 128.0 * 0.5f64.powi(8) / 8.0).abs() < 1e-15);
        assert!(Cone::new([0.0; 7], 0.0, 1.0).is_err());
    }

    #[test]
    fn strata_cover_cone() {
        let c = unit_cone();
        let s = strata(&c, &QuadratureSpec::default()).unwrap();
        assert_eq!(s.len(), STRATA);
        assert_eq!(s[0].0, 0.0);
        assert_eq!(s[STRATA - 1].1, 1.0);
        assert!((s[0].1 - 2.0 / 256.0).abs() < 1e-15);
        for w in s.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let vol: f64 = s.iter().map(|(a, b)| c.slab_volume(*a, *b)).sum();
        assert!((vol - c.volume()).abs() < 1e-14);
    }

    #[test]
    fn stratum_samples_lie_in_cone() {
        let c = Cone::new([0.5; 7], 0.7, 2.0).unwrap();
        let q = QuadratureSpec::default();
        for k in 0..STRATA {
            for p in sample_stratum(&c, &q, k, 500).unwrap() {
                assert!(c.contains(&p) || p.x0 == 0.0, "{p:?}");
            }
        }
    }

    #[test]
    fn constant_field_has_zero_area() {
        let f = Field::constant(Octonion([1.0; 8]));
        let r = area_integral(&f, &unit_cone(), &QuadratureSpec::monte_carlo(2000, 1)).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.per_component, [0.0; 8]);
        let r = area_integral(&f, &unit_cone(), &QuadratureSpec::layered_grid(5000)).unwrap();
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn fixture_area_closed_form() {
        // |grad f|^2 = 8: A = 8 int_0^h y0^-6 omega7 (alpha y0)^7 dy0 = 4 omega7 alpha^7 h^2
        let f = Field::identity_fixture();
        let c = Cone::new([0.1; 7], 0.5, 1.5).unwrap();
        let exact = 4.0 * OMEGA7 * 0.5f64.powi(7) * 1.5 * 1.5;
        let g = area_integral(&f, &c, &QuadratureSpec::layered_grid(20_000)).unwrap();
        assert!((g.total - exact).abs() < 1e-12 * exact);
        let m = area_integral(&f, &c, &QuadratureSpec::monte_carlo(40_000, 3)).unwrap();
        assert!((m.total - exact).abs() < 4.0 * m.stderr.max(1e-12 * exact), "{} vs {exact}", m.total);
        assert!(m.additivity_defect() <= 1e-12);
    }

    #[test]
    fn vertex_singularity_needs_cutoff() {
        let f = crate::fields::lift(crate::fields::HarmonicPotential::newton([0.0; 8])).unwrap();
        let q = QuadratureSpec::monte_carlo(1000, 1);
        assert!(matches!(area_integral(&f, &unit_cone(), &q), Err(Error::Domain(_))));
        assert!(area_integral(&f, &unit_cone(), &q.with_eps0(0.1)).is_ok());
    }
}
