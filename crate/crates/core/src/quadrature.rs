//! Deterministic quadrature rules and the sampling specification shared by
//! every integral estimate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volume of the unit ball in `R^7`, `16 pi^3 / 105`.
pub const OMEGA7: f64 = 16.0 * PI * PI * PI / 105.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo,
    LayeredGrid,
}

/// Method, sample budget, seed, lower height cutoff and target tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub method: Method,
    pub budget: usize,
    pub seed: u64,
    /// Lower height cutoff; the integral is taken over `y0 > eps0`.
    pub eps0: f64,
    /// Target standard error (absolute).
    pub tol: f64,
    /// Lowest stratum boundary. When unset it follows `eps0`; fixing it
    /// across runs with different `eps0` keeps the sample set nested.
    pub strata_floor: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: Method::MonteCarlo,
            budget: 100_000,
            seed: 1,
            eps0: 0.0,
            tol: f64::INFINITY,
            strata_floor: None,
        }
    }
}

impl QuadratureSpec {
    pub fn monte_carlo(budget: usize, seed: u64) -> Self {
        QuadratureSpec { budget, seed, ..Default::default() }
    }

    pub fn layered_grid(budget: usize) -> Self {
        QuadratureSpec { method: Method::LayeredGrid, budget, ..Default::default() }
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = eps0;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_strata_floor(mut self, floor: f64) -> Self {
        self.strata_floor = Some(floor);
        self
    }

    /// Checks the invariants that do not depend on the integration domain.
    pub fn validate(&self) -> Result<()> {
        if self.budget < 1000 {
            return Err(Error::Config(format!("quadrature budget {} < 1000", self.budget)));
        }
        if !(self.eps0 >= 0.0) || !self.eps0.is_finite() {
            return Err(Error::Config(format!("eps0 = {} must be finite and >= 0", self.eps0)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol = {} must be positive", self.tol)));
        }
        if let Some(floor) = self.strata_floor {
            if !(floor > 0.0) || !floor.is_finite() {
                return Err(Error::Config(format!("strata_floor = {floor} must be positive")));
            }
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    gauss_legendre(n).into_iter().map(|(x, w)| (mid + half * x, half * w)).collect()
}

/// Degree-5 symmetric rule on the unit sphere `S^(N-1)` for the normalised
/// surface measure: points `+-e_i` and `(+-e_i +- e_j)/sqrt 2`.
pub fn sphere_rule_deg5<const N: usize>() -> Vec<([f64; N], f64)> {
    let n = N as f64;
    let b = 1.0 / (n * (n + 2.0));
    let a = (4.0 - n) / (2.0 * n * (n + 2.0));
    let mut out = Vec::with_capacity(2 * N * N);
    for i in 0..N {
        for s in [1.0, -1.0] {
            let mut v = [0.0; N];
            v[i] = s;
            out.push((v, a));
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..N {
        for j in (i + 1)..N {
            for si in [1.0, -1.0] {
                for sj in [1.0, -1.0] {
                    let mut v = [0.0; N];
                    v[i] = si * r;
                    v[j] = sj * r;
                    out.push((v, b));
                }
            }
        }
    }
    out
}
