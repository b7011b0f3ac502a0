//! Runs a parsed [`ExperimentConfig`] and produces a CSV table plus a JSON
//! summary. Output depends only on the config and seed.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::area::{self, Cone};
use crate::boundary::{self, LimitReport};
use crate::config::*;
use crate::dirac;
use crate::error::{Error, Result};
use crate::fields::{self, Field, Point8};
use crate::herglotz::{self, BallSampler, CriterionParams, HerglotzData, InfiniteStatus};
use crate::quadrature::Method;
use crate::rng;
use crate::subharmonic;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Non-gating assertions are reported but never fail the run.
    pub gating: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub budget_scale: f64,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    /// Numeric warnings such as quadrature non-convergence.
    pub flags: Vec<String>,
    pub extra: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: Summary,
    pub csv: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.passed {
            0
        } else {
            2
        }
    }

    /// Writes the CSV and summary into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, output: &OutputSpec) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let csv_name = output.csv.clone().unwrap_or_else(|| format!("{}.csv", self.summary.experiment));
        std::fs::write(dir.join(csv_name), &self.csv)?;
        let mut json = serde_json::to_string_pretty(&self.summary)?;
        json.push('\n');
        std::fs::write(dir.join(&output.summary), json)?;
        Ok(())
    }
}

/// Hex SHA-256 of the raw config text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget_scale: f64,
}

impl Default for Overrides {
    fn default() -> Self {
        Overrides { seed: None, budget_scale: 1.0 }
    }
}

/// Parses `text`, applies overrides and runs the experiment.
pub fn run_text(text: &str, ov: Overrides) -> Result<(ExperimentConfig, Outcome)> {
    if !(ov.budget_scale > 0.0) || !ov.budget_scale.is_finite() {
        return Err(Error::Config(format!("budget scale {} must be positive", ov.budget_scale)));
    }
    let mut cfg = ExperimentConfig::from_json(text)?;
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if ov.budget_scale != 1.0 {
        cfg.scale_budgets(ov.budget_scale);
    }
    let mut out = run(&cfg)?;
    out.summary.config_sha256 = config_hash(text);
    out.summary.budget_scale = ov.budget_scale;
    Ok((cfg, out))
}

/// Runs an already validated config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let field = cfg.build_field()?;
    let mut r = Report::default();
    let seed = cfg.seed;
    match &cfg.experiment {
        Experiment::Verify(p) => verify(field.as_ref().expect("validated"), p, seed, &mut r)?,
        Experiment::Area(p) => area(field.as_ref().expect("validated"), p, seed, &mut r)?,
        Experiment::Ntlimit(p) => ntlimit(field.as_ref().expect("validated"), p, seed, &mut r)?,
        Experiment::Herglotz(p) => herglotz_run(p, seed, &mut r)?,
        Experiment::Subharmonic(p) => subharmonic_run(field.as_ref().expect("validated"), p, seed, &mut r)?,
        Experiment::Theorem1(p) => theorem1(field.as_ref().expect("validated"), p, seed, &mut r)?,
        Experiment::Theorem2(p) => theorem2(p, seed, &mut r)?,
    }
    let passed = r.assertions.iter().all(|a| a.passed || !a.gating);
    Ok(Outcome {
        csv: r.csv,
        summary: Summary {
            experiment: cfg.experiment.name().into(),
            version: VERSION.into(),
            seed,
            config_sha256: String::new(),
            budget_scale: 1.0,
            passed,
            assertions: r.assertions,
            flags: r.flags,
            extra: r.extra,
        },
    })
}

#[derive(Default)]
struct Report {
    csv: String,
    assertions: Vec<Assertion>,
    flags: Vec<String>,
    extra: serde_json::Value,
}

impl Report {
    fn header(&mut self, cols: &[&str]) {
        self.csv.push_str(&cols.join(","));
        self.csv.push('\n');
    }

    fn row(&mut self, cells: Vec<String>) {
        self.csv.push_str(&cells.join(","));
        self.csv.push('\n');
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.into(), passed, gating: true, detail });
    }

    fn note(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.into(), passed, gating: false, detail });
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn nums(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|x| num(*x)).collect()
}

fn coord_names(prefix: &str, from: usize, n: usize) -> Vec<String> {
    (from..from + n).map(|i| format!("{prefix}{i}")).collect()
}

/// Deterministic interior points away from the field's poles.
pub fn point_cloud(f: &Field, c: &PointCloud, seed: u64) -> Result<Vec<Point8>> {
    if !(c.x0_min > 0.0 && c.x0_max >= c.x0_min && c.extent >= 0.0) {
        return Err(Error::Config("point cloud needs 0 < x0_min <= x0_max and extent >= 0".into()));
    }
    let poles = f.poles();
    let mut g = rng::stream(seed, 0);
    let mut out = Vec::with_capacity(c.count);
    let mut attempts = 0usize;
    while out.len() < c.count {
        attempts += 1;
        if attempts > 1000 * c.count.max(1) {
            return Err(Error::Config("point cloud: pole clearance leaves no room".into()));
        }
        let x0 = c.x0_min + (c.x0_max - c.x0_min) * rng::uniform(&mut g);
        let x: [f64; 7] = std::array::from_fn(|_| c.extent * (2.0 * rng::uniform(&mut g) - 1.0));
        let p = Point8::new(x0, x);
        if poles.iter().all(|q| p.distance(&Point8::from_array(*q)) > c.pole_clearance) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Largest entry-wise gap between the closed-form Jacobian and central
/// differences with step `h`, relative to `max(1, max |J|)`.
pub fn fd_jacobian_error(f: &Field, p: &Point8, h: f64) -> Result<f64> {
    let j = f.jacobian(p)?;
    let a = p.to_array();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for k in 0..8 {
        let mut plus = a;
        let mut minus = a;
        plus[k] += h;
        minus[k] -= h;
        let fp = f.eval(&Point8::from_array(plus))?;
        let fm = f.eval(&Point8::from_array(minus))?;
        for r in 0..8 {
            let d = (fp[r] - fm[r]) / (2.0 * h);
            worst = worst.max((d - j[r][k]).abs());
            scale = scale.max(j[r][k].abs());
        }
    }
    Ok(worst / scale)
}

fn jac_scale(f: &Field, p: &Point8) -> Result<f64> {
    Ok(dirac::frobenius_sq(&f.jacobian(p)?).sqrt().max(1.0))
}

fn verify(f: &Field, p: &VerifyParams, seed: u64, r: &mut Report) -> Result<()> {
    let pts = point_cloud(f, &p.points, rng::derive_seed(seed, 1))?;
    let mut cols = coord_names("x", 0, 8);
    cols.extend(["residual", "row0_identity", "pd_identity", "second_gradient_sq", "jacobian_scale", "fd_error"].map(String::from));
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let (mut res_max, mut row0_max, mut pd_max, mut fd_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for pt in &pts {
        let scale = jac_scale(f, pt)?;
        let res = dirac::dirac_residual(f, pt)?.max_abs();
        let row0 = dirac::theorem1_row0_identity(f, pt)?;
        let pd = dirac::theorem1_pd_identity(f, pt)?;
        let sg = dirac::second_gradient_sq(f, pt)?;
        let fd = fd_jacobian_error(f, pt, p.fd_step)?;
        res_max = res_max.max(res / scale);
        row0_max = row0_max.max(row0 / scale);
        pd_max = pd_max.max(pd / scale);
        fd_max = fd_max.max(fd);
        let mut cells = nums(&pt.to_array());
        cells.extend(nums(&[res, row0, pd, sg, scale, fd]));
        r.row(cells);
    }
    let mismatches = dirac::dirac_table_mismatches().len();
    r.check("dirac_matrix_matches_table", mismatches == 0, format!("{mismatches} mismatching entries"));
    let n = pts.len();
    if f.is_monogenic() {
        r.check(
            "dirac_residual",
            res_max <= p.residual_tol,
            format!("max residual / jacobian scale = {res_max:e} over {n} points (tol {:e})", p.residual_tol),
        );
        r.check("row0_identity", row0_max <= p.residual_tol, format!("max relative residual {row0_max:e}"));
        r.check("pd_identity", pd_max <= p.residual_tol, format!("max relative residual {pd_max:e}"));
    } else {
        r.note("dirac_residual", true, format!("field is not monogenic; max residual / scale = {res_max:e}"));
    }
    if f.is_exact() {
        r.check("finite_difference_jacobian", fd_max <= p.fd_tol, format!("max relative gap {fd_max:e} (tol {:e})", p.fd_tol));
    }
    Ok(())
}

fn area(f: &Field, p: &AreaParams, seed: u64, r: &mut Report) -> Result<()> {
    let base = p.quadrature.spec(rng::derive_seed(seed, 2));
    let mut cutoffs = vec![base.eps0];
    for e in &p.eps0_list {
        if !cutoffs.contains(e) {
            cutoffs.push(*e);
        }
    }
    let mut cols: Vec<String> = coord_names("y", 1, 7);
    cols.extend(["alpha", "h", "eps0", "method", "total"].map(String::from));
    cols.extend(coord_names("a", 0, 8));
    cols.extend(["stderr", "budget"].map(String::from));
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let mut worst_add: f64 = 0.0;
    let mut negative = 0;
    let mut results = Vec::new();
    for v in &p.vertices {
        let cone = Cone::new(*v, p.alpha, p.h)?;
        let mut per_vertex = Vec::new();
        for &e in &cutoffs {
            let res = area::area_integral(f, &cone, &base.clone().with_eps0(e))?;
            per_vertex.push((e, res));
        }
        if p.compare_grid {
            let mut q = p.quadrature.spec(seed);
            q.method = Method::LayeredGrid;
            q.budget = p.grid_budget;
            let res = area::area_integral(f, &cone, &q)?;
            per_vertex.push((base.eps0, res));
        }
        for (e, res) in &per_vertex {
            worst_add = worst_add.max(res.additivity_defect());
            negative += res.per_component.iter().filter(|a| **a < 0.0).count();
            if res.flagged {
                r.flags.push(format!("{:?} at vertex {v:?}, eps0 {e:e}: error {:e} above tol", res.method, res.stderr));
            }
            let mut cells = nums(v);
            cells.extend(nums(&[p.alpha, p.h, *e]));
            cells.push(match res.method {
                Method::MonteCarlo => "monte-carlo".into(),
                Method::LayeredGrid => "layered-grid".into(),
            });
            cells.push(num(res.total));
            cells.extend(nums(&res.per_component));
            cells.push(num(res.stderr));
            cells.push(res.budget_used.to_string());
            r.row(cells);
        }
        results.push((*v, per_vertex));
    }
    r.check("additivity", worst_add <= 1e-12, format!("max relative |total - sum components| = {worst_add:e}"));
    r.check("nonnegative_components", negative == 0, format!("{negative} negative component integrals"));
    if p.compare_grid {
        for (v, rows) in &results {
            let mc = &rows[0].1;
            let grid = &rows[rows.len() - 1].1;
            let sigma = (mc.stderr * mc.stderr + grid.stderr * grid.stderr).sqrt();
            let gap = (mc.total - grid.total).abs();
            r.check(
                "monte_carlo_vs_grid",
                gap <= 3.0 * sigma,
                format!("vertex {v:?}: |{:e} - {:e}| = {gap:e} vs 3 sigma = {:e}", mc.total, grid.total, 3.0 * sigma),
            );
        }
    }
    if cutoffs.len() > 1 && p.quadrature.strata_floor.is_some() {
        let mut ok = true;
        for (_, rows) in &results {
            let mut mc: Vec<(f64, f64)> =
                rows.iter().filter(|(_, a)| a.method == Method::MonteCarlo).map(|(e, a)| (*e, a.total)).collect();
            mc.sort_by(|a, b| a.0.total_cmp(&b.0));
            ok &= mc.windows(2).all(|w| w[1].1 <= w[0].1);
        }
        r.check("monotone_in_eps0", ok, "totals non-increasing in eps0 at every vertex".into());
    }
    Ok(())
}

fn limit_cells(y: &[f64; 7], approach: &str, alpha: f64, rep: &LimitReport) -> Vec<String> {
    let mut cells = nums(y);
    cells.push(approach.into());
    cells.push(num(alpha));
    cells.push(rep.status.as_str().into());
    cells.extend(rep.components.iter().map(|c| c.status.as_str().to_string()));
    cells.extend(rep.components.iter().map(|c| num(c.value)));
    cells.extend(nums(&[rep.scale, rep.tail_oscillation, rep.spread]));
    cells.push(rep.skipped.to_string());
    cells
}

fn limit_header(r: &mut Report) {
    let mut cols: Vec<String> = coord_names("y", 1, 7);
    cols.extend(["approach", "alpha", "status"].map(String::from));
    cols.extend(coord_names("status", 0, 8));
    cols.extend(coord_names("f", 0, 8));
    cols.extend(["scale", "tail_oscillation", "spread", "skipped"].map(String::from));
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
}

fn ntlimit(f: &Field, p: &NtLimitParams, seed: u64, r: &mut Report) -> Result<()> {
    let params = p.limit.params();
    limit_header(r);
    let mut alphas = p.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    let (mut agree_ok, mut mono_ok) = (true, true);
    let mut detail = Vec::new();
    for (i, y) in p.points.iter().enumerate() {
        let normal = boundary::normal_limit(f, y, &params)?;
        r.row(limit_cells(y, "normal", 0.0, &normal));
        let mut finite_seen_false = false;
        for &alpha in alphas.iter() {
            let nt = boundary::nontangential_limit(f, y, alpha, p.rays, rng::derive_seed(seed, 3 + i as u64), &params)?;
            r.row(limit_cells(y, "nontangential", alpha, &nt));
            if let (Some(a), Some(b)) = (normal.value, nt.value) {
                let gap = (a - b).max_abs();
                let tol = params.spread_tol * normal.scale.max(nt.scale);
                if gap > tol {
                    agree_ok = false;
                    detail.push(format!("{y:?} alpha {alpha}: gap {gap:e} > {tol:e}"));
                }
            }
            // A finite limit at a wider aperture forces one at every narrower one.
            if nt.is_finite() && finite_seen_false {
                mono_ok = false;
                detail.push(format!("{y:?}: finite at alpha {alpha} but not at a smaller aperture"));
            }
            finite_seen_false |= !nt.is_finite();
        }
    }
    r.check("normal_matches_nontangential", agree_ok, detail.join("; "));
    r.check("aperture_monotone", mono_ok, "finite limits persist under narrowing the aperture".into());
    Ok(())
}

fn herglotz_run(p: &HerglotzParams, seed: u64, r: &mut Report) -> Result<()> {
    let data = HerglotzData::new(p.c, p.measure.build()?)?;
    let cp = CriterionParams {
        radii_from: p.radii_from,
        radii_to: p.radii_to,
        a: p.a,
        budget: p.budget,
        seed: rng::derive_seed(seed, 4),
        agree_rel: p.agree_rel,
        limit: p.limit.params(),
    };
    let radii = cp.radii();
    let sampler = BallSampler::new(cp.budget, rng::derive_seed(cp.seed, 1));
    let mut cols: Vec<String> = coord_names("x", 1, 7);
    cols.extend(
        ["t", "n", "ratio", "q", "finite_verdict", "finite_limit", "infinite_verdict", "decade_growth", "normal_status", "normal_value", "agree"]
            .map(String::from),
    );
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let mut all_agree = true;
    let mut verdicts = Vec::new();
    for x in &p.points {
        let row = herglotz::consistency_check(&data, x, &cp)?;
        let fin = herglotz::theorem_k_finite(&data.mu, x, &radii, &sampler, &cp.limit.criterion)?;
        let inf = herglotz::theorem_k_infinite(&data.mu, x, cp.a, &radii, &sampler)?;
        all_agree &= row.agree;
        for (k, &t) in radii.iter().enumerate() {
            let n = herglotz::ball_mass(&data.mu, x, t, &sampler)?.value;
            let mut cells = nums(x);
            cells.extend(nums(&[t, n, fin.ratios[k].1, inf.values[k].1]));
            cells.push(fin.verdict.status.as_str().into());
            cells.push(num(fin.verdict.value));
            cells.push(infinite_str(inf.status).into());
            cells.push(num(inf.decade_growth));
            cells.push(row.normal.status.as_str().into());
            cells.push(num(row.normal.value));
            cells.push(row.agree.to_string());
            r.row(cells);
        }
        if let Some(want) = p.expect.infinite {
            let got = inf.status == InfiniteStatus::Infinite;
            r.check("expected_infinite_verdict", got == want, format!("{x:?}: {}", infinite_str(inf.status)));
        }
        if let Some(want) = p.expect.finite_limit {
            let got = fin.limit();
            let ok = got.is_some_and(|v| (v - want).abs() <= p.agree_rel * want.abs().max(1e-300));
            r.check("expected_finite_limit", ok, format!("{x:?}: {got:?} vs {want:e}"));
        }
        verdicts.push(serde_json::json!({
            "point": x,
            "finite": fin.verdict.status.as_str(),
            "finite_limit": fin.limit(),
            "infinite": infinite_str(inf.status),
            "normal": row.normal.status.as_str(),
        }));
    }
    r.check("normal_limit_matches_criteria", all_agree, "normal limit of the Poisson extension against ball-mass criteria".into());
    r.extra = serde_json::json!({ "verdicts": verdicts });
    Ok(())
}

fn infinite_str(s: InfiniteStatus) -> &'static str {
    match s {
        InfiniteStatus::Infinite => "infinite",
        InfiniteStatus::NotInfinite => "not-infinite",
        InfiniteStatus::Inconclusive => "inconclusive",
    }
}

fn subharmonic_run(f: &Field, p: &SubharmonicParams, seed: u64, r: &mut Report) -> Result<()> {
    let pts = point_cloud(f, &p.points, rng::derive_seed(seed, 5))?;
    let reports = subharmonic::mean_value_test_multi(f, &p.ps, &pts, &p.radii, p.sphere_budget, rng::derive_seed(seed, 6))?;
    let mut cols = vec!["p".to_string()];
    cols.extend(coord_names("x", 0, 8));
    cols.extend(["radius", "center", "mean", "stderr", "margin", "violation"].map(String::from));
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for rep in &reports {
        for row in &rep.rows {
            let mut cells = vec![num(row.p)];
            cells.extend(nums(&row.point));
            cells.extend(nums(&[row.radius, row.center_value, row.mean, row.stderr, row.margin]));
            cells.push(row.violation.to_string());
            r.row(cells);
        }
        let detail = format!(
            "{} violations over {} spheres ({} skipped), min margin {:e}",
            rep.violations.len(),
            rep.tested,
            rep.skipped.len(),
            rep.min_margin
        );
        let name = format!("no_violations_p={}", rep.p);
        if rep.p >= subharmonic::CRITICAL_EXPONENT - 1e-12 {
            r.check(&name, rep.violations.is_empty(), detail);
        } else {
            r.note(&name, rep.violations.is_empty(), detail);
        }
    }
    if let Some(probe) = &p.probe {
        let zero = Point8::from_array(probe.zero);
        let nearby: Vec<Point8> = probe.nearby.iter().map(|a| Point8::from_array(*a)).collect();
        let rows = subharmonic::exponent_probe(f, &zero, &probe.p_grid, &nearby, &p.radii, p.sphere_budget, rng::derive_seed(seed, 7))?;
        r.extra = serde_json::json!({ "probe": rows });
    }
    Ok(())
}

fn theorem1(f: &Field, p: &Theorem1Params, seed: u64, r: &mut Report) -> Result<()> {
    let rows = boundary::theorem1_experiment(f, &p.grid, p.alpha, p.rays, rng::derive_seed(seed, 8), &p.limit.params())?;
    let mut cols: Vec<String> = coord_names("y", 1, 7);
    cols.extend(["scalar_exists", "vector_exists", "agree", "status"].map(String::from));
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let agreeing = rows.iter().filter(|x| x.agree).count();
    for row in &rows {
        let mut cells = nums(&row.point);
        cells.extend([row.scalar_exists, row.vector_exists, row.agree].map(|b| b.to_string()));
        cells.push(row.report.status.as_str().into());
        r.row(cells);
    }
    r.check("scalar_vector_agreement", agreeing == rows.len(), format!("{agreeing}/{} grid points agree", rows.len()));
    Ok(())
}

fn theorem2(p: &Theorem2Params, seed: u64, r: &mut Report) -> Result<()> {
    let ex = fields::positive_example(p.level, p.eps, p.potential.build()?)?;
    let cp = CriterionParams {
        radii_from: p.radii_from,
        radii_to: p.radii_to,
        a: p.a,
        budget: p.budget,
        seed: rng::derive_seed(seed, 9),
        agree_rel: p.agree_rel,
        limit: p.limit.params(),
    };
    let mut cols: Vec<String> = coord_names("x", 1, 7);
    cols.extend(
        ["component", "normal_status", "normal_value", "ratio_status", "ratio_value", "infinite_verdict", "agree"].map(String::from),
    );
    r.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let (mut total, mut agreeing) = (0, 0);
    for x in &p.points {
        for row in herglotz::theorem2_experiment(&ex, x, &cp, p.extra_atom)? {
            total += 1;
            agreeing += row.agree as usize;
            let mut cells = nums(x);
            cells.push(row.component.to_string());
            cells.push(row.normal.status.as_str().into());
            cells.push(num(row.normal.value));
            cells.push(row.ratio_limit.status.as_str().into());
            cells.push(num(row.ratio_limit.value));
            cells.push(infinite_str(row.infinite).into());
            cells.push(row.agree.to_string());
            r.row(cells);
        }
    }
    r.check("componentwise_agreement", agreeing == total, format!("{agreeing}/{total} (point, component) pairs agree"));
    Ok(())
}
