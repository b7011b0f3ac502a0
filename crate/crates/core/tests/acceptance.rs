//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

use std::time::Instant;

use monogenic::area::{self, Cone};
use monogenic::boundary::{self, LimitParams, LimitStatus};
use monogenic::config::PointCloud;
use monogenic::dirac::{self, DIRAC_MATRIX};
use monogenic::experiment::{self, point_cloud, Overrides};
use monogenic::fields::{self, lift, HarmonicPolynomial, Monomial};
use monogenic::herglotz::{self, BallSampler, BoundaryMeasure, CriterionParams, HerglotzData, InfiniteStatus};
use monogenic::octonion::{associator, basis_product};
use monogenic::quadrature::{QuadratureSpec, OMEGA7};
use monogenic::{rng, subharmonic};
use monogenic::{Field, HarmonicPotential, Octonion, Point8};

/// Row `i` lists `e_i e_j` for `j = 0..8`; `-0` stands for `-1`.
const TABLE: [&str; 8] = [
    "+0 +1 +2 +3 +4 +5 +6 +7",
    "+1 -0 +4 +7 -2 +6 -5 -3",
    "+2 -4 -0 +5 +1 -3 +7 -6",
    "+3 -7 -5 -0 +6 +2 -4 +1",
    "+4 +2 -1 -6 -0 +7 +3 -5",
    "+5 -6 +3 -2 -7 -0 +1 +4",
    "+6 +5 -7 +4 -3 -1 -0 +2",
    "+7 +3 +6 -1 +5 -4 -2 -0",
];

/// Row `i` of the first-order system; entry `j` is the signed partial
/// applied to `f_j`.
const SYSTEM: [&str; 8] = [
    "+0 -1 -2 -3 -4 -5 -6 -7",
    "+1 +0 -4 -7 +2 -6 +5 +3",
    "+2 +4 +0 -5 -1 +3 -7 +6",
    "+3 +7 +5 +0 -6 -2 +4 -1",
    "+4 -2 +1 +6 +0 -7 -3 +5",
    "+5 +6 -3 +2 +7 +0 -1 -4",
    "+6 -5 +7 -4 +3 +1 +0 -2",
    "+7 -3 -6 +1 -5 +4 +2 +0",
];

fn parse(rows: &[&str; 8]) -> [[(i8, usize); 8]; 8] {
    std::array::from_fn(|i| {
        let cells: Vec<(i8, usize)> = rows[i]
            .split_whitespace()
            .map(|c| (if c.starts_with('-') { -1 } else { 1 }, c[1..].parse().unwrap()))
            .collect();
        std::array::from_fn(|j| cells[j])
    })
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn report(&mut self, n: usize, name: &str, start: Instant, result: Result<String, String>) {
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS {n:>2} {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                self.failed += 1;
                println!("FAIL {n:>2} {name}: {d} ({secs:.1}s)");
            }
        }
    }
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cubic() -> HarmonicPotential {
    let m = |coeff, powers| Monomial { coeff, powers };
    HarmonicPotential::Polynomial(
        HarmonicPolynomial::new(vec![
            m(1.0, [1, 1, 1, 0, 0, 0, 0, 0]),
            m(1.0, [0, 0, 0, 2, 0, 0, 0, 0]),
            m(-1.0, [0, 0, 0, 0, 2, 0, 0, 0]),
            m(0.5, [0, 0, 0, 0, 0, 1, 1, 1]),
        ])
        .unwrap(),
    )
}

const BELOW: [f64; 8] = [-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

/// Monogenic generators used across criteria.
fn generators() -> Vec<(&'static str, Field)> {
    vec![
        ("newton-kernel", lift(HarmonicPotential::newton(BELOW)).unwrap()),
        ("newton-kernel-shifted", lift(HarmonicPotential::newton([-0.5, 0.3, -0.2, 0.0, 0.1, 0.0, 0.0, -0.4])).unwrap()),
        ("harmonic-polynomial", lift(cubic()).unwrap()),
        (
            "combination",
            Field::constant(Octonion([1.0, 0.0, -1.0, 0.0, 2.0, 0.0, 0.0, 0.5]))
                .with_lift(HarmonicPotential::newton(BELOW), 0.7)
                .unwrap()
                .with_lift(cubic(), -0.3)
                .unwrap(),
        ),
    ]
}

fn random_octonion(g: &mut rand_chacha::ChaCha8Rng) -> Octonion {
    Octonion(std::array::from_fn(|_| 4.0 * rng::uniform(g) - 2.0))
}

#[allow(clippy::needless_range_loop)]
fn c1_table() -> Result<String, String> {
    let t = parse(&TABLE);
    let mut bad = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            let b = basis_product(i, j);
            let (s, k) = t[i][j];
            if (b.sign, b.index) != (s, k) {
                bad.push((i, j));
            }
        }
    }
    let e = |i| Octonion::basis(i);
    let a = associator(&e(1), &e(2), &e(3));
    let want = Octonion::basis(6) * -2.0;
    ensure(bad.is_empty() && a == want, format!("{} mismatching products, associator(e1,e2,e3) = {a}", bad.len()))
}

fn c2_algebra() -> Result<String, String> {
    let mut g = rng::stream(2024, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (a, b) = (random_octonion(&mut g), random_octonion(&mut g));
        let s = a.norm() * a.norm() * b.norm();
        let left = (a.mul(&a.mul(&b)) - Octonion::mul(&a.mul(&a), &b)).norm() / s;
        let right = (Octonion::mul(&b.mul(&a), &a) - b.mul(&a.mul(&a))).norm() / s;
        let norm = (a.mul(&b).norm() - a.norm() * b.norm()).abs() / (a.norm() * b.norm());
        worst = worst.max(left).max(right).max(norm);
    }
    ensure(worst <= 1e-12, format!("max relative error {worst:e} over 10^4 pairs"))
}

fn c3_dirac() -> Result<String, String> {
    let t = parse(&TABLE);
    let sys = parse(&SYSTEM);
    let mut bad = 0;
    for i in 0..8 {
        for j in 0..8 {
            // Brute force: the unique k with e_k e_j = +-e_i.
            let hits: Vec<(i8, usize)> = (0..8).filter(|&k| t[k][j].1 == i).map(|k| (t[k][j].0, k)).collect();
            let derived = hits[0];
            let lit = DIRAC_MATRIX[i][j];
            if hits.len() != 1 || derived != sys[i][j] || (lit.sign, lit.index) != derived {
                bad += 1;
            }
        }
    }
    let lib = dirac::dirac_table_mismatches().len();
    ensure(bad == 0 && lib == 0, format!("{bad} of 64 entries differ from the brute-force derivation"))
}

fn cloud() -> PointCloud {
    PointCloud { count: 1000, x0_min: 0.01, x0_max: 2.0, extent: 2.0, pole_clearance: 0.0 }
}

fn c4_monogenic() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (i, (_, f)) in generators().iter().enumerate() {
        for p in point_cloud(f, &cloud(), 40 + i as u64).unwrap() {
            worst = worst.max(dirac::dirac_residual(f, &p).unwrap().max_abs());
        }
    }
    let fx = dirac::dirac_residual(&Field::identity_fixture(), &Point8::new(0.4, [0.3; 7])).unwrap();
    ensure(
        worst <= 1e-10 && fx == Octonion::scalar(-6.0),
        format!("max residual {worst:e} over 10^3 points per generator, fixture residual {fx}"),
    )
}

fn c5_identities() -> Result<String, String> {
    let (mut row0, mut pd): (f64, f64) = (0.0, 0.0);
    for (i, (_, f)) in generators().iter().enumerate() {
        for p in point_cloud(f, &cloud(), 50 + i as u64).unwrap() {
            row0 = row0.max(dirac::theorem1_row0_identity(f, &p).unwrap());
            pd = pd.max(dirac::theorem1_pd_identity(f, &p).unwrap());
        }
    }
    ensure(row0 <= 1e-10 && pd <= 1e-10, format!("row-0 residual {row0:e}, U - P(D)V residual {pd:e}"))
}

fn c6_area() -> Result<String, String> {
    let f = lift(HarmonicPotential::newton(BELOW)).unwrap();
    let cone = Cone::new([0.0; 7], 1.0, 1.0).unwrap();
    let mc = area::area_integral(&f, &cone, &QuadratureSpec::monte_carlo(1_000_000, 1)).map_err(|e| e.to_string())?;
    let grid = area::area_integral(&f, &cone, &QuadratureSpec::layered_grid(400_000)).map_err(|e| e.to_string())?;
    let additive = mc.additivity_defect().max(grid.additivity_defect());
    let sigma = (mc.stderr.powi(2) + grid.stderr.powi(2)).sqrt();
    let gap = (mc.total - grid.total).abs();

    let cone2 = Cone::new([0.0; 7], 1.5, 0.8).unwrap();
    let exact = OMEGA7 * 1.5f64.powi(7) * 0.8f64.powi(8) / 8.0;
    let (vol, vol_se) = area::cone_volume_hit_or_miss(&cone2, 1_000_000, 3);

    let pole = lift(HarmonicPotential::newton([0.0; 8])).unwrap();
    let q = QuadratureSpec::monte_carlo(100_000, 1).with_strata_floor(1e-3);
    let at = |v: [f64; 7], e: f64| area::area_integral(&pole, &Cone::new(v, 1.0, 1.0).unwrap(), &q.clone().with_eps0(e)).unwrap().total;
    let growth = at([0.0; 7], 1e-3) / at([0.0; 7], 1e-1);
    let mut off_change: f64 = 0.0;
    for v in [[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, -1.5, 1.5, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0]] {
        let (a, b) = (at(v, 1e-1), at(v, 1e-3));
        off_change = off_change.max((b - a).abs() / a);
    }

    let parts = [
        (additive <= 1e-12, format!("(a) additivity {additive:e}")),
        (gap <= 3.0 * sigma, format!("(b) MC {:.6} vs grid {:.6}, gap {gap:.2e} <= 3 sigma {:.2e}", mc.total, grid.total, 3.0 * sigma)),
        ((vol - exact).abs() <= 3.0 * vol_se, format!("(c) volume {vol:.6} vs {exact:.6} (se {vol_se:.1e})")),
        (growth > 10.0 && off_change < 0.05, format!("(d) vertex growth x{growth:.2e}, off-pole change {:.2}%", 100.0 * off_change)),
    ];
    ensure(parts.iter().all(|p| p.0), parts.iter().map(|p| p.1.as_str()).collect::<Vec<_>>().join("; "))
}

fn c7_limits() -> Result<String, String> {
    let params = LimitParams::default();
    let points: [[f64; 7]; 3] = [[0.0; 7], [0.4, -0.3, 0.0, 0.2, 0.0, 0.0, 0.1], [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]];
    let mut worst: f64 = 0.0;
    let mut all_finite = true;
    for (_, f) in generators() {
        for y in &points {
            let exact = f.eval(&Point8::new(0.0, *y)).unwrap();
            let normal = boundary::normal_limit(&f, y, &params).unwrap();
            let mut reports = vec![normal];
            for alpha in [0.5, 1.0, 2.0] {
                reports.push(boundary::nontangential_limit(&f, y, alpha, 16, 7, &params).unwrap());
            }
            for r in reports {
                match r.value {
                    Some(v) => worst = worst.max((v - exact).max_abs() / r.scale),
                    None => all_finite = false,
                }
            }
        }
    }
    let pole = lift(HarmonicPotential::newton([0.0; 8])).unwrap();
    let at_pole = boundary::nontangential_limit(&pole, &[0.0; 7], 1.0, 16, 7, &params).unwrap();
    let elsewhere = points[1..].iter().all(|y| boundary::nontangential_limit(&pole, y, 1.0, 16, 7, &params).unwrap().is_finite());
    let mut grid = vec![[0.0; 7]];
    grid.extend_from_slice(&points[1..]);
    grid.push([0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
    let mut agree = 0;
    let mut total = 0;
    for f in generators().into_iter().map(|g| g.1).chain([pole]) {
        for row in boundary::theorem1_experiment(&f, &grid, 1.0, 8, 11, &params).unwrap() {
            total += 1;
            agree += row.agree as usize;
        }
    }
    ensure(
        all_finite && worst <= 1e-5 && at_pole.status != LimitStatus::Finite && elsewhere && agree == total,
        format!(
            "max error {worst:.2e} x scale, pole point {}, finite off the pole: {elsewhere}, scalar/vector agreement {agree}/{total}",
            at_pole.status.as_str()
        ),
    )
}

fn c8_herglotz() -> Result<String, String> {
    let (norm, norm_se) = herglotz::poisson_normalization_mc(4_000_000, 8);
    let atom = HerglotzData::new(0.0, BoundaryMeasure::atom([0.0; 7], 1.7).unwrap()).unwrap();
    let q = QuadratureSpec::monte_carlo(1000, 1);
    let mut atom_err: f64 = 0.0;
    for x0 in [1e-3, 0.1, 1.0, 10.0] {
        let u = herglotz::poisson_extend(&atom, &Point8::new(x0, [0.0; 7]), &q).unwrap().value;
        let exact = 1.7 * herglotz::POISSON_C8 * x0.powi(-7);
        atom_err = atom_err.max((u - exact).abs() / exact);
    }
    let lebesgue = BoundaryMeasure::lebesgue(1.0).unwrap();
    let sampler = BallSampler::new(20_000, 5);
    let x = [0.2, -0.1, 0.0, 0.0, 0.3, 0.0, 0.0];
    let radii = herglotz::dyadic_radii(3, 20);
    let fin = herglotz::theorem_k_finite(&lebesgue, &x, &radii, &sampler, &LimitParams::default().criterion).unwrap();
    let ratio = fin.limit().unwrap_or(f64::NAN);
    let with_atom = lebesgue.clone().with_atom(x, 1.0).unwrap();
    let inf_atom = herglotz::theorem_k_infinite(&with_atom, &x, 1.0, &radii, &sampler).unwrap().status;
    let inf_density = herglotz::theorem_k_infinite(&lebesgue, &x, 1.0, &radii, &sampler).unwrap().status;
    let p = CriterionParams { budget: 20_000, ..CriterionParams::default() };
    let mut inert = true;
    for mu in [lebesgue.clone(), with_atom.clone()] {
        let r0 = herglotz::consistency_check(&HerglotzData::new(0.0, mu.clone()).unwrap(), &x, &p).unwrap();
        let r5 = herglotz::consistency_check(&HerglotzData::new(5.0, mu).unwrap(), &x, &p).unwrap();
        inert &= r0.normal.status == r5.normal.status
            && r0.ratio_limit.status == r5.ratio_limit.status
            && r0.infinite == r5.infinite
            && r0.agree == r5.agree
            && r0.agree;
    }
    ensure(
        (norm - 1.0).abs() <= 1e-3
            && atom_err <= 1e-6
            && (ratio - 1.0).abs() <= 0.02
            && inf_atom == InfiniteStatus::Infinite
            && inf_density == InfiniteStatus::NotInfinite
            && inert,
        format!(
            "normalization {norm:.5} (se {norm_se:.1e}), atom error {atom_err:.1e}, ratio limit {ratio:.4}, atom {inf_atom:?}, density {inf_density:?}, c-inert {inert}"
        ),
    )
}

fn c9_theorem2() -> Result<String, String> {
    let ex = fields::positive_example(10.0, 0.05, HarmonicPotential::newton(BELOW)).map_err(|e| e.to_string())?;
    let p = CriterionParams { budget: 20_000, ..CriterionParams::default() };
    let points: [[f64; 7]; 5] = [
        [0.0; 7],
        [0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, -0.4, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.2, 0.2, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let (mut worst, mut agree, mut total): (f64, usize, usize) = (0.0, 0, 0);
    for x in &points {
        for row in herglotz::theorem2_experiment(&ex, x, &p, None).unwrap() {
            total += 1;
            agree += row.agree as usize;
            worst = worst.max((row.normal.value - row.ratio_limit.value).abs() / row.normal.value.abs());
        }
    }
    ensure(agree == total && worst <= 0.02, format!("{agree}/{total} components agree, max relative gap {:.3}%", 100.0 * worst))
}

fn c10_subharmonic() -> Result<String, String> {
    let ps = [subharmonic::CRITICAL_EXPONENT, 1.0, 2.0];
    let radii = [0.02, 0.05, 0.1, 0.2];
    let cloud = PointCloud { count: 250, x0_min: 0.25, x0_max: 2.0, extent: 1.5, pole_clearance: 0.3 };
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, (name, f)) in generators().iter().enumerate() {
        let pts = point_cloud(f, &cloud, 60 + i as u64).unwrap();
        let reports = subharmonic::mean_value_test_multi(f, &ps, &pts, &radii, 4000, 70 + i as u64).unwrap();
        let v: Vec<usize> = reports.iter().map(|r| r.violations.len()).collect();
        let tested = reports[0].tested;
        ok &= v.iter().all(|n| *n == 0) && tested >= 1000;
        lines.push(format!("{name} {v:?} over {tested}"));
    }
    ensure(ok, format!("violations at p = 6/7, 1, 2: {}", lines.join(", ")))
}

const DETERMINISM_CONFIGS: [&str; 6] = [
    "area_additivity.json",
    "herglotz_atom.json",
    "ntlimit_lift.json",
    "subharmonic_lift.json",
    "theorem1_pole.json",
    "theorem2_positive.json",
];

fn c11_determinism() -> Result<String, String> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let ov = Overrides { seed: None, budget_scale: 0.2 };
    let mut differing = Vec::new();
    for name in DETERMINISM_CONFIGS {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string())?;
        let a = experiment::run_text(&text, ov).map_err(|e| e.to_string())?.1;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| experiment::run_text(&text, ov)).map_err(|e| e.to_string())?.1;
        if a.csv.as_bytes() != b.csv.as_bytes() || a.csv.is_empty() {
            differing.push(name);
        }
    }
    ensure(
        differing.is_empty(),
        format!("{} experiment configs rerun, differing: {differing:?}", DETERMINISM_CONFIGS.len()),
    )
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("multiplication table", c1_table),
        ("algebra laws", c2_algebra),
        ("Dirac matrix vs table", c3_dirac),
        ("monogenicity", c4_monogenic),
        ("scalar/vector identities", c5_identities),
        ("area integral", c6_area),
        ("boundary limits", c7_limits),
        ("Herglotz suite", c8_herglotz),
        ("componentwise limits", c9_theorem2),
        ("subharmonicity", c10_subharmonic),
        ("determinism", c11_determinism),
    ];
    let mut suite = Suite { failed: 0 };
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        suite.report(i + 1, name, start, result);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - suite.failed, criteria.len());
    if suite.failed > 0 {
        std::process::exit(1);
    }
}
