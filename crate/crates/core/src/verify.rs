//! The verification suite: module invariants checked against the slow
//! references in [`crate::oracle`], and the ten acceptance criteria with
//! their pinned tolerances.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{is_degenerate, is_perfect_power, BivarPoly, RationalMap};
use crate::bounds::{bound_ratio_sweep, max_nondegenerate_ratio, tail_bound_check, HybridVariety, SweepItem};
use crate::characters::{AddChar, MultChar};
use crate::field::{is_prime, PrimeField};
use crate::geometry::{count_matching_tuples, factorial, PointTable, Rectangle};
use crate::oracle;
use crate::polyparse::{parse_expr, parse_poly, parse_rational};
use crate::stats::{
    double_factorial_moment, gaussian_moment_gamma_form, gaussian_scaled_moment, ks_threshold, DistributionReport,
    GaussianModel,
};
use crate::sums::{
    compute_series, compute_series_direct, moment, moments, moments_via_binomial, shifted_expansion_check,
    ExperimentConfig, MomentReport, Normalization, SumSeries,
};

/// Deliberate corruption used to confirm that the suite notices breakage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Swap two entries of every discrete-log table.
    CorruptLogTable,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub fault: Option<Fault>,
}

impl VerifyOptions {
    fn field(&self, p: u64) -> Arc<PrimeField> {
        let mut f = PrimeField::new(p).expect("suite primes are valid");
        if self.fault == Some(Fault::CorruptLogTable) {
            f.corrupt_log_table();
        }
        Arc::new(f)
    }
}

pub type Outcome = Result<String, String>;

pub struct Check {
    pub name: &'static str,
    pub run: fn(&VerifyOptions) -> Outcome,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    /// Why a failure is expected, for criteria whose stated bands cannot
    /// hold at the fixed parameters.
    pub fn known_unattainable(&self) -> Option<&'static str> {
        if self.passed {
            return None;
        }
        UNATTAINABLE.iter().find(|(n, _)| *n == self.name).map(|(_, why)| *why)
    }

    /// Failed and not listed as unattainable.
    pub fn is_regression(&self) -> bool {
        !self.passed && self.known_unattainable().is_none()
    }
}

/// Criteria run with their tolerances unchanged whose bands are out of
/// reach; the README gives the measurements behind each entry.
pub const UNATTAINABLE: &[(&str, &str)] = &[
    (
        "acceptance.3.tuple_count",
        "count / (j! H^j) <= 1 for all H, j, with equality only at j = 1, so the band [1, 1 + 4j^2/H] misses every j >= 2",
    ),
    (
        "acceptance.5.gaussian_main",
        "the off-diagonal error is of order H / sqrt(p), about 1 at p = 10007, H = 101; m2 ranges over 0.4..1.7 on nearby primes",
    ),
    (
        "acceptance.6.davenport_erdos",
        "the fourth moment at p = 10007, H = 101 is 2.27 (2.3..3.7 on nearby primes); integer-valued sums put lattice steps in the KS distance",
    ),
    (
        "acceptance.8.trivial_chi",
        "without chi the quadratic Weyl sums are nearly coherent in windows near x = 0 and x = p/2, inflating odd and high moments",
    ),
];

/// Every check, module invariants first, then the acceptance criteria.
pub fn all_checks() -> Vec<Check> {
    let mut v = vec![
        Check { name: "field.log_table", run: field_log_table },
        Check { name: "field.primality", run: field_primality },
        Check { name: "field.inverses", run: field_inverses },
        Check { name: "characters.homomorphism", run: characters_homomorphism },
        Check { name: "characters.orthogonality", run: characters_orthogonality },
        Check { name: "algebra.ring_axioms", run: algebra_ring_axioms },
        Check { name: "algebra.shift_composition", run: algebra_shift_composition },
        Check { name: "algebra.perfect_powers", run: algebra_perfect_powers },
        Check { name: "polyparse.round_trip", run: polyparse_round_trip },
        Check { name: "polyparse.tree_vs_expansion", run: polyparse_tree_vs_expansion },
        Check { name: "geometry.point_table", run: geometry_point_table },
        Check { name: "sums.incremental_vs_direct", run: sums_incremental_vs_direct },
        Check { name: "sums.conjugation_symmetry", run: sums_conjugation_symmetry },
        Check { name: "sums.phase_covariance", run: sums_phase_covariance },
        Check { name: "sums.real_for_quadratic_chi", run: sums_real_for_quadratic },
    ];
    v.extend(acceptance_checks());
    v
}

pub fn acceptance_checks() -> Vec<Check> {
    vec![
        Check { name: "acceptance.1.moments_identity", run: criterion_1 },
        Check { name: "acceptance.2.shifted_expansion", run: criterion_2 },
        Check { name: "acceptance.3.tuple_count", run: criterion_3 },
        Check { name: "acceptance.4.completion_and_tail", run: criterion_4 },
        Check { name: "acceptance.5.gaussian_main", run: criterion_5 },
        Check { name: "acceptance.6.davenport_erdos", run: criterion_6 },
        Check { name: "acceptance.7.negative_controls", run: criterion_7 },
        Check { name: "acceptance.8.trivial_chi", run: criterion_8 },
        Check { name: "acceptance.9.bound_sweep", run: criterion_9 },
        Check { name: "acceptance.10.gaussian_moments", run: criterion_10 },
    ]
}

/// Runs the checks whose name contains `filter` (all when `None`).
pub fn run_checks(checks: &[Check], filter: Option<&str>, opts: &VerifyOptions) -> Vec<CheckResult> {
    checks
        .iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .map(|c| run_one(c, opts))
        .collect()
}

pub fn run_one(check: &Check, opts: &VerifyOptions) -> CheckResult {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(|| (check.run)(opts))
        .unwrap_or_else(|_| Err("panicked".to_string()));
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckResult {
        name: check.name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- helpers

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_poly(rng: &mut ChaCha8Rng, p: u64, max_deg: u32) -> BivarPoly {
    let terms: Vec<((u32, u32), u64)> = (0..=max_deg)
        .flat_map(|d| (0..=d).map(move |i| (i, d - i)))
        .filter_map(|m| rng.random_bool(0.5).then(|| (m, rng.random_range(0..p))))
        .collect();
    BivarPoly::from_terms(p, terms)
}

fn random_curve(rng: &mut ChaCha8Rng, p: u64, max_deg: u32) -> BivarPoly {
    loop {
        let c = random_poly(rng, p, max_deg);
        if c.degree_y().is_some_and(|d| d >= 1) {
            return c;
        }
    }
}

fn random_interval(rng: &mut ChaCha8Rng, p: u64) -> (u64, u64) {
    let a = rng.random_range(0..p);
    let b = rng.random_range(0..p);
    (a.min(b), a.max(b) + 1)
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    field: &Arc<PrimeField>,
    curve: &str,
    g: &str,
    f: &str,
    a: u64,
    k: u64,
    rect: Rectangle,
    theta: f64,
) -> ExperimentConfig {
    ExperimentConfig {
        field: field.clone(),
        curve: parse_poly(curve, field).expect("suite curve"),
        g: parse_rational(g, field).expect("suite map"),
        f: parse_rational(f, field).expect("suite map"),
        chi: MultChar::new(field.clone(), a).expect("suite order"),
        psi: AddChar::new(field.clone(), k),
        rect,
        theta,
        normalization: Normalization::IntervalLength,
    }
}

fn series(cfg: &ExperimentConfig) -> Result<SumSeries, String> {
    let table = cfg.point_table().map_err(|e| e.to_string())?;
    compute_series(cfg, &table).map_err(|e| e.to_string())
}

// ------------------------------------------------------- module invariants

fn field_log_table(opts: &VerifyOptions) -> Outcome {
    for p in [3u64, 5, 7, 101, 10007] {
        let f = opts.field(p);
        f.check_invariants().map_err(|e| format!("p = {p}: {e}"))?;
        let g = f.generator();
        let mut x = 1;
        for t in 0..p - 1 {
            if f.log(x) != Some(t) {
                return Err(format!("p = {p}: log({x}) = {:?}, expected {t}", f.log(x)));
            }
            x = f.mul(x, g);
        }
    }
    Ok("tables consistent for p in {3, 5, 7, 101, 10007}".into())
}

fn field_primality(_: &VerifyOptions) -> Outcome {
    for n in 0..5000u64 {
        if is_prime(n) != oracle::is_prime_trial(n) {
            return Err(format!("disagreement at {n}"));
        }
    }
    let big = [4_294_967_291u64, 1_000_000_007, 2_147_483_647];
    ensure(
        big.iter().all(|&n| is_prime(n)) && !is_prime(1_000_000_007 * 3),
        "n < 5000 against trial division, large known primes".into(),
    )
}

fn field_inverses(opts: &VerifyOptions) -> Outcome {
    let f = opts.field(10007);
    for x in 1..10007 {
        if f.mul(x, f.inv(x).map_err(|e| e.to_string())?) != 1 {
            return Err(format!("x * inv(x) != 1 at {x}"));
        }
    }
    ensure(f.inv(0).is_err(), "all inverses in F_10007".into())
}

fn characters_homomorphism(opts: &VerifyOptions) -> Outcome {
    let p = 211;
    let f = opts.field(p);
    for a in [2u64, 3, 5, 6, 7, 10, 14, 15] {
        let chi = MultChar::new(f.clone(), a).map_err(|e| e.to_string())?;
        for x in 1..p {
            for y in [2u64, 3, 17, 100, 210] {
                let err = (chi.eval(f.mul(x, y)) - chi.eval(x) * chi.eval(y)).norm();
                if err > 1e-12 {
                    return Err(format!("order {a}: chi({x} * {y}) off by {err:e}"));
                }
            }
        }
    }
    Ok("chi(xy) = chi(x) chi(y) over F_211".into())
}

fn characters_orthogonality(opts: &VerifyOptions) -> Outcome {
    for p in [31u64, 101, 211] {
        let f = opts.field(p);
        for a in (2..=10).filter(|a| (p - 1) % a == 0) {
            let chi = MultChar::new(f.clone(), a).map_err(|e| e.to_string())?;
            let psi = AddChar::new(f.clone(), 1 + a % (p - 1));
            let (sc, sp) = oracle::complete_char_sums(&chi, &psi);
            if sc.norm() > 1e-9 || sp.norm() > 1e-9 {
                return Err(format!("p = {p}, a = {a}: |sum chi| = {:e}, |sum psi| = {:e}", sc.norm(), sp.norm()));
            }
        }
    }
    Ok("complete sums of nontrivial characters vanish".into())
}

fn algebra_ring_axioms(_: &VerifyOptions) -> Outcome {
    let p = 101;
    let mut r = rng(1);
    for _ in 0..60 {
        let a = random_poly(&mut r, p, 3);
        let b = random_poly(&mut r, p, 3);
        let c = random_poly(&mut r, p, 2);
        let ab = a.mul(&b).unwrap();
        let ok = ab == b.mul(&a).unwrap()
            && ab.mul(&c).unwrap() == a.mul(&b.mul(&c).unwrap()).unwrap()
            && a.mul(&b.add(&c).unwrap()).unwrap() == ab.add(&a.mul(&c).unwrap()).unwrap()
            && a.sub(&a).unwrap().is_zero()
            && a.add(&a.neg()).unwrap().is_zero();
        if !ok {
            return Err(format!("ring axiom fails for a = {a}, b = {b}, c = {c}"));
        }
        for _ in 0..5 {
            let (x, y) = (r.random_range(0..p), r.random_range(0..p));
            if ab.eval(x, y) != a.eval(x, y) * b.eval(x, y) % p || oracle::eval_naive(&ab, x, y) != ab.eval(x, y) {
                return Err(format!("evaluation is not multiplicative at ({x}, {y})"));
            }
        }
    }
    Ok("commutativity, associativity, distributivity, evaluation over F_101".into())
}

fn algebra_shift_composition(_: &VerifyOptions) -> Outcome {
    let p = 31;
    let mut r = rng(2);
    for _ in 0..40 {
        let q = random_poly(&mut r, p, 4);
        let (u, v) = (r.random_range(0..p), r.random_range(0..p));
        if q.shift_x(u).shift_x(v) != q.shift_x((u + v) % p) {
            return Err(format!("shift composition fails for {q}, u = {u}, v = {v}"));
        }
        let s = q.shift_x(u);
        for x in 0..p {
            let y = r.random_range(0..p);
            if s.eval(x, y) != q.eval((x + u) % p, y) {
                return Err(format!("shifted evaluation differs for {q} at ({x}, {y})"));
            }
        }
    }
    Ok("shift_x(u) then shift_x(v) equals shift_x(u + v)".into())
}

fn algebra_perfect_powers(_: &VerifyOptions) -> Outcome {
    // every polynomial of total degree <= 2 over F_5 and F_7 against the
    // enumerated set of scalar multiples of squares and cubes
    let monomials: Vec<(u32, u32)> = (0..=2u32).flat_map(|d| (0..=d).map(move |i| (i, d - i))).collect();
    let mut checked = 0u64;
    for p in [5u64, 7] {
        for a in [2u32, 3] {
            let powers = oracle::perfect_powers(p, 2 / a, a);
            for code in 0..p.pow(monomials.len() as u32) {
                let mut c = code;
                let q = BivarPoly::from_terms(
                    p,
                    monomials.iter().map(|&m| {
                        let v = c % p;
                        c /= p;
                        (m, v)
                    }),
                );
                let want = powers.contains(&q.terms().collect::<Vec<_>>());
                if is_perfect_power(&q, a) != want {
                    return Err(format!("p = {p}, a = {a}: {q} expected {want}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} polynomials of degree <= 2"))
}

fn polyparse_round_trip(opts: &VerifyOptions) -> Outcome {
    let f = opts.field(101);
    let mut r = rng(3);
    for _ in 0..200 {
        let q = random_poly(&mut r, 101, 5);
        let text = q.to_string();
        let back = parse_poly(&text, &f).map_err(|e| format!("{text}: {e}"))?;
        if back != q {
            return Err(format!("{text} parsed back as {back}"));
        }
    }
    Ok("print then parse is the identity on 200 random polynomials".into())
}

fn random_expr(r: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 {
        return match r.random_range(0..4) {
            0 => "x".into(),
            1 => "y".into(),
            _ => r.random_range(-20i64..40).to_string(),
        };
    }
    match r.random_range(0..6) {
        0 => format!("({} + {})", random_expr(r, depth - 1), random_expr(r, depth - 1)),
        1 => format!("({} - {})", random_expr(r, depth - 1), random_expr(r, depth - 1)),
        2 => format!("{}*{}", random_expr(r, depth - 1), random_expr(r, depth - 1)),
        3 => format!("({})^{}", random_expr(r, depth - 1), r.random_range(0..4)),
        4 => format!("-{}", random_expr(r, depth - 1)),
        _ => random_expr(r, depth - 1),
    }
}

fn polyparse_tree_vs_expansion(opts: &VerifyOptions) -> Outcome {
    let p = 13;
    let f = opts.field(p);
    let mut r = rng(4);
    for _ in 0..150 {
        let text = random_expr(&mut r, 3);
        let tree = parse_expr(&text).map_err(|e| format!("{text}: {e}"))?;
        let poly = tree.expand(&f).map_err(|e| format!("{text}: {e}"))?;
        for x in 0..p {
            for y in 0..p {
                if tree.eval(&f, x, y) != poly.eval(x, y) {
                    return Err(format!("{text} at ({x}, {y})"));
                }
            }
        }
    }
    Ok("tree evaluation equals the expanded table on 150 random expressions".into())
}

fn geometry_point_table(opts: &VerifyOptions) -> Outcome {
    let p = 31;
    let f = opts.field(p);
    let mut r = rng(5);
    for _ in 0..30 {
        let curve = random_curve(&mut r, p, 3);
        let (lo, hi) = random_interval(&mut r, p);
        let table = PointTable::build(&curve, &f, lo, hi).map_err(|e| e.to_string())?;
        let fast: Vec<(u64, u64)> = table.points().collect();
        if fast != oracle::curve_points(&curve, lo, hi) {
            return Err(format!("point set of {curve} with J = [{lo}, {hi})"));
        }
    }
    Ok("30 random curves over F_31 against exhaustive search".into())
}

fn random_config(r: &mut ChaCha8Rng, field: &Arc<PrimeField>, max_window: u64) -> ExperimentConfig {
    let p = field.modulus();
    let orders: Vec<u64> = [1u64, 2, 3, 5].into_iter().filter(|a| (p - 1) % a == 0).collect();
    let j = random_interval(r, p);
    let window = r.random_range(1..=max_window.min(p));
    let n_lo = r.random_range(0..p);
    let n_hi = r.random_range(n_lo..p);
    ExperimentConfig {
        field: field.clone(),
        curve: random_curve(r, p, 3),
        g: RationalMap::polynomial(random_poly(r, p, 3)),
        f: RationalMap::polynomial(random_poly(r, p, 3)),
        chi: MultChar::new(field.clone(), orders[r.random_range(0..orders.len())]).unwrap(),
        psi: AddChar::new(field.clone(), r.random_range(0..3)),
        rect: Rectangle::new(p, (n_lo, n_hi), j, window, r.random_bool(0.5)).unwrap(),
        theta: [0.0, PI / 6.0, PI / 2.0][r.random_range(0..3)],
        normalization: Normalization::IntervalLength,
    }
}

fn sums_incremental_vs_direct(opts: &VerifyOptions) -> Outcome {
    let mut r = rng(6);
    for (i, p) in [31u64, 101, 199].into_iter().cycle().take(12).enumerate() {
        let field = opts.field(p);
        let cfg = random_config(&mut r, &field, p / 2);
        let table = cfg.point_table().map_err(|e| e.to_string())?;
        let inc = compute_series(&cfg, &table).map_err(|e| e.to_string())?;
        let dir = compute_series_direct(&cfg, &table).map_err(|e| e.to_string())?;
        let tol = 1e-9 * cfg.rect.window as f64;
        for (k, n) in inc.indices().enumerate() {
            let d = (inc.sums[k] - dir.sums[k]).norm();
            if d > tol {
                return Err(format!("config {i}, n = {n}: incremental and direct differ by {d:e}"));
            }
            if p == 31 {
                let o = oracle::window_sum(&cfg, n);
                if (o - dir.sums[k]).norm() > tol {
                    return Err(format!("config {i}, n = {n}: direct {} but reference {o}", dir.sums[k]));
                }
            }
        }
    }
    Ok("sliding window, direct windows and exhaustive scan agree to 1e-9 H".into())
}

fn sums_conjugation_symmetry(opts: &VerifyOptions) -> Outcome {
    let mut r = rng(7);
    for _ in 0..8 {
        let field = opts.field(101);
        let cfg = random_config(&mut r, &field, 30);
        let mut conj = cfg.clone();
        conj.chi = cfg.chi.conj();
        conj.psi = cfg.psi.conj();
        let (a, b) = (series(&cfg)?, series(&conj)?);
        for (s, t) in a.sums.iter().zip(&b.sums) {
            if (s.conj() - t).norm() > 1e-9 * cfg.rect.window as f64 {
                return Err(format!("conjugate characters give {t}, expected {}", s.conj()));
            }
        }
    }
    Ok("conjugate characters give conjugate sums".into())
}

fn sums_phase_covariance(opts: &VerifyOptions) -> Outcome {
    let mut r = rng(8);
    for _ in 0..8 {
        let field = opts.field(101);
        let cfg = random_config(&mut r, &field, 30);
        let k = 1 + r.random_range(1..100);
        let mut scaled = cfg.clone();
        scaled.psi = AddChar::new(field.clone(), k);
        let mut one = cfg.clone();
        one.psi = AddChar::new(field.clone(), 1);
        let fk = cfg.f.numerator().scale(k);
        one.f = RationalMap::polynomial(fk);
        let (a, b) = (series(&scaled)?, series(&one)?);
        for (s, t) in a.sums.iter().zip(&b.sums) {
            if (s - t).norm() > 1e-9 * cfg.rect.window as f64 {
                return Err(format!("psi_k(f) = {s} but psi_1(k f) = {t}"));
            }
        }
    }
    Ok("psi_k(f) and psi_1(k f) give identical sums".into())
}

fn sums_real_for_quadratic(opts: &VerifyOptions) -> Outcome {
    let mut r = rng(9);
    for _ in 0..8 {
        let field = opts.field(101);
        let mut cfg = random_config(&mut r, &field, 30);
        cfg.chi = MultChar::new(field.clone(), 2).unwrap();
        cfg.psi = AddChar::new(field.clone(), 0);
        let s = series(&cfg)?;
        if let Some(v) = s.sums.iter().find(|v| v.im.abs() > 1e-12 * cfg.rect.window as f64) {
            return Err(format!("quadratic character with trivial psi gave {v}"));
        }
    }
    Ok("S_n is real for a quadratic character and trivial psi".into())
}

// ------------------------------------------------------ acceptance criteria

pub const MOMENT_REL_TOL: f64 = 1e-8;
pub const EXPANSION_TOL: f64 = 1e-9;
pub const COMPLETION_TOL_PER_P: f64 = 1e-7;
pub const M2_BAND: (f64, f64) = (0.90, 1.10);
pub const M4_BAND: (f64, f64) = (2.55, 3.45);
pub const M3_BAND: (f64, f64) = (-0.2, 0.2);
pub const NEGATIVE_KS_MIN: f64 = 0.2;
pub const DEGENERATE_FRACTION: f64 = 0.4;
pub const C_SLACK: f64 = 3.0;
pub const QUADRATURE_TOL: f64 = 1e-6;

fn criterion_1(opts: &VerifyOptions) -> Outcome {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let p = [31u64, 101, 499][i % 3];
        let field = opts.field(p);
        let orders: Vec<u64> = [1u64, 2, 3].into_iter().filter(|a| (p - 1) % a == 0).collect();
        let a = orders[r.random_range(0..orders.len())];
        let mut cfg = random_config(&mut r, &field, p / 3);
        cfg.chi = MultChar::new(field.clone(), a).unwrap();
        let s = series(&cfg)?;
        for k in 1..=6u32 {
            let direct = moment(&s, k);
            let binom = moments_via_binomial(&s, k);
            let scale: f64 = s.projections.iter().map(|u| u.abs().powi(k as i32)).sum();
            // windows whose sums cancel exactly leave only rounding residue,
            // so the scale is floored at 1
            let rel = (Complex64::new(direct, 0.0) - binom).norm() / scale.max(1.0);
            worst = worst.max(rel);
        }
    }
    ensure(
        worst <= MOMENT_REL_TOL,
        format!("max |M_k - binomial M_k| / max(sum |u|^k, 1) = {worst:.2e} (limit {MOMENT_REL_TOL:e}) over 20 configs, k <= 6"),
    )
}

fn criterion_2(opts: &VerifyOptions) -> Outcome {
    let p = 31;
    let field = opts.field(p);
    let mut r = rng(102);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (curve, j) in [("y - x", (0, p)), ("x^2 + y^2 - 1", (0, p.div_ceil(2)))] {
        for window in [2u64, 3] {
            let rect = Rectangle::new(p, (0, p - 1), j, window, true).map_err(|e| e.to_string())?;
            let cfg = experiment(&field, curve, "x + 2", "x*y", 3, 1, rect, 0.0);
            let table = cfg.point_table().map_err(|e| e.to_string())?;
            for jj in [1u32, 2] {
                for _ in 0..5 {
                    let n = r.random_range(0..p);
                    let (_, assembled) = shifted_expansion_check(&cfg, &table, n, jj).map_err(|e| e.to_string())?;
                    let direct = oracle::window_sum(&cfg, n).norm_sqr().powi(jj as i32);
                    worst = worst.max((direct - assembled).abs() / direct.max(1.0));
                    cases += 1;
                }
            }
        }
    }
    ensure(
        worst <= EXPANSION_TOL,
        format!("{cases} cases, max deviation {worst:.2e} (limit {EXPANSION_TOL:e})"),
    )
}

fn criterion_3(_: &VerifyOptions) -> Outcome {
    for h in 1..=6u64 {
        for j in 1..=3u32 {
            let closed = count_matching_tuples(h, j);
            let brute = oracle::matching_tuples(h, j);
            if closed != BigUint::from(brute) {
                return Err(format!("H = {h}, j = {j}: closed form {closed}, enumeration {brute}"));
            }
        }
    }
    let (h, j) = (50u64, 2u32);
    let count = count_matching_tuples(h, j);
    let main = factorial(j as u64) * BigUint::from(h).pow(j);
    let ratio = crate::geometry::ratio_f64(&count, &main);
    let upper = 1.0 + 4.0 * (j * j) as f64 / h as f64;
    ensure(
        (1.0..=upper).contains(&ratio),
        format!("closed form matches enumeration for H <= 6, j <= 3; H = 50, j = 2 ratio {ratio:.6} in [1, {upper}]"),
    )
}

fn criterion_4(opts: &VerifyOptions) -> Outcome {
    let mut r = rng(104);
    let mut worst = 0.0f64;
    for p in [101u64, 199] {
        let field = opts.field(p);
        for _ in 0..10 {
            let cfg = random_config(&mut r, &field, p);
            let var = HybridVariety::plane_curve(&cfg.curve, &field, &cfg.g, &cfg.f, &cfg.chi, &cfg.psi)
                .map_err(|e| e.to_string())?;
            let j = (cfg.rect.j_lo, cfg.rect.j_hi);
            let bounds = [None, Some(j)];
            let direct = oracle::box_sum(&cfg, (0, p), j);
            let fast = var.incomplete_sum(&bounds);
            let via = var.incomplete_via_completion(&bounds);
            worst = worst.max((via - direct).norm() / p as f64).max((fast - direct).norm() / p as f64);
        }
    }
    if worst > COMPLETION_TOL_PER_P {
        return Err(format!("completion deviates by {worst:.2e} p (limit {COMPLETION_TOL_PER_P:e} p)"));
    }
    let mut intervals = 0;
    for p in (3..500u64).filter(|&n| is_prime(n)) {
        let grid: Vec<u64> = (0..10).map(|i| (i * p + 4) / 9).collect();
        for a in 0..grid.len() {
            for b in a + 1..grid.len() {
                if grid[a] >= grid[b] {
                    continue;
                }
                let (lhs, rhs) = tail_bound_check(p, (grid[a], grid[b]), 1);
                if lhs > rhs {
                    return Err(format!("p = {p}, J = [{}, {}): {lhs} > {rhs}", grid[a], grid[b]));
                }
                intervals += 1;
            }
        }
    }
    Ok(format!(
        "completion within {worst:.2e} p on 20 configs; tail bound holds on {intervals} (p, J) pairs"
    ))
}

/// Moments and KS distance of one configuration.
pub struct GaussianRun {
    pub report: MomentReport,
    pub ks: f64,
    pub threshold: f64,
    pub model: GaussianModel,
}

pub fn gaussian_run(cfg: &ExperimentConfig, model: GaussianModel, k_max: u32) -> Result<GaussianRun, String> {
    let s = series(cfg)?;
    let dist = DistributionReport::new(&s.projections);
    Ok(GaussianRun {
        report: moments(&s, k_max, model),
        ks: dist.ks_distance(model),
        threshold: ks_threshold(s.len()),
        model,
    })
}

fn in_band(v: f64, band: (f64, f64)) -> bool {
    band.0 <= v && v <= band.1
}

fn gaussian_verdict(run: &GaussianRun, check_odd: bool) -> (bool, String) {
    let m = |k| run.report.row(k).map_or(f64::NAN, |r| r.normalized);
    let (m2, m3, m4) = (m(2), m(3), m(4));
    let ok = in_band(m2, M2_BAND) && in_band(m4, M4_BAND) && (!check_odd || in_band(m3, M3_BAND)) && run.ks < run.threshold;
    (
        ok,
        format!("m2 {m2:.4} m3 {m3:.4} m4 {m4:.4} ks {:.4} (< {:.4})", run.ks, run.threshold),
    )
}

fn main_regime(opts: &VerifyOptions, a: u64) -> Outcome {
    let p = 10007;
    let field = opts.field(p);
    let mut details = Vec::new();
    let mut ok = true;
    for theta in [0.0, PI / 4.0] {
        let rect = Rectangle::new(p, (0, p - 1), (0, p), 101, true).unwrap();
        let cfg = experiment(&field, "y - x", "x", "x*y", a, 1, rect, theta);
        let run = gaussian_run(&cfg, GaussianModel::select(a, false, theta), 4)?;
        let (pass, d) = gaussian_verdict(&run, true);
        ok &= pass && run.model == GaussianModel::VarHalf;
        details.push(format!("theta {theta:.4}: {d}"));
    }
    ensure(ok, details.join("; "))
}

fn criterion_5(opts: &VerifyOptions) -> Outcome {
    main_regime(opts, 2)
}

fn criterion_6(opts: &VerifyOptions) -> Outcome {
    let p = 10007;
    let field = opts.field(p);
    let rect = Rectangle::new(p, (0, p - 1), (0, 1), 101, true).unwrap();
    let mut cfg = experiment(&field, "y", "x", "0", 2, 0, rect, 0.0);
    cfg.normalization = Normalization::PointDensity;
    let model = GaussianModel::select(2, true, 0.0);
    let run = gaussian_run(&cfg, model, 4)?;
    let (pass, d) = gaussian_verdict(&run, false);
    ensure(pass && model == GaussianModel::Standard, format!("standard model: {d}"))
}

fn criterion_7(opts: &VerifyOptions) -> Outcome {
    let p = 10007u64;
    let field = opts.field(p);
    let short = (p as f64).powf(0.45).floor() as u64;
    let long = (p as f64).powf(0.75).floor() as u64;
    let theta = PI / 2.0;
    let rect_a = Rectangle::new(p, (0, short), (0, p), short, true).unwrap();
    let a = experiment(&field, "y - x", "x", "x*y", 2, 1, rect_a, theta);
    let rect_b = Rectangle::new(p, (0, long), (0, p), short, true).unwrap();
    let b = experiment(&field, "y - x", "x", "x + y", 2, 1, rect_b, theta);
    let ks_a = gaussian_run(&a, GaussianModel::VarHalf, 2)?.ks;
    let ks_b = gaussian_run(&b, GaussianModel::VarHalf, 2)?.ks;
    ensure(
        ks_a > NEGATIVE_KS_MIN && ks_b > NEGATIVE_KS_MIN,
        format!("short I: ks {ks_a:.4}; linear f: ks {ks_b:.4} (both must exceed {NEGATIVE_KS_MIN})"),
    )
}

fn criterion_8(opts: &VerifyOptions) -> Outcome {
    main_regime(opts, 1)
}

/// The curated sweep: a few curves and maps over the primes 101 and 199,
/// each with several windows and y-intervals.
pub fn curated_sweep(opts: &VerifyOptions) -> Vec<SweepItem> {
    let curves = ["y - x", "y - x^2", "x^2 + y^2 - 1", "y^2 - x^3 - x - 1"];
    let maps = [("x", "x*y", 2u64, 1u64), ("x + 1", "x^3 + y", 5, 2), ("x*y + 2", "x^2", 2, 3)];
    let mut items = Vec::new();
    for p in [101u64, 199] {
        let field = opts.field(p);
        for curve in curves {
            for (g, f, a, k) in maps {
                for (x_range, j_range) in [
                    ((0, p), (0, p)),
                    ((1, p / 3), (0, p)),
                    ((p / 4, p / 4 + 20), (0, p.div_ceil(2))),
                    ((0, p), (p / 3, 2 * p / 3)),
                ] {
                    items.push(SweepItem {
                        field: field.clone(),
                        curve: parse_poly(curve, &field).unwrap(),
                        g: parse_rational(g, &field).unwrap(),
                        f: parse_rational(f, &field).unwrap(),
                        chi: MultChar::new(field.clone(), if (p - 1) % a == 0 { a } else { 2 }).unwrap(),
                        psi: AddChar::new(field.clone(), k),
                        x_range,
                        j_range,
                    });
                }
            }
        }
    }
    items
}

fn criterion_9(opts: &VerifyOptions) -> Outcome {
    let items = curated_sweep(opts);
    if let Some(it) = items.iter().find(|it| is_degenerate(&it.f, &it.g, it.chi.order() as u32, it.psi.is_trivial())) {
        return Err(format!("curated item {} is degenerate", it.describe()));
    }
    let reports = bound_ratio_sweep(&items, C_SLACK).map_err(|e| e.to_string())?;
    let max_ratio = max_nondegenerate_ratio(&reports);

    let mut blowups = Vec::new();
    let mut ok = max_ratio <= 1.0;
    for p in [101u64, 199] {
        let field = opts.field(p);
        let item = SweepItem {
            field: field.clone(),
            curve: parse_poly("y - x", &field).unwrap(),
            g: parse_rational("x^2", &field).unwrap(),
            f: parse_rational("0", &field).unwrap(),
            chi: MultChar::new(field.clone(), 2).unwrap(),
            psi: AddChar::new(field.clone(), 0),
            x_range: (0, p),
            j_range: (0, p.div_ceil(2)),
        };
        let rep = item.report(C_SLACK).map_err(|e| e.to_string())?;
        let fraction = rep.abs_s / p as f64;
        ok &= rep.degenerate && fraction >= DEGENERATE_FRACTION;
        blowups.push(format!("p = {p}: |S| / |I| = {fraction:.3}, flagged {}", rep.degenerate));
    }
    ensure(
        ok,
        format!("{} items, max ratio {max_ratio:.4}; degenerate {}", reports.len(), blowups.join(", ")),
    )
}

fn criterion_10(_: &VerifyOptions) -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=10u32 {
        let mu = double_factorial_moment(k);
        for model in [GaussianModel::VarHalf, GaussianModel::Standard] {
            if gaussian_scaled_moment(model, k) != mu {
                return Err(format!("{model:?}, k = {k}: {} != {mu}", gaussian_scaled_moment(model, k)));
            }
            let raw = oracle::simpson(|t| t.powi(k as i32) * model.density(t), -14.0, 14.0, 20_000);
            worst = worst.max((model.moment_scale(k) * raw - mu).abs());
        }
        if (gaussian_moment_gamma_form(k) - mu).abs() > 1e-9 * mu.max(1.0) {
            return Err(format!("gamma form at k = {k}: {}", gaussian_moment_gamma_form(k)));
        }
    }
    ensure(
        worst <= QUADRATURE_TOL,
        format!("exact for k <= 10; quadrature deviation {worst:.2e} (limit {QUADRATURE_TOL:e})"),
    )
}
