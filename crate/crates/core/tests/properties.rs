use std::sync::Arc;

use hybridsum::algebra::{is_perfect_power, BivarPoly, RationalMap};
use hybridsum::characters::{AddChar, MultChar};
use hybridsum::field::PrimeField;
use hybridsum::geometry::Rectangle;
use hybridsum::oracle;
use hybridsum::polyparse::{parse_expr, parse_poly};
use hybridsum::sums::{compute_series, compute_series_direct, ExperimentConfig, Normalization};
use proptest::prelude::*;

const P: u64 = 101;

fn field(p: u64) -> Arc<PrimeField> {
    Arc::new(PrimeField::new(p).unwrap())
}

fn poly(p: u64, max_deg: u32) -> impl Strategy<Value = BivarPoly> {
    let monomials: Vec<(u32, u32)> = (0..=max_deg).flat_map(|d| (0..=d).map(move |i| (i, d - i))).collect();
    let n = monomials.len();
    proptest::collection::vec(proptest::option::weighted(0.5, 0..p), n)
        .prop_map(move |cs| BivarPoly::from_terms(p, monomials.iter().zip(cs).filter_map(|(&m, c)| c.map(|c| (m, c)))))
}

fn curve(p: u64) -> impl Strategy<Value = BivarPoly> {
    poly(p, 3).prop_filter("curve must involve y", |c| c.degree_y().is_some_and(|d| d >= 1))
}

prop_compose! {
    fn config(p: u64)(
        curve in curve(p),
        g in poly(p, 3),
        f in poly(p, 3),
        a in prop::sample::select(vec![1u64, 2, 4, 5]),
        k in 0..p,
        j in (0..p, 0..p),
        i in (0..p, 0..p),
        window in 1..=p,
        wrap in any::<bool>(),
        theta in prop::sample::select(vec![0.0, 0.5, std::f64::consts::FRAC_PI_2]),
    ) -> ExperimentConfig {
        let fl = field(p);
        ExperimentConfig {
            curve,
            g: RationalMap::polynomial(g),
            f: RationalMap::polynomial(f),
            chi: MultChar::new(fl.clone(), a).unwrap(),
            psi: AddChar::new(fl.clone(), k),
            rect: Rectangle::new(p, (i.0.min(i.1), i.0.max(i.1)), (j.0.min(j.1), j.0.max(j.1) + 1), window, wrap).unwrap(),
            theta,
            normalization: Normalization::IntervalLength,
            field: fl,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(P, 3), b in poly(P, 3), c in poly(P, 3)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(P, 3), b in poly(P, 3), x in 0..P, y in 0..P) {
        let prod = a.mul(&b).unwrap();
        let sum = a.add(&b).unwrap();
        prop_assert_eq!(prod.eval(x, y), a.eval(x, y) * b.eval(x, y) % P);
        prop_assert_eq!(sum.eval(x, y), (a.eval(x, y) + b.eval(x, y)) % P);
        prop_assert_eq!(a.eval(x, y), oracle::eval_naive(&a, x, y));
    }

    #[test]
    fn shifts_compose(q in poly(P, 4), u in 0..P, v in 0..P, x in 0..P, y in 0..P) {
        prop_assert_eq!(q.shift_x(u).shift_x(v), q.shift_x((u + v) % P));
        prop_assert_eq!(q.shift_x(u).eval(x, y), q.eval((x + u) % P, y));
    }

    #[test]
    fn powers_are_detected(h in poly(P, 2), a in 1u32..5, c in 1..P) {
        prop_assert!(is_perfect_power(&h.pow(a).scale(c), a));
    }

    #[test]
    fn print_parse_round_trip(q in poly(P, 5)) {
        prop_assert_eq!(parse_poly(&q.to_string(), &field(P)).unwrap(), q);
    }

    #[test]
    fn tree_evaluation_matches_expansion(q in poly(13, 3), r in poly(13, 2), e in 0u32..4, x in 0..13u64, y in 0..13u64) {
        let fl = field(13);
        let text = format!("({q}) * ({r})^{e} - ({r})");
        let tree = parse_expr(&text).unwrap();
        prop_assert_eq!(tree.eval(&fl, x, y), tree.expand(&fl).unwrap().eval(x, y));
    }

    #[test]
    fn incremental_matches_direct(cfg in config(P)) {
        let table = cfg.point_table().unwrap();
        let inc = compute_series(&cfg, &table).unwrap();
        let dir = compute_series_direct(&cfg, &table).unwrap();
        let tol = 1e-9 * cfg.rect.window as f64;
        for (s, t) in inc.sums.iter().zip(&dir.sums) {
            prop_assert!((s - t).norm() <= tol);
        }
    }

    #[test]
    fn conjugate_characters_conjugate_sums(cfg in config(P)) {
        let mut conj = cfg.clone();
        conj.chi = cfg.chi.conj();
        conj.psi = cfg.psi.conj();
        let a = compute_series(&cfg, &cfg.point_table().unwrap()).unwrap();
        let b = compute_series(&conj, &conj.point_table().unwrap()).unwrap();
        for (s, t) in a.sums.iter().zip(&b.sums) {
            prop_assert!((s.conj() - t).norm() <= 1e-9 * cfg.rect.window as f64);
        }
    }

    #[test]
    fn frequency_moves_into_f(cfg in config(P), k in 2..P) {
        let fl = cfg.field.clone();
        let mut scaled = cfg.clone();
        scaled.psi = AddChar::new(fl.clone(), k);
        let mut folded = cfg.clone();
        folded.psi = AddChar::new(fl.clone(), 1);
        folded.f = RationalMap::polynomial(cfg.f.numerator().scale(k));
        let a = compute_series(&scaled, &scaled.point_table().unwrap()).unwrap();
        let b = compute_series(&folded, &folded.point_table().unwrap()).unwrap();
        for (s, t) in a.sums.iter().zip(&b.sums) {
            prop_assert!((s - t).norm() <= 1e-9 * cfg.rect.window as f64);
        }
    }

    #[test]
    fn quadratic_character_with_trivial_psi_is_real(cfg in config(P)) {
        let mut q = cfg.clone();
        q.chi = MultChar::new(cfg.field.clone(), 2).unwrap();
        q.psi = AddChar::new(cfg.field.clone(), 0);
        let s = compute_series(&q, &q.point_table().unwrap()).unwrap();
        for v in &s.sums {
            prop_assert!(v.im.abs() <= 1e-12 * cfg.rect.window as f64);
        }
    }
}

#[test]
fn perfect_powers_against_enumeration() {
    // all polynomials of total degree <= 2 over F_5 and F_7
    let monomials: Vec<(u32, u32)> = (0..=2u32).flat_map(|d| (0..=d).map(move |i| (i, d - i))).collect();
    for p in [5u64, 7] {
        let squares = oracle::perfect_powers(p, 1, 2);
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
            let want = squares.contains(&q.terms().collect::<Vec<_>>());
            assert_eq!(is_perfect_power(&q, 2), want, "p = {p}: {q}");
        }
    }
}

#[test]
fn window_sums_against_exhaustive_scan() {
    let fl = field(31);
    let c = parse_poly("x^2 + y^2 - 1", &fl).unwrap();
    let cfg = ExperimentConfig {
        curve: c,
        g: hybridsum::polyparse::parse_rational("x + 2", &fl).unwrap(),
        f: hybridsum::polyparse::parse_rational("x*y/(x - 3)", &fl).unwrap(),
        chi: MultChar::new(fl.clone(), 3).unwrap(),
        psi: AddChar::new(fl.clone(), 1),
        rect: Rectangle::new(31, (0, 30), (0, 31), 7, true).unwrap(),
        theta: 0.0,
        normalization: Normalization::IntervalLength,
        field: fl,
    };
    let s = compute_series(&cfg, &cfg.point_table().unwrap()).unwrap();
    for (i, n) in s.indices().enumerate() {
        assert!((s.sums[i] - oracle::window_sum(&cfg, n)).norm() < 1e-12, "n = {n}");
    }
}
