//! Slow reference computations used only to check the fast paths: every
//! function here enumerates from the definition and shares no code with the
//! implementation beyond the field arithmetic and character evaluation.

use num_complex::Complex64;

use crate::algebra::BivarPoly;
use crate::characters::{AddChar, MultChar};
use crate::sums::ExperimentConfig;

/// Primality by trial division.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Evaluates a polynomial term by term with repeated multiplication.
pub fn eval_naive(q: &BivarPoly, x: u64, y: u64) -> u64 {
    let p = q.modulus() as u128;
    let mut acc = 0u128;
    for ((i, j), c) in q.terms() {
        let mut t = c as u128;
        for _ in 0..i {
            t = t * x as u128 % p;
        }
        for _ in 0..j {
            t = t * y as u128 % p;
        }
        acc = (acc + t) % p;
    }
    acc as u64
}

/// Points of `P = 0` with `y` in `[j_lo, j_hi)`, by testing every pair.
pub fn curve_points(curve: &BivarPoly, j_lo: u64, j_hi: u64) -> Vec<(u64, u64)> {
    let p = curve.modulus();
    let mut out = Vec::new();
    for x in 0..p {
        for y in j_lo..j_hi {
            if eval_naive(curve, x, y) == 0 {
                out.push((x, y));
            }
        }
    }
    out
}

fn term_naive(cfg: &ExperimentConfig, x: u64, y: u64) -> Option<Complex64> {
    let field = &cfg.field;
    let ev = |num: &BivarPoly, den: &BivarPoly| -> Option<u64> {
        let d = eval_naive(den, x, y);
        if d == 0 {
            return None;
        }
        Some(field.mul(eval_naive(num, x, y), field.pow(d, field.modulus() - 2)))
    };
    let g = ev(cfg.g.numerator(), cfg.g.denominator())?;
    let f = ev(cfg.f.numerator(), cfg.f.denominator())?;
    Some(cfg.chi.eval(g) * cfg.psi.eval(f))
}

/// `S_n` by scanning every `(x, y)` with `x` in the window and `y` in `J`.
pub fn window_sum(cfg: &ExperimentConfig, n: u64) -> Complex64 {
    let p = cfg.field.modulus();
    let r = &cfg.rect;
    let mut s = Complex64::new(0.0, 0.0);
    for step in 1..=r.window {
        let x = n + step;
        if x >= p && !r.wrap {
            break;
        }
        let x = x % p;
        for y in r.j_lo..r.j_hi {
            if eval_naive(&cfg.curve, x, y) == 0 {
                if let Some(t) = term_naive(cfg, x, y) {
                    s += t;
                }
            }
        }
    }
    s
}

/// Sum over points of the plane curve in `[x_lo, x_hi) x [y_lo, y_hi)`.
pub fn box_sum(cfg: &ExperimentConfig, x: (u64, u64), y: (u64, u64)) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for xv in x.0..x.1 {
        for yv in y.0..y.1 {
            if eval_naive(&cfg.curve, xv, yv) == 0 {
                if let Some(t) = term_naive(cfg, xv, yv) {
                    s += t;
                }
            }
        }
    }
    s
}

/// Tuples in `[1, H]^(2j)` whose halves agree as multisets, by enumeration.
pub fn matching_tuples(window: u64, j: u32) -> u64 {
    let len = 2 * j as usize;
    let mut tuple = vec![1u64; len];
    let mut count = 0;
    loop {
        let mut a = tuple[..j as usize].to_vec();
        let mut b = tuple[j as usize..].to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a == b {
            count += 1;
        }
        let mut k = len;
        loop {
            if k == 0 {
                return count;
            }
            k -= 1;
            tuple[k] += 1;
            if tuple[k] <= window {
                break;
            }
            tuple[k] = 1;
        }
    }
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `sum_x chi(x)` or `sum_x psi(x)`-style complete sums, for orthogonality.
pub fn complete_char_sums(chi: &MultChar, psi: &AddChar) -> (Complex64, Complex64) {
    let p = chi.field().modulus();
    ((0..p).map(|x| chi.eval(x)).sum(), (0..p).map(|x| psi.eval(x)).sum())
}

/// Every `c * h^a` with `h` of total degree at most `deg_h`, as canonical
/// coefficient lists; the set against which perfect-power tests are checked.
pub fn perfect_powers(p: u64, deg_h: u32, a: u32) -> std::collections::HashSet<Vec<((u32, u32), u64)>> {
    let monomials: Vec<(u32, u32)> = (0..=deg_h)
        .flat_map(|d| (0..=d).map(move |i| (i, d - i)))
        .collect();
    let mut out = std::collections::HashSet::new();
    let total = p.pow(monomials.len() as u32);
    for code in 0..total {
        let mut c = code;
        let h = BivarPoly::from_terms(
            p,
            monomials.iter().map(|&m| {
                let coef = c % p;
                c /= p;
                (m, coef)
            }),
        );
        let ha = h.pow(a);
        for scalar in 1..p {
            out.insert(ha.scale(scalar).terms().collect());
        }
    }
    out.insert(Vec::new());
    out
}
