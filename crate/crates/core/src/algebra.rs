//! Bivariate polynomials and rational maps over F_p.
//!
//! Polynomials are sparse coefficient tables keyed by `(x_exp, y_exp)`.
//! The table never stores zero coefficients, so structural equality is
//! polynomial equality.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::field::{mul_mod, pow_mod, PrimeField};
use crate::geometry::PointTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands live in different fields (p = {left} vs p = {right})")]
    FieldMismatch { left: u64, right: u64 },
    #[error("expected a polynomial, found a rational function with nonconstant denominator")]
    NotPolynomial,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
}

/// A monomial exponent pair `(i, j)` for `x^i y^j`.
pub type Exponent = (u32, u32);

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BivarPoly {
    p: u64,
    terms: BTreeMap<Exponent, u64>,
    degree: Option<u32>,
    degree_y: Option<u32>,
}

impl BivarPoly {
    pub fn zero(p: u64) -> Self {
        BivarPoly {
            p,
            terms: BTreeMap::new(),
            degree: None,
            degree_y: None,
        }
    }

    pub fn constant(p: u64, c: u64) -> Self {
        Self::monomial(p, (0, 0), c)
    }

    pub fn monomial(p: u64, exp: Exponent, c: u64) -> Self {
        Self::from_terms(p, [(exp, c)])
    }

    pub fn x(p: u64) -> Self {
        Self::monomial(p, (1, 0), 1)
    }

    pub fn y(p: u64) -> Self {
        Self::monomial(p, (0, 1), 1)
    }

    /// Builds a polynomial from (possibly repeated, possibly unreduced) terms.
    pub fn from_terms(p: u64, terms: impl IntoIterator<Item = (Exponent, u64)>) -> Self {
        let mut table = BTreeMap::new();
        for (e, c) in terms {
            let slot = table.entry(e).or_insert(0u64);
            *slot = (*slot + c % p) % p;
        }
        Self::normalized(p, table)
    }

    fn normalized(p: u64, mut terms: BTreeMap<Exponent, u64>) -> Self {
        terms.retain(|_, c| *c != 0);
        let degree = terms.keys().map(|&(i, j)| i + j).max();
        let degree_y = terms.keys().map(|&(_, j)| j).max();
        BivarPoly {
            p,
            terms,
            degree,
            degree_y,
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn degree_y(&self) -> Option<u32> {
        self.degree_y
    }

    pub fn degree_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    /// `Some(c)` if the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<u64> {
        match self.degree {
            None => Some(0),
            Some(0) => Some(self.coeff((0, 0))),
            _ => None,
        }
    }

    pub fn coeff(&self, exp: Exponent) -> u64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, u64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn check_field(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.p != other.p {
            Err(AlgebraError::FieldMismatch {
                left: self.p,
                right: other.p,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_field(other)?;
        Ok(self.add_unchecked(&other.neg()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let p = self.p;
        let mut table = self.terms.clone();
        for (&e, &c) in &other.terms {
            let slot = table.entry(e).or_insert(0);
            *slot = (*slot + c) % p;
        }
        Self::normalized(p, table)
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let p = self.p;
        let mut table: BTreeMap<Exponent, u64> = BTreeMap::new();
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                let slot = table.entry((i1 + i2, j1 + j2)).or_insert(0);
                *slot = (*slot + mul_mod(c1, c2, p)) % p;
            }
        }
        Self::normalized(p, table)
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        Self::normalized(p, self.terms.iter().map(|(&e, &c)| (e, (p - c) % p)).collect())
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.p;
        Self::normalized(p, self.terms.iter().map(|(&e, &v)| (e, mul_mod(v, c % p, p))).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::constant(self.p, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// The substitution `x -> x + u`, expanded binomially.
    pub fn shift_x(&self, u: u64) -> Self {
        let p = self.p;
        let u = u % p;
        if u == 0 {
            return self.clone();
        }
        let max_i = self.degree_x().unwrap_or(0) as usize;
        let mut upow = vec![1u64; max_i + 1];
        for k in 1..=max_i {
            upow[k] = mul_mod(upow[k - 1], u, p);
        }
        let mut table: BTreeMap<Exponent, u64> = BTreeMap::new();
        let mut row: Vec<u64> = vec![1];
        let mut row_index = 0usize;
        for (&(i, j), &c) in &self.terms {
            // terms iterate with ascending i, so Pascal's row only grows
            while row_index < i as usize {
                let mut next = vec![1u64; row.len() + 1];
                for k in 1..row.len() {
                    next[k] = (row[k - 1] + row[k]) % p;
                }
                row = next;
                row_index += 1;
            }
            for k in 0..=i as usize {
                let coeff = mul_mod(mul_mod(c, row[k], p), upow[i as usize - k], p);
                let slot = table.entry((k as u32, j)).or_insert(0);
                *slot = (*slot + coeff) % p;
            }
        }
        Self::normalized(p, table)
    }

    /// Evaluates at `(x0, y0)`.
    pub fn eval(&self, x0: u64, y0: u64) -> u64 {
        let p = self.p;
        let (x0, y0) = (x0 % p, y0 % p);
        self.terms.iter().fold(0u64, |acc, (&(i, j), &c)| {
            let t = mul_mod(mul_mod(c, pow_mod(x0, i as u64, p), p), pow_mod(y0, j as u64, p), p);
            (acc + t) % p
        })
    }

    /// Coefficients in `y` as dense univariate polynomials in `x`:
    /// entry `j` holds the coefficient vector (ascending in `x`) of `y^j`.
    pub fn coefficients_in_y(&self) -> Vec<Vec<u64>> {
        let dy = self.degree_y.map_or(0, |d| d as usize + 1);
        let mut out = vec![Vec::new(); dy];
        for (&(i, j), &c) in &self.terms {
            let col = &mut out[j as usize];
            if col.len() <= i as usize {
                col.resize(i as usize + 1, 0);
            }
            col[i as usize] = c;
        }
        out
    }

    /// Leading coefficient with respect to lexicographic order (x before y).
    fn lex_leading(&self) -> Option<(Exponent, u64)> {
        self.terms.iter().next_back().map(|(&e, &c)| (e, c))
    }

    /// Substitutes `x^i y^j -> x^(i/k) y^(j/k)`; all exponents must be
    /// divisible by `k`.
    fn deflate(&self, k: u32) -> Option<Self> {
        if self.terms.keys().any(|&(i, j)| i % k != 0 || j % k != 0) {
            return None;
        }
        Some(Self::normalized(
            self.p,
            self.terms.iter().map(|(&(i, j), &c)| ((i / k, j / k), c)).collect(),
        ))
    }
}

impl fmt::Debug for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BivarPoly[p={}]({})", self.p, self)
    }
}

/// Canonical form: terms by descending total degree, then descending
/// x-exponent; coefficients in `1..p`, unit coefficients omitted.
impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<Exponent> = self.terms.keys().copied().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        for (n, e) in keys.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let c = self.terms[e];
            let mut parts: Vec<String> = Vec::new();
            if c != 1 || *e == (0, 0) {
                parts.push(c.to_string());
            }
            for (var, k) in [("x", e.0), ("y", e.1)] {
                match k {
                    0 => {}
                    1 => parts.push(var.to_string()),
                    _ => parts.push(format!("{var}^{k}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Result of evaluating a rational map at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Value(u64),
    Pole,
}

impl Evaluation {
    pub fn value(self) -> Option<u64> {
        match self {
            Evaluation::Value(v) => Some(v),
            Evaluation::Pole => None,
        }
    }
}

/// A quotient `numerator / denominator`. No gcd cancellation is performed;
/// coprimality of the two parts is the caller's assertion.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMap {
    numerator: BivarPoly,
    denominator: BivarPoly,
}

impl RationalMap {
    pub fn new(numerator: BivarPoly, denominator: BivarPoly) -> Result<Self, AlgebraError> {
        numerator.check_field(&denominator)?;
        if denominator.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        Ok(RationalMap {
            numerator,
            denominator,
        })
    }

    pub fn polynomial(q: BivarPoly) -> Self {
        let p = q.modulus();
        RationalMap {
            numerator: q,
            denominator: BivarPoly::constant(p, 1),
        }
    }

    pub fn numerator(&self) -> &BivarPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &BivarPoly {
        &self.denominator
    }

    pub fn modulus(&self) -> u64 {
        self.numerator.modulus()
    }

    /// Degree of the denominator.
    pub fn denominator_degree(&self) -> u32 {
        self.denominator.degree().unwrap_or(0)
    }

    /// Degree of the polar divisor including the line at infinity:
    /// `max(deg numerator, deg denominator)`.
    pub fn pole_degree(&self) -> u32 {
        self.numerator
            .degree()
            .unwrap_or(0)
            .max(self.denominator_degree())
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator_degree() == 0
    }

    /// The polynomial this map equals, if its denominator is constant.
    pub fn as_polynomial(&self) -> Result<BivarPoly, AlgebraError> {
        match self.denominator.as_constant() {
            Some(c) if c != 0 => {
                let inv = pow_mod(c, self.modulus() - 2, self.modulus());
                Ok(self.numerator.scale(inv))
            }
            _ => Err(AlgebraError::NotPolynomial),
        }
    }

    pub fn eval(&self, field: &PrimeField, x0: u64, y0: u64) -> Evaluation {
        let den = self.denominator.eval(x0, y0);
        if den == 0 {
            return Evaluation::Pole;
        }
        let num = self.numerator.eval(x0, y0);
        Evaluation::Value(field.mul(num, field.inv(den).expect("nonzero denominator")))
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.as_constant() == Some(1) {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({}) / ({})", self.numerator, self.denominator)
        }
    }
}

/// Splits a polynomial into the part free of `y` and the rest.
pub fn split_r1_r2(f: &RationalMap) -> Result<(BivarPoly, BivarPoly), AlgebraError> {
    let q = f.as_polynomial()?;
    Ok(split_poly(&q))
}

pub fn split_poly(q: &BivarPoly) -> (BivarPoly, BivarPoly) {
    let p = q.modulus();
    let (r1, r2): (Vec<_>, Vec<_>) = q.terms().partition(|&((_, j), _)| j == 0);
    (BivarPoly::from_terms(p, r1), BivarPoly::from_terms(p, r2))
}

/// Decides whether `q = c * h^a` for some polynomial `h` over F_p and
/// constant `c`.
///
/// Powers of the characteristic are peeled off first (`h^p` has all
/// exponents divisible by `p`). The remaining root is extracted term by
/// term in lexicographic order and confirmed by re-expansion.
pub fn is_perfect_power(q: &BivarPoly, a: u32) -> bool {
    assert!(a >= 1, "power must be positive");
    if q.as_constant().is_some() || a == 1 {
        return true;
    }
    let p = q.modulus();
    if a as u64 % p == 0 {
        return match q.deflate(p as u32) {
            Some(root) => is_perfect_power(&root, a / p as u32),
            None => false,
        };
    }
    let ((li, lj), lc) = q.lex_leading().expect("nonconstant");
    if li % a != 0 || lj % a != 0 {
        return false;
    }
    let target = q.scale(pow_mod(lc, p - 2, p));
    let lead = (li / a, lj / a);
    let mut root = BivarPoly::monomial(p, lead, 1);
    // a * lead^(a-1) is the derivative factor that carries the next term of
    // the root into the leading term of the residual
    let derivative_exp = ((a - 1) * lead.0, (a - 1) * lead.1);
    let derivative_inv = pow_mod(a as u64 % p, p - 2, p);
    let budget = (lead.0 as usize + 1) * (lead.0 as usize + lead.1 as usize + 2) + 4;
    for _ in 0..budget {
        let residual = target.sub(&root.pow(a)).expect("same field");
        let Some(((ri, rj), rc)) = residual.lex_leading() else {
            return true;
        };
        if ri < derivative_exp.0 || rj < derivative_exp.1 {
            return false;
        }
        let next = (ri - derivative_exp.0, rj - derivative_exp.1);
        if next >= lead {
            return false;
        }
        if root.coeff(next) != 0 {
            return false;
        }
        root = root.add_unchecked(&BivarPoly::monomial(p, next, mul_mod(rc, derivative_inv, p)));
    }
    false
}

/// Whether a rational map `g = g1/g2` is a constant multiple of an a-th
/// power, assuming `g1` and `g2` are coprime.
pub fn rational_is_perfect_power(g: &RationalMap, a: u32) -> bool {
    if a <= 1 {
        return true;
    }
    if g.is_polynomial() {
        return is_perfect_power(g.numerator(), a);
    }
    // g1/g2 = g1*g2^(a-1) / g2^a
    let lifted = g
        .numerator()
        .mul_unchecked(&g.denominator().pow(a - 1));
    is_perfect_power(&lifted, a)
}

/// Three-valued outcome of a syntactic hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Holds,
    Fails,
    NotDecidable,
}

impl From<bool> for Tri {
    fn from(b: bool) -> Self {
        if b {
            Tri::Holds
        } else {
            Tri::Fails
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

/// Which theorem's hypotheses to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremMode {
    /// Both characters nontrivial.
    MainTheorem,
    /// Trivial multiplicative character, conditions on `f` unchanged.
    TrivialChi,
    /// Trivial additive character, `g` must not be an a-th power.
    TrivialPsi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub mode: TheoremMode,
    pub f_is_polynomial: Tri,
    pub deg_f_lt_p: Tri,
    pub r2_linear: Tri,
    pub deg_r1_ge_3: Tri,
    pub denominator_pth_power: Tri,
    pub g_is_ath_power: Tri,
    pub curve_has_duplicate_x: Tri,
    /// Conditions involving the curve ideal or Artin-Schreier forms, which
    /// are taken on trust.
    pub not_decidable: Vec<&'static str>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

/// Evaluates every syntactically decidable hypothesis.
///
/// `points`, when given, decides the one-x-per-point condition for the `J`
/// it was built with.
pub fn check_hypotheses(
    f: &RationalMap,
    g: &RationalMap,
    curve: &BivarPoly,
    chi_order: u32,
    mode: TheoremMode,
    points: Option<&PointTable>,
) -> HypothesisReport {
    let p = curve.modulus();
    let mut reasons = Vec::new();

    let f_poly = f.as_polynomial().ok();
    let f_is_polynomial = Tri::from(f_poly.is_some());
    let max_deg = f.numerator().degree().unwrap_or(0).max(f.denominator_degree());
    let deg_f_lt_p = Tri::from((max_deg as u64) < p);

    let (r2_linear, deg_r1_ge_3) = match &f_poly {
        Some(q) => {
            let (r1, r2) = split_poly(q);
            (
                Tri::from(r2.degree().is_none_or(|d| d <= 1)),
                Tri::from(r1.degree().is_some_and(|d| d >= 3)),
            )
        }
        None => (Tri::NotDecidable, Tri::NotDecidable),
    };
    let denominator_pth_power = if f_poly.is_some() {
        Tri::NotDecidable
    } else {
        Tri::from(is_perfect_power(f.denominator(), p as u32))
    };
    let g_is_ath_power = Tri::from(rational_is_perfect_power(g, chi_order));
    let curve_has_duplicate_x = match points {
        Some(pt) => Tri::from(pt.has_duplicate_x()),
        None => Tri::NotDecidable,
    };

    if curve.degree_y().is_none_or(|d| d == 0) {
        reasons.push("curve has degree 0 in y".to_string());
    }

    match mode {
        TheoremMode::MainTheorem | TheoremMode::TrivialChi => {
            if f_poly.is_some() {
                if deg_f_lt_p == Tri::Fails {
                    reasons.push(format!("deg f = {max_deg} is not below p = {p}"));
                }
                if r2_linear == Tri::Holds && deg_r1_ge_3 == Tri::Fails {
                    reasons.push("r2 is linear and deg r1 < 3".to_string());
                }
            } else if denominator_pth_power == Tri::Holds {
                reasons.push("denominator of f is a constant multiple of a p-th power".to_string());
            }
        }
        TheoremMode::TrivialPsi => {
            if g_is_ath_power == Tri::Holds {
                reasons.push(format!("g is a constant multiple of a {chi_order}-th power"));
            }
        }
    }

    let not_decidable = match mode {
        TheoremMode::TrivialPsi => vec![
            "g is not h^a + Q*P^b on the curve",
            "curve is absolutely irreducible",
            "numerator and denominator of g are coprime",
        ],
        _ => vec![
            "f is not h^p - h + linear + Q*P^b",
            "r2 is not linear + Q*P^b for nonzero b",
            "curve is absolutely irreducible",
            "numerator and denominator of f are coprime",
        ],
    };

    let verdict = if !reasons.is_empty() {
        Verdict::Fail
    } else if curve_has_duplicate_x == Tri::Holds {
        reasons.push("two curve points in J share an x-coordinate".to_string());
        Verdict::Unknown
    } else {
        Verdict::Pass
    };

    HypothesisReport {
        mode,
        f_is_polynomial,
        deg_f_lt_p,
        r2_linear,
        deg_r1_ge_3,
        denominator_pth_power,
        g_is_ath_power,
        curve_has_duplicate_x,
        not_decidable,
        verdict,
        reasons,
    }
}

/// Syntactic sufficient condition for the degenerate case of the
/// complete-sum bound: `chi(g)` constant (trivial character or `g` an a-th
/// power) and `psi(f)` linear (trivial character or `f` of degree at most 1).
pub fn is_degenerate(f: &RationalMap, g: &RationalMap, chi_order: u32, psi_trivial: bool) -> bool {
    let chi_constant = chi_order <= 1 || rational_is_perfect_power(g, chi_order);
    let psi_linear = psi_trivial
        || f
            .as_polynomial()
            .is_ok_and(|q| q.degree().is_none_or(|d| d <= 1));
    chi_constant && psi_linear
}
