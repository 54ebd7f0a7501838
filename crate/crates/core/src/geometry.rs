//! F_p-points of plane curves inside rectangles, x-shifted curves, and the
//! matching-tuple count behind the diagonal moment terms.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::algebra::BivarPoly;
use crate::field::PrimeField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),
    #[error("curve does not depend on y")]
    NoYDependence,
    #[error("shift set contains the repeated value {0}")]
    RepeatedShift(u64),
    #[error("point table was built for J = [{table_lo}, {table_hi}) but the rectangle uses [{rect_lo}, {rect_hi})")]
    IntervalMismatch {
        table_lo: u64,
        table_hi: u64,
        rect_lo: u64,
        rect_hi: u64,
    },
}

/// The index interval `I = [n_lo, n_hi]`, the y-interval `J = [j_lo, j_hi)`
/// and the window length `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rectangle {
    pub n_lo: u64,
    pub n_hi: u64,
    pub j_lo: u64,
    pub j_hi: u64,
    pub window: u64,
    /// Windows `(n, n + H]` wrap modulo `p`; otherwise they are truncated at
    /// `p - 1`.
    pub wrap: bool,
}

impl Rectangle {
    pub fn new(p: u64, i: (u64, u64), j: (u64, u64), window: u64, wrap: bool) -> Result<Self, GeometryError> {
        let rect = Rectangle {
            n_lo: i.0,
            n_hi: i.1,
            j_lo: j.0,
            j_hi: j.1,
            window,
            wrap,
        };
        rect.validate(p)?;
        Ok(rect)
    }

    /// Full `I`, full `J`, wrapping windows.
    pub fn full(p: u64, window: u64) -> Result<Self, GeometryError> {
        Self::new(p, (0, p - 1), (0, p), window, true)
    }

    pub fn validate(&self, p: u64) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidRectangle(m));
        if self.n_lo > self.n_hi || self.n_hi > p - 1 {
            return bad(format!("I = [{}, {}] is not inside [0, {}]", self.n_lo, self.n_hi, p - 1));
        }
        if self.j_lo >= self.j_hi || self.j_hi > p {
            return bad(format!("J = [{}, {}) is not a nonempty subinterval of [0, {p})", self.j_lo, self.j_hi));
        }
        if self.window < 1 || self.window > p {
            return bad(format!("H = {} is not in [1, {p}]", self.window));
        }
        Ok(())
    }

    /// Number of integers in `I`.
    pub fn interval_len(&self) -> u64 {
        self.n_hi - self.n_lo + 1
    }

    pub fn j_len(&self) -> u64 {
        self.j_hi - self.j_lo
    }

    pub fn alpha(&self, p: u64) -> f64 {
        self.j_lo as f64 / p as f64
    }

    pub fn beta(&self, p: u64) -> f64 {
        self.j_hi as f64 / p as f64
    }
}

/// Curve points with `y` in `J`, bucketed by x-coordinate.
#[derive(Debug, Clone)]
pub struct PointTable {
    p: u64,
    j_lo: u64,
    j_hi: u64,
    buckets: Vec<Vec<u32>>,
    prefix: Vec<u64>,
    duplicate_x: bool,
}

impl PointTable {
    /// Exhaustive enumeration of `P(x, y) = 0` with `y` in `[j_lo, j_hi)`.
    pub fn build(curve: &BivarPoly, field: &PrimeField, j_lo: u64, j_hi: u64) -> Result<Self, GeometryError> {
        let p = field.modulus();
        if curve.degree_y().is_none_or(|d| d == 0) {
            return Err(GeometryError::NoYDependence);
        }
        if j_lo >= j_hi || j_hi > p {
            return Err(GeometryError::InvalidRectangle(format!(
                "J = [{j_lo}, {j_hi}) is not a nonempty subinterval of [0, {p})"
            )));
        }
        let columns = curve.coefficients_in_y();
        let buckets: Vec<Vec<u32>> = (0..p)
            .into_par_iter()
            .map(|x| roots_in_interval(&columns, field, x, j_lo, j_hi))
            .collect();
        Ok(Self::from_buckets(p, j_lo, j_hi, buckets))
    }

    fn from_buckets(p: u64, j_lo: u64, j_hi: u64, buckets: Vec<Vec<u32>>) -> Self {
        let mut prefix = Vec::with_capacity(buckets.len() + 1);
        prefix.push(0);
        let mut acc = 0u64;
        for b in &buckets {
            acc += b.len() as u64;
            prefix.push(acc);
        }
        let duplicate_x = buckets.iter().any(|b| b.len() >= 2);
        PointTable {
            p,
            j_lo,
            j_hi,
            buckets,
            prefix,
            duplicate_x,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn j_interval(&self) -> (u64, u64) {
        (self.j_lo, self.j_hi)
    }

    /// Total number of points `r`.
    pub fn len(&self) -> u64 {
        *self.prefix.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_duplicate_x(&self) -> bool {
        self.duplicate_x
    }

    /// The y-values over `x`, ascending.
    pub fn bucket(&self, x: u64) -> &[u32] {
        &self.buckets[(x % self.p) as usize]
    }

    /// All points in ascending `(x, y)` order.
    pub fn points(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.buckets
            .iter()
            .enumerate()
            .flat_map(|(x, ys)| ys.iter().map(move |&y| (x as u64, y as u64)))
    }

    /// Points with `x` in `(n, n + H]`, read modulo `p` when `wrap` is set
    /// and truncated at `p - 1` otherwise.
    pub fn count_rectangle(&self, n: u64, window: u64, wrap: bool) -> u64 {
        let p = self.p;
        let window = window.min(p);
        let start = n + 1;
        let end = n + window;
        let upto = |hi: u64| self.prefix[(hi.min(p)) as usize];
        if end < p {
            upto(end + 1) - upto(start)
        } else if !wrap {
            upto(p) - upto(start.min(p))
        } else {
            let head = upto(p) - upto(start.min(p));
            head + upto(end - p + 1)
        }
    }
}

fn roots_in_interval(columns: &[Vec<u64>], field: &PrimeField, x: u64, j_lo: u64, j_hi: u64) -> Vec<u32> {
    let p = field.modulus();
    let coeffs: Vec<u64> = columns.iter().map(|c| horner(c, x, p)).collect();
    let mut out = Vec::new();
    if coeffs.len() == 2 {
        // linear in y: one root, none, or the whole fibre
        let (c0, c1) = (coeffs[0], coeffs[1]);
        if c1 != 0 {
            let y = field.mul(field.neg(c0), field.inv(c1).expect("nonzero"));
            if (j_lo..j_hi).contains(&y) {
                out.push(y as u32);
            }
        } else if c0 == 0 {
            out.extend((j_lo..j_hi).map(|y| y as u32));
        }
        return out;
    }
    for y in j_lo..j_hi {
        if horner(&coeffs, y, p) == 0 {
            out.push(y as u32);
        }
    }
    out
}

/// Dense univariate evaluation, coefficients ascending.
#[inline]
fn horner(coeffs: &[u64], t: u64, p: u64) -> u64 {
    if p < (1 << 32) {
        coeffs.iter().rev().fold(0u64, |acc, &c| (acc * t + c) % p)
    } else {
        coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| (crate::field::mul_mod(acc, t, p) + c) % p)
    }
}

/// The system `P(x + u_i, y_i) = 0` for distinct shifts `u_1..u_m`.
#[derive(Debug, Clone)]
pub struct ShiftedCurve {
    base: BivarPoly,
    shifts: Vec<u64>,
    equations: Vec<BivarPoly>,
}

/// A point `(x, y_1, .., y_m)` of a shifted curve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ShiftedPoint {
    pub x: u64,
    pub ys: SmallVec<[u32; 4]>,
}

impl ShiftedCurve {
    pub fn new(base: BivarPoly, shifts: Vec<u64>) -> Result<Self, GeometryError> {
        let p = base.modulus();
        let shifts: Vec<u64> = shifts.into_iter().map(|u| u % p).collect();
        for (i, u) in shifts.iter().enumerate() {
            if shifts[..i].contains(u) {
                return Err(GeometryError::RepeatedShift(*u));
            }
        }
        let equations = shifts.iter().map(|&u| base.shift_x(u)).collect();
        Ok(ShiftedCurve {
            base,
            shifts,
            equations,
        })
    }

    pub fn base(&self) -> &BivarPoly {
        &self.base
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    /// Number of shifts `m`; the curve lives in `(m + 1)`-space.
    pub fn m(&self) -> usize {
        self.shifts.len()
    }

    /// Checks the defining equations directly.
    pub fn contains(&self, x: u64, ys: &[u32]) -> bool {
        ys.len() == self.m()
            && self
                .equations
                .iter()
                .zip(ys)
                .all(|(eq, &y)| eq.eval(x, y as u64) == 0)
    }

    /// Assembles the points over `x` in `I` from the base point table: the
    /// Cartesian product of the buckets over `x + u_i`.
    pub fn enumerate(&self, table: &PointTable, rect: &Rectangle) -> Result<Vec<ShiftedPoint>, GeometryError> {
        if table.j_interval() != (rect.j_lo, rect.j_hi) {
            return Err(GeometryError::IntervalMismatch {
                table_lo: table.j_lo,
                table_hi: table.j_hi,
                rect_lo: rect.j_lo,
                rect_hi: rect.j_hi,
            });
        }
        let mut out = Vec::new();
        for x in rect.n_lo..=rect.n_hi {
            self.extend_at(table, x, rect.wrap, &mut out);
        }
        Ok(out)
    }

    /// Points with first coordinate `x`, appended to `out`.
    pub fn extend_at(&self, table: &PointTable, x: u64, wrap: bool, out: &mut Vec<ShiftedPoint>) {
        let p = table.modulus();
        let mut fibres: Vec<&[u32]> = Vec::with_capacity(self.m());
        for &u in &self.shifts {
            let xu = x + u;
            if xu >= p && !wrap {
                return;
            }
            fibres.push(table.bucket(xu % p));
        }
        if fibres.iter().any(|f| f.is_empty()) {
            return;
        }
        let mut idx = vec![0usize; fibres.len()];
        loop {
            out.push(ShiftedPoint {
                x,
                ys: idx.iter().zip(&fibres).map(|(&i, f)| f[i]).collect(),
            });
            let mut k = fibres.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < fibres[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// Number of `(h_1, .., h_2j)` in `[1, H]^(2j)` whose two halves agree as
/// multisets: the sum over multisets of size `j` of the squared number of
/// their orderings.
pub fn count_matching_tuples(window: u64, j: u32) -> BigUint {
    let mut total = BigUint::zero();
    let j_fact = factorial(j as u64);
    for_each_partition(j, j, &mut Vec::new(), &mut |parts| {
        let len = parts.len() as u64;
        if len > window {
            return;
        }
        // multisets of this shape: H! / ((H - len)! * prod over repeated part sizes)
        let mut shapes = falling_factorial(window, len);
        let mut run = 1u64;
        for w in parts.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                shapes /= factorial(run);
                run = 1;
            }
        }
        shapes /= factorial(run);
        let mut orderings = j_fact.clone();
        for &part in parts.iter() {
            orderings /= factorial(part as u64);
        }
        total += shapes * &orderings * &orderings;
    });
    total
}

/// `(count / (j! H^j) - 1) * H / j^2`, the empirical constant in
/// `count = j! H^j (1 + c j^2 / H)`.
pub fn tuple_excess_constant(window: u64, j: u32) -> f64 {
    let count = count_matching_tuples(window, j);
    let main = factorial(j as u64) * BigUint::from(window).pow(j);
    let ratio = ratio_f64(&count, &main);
    (ratio - 1.0) * window as f64 / (j as f64 * j as f64)
}

pub(crate) fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    // scale to keep both operands representable
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    (num >> shift).to_f64().unwrap_or(f64::INFINITY) / (den >> shift).to_f64().unwrap_or(f64::INFINITY)
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn falling_factorial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i))
}

/// Partitions of `n` into parts of size at most `max`, nonincreasing.
fn for_each_partition(n: u32, max: u32, parts: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
    if n == 0 {
        visit(parts);
        return;
    }
    for part in (1..=max.min(n)).rev() {
        parts.push(part);
        for_each_partition(n - part, part, parts, visit);
        parts.pop();
    }
}
