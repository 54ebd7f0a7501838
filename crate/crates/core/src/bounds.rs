//! Complete and incomplete hybrid sums over a variety, the completion
//! identity that rewrites an interval-restricted sum through twisted
//! complete sums, and ratios against the complete-sum bound.

use num_complex::Complex64;
use serde::Serialize;
use smallvec::SmallVec;

use crate::algebra::{is_degenerate, BivarPoly, RationalMap};
use crate::characters::{e_p, AddChar, MultChar};
use crate::field::PrimeField;
use crate::geometry::{GeometryError, PointTable, Rectangle, ShiftedCurve};

pub type Coords = SmallVec<[u32; 4]>;

/// The F_p-points of a variety in affine `dim`-space together with the
/// value `chi(g~) psi(f~)` at each; poles are already removed.
#[derive(Debug, Clone)]
pub struct HybridVariety {
    p: u64,
    dim: usize,
    points: Vec<Coords>,
    terms: Vec<Complex64>,
}

impl HybridVariety {
    /// All points of the plane curve `P = 0`, coordinates `(x, y)`.
    pub fn plane_curve(
        curve: &BivarPoly,
        field: &PrimeField,
        g: &RationalMap,
        f: &RationalMap,
        chi: &MultChar,
        psi: &AddChar,
    ) -> Result<Self, GeometryError> {
        let p = field.modulus();
        let table = PointTable::build(curve, field, 0, p)?;
        let mut points = Vec::new();
        let mut terms = Vec::new();
        for (x, y) in table.points() {
            let (Some(gv), Some(fv)) = (g.eval(field, x, y).value(), f.eval(field, x, y).value()) else {
                continue;
            };
            points.push([x as u32, y as u32].into_iter().collect());
            terms.push(chi.eval(gv) * psi.eval(fv));
        }
        Ok(HybridVariety {
            p,
            dim: 2,
            points,
            terms,
        })
    }

    /// All points `(x, y_1, .., y_m)` of the shifted curve `X_U`, with `U` the
    /// distinct entries of the shift tuple `h`. The weight is
    /// `chi(g~) psi(f~)` for
    /// `g~ = prod_{l <= j1} g(x + h_l, y_l) / prod_{l > j1} g(x + h_l, y_l)` and
    /// `f~ = sum_{l <= j1} f(x + h_l, y_l) - sum_{l > j1} f(x + h_l, y_l)`,
    /// where `y_l` is the coordinate belonging to the shift `h_l`.
    #[allow(clippy::too_many_arguments)]
    pub fn shifted_curve(
        curve: &BivarPoly,
        field: &PrimeField,
        g: &RationalMap,
        f: &RationalMap,
        chi: &MultChar,
        psi: &AddChar,
        tuple: &[u64],
        j1: usize,
    ) -> Result<Self, GeometryError> {
        let p = field.modulus();
        let mut shifts: Vec<u64> = Vec::new();
        let slot: Vec<usize> = tuple
            .iter()
            .map(|&h| {
                let h = h % p;
                shifts.iter().position(|&u| u == h).unwrap_or_else(|| {
                    shifts.push(h);
                    shifts.len() - 1
                })
            })
            .collect();
        let sc = ShiftedCurve::new(curve.clone(), shifts.clone())?;
        let table = PointTable::build(curve, field, 0, p)?;
        let mut raw = Vec::new();
        for x in 0..p {
            sc.extend_at(&table, x, true, &mut raw);
        }
        let mut points = Vec::new();
        let mut terms = Vec::new();
        'point: for pt in raw {
            let mut g_num = 1u64;
            let mut g_den = 1u64;
            let mut f_sum = 0u64;
            for (l, &h) in tuple.iter().enumerate() {
                let xs = (pt.x + h) % p;
                let y = pt.ys[slot[l]] as u64;
                let (Some(gv), Some(fv)) = (g.eval(field, xs, y).value(), f.eval(field, xs, y).value()) else {
                    continue 'point;
                };
                if l < j1 {
                    g_num = field.mul(g_num, gv);
                    f_sum = field.add(f_sum, fv);
                } else {
                    g_den = field.mul(g_den, gv);
                    f_sum = field.sub(f_sum, fv);
                }
            }
            // a zero in the denominator of g~ is a pole of g~
            let Ok(inv) = field.inv(g_den) else {
                continue;
            };
            let mut coords: Coords = SmallVec::new();
            coords.push(pt.x as u32);
            coords.extend(pt.ys.iter().copied());
            points.push(coords);
            terms.push(chi.eval(field.mul(g_num, inv)) * psi.eval(f_sum));
        }
        Ok(HybridVariety {
            p,
            dim: shifts.len() + 1,
            points,
            terms,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.points.iter().map(|c| c.as_slice()).zip(self.terms.iter().copied())
    }

    /// Sum over every point.
    pub fn complete_sum(&self) -> Complex64 {
        self.terms.iter().sum()
    }

    /// Sum over points inside `bounds`: per coordinate either `None`
    /// (unrestricted) or a half-open interval `[lo, hi)`.
    pub fn incomplete_sum(&self, bounds: &[Option<(u64, u64)>]) -> Complex64 {
        assert_eq!(bounds.len(), self.dim, "one bound per coordinate");
        self.points()
            .filter(|(c, _)| inside(c, bounds))
            .map(|(_, t)| t)
            .sum()
    }

    /// The same restricted sum through the orthogonality of additive
    /// characters:
    /// `(1/p^m) sum_t prod_i A_i(t_i) * sum_x w(x) e_p(-t . x)` with
    /// `A_i(t) = sum_{m in J_i} e_p(t m)` over the `m` restricted coordinates.
    /// Costs `p^m` twisted complete sums.
    pub fn incomplete_via_completion(&self, bounds: &[Option<(u64, u64)>]) -> Complex64 {
        assert_eq!(bounds.len(), self.dim, "one bound per coordinate");
        let p = self.p;
        let restricted: Vec<(usize, (u64, u64))> = bounds
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|iv| (i, iv)))
            .collect();
        let m = restricted.len();
        if m == 0 {
            return self.complete_sum();
        }
        if restricted.iter().any(|(_, (lo, hi))| lo >= hi) {
            return Complex64::new(0.0, 0.0);
        }
        // A_i(t) for every t, by direct summation
        let transforms: Vec<Vec<Complex64>> = restricted
            .iter()
            .map(|&(_, (lo, hi))| {
                (0..p)
                    .map(|t| (lo..hi).map(|v| e_p(t * (v % p) % p, p)).sum())
                    .collect()
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut t = vec![0u64; m];
        loop {
            let weight: Complex64 = transforms
                .iter()
                .zip(&t)
                .map(|(tr, &ti)| tr[ti as usize])
                .product();
            if weight.norm_sqr() > 0.0 {
                let twisted: Complex64 = self
                    .points()
                    .map(|(c, w)| {
                        let dot = restricted
                            .iter()
                            .zip(&t)
                            .fold(0u64, |acc, (&(i, _), &ti)| (acc + ti * c[i] as u64) % p);
                        w * e_p((p - dot) % p, p)
                    })
                    .sum();
                total += weight * twisted;
            }
            let mut k = m;
            loop {
                if k == 0 {
                    return total / (p as f64).powi(m as i32);
                }
                k -= 1;
                t[k] += 1;
                if t[k] < p {
                    break;
                }
                t[k] = 0;
            }
        }
    }
}

fn inside(c: &[u32], bounds: &[Option<(u64, u64)>]) -> bool {
    c.iter().zip(bounds).all(|(&v, b)| match b {
        None => true,
        Some((lo, hi)) => (*lo..*hi).contains(&(v as u64)),
    })
}

/// `sum_{t mod p} |sum_{m in J} e_p(k t m)|` via the closed form of each
/// geometric sum, against `2 p ln p + |J|`.
pub fn tail_bound_check(p: u64, j: (u64, u64), frequency: u64) -> (f64, f64) {
    let len = j.1.saturating_sub(j.0);
    let mut lhs = 0.0;
    for t in 0..p {
        let r = frequency % p * t % p;
        if r == 0 {
            lhs += len as f64;
        } else {
            let theta = std::f64::consts::PI * r as f64 / p as f64;
            lhs += ((len as f64 * theta).sin() / theta.sin()).abs();
        }
    }
    let rhs = 2.0 * p as f64 * (p as f64).ln() + len as f64;
    (lhs, rhs)
}

/// `((D^2 - 3D + 2D d_g + 2D d_f) sqrt(p) + D^2 + c D) (2 ln p + 1)^m`. The
/// coefficient of `sqrt(p)` is clamped at zero.
pub fn complete_sum_bound(p: u64, d: u32, d_g: u32, d_f: u32, m: u32, c_slack: f64) -> f64 {
    let (d, d_g, d_f) = (d as f64, d_g as f64, d_f as f64);
    let coeff = (d * d - 3.0 * d + 2.0 * d * d_g + 2.0 * d * d_f).max(0.0);
    let p_f = p as f64;
    (coeff * p_f.sqrt() + d * d + c_slack * d) * (2.0 * p_f.ln() + 1.0).powi(m as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub config_id: String,
    pub p: u64,
    #[serde(rename = "D")]
    pub d: u32,
    pub d_g: u32,
    pub d_f: u32,
    pub m: u32,
    pub abs_s: f64,
    pub bound: f64,
    pub ratio: f64,
    pub degenerate: bool,
}

/// One item of a bound sweep: a plane curve with its maps and characters,
/// and the box `[x_lo, x_hi) x [j_lo, j_hi)`.
#[derive(Debug, Clone)]
pub struct SweepItem {
    pub field: std::sync::Arc<PrimeField>,
    pub curve: BivarPoly,
    pub g: RationalMap,
    pub f: RationalMap,
    pub chi: MultChar,
    pub psi: AddChar,
    pub x_range: (u64, u64),
    pub j_range: (u64, u64),
}

impl SweepItem {
    /// Window `(n, n + H]` without wrap-around and the rectangle's `J`.
    pub fn from_rectangle(
        field: std::sync::Arc<PrimeField>,
        curve: BivarPoly,
        g: RationalMap,
        f: RationalMap,
        chi: MultChar,
        psi: AddChar,
        rect: &Rectangle,
        n: u64,
    ) -> Self {
        let p = field.modulus();
        let x_lo = (n + 1).min(p);
        let x_hi = (n + 1 + rect.window).min(p);
        SweepItem {
            field,
            curve,
            g,
            f,
            chi,
            psi,
            x_range: (x_lo, x_hi),
            j_range: (rect.j_lo, rect.j_hi),
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "p={};P={};g={};f={};a={}^{};k={};x=[{},{});J=[{},{})",
            self.field.modulus(),
            self.curve,
            self.g,
            self.f,
            self.chi.order(),
            self.chi.power(),
            self.psi.frequency(),
            self.x_range.0,
            self.x_range.1,
            self.j_range.0,
            self.j_range.1
        )
    }

    pub fn config_id(&self) -> String {
        format!("{:016x}", fnv1a(self.describe().as_bytes()))
    }

    pub fn is_degenerate(&self) -> bool {
        is_degenerate(&self.f, &self.g, self.chi.order() as u32, self.psi.is_trivial())
    }

    /// The restricted sum by direct summation over the point table.
    pub fn direct_sum(&self) -> Result<Complex64, GeometryError> {
        let (j_lo, j_hi) = self.j_range;
        if self.x_range.0 >= self.x_range.1 || j_lo >= j_hi {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let table = PointTable::build(&self.curve, &self.field, j_lo, j_hi)?;
        Ok(self.direct_sum_in(&table))
    }

    /// The restricted sum over a prebuilt table whose y-interval is `j_range`.
    pub fn direct_sum_in(&self, table: &PointTable) -> Complex64 {
        debug_assert_eq!(table.j_interval(), self.j_range);
        let mut s = Complex64::new(0.0, 0.0);
        for x in self.x_range.0..self.x_range.1 {
            for &y in table.bucket(x) {
                let (Some(gv), Some(fv)) = (
                    self.g.eval(&self.field, x, y as u64).value(),
                    self.f.eval(&self.field, x, y as u64).value(),
                ) else {
                    continue;
                };
                s += self.chi.eval(gv) * self.psi.eval(fv);
            }
        }
        s
    }

    pub fn report(&self, c_slack: f64) -> Result<BoundReport, GeometryError> {
        Ok(self.report_from(self.direct_sum()?.norm(), c_slack))
    }

    pub fn report_in(&self, table: &PointTable, c_slack: f64) -> BoundReport {
        self.report_from(self.direct_sum_in(table).norm(), c_slack)
    }

    fn report_from(&self, abs_s: f64, c_slack: f64) -> BoundReport {
        let p = self.field.modulus();
        let d = self.curve.degree().unwrap_or(0);
        let d_g = self.g.pole_degree();
        let d_f = self.f.pole_degree();
        let bound = complete_sum_bound(p, d, d_g, d_f, 2, c_slack);
        BoundReport {
            config_id: self.config_id(),
            p,
            d,
            d_g,
            d_f,
            m: 2,
            abs_s,
            bound,
            ratio: abs_s / bound,
            degenerate: self.is_degenerate(),
        }
    }
}

/// Reports for every item, ordered by config id.
pub fn bound_ratio_sweep(items: &[SweepItem], c_slack: f64) -> Result<Vec<BoundReport>, GeometryError> {
    use rayon::prelude::*;
    let mut out: Vec<BoundReport> = items
        .par_iter()
        .map(|it| it.report(c_slack))
        .collect::<Result<_, _>>()?;
    out.sort_by(|a, b| a.config_id.cmp(&b.config_id));
    Ok(out)
}

/// Largest ratio among non-degenerate reports.
pub fn max_nondegenerate_ratio(reports: &[BoundReport]) -> f64 {
    reports
        .iter()
        .filter(|r| !r.degenerate)
        .map(|r| r.ratio)
        .fold(0.0, f64::max)
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}
