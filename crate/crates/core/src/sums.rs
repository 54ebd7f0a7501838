//! The windowed sums `S_n`, their projections `u_n` and moments `M_k`.
//!
//! `S_n` adds `chi(g(P)) psi(f(P))` over curve points `P` with
//! `x(P)` in `(n, n + H]` and `y(P)` in `J`, skipping poles of `f` and `g`.
//! Two routes compute the series: a sliding window over precomputed
//! per-column totals, and a direct per-window evaluation used for checking.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{BivarPoly, RationalMap};
use crate::characters::{AddChar, MultChar};
use crate::field::PrimeField;
use crate::geometry::{GeometryError, PointTable, Rectangle, ShiftedCurve};
use crate::stats::{double_factorial_moment, GaussianModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SumError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point table was built for J = [{0}, {1}) which differs from the configured J")]
    TableMismatch(u64, u64),
    #[error("two points with y in J share an x-coordinate; the tuple expansion does not apply")]
    DuplicateX,
    #[error("characters and curve are defined over different fields")]
    FieldMismatch,
}

/// How the projection `u_n` is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by `sqrt((beta - alpha) H)` with `beta - alpha = |J| / p`.
    #[default]
    IntervalLength,
    /// Divide by `sqrt((r / p) H)`, the measured number of points per
    /// window, for curves whose points are not spread evenly across `J`.
    PointDensity,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub field: Arc<PrimeField>,
    pub curve: BivarPoly,
    pub g: RationalMap,
    pub f: RationalMap,
    pub chi: MultChar,
    pub psi: AddChar,
    pub rect: Rectangle,
    /// Projection angle in radians.
    pub theta: f64,
    pub normalization: Normalization,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SumError> {
        let p = self.field.modulus();
        let same = [
            self.curve.modulus(),
            self.g.modulus(),
            self.f.modulus(),
            self.chi.field().modulus(),
            self.psi.field().modulus(),
        ];
        if same.iter().any(|&q| q != p) {
            return Err(SumError::FieldMismatch);
        }
        if self.curve.degree_y().is_none_or(|d| d == 0) {
            return Err(GeometryError::NoYDependence.into());
        }
        self.rect.validate(p)?;
        Ok(())
    }

    /// Builds the point table matching this configuration's curve and `J`.
    pub fn point_table(&self) -> Result<PointTable, SumError> {
        Ok(PointTable::build(&self.curve, &self.field, self.rect.j_lo, self.rect.j_hi)?)
    }

    /// `chi(g(x, y)) psi(f(x, y))`, or `None` at a pole of `f` or `g`.
    pub fn term(&self, x: u64, y: u64) -> Option<Complex64> {
        let gv = self.g.eval(&self.field, x, y).value()?;
        let fv = self.f.eval(&self.field, x, y).value()?;
        Some(self.chi.eval(gv) * self.psi.eval(fv))
    }

    /// Squared normalizer `(beta - alpha) H` (or its point-density variant),
    /// formed from exact integers with a single division.
    pub fn scale(&self, table: &PointTable) -> f64 {
        let p = self.field.modulus() as u128;
        let numerator = match self.normalization {
            Normalization::IntervalLength => self.rect.j_len() as u128 * self.rect.window as u128,
            Normalization::PointDensity => table.len() as u128 * self.rect.window as u128,
        };
        numerator as f64 / p as f64
    }

    fn check_table(&self, table: &PointTable) -> Result<(), SumError> {
        let (lo, hi) = table.j_interval();
        if (lo, hi) != (self.rect.j_lo, self.rect.j_hi) || table.modulus() != self.field.modulus() {
            return Err(SumError::TableMismatch(lo, hi));
        }
        Ok(())
    }

    /// The x-coordinates in the window `(n, n + H]`.
    fn window(&self, n: u64) -> impl Iterator<Item = u64> + '_ {
        let p = self.field.modulus();
        let wrap = self.rect.wrap;
        (n + 1..=n + self.rect.window).filter_map(move |x| {
            if x < p {
                Some(x)
            } else if wrap {
                Some(x % p)
            } else {
                None
            }
        })
    }
}

/// `S_n` and `u_n` for every `n` in `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSeries {
    pub n_lo: u64,
    pub sums: Vec<Complex64>,
    pub projections: Vec<f64>,
    /// Number of nonpole terms in each window.
    pub terms: Vec<u64>,
    pub poles_skipped: Vec<u64>,
    pub theta: f64,
    /// The squared normalizer used for `u_n`.
    pub scale: f64,
}

impl SumSeries {
    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.sums.len() as u64).map(move |i| self.n_lo + i)
    }

    fn from_sums(cfg: &ExperimentConfig, scale: f64, sums: Vec<Complex64>, terms: Vec<u64>, poles: Vec<u64>) -> Self {
        let rotation = Complex64::from_polar(1.0, -cfg.theta);
        let norm = scale.sqrt();
        let projections = sums.iter().map(|s| (s * rotation).re / norm).collect();
        SumSeries {
            n_lo: cfg.rect.n_lo,
            sums,
            projections,
            terms,
            poles_skipped: poles,
            theta: cfg.theta,
            scale,
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Column {
    total: Complex64,
    terms: u64,
    poles: u64,
}

fn column(cfg: &ExperimentConfig, table: &PointTable, x: u64) -> Column {
    let mut c = Column::default();
    for &y in table.bucket(x) {
        match cfg.term(x, y as u64) {
            Some(v) => {
                c.total += v;
                c.terms += 1;
            }
            None => c.poles += 1,
        }
    }
    c
}

/// Sliding-window computation: each column total is evaluated once and
/// `S_{n+1} = S_n - column(n + 1) + column(n + 1 + H)`.
pub fn compute_series(cfg: &ExperimentConfig, table: &PointTable) -> Result<SumSeries, SumError> {
    cfg.validate()?;
    cfg.check_table(table)?;
    let p = cfg.field.modulus();
    let columns: Vec<Column> = (0..p).into_par_iter().map(|x| column(cfg, table, x)).collect();

    let len = cfg.rect.interval_len() as usize;
    let mut sums = Vec::with_capacity(len);
    let mut terms = Vec::with_capacity(len);
    let mut poles = Vec::with_capacity(len);

    let mut acc = Column::default();
    for x in cfg.window(cfg.rect.n_lo) {
        let c = columns[x as usize];
        acc.total += c.total;
        acc.terms += c.terms;
        acc.poles += c.poles;
    }
    let h = cfg.rect.window;
    for n in cfg.rect.n_lo..=cfg.rect.n_hi {
        sums.push(acc.total);
        terms.push(acc.terms);
        poles.push(acc.poles);
        if n == cfg.rect.n_hi {
            break;
        }
        // leave x = n + 1, enter x = n + 1 + H
        let leaving = n + 1;
        let entering = n + 1 + h;
        if leaving < p || cfg.rect.wrap {
            let c = columns[(leaving % p) as usize];
            acc.total -= c.total;
            acc.terms -= c.terms;
            acc.poles -= c.poles;
        }
        if entering < p || cfg.rect.wrap {
            let c = columns[(entering % p) as usize];
            acc.total += c.total;
            acc.terms += c.terms;
            acc.poles += c.poles;
        }
    }
    Ok(SumSeries::from_sums(cfg, cfg.scale(table), sums, terms, poles))
}

/// Evaluates every window from scratch. Windows are processed in parallel
/// and each sum is accumulated in ascending `x`.
pub fn compute_series_direct(cfg: &ExperimentConfig, table: &PointTable) -> Result<SumSeries, SumError> {
    cfg.validate()?;
    cfg.check_table(table)?;
    let rows: Vec<(Complex64, u64, u64)> = (cfg.rect.n_lo..=cfg.rect.n_hi)
        .into_par_iter()
        .map(|n| direct_window(cfg, table, n))
        .collect();
    let sums = rows.iter().map(|r| r.0).collect();
    let terms = rows.iter().map(|r| r.1).collect();
    let poles = rows.iter().map(|r| r.2).collect();
    Ok(SumSeries::from_sums(cfg, cfg.scale(table), sums, terms, poles))
}

fn direct_window(cfg: &ExperimentConfig, table: &PointTable, n: u64) -> (Complex64, u64, u64) {
    let mut s = Complex64::new(0.0, 0.0);
    let (mut terms, mut poles) = (0, 0);
    for x in cfg.window(n) {
        for &y in table.bucket(x) {
            match cfg.term(x, y as u64) {
                Some(v) => {
                    s += v;
                    terms += 1;
                }
                None => poles += 1,
            }
        }
    }
    (s, terms, poles)
}

/// One row of a moment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    #[serde(rename = "re_M")]
    pub re_m: f64,
    /// Imaginary part of the binomial-route value; zero up to rounding.
    #[serde(rename = "im_M")]
    pub im_m: f64,
    pub normalized: f64,
    pub mu_k: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub model: GaussianModel,
    pub interval_len: u64,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn row(&self, k: u32) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// `M_k = sum over n of u_n^k`, accumulated in ascending `n`.
pub fn moment(series: &SumSeries, k: u32) -> f64 {
    series.projections.iter().map(|u| u.powi(k as i32)).sum()
}

/// Moments `M_1..M_kmax` with normalized values `c_k M_k / |I|`, where
/// `c_k = 2^(k/2)` for the variance-1/2 model and 1 for the standard one.
pub fn moments(series: &SumSeries, k_max: u32, model: GaussianModel) -> MomentReport {
    let interval_len = series.len() as u64;
    let rows = (1..=k_max)
        .map(|k| {
            let re_m = moment(series, k);
            let im_m = moments_via_binomial(series, k).im;
            let normalized = model.moment_scale(k) * re_m / interval_len as f64;
            let mu_k = double_factorial_moment(k);
            MomentRow {
                k,
                re_m,
                im_m,
                normalized,
                mu_k,
                deviation: normalized - mu_k,
            }
        })
        .collect();
    MomentReport {
        model,
        interval_len,
        rows,
    }
}

/// `S(j1, j2) = sum over n of S_n^j1 * conj(S_n)^j2`.
pub fn pair_sum(series: &SumSeries, j1: u32, j2: u32) -> Complex64 {
    series
        .sums
        .iter()
        .map(|s| s.powu(j1) * s.conj().powu(j2))
        .sum()
}

/// `M_k` through the binomial expansion of `u_n^k` into pair sums:
/// `2^-k s^(-k/2) sum_j C(k, j) e^{i (k - 2j) theta} S(j, k - j)` with `s`
/// the squared normalizer.
pub fn moments_via_binomial(series: &SumSeries, k: u32) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0f64;
    for j in 0..=k {
        let phase = Complex64::from_polar(1.0, (k as f64 - 2.0 * j as f64) * series.theta);
        acc += binom * phase * pair_sum(series, j, k - j);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc / (2f64.powi(k as i32) * series.scale.powf(k as f64 / 2.0))
}

/// `|S_n|^(2j)` computed directly and through the expansion over shift
/// tuples `h` in `[1, H]^(2j)`, each tuple contributing the points of the
/// shifted curve `X_U` over `x = n` (with `U` the distinct entries of `h`).
pub fn shifted_expansion_check(
    cfg: &ExperimentConfig,
    table: &PointTable,
    n: u64,
    j: u32,
) -> Result<(f64, f64), SumError> {
    cfg.validate()?;
    cfg.check_table(table)?;
    if table.has_duplicate_x() {
        return Err(SumError::DuplicateX);
    }
    let (s, _, _) = direct_window(cfg, table, n);
    let direct = s.norm_sqr().powi(j as i32);

    let h_max = cfg.rect.window;
    let len = 2 * j as usize;
    let mut tuple = vec![1u64; len];
    let mut total = Complex64::new(0.0, 0.0);
    let mut points = Vec::new();
    loop {
        let mut shifts: Vec<u64> = Vec::new();
        let slot: Vec<usize> = tuple
            .iter()
            .map(|h| match shifts.iter().position(|u| u == h) {
                Some(i) => i,
                None => {
                    shifts.push(*h);
                    shifts.len() - 1
                }
            })
            .collect();
        let sc = ShiftedCurve::new(cfg.curve.clone(), shifts)?;
        points.clear();
        sc.extend_at(table, n, cfg.rect.wrap, &mut points);
        let p = cfg.field.modulus();
        'point: for pt in &points {
            let mut term = Complex64::new(1.0, 0.0);
            for (l, &h) in tuple.iter().enumerate() {
                let x = (n + h) % p;
                let y = pt.ys[slot[l]] as u64;
                let Some(v) = cfg.term(x, y) else {
                    continue 'point;
                };
                term *= if l < j as usize { v } else { v.conj() };
            }
            total += term;
        }
        // next tuple in [1, H]^(2j)
        let mut k = len;
        loop {
            if k == 0 {
                return Ok((direct, total.re));
            }
            k -= 1;
            tuple[k] += 1;
            if tuple[k] <= h_max {
                break;
            }
            tuple[k] = 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyparse::{parse_poly, parse_rational};

    pub(crate) fn config(p: u64, curve: &str, g: &str, f: &str, a: u64, k: u64, rect: Rectangle, theta: f64) -> ExperimentConfig {
        let field = Arc::new(PrimeField::new(p).unwrap());
        ExperimentConfig {
            curve: parse_poly(curve, &field).unwrap(),
            g: parse_rational(g, &field).unwrap(),
            f: parse_rational(f, &field).unwrap(),
            chi: MultChar::new(field.clone(), a).unwrap(),
            psi: AddChar::new(field.clone(), k),
            rect,
            theta,
            normalization: Normalization::IntervalLength,
            field,
        }
    }

    #[test]
    fn full_window_character_sum_vanishes() {
        let p = 101;
        let cfg = config(p, "y - x", "x", "0", 2, 0, Rectangle::full(p, p).unwrap(), 0.0);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        assert!(s.sums.iter().all(|v| v.norm() <= 1e-9 * p as f64));
    }

    #[test]
    fn unit_window_is_bounded_by_one() {
        let p = 31;
        let cfg = config(p, "x^2 + y^2 - 1", "x + y", "x*y", 3, 2, Rectangle::full(p, 1).unwrap(), 0.3);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        for (v, &terms) in s.sums.iter().zip(&s.terms) {
            assert!(v.norm() <= terms as f64 + 1e-12);
            assert!(terms <= 2);
        }
        let cfg = config(p, "y - x", "x + y", "x*y", 3, 2, Rectangle::full(p, 1).unwrap(), 0.3);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        assert!(s.sums.iter().all(|v| v.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn first_window_matches_double_loop() {
        let p = 31;
        let rect = Rectangle::new(p, (0, 30), (0, p), 5, true).unwrap();
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, rect, 0.0);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        // independent brute force over all (x, y) pairs
        let chi = |v: u64| -> f64 {
            if v % p == 0 {
                0.0
            } else if crate::field::pow_mod(v, (p - 1) / 2, p) == 1 {
                1.0
            } else {
                -1.0
            }
        };
        let mut want = Complex64::new(0.0, 0.0);
        for x in 0..p {
            for y in 0..p {
                if (y + p - x) % p == 0 && x > 0 && x <= 5 {
                    let phase = std::f64::consts::TAU * ((x * y) % p) as f64 / p as f64;
                    want += chi(x) * Complex64::from_polar(1.0, phase);
                }
            }
        }
        assert!((s.sums[0] - want).norm() < 1e-12);
        assert!((s.projections[0] - want.re / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn poles_are_skipped_and_counted() {
        let p = 31;
        let rect = Rectangle::full(p, 4).unwrap();
        let cfg = config(p, "y - x", "x", "1 / (x - 3)", 2, 1, rect, 0.0);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        let d = compute_series_direct(&cfg, &t).unwrap();
        // windows (n, n + 4] containing x = 3 are n = 30, 0, 1, 2
        for (n, (&terms, &poles)) in s.indices().zip(s.terms.iter().zip(&s.poles_skipped)) {
            let hits = [30u64, 0, 1, 2].contains(&n) as u64;
            assert_eq!(poles, hits, "n = {n}");
            assert_eq!(terms, 4 - hits);
        }
        assert_eq!(s.terms, d.terms);
        assert_eq!(s.poles_skipped, d.poles_skipped);
    }

    #[test]
    fn incremental_matches_direct_without_wrap() {
        let p = 101;
        let rect = Rectangle::new(p, (10, 100), (7, 80), 13, false).unwrap();
        let cfg = config(p, "y^2 - x^3 - 2*x - 3", "x + 2*y", "x*y^2", 5, 3, rect, 1.1);
        let t = cfg.point_table().unwrap();
        let a = compute_series(&cfg, &t).unwrap();
        let b = compute_series_direct(&cfg, &t).unwrap();
        for (u, v) in a.sums.iter().zip(&b.sums) {
            assert!((u - v).norm() <= 1e-9 * 13.0);
        }
        assert_eq!(a.terms, b.terms);
        // the last window is truncated at p - 1
        assert!(*a.terms.last().unwrap() == 0);
    }

    #[test]
    fn table_must_match_j() {
        let p = 31;
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, Rectangle::full(p, 3).unwrap(), 0.0);
        let other = PointTable::build(&cfg.curve, &cfg.field, 0, 10).unwrap();
        assert!(matches!(compute_series(&cfg, &other), Err(SumError::TableMismatch(0, 10))));
    }

    #[test]
    fn moment_conventions() {
        let p = 31;
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, Rectangle::full(p, 4).unwrap(), 0.0);
        let t = cfg.point_table().unwrap();
        let mut s = compute_series(&cfg, &t).unwrap();
        assert_eq!(moment(&s, 0), 31.0);
        s.projections.iter_mut().for_each(|u| *u = 0.0);
        assert!((1..6).all(|k| moment(&s, k) == 0.0));
    }

    #[test]
    fn pair_sums_basic_identities() {
        let p = 101;
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, Rectangle::full(p, 10).unwrap(), 0.0);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        assert_eq!(pair_sum(&s, 0, 0), Complex64::new(p as f64, 0.0));
        let s11 = pair_sum(&s, 1, 1);
        assert!(s11.re >= 0.0 && s11.im.abs() <= 1e-9 * s11.norm().max(1.0));
        for j in 0..4 {
            let sjj = pair_sum(&s, j, j);
            assert!(sjj.im.abs() <= 1e-9 * sjj.norm().max(1.0));
        }
        let mut direct = Complex64::new(0.0, 0.0);
        for v in s.sums.iter().rev() {
            direct += v;
        }
        assert!((pair_sum(&s, 1, 0) - direct).norm() < 1e-9);
    }

    #[test]
    fn binomial_route_first_moment() {
        let p = 101;
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, Rectangle::full(p, 10).unwrap(), 0.0);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        let via = (pair_sum(&s, 1, 0) + pair_sum(&s, 0, 1)) / (2.0 * s.scale.sqrt());
        assert!((via.re - s.projections.iter().sum::<f64>()).abs() < 1e-9);
        assert!((moments_via_binomial(&s, 1) - via).norm() < 1e-9);
    }

    #[test]
    fn binomial_route_with_complex_phase() {
        let p = 101;
        let rect = Rectangle::full(p, 10).unwrap();
        let cfg = config(p, "y - x", "x", "x*y", 5, 1, rect, std::f64::consts::FRAC_PI_2);
        let t = cfg.point_table().unwrap();
        let s = compute_series(&cfg, &t).unwrap();
        for k in 1..=6 {
            let a = moment(&s, k);
            let b = moments_via_binomial(&s, k);
            assert!((a - b.re).abs() <= 1e-8 * a.abs().max(1.0), "k = {k}");
            assert!(b.im.abs() <= 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn shifted_expansion_small_cases() {
        let p = 31;
        let rect = Rectangle::full(p, 3).unwrap();
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, rect, 0.0);
        let t = cfg.point_table().unwrap();
        for n in [0u64, 7, 29] {
            for j in 1..=2 {
                let (d, v) = shifted_expansion_check(&cfg, &t, n, j).unwrap();
                assert!((d - v).abs() < 1e-9, "n={n} j={j}: {d} vs {v}");
            }
        }
        let rect = Rectangle::full(p, 1).unwrap();
        let cfg = config(p, "y - x", "x", "x*y", 2, 1, rect, 0.0);
        for j in 1..=3 {
            let (d, v) = shifted_expansion_check(&cfg, &t, 0, j).unwrap();
            assert!((d - 1.0).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
            // window (30, 31] holds x = 0 where chi vanishes
            let (d, v) = shifted_expansion_check(&cfg, &t, 30, j).unwrap();
            assert!(d.abs() < 1e-12 && v.abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_expansion_requires_single_valued_fibres() {
        let p = 31;
        let cfg = config(p, "x^2 + y^2 - 1", "x", "x*y", 2, 1, Rectangle::full(p, 2).unwrap(), 0.0);
        let t = cfg.point_table().unwrap();
        assert_eq!(shifted_expansion_check(&cfg, &t, 0, 1), Err(SumError::DuplicateX));
    }
}
