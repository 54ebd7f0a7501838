//! JSON run configurations and the text formats of every output file.
//!
//! Floats are printed in the shortest form that round-trips, so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{check_hypotheses, HypothesisReport, TheoremMode};
use crate::bounds::BoundReport;
use crate::characters::{AddChar, MultChar};
use crate::field::PrimeField;
use crate::geometry::{PointTable, Rectangle};
use crate::polyparse::{parse_poly, parse_rational};
use crate::stats::{DistributionReport, GaussianModel, HistogramBin};
use crate::sums::{ExperimentConfig, MomentReport, Normalization, SumSeries};

/// A configuration error, located by the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: &str, message: impl ToString) -> Self {
        ConfigError {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    #[default]
    Auto,
    #[serde(rename = "mainthm")]
    MainTheorem,
    TrivialChi,
    TrivialPsi,
}

fn default_one() -> u64 {
    1
}
fn default_k_max() -> u32 {
    8
}
fn default_true() -> bool {
    true
}
fn default_out_dir() -> String {
    "out".to_string()
}
fn default_c_slack() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: u64,
    pub curve: String,
    pub g: String,
    pub f: String,
    #[serde(default = "default_one")]
    pub chi_order: u64,
    #[serde(default = "default_one")]
    pub chi_power: u64,
    #[serde(default)]
    pub psi_k: u64,
    #[serde(default)]
    pub theta: f64,
    /// Inclusive `[lo, hi]`; all of `[0, p - 1]` when absent.
    #[serde(rename = "I", default, skip_serializing_if = "Option::is_none")]
    pub i: Option<[u64; 2]>,
    /// Half-open `[lo, hi)`; all of `[0, p)` when absent.
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<[u64; 2]>,
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default)]
    pub mode: ModeChoice,
    #[serde(default = "default_true")]
    pub wrap: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default = "default_c_slack")]
    pub c_slack: f64,
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub mode: TheoremMode,
    pub model: GaussianModel,
    pub k_max: u32,
    pub c_slack: f64,
}

pub const MAX_K: u32 = 32;

impl RunConfig {
    /// Parses and validates in one step.
    pub fn from_json(text: &str) -> Result<(RunConfig, Resolved), ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::at("$", e))?;
        let resolved = cfg.resolve()?;
        Ok((cfg, resolved))
    }

    /// Canonical serialization, the input to the configuration hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configs always serialize")
    }

    /// Checks every field and cross-field constraint and builds the
    /// experiment.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let field = Arc::new(PrimeField::new(self.p).map_err(|e| ConfigError::at("p", e))?);
        let p = self.p;
        let curve = parse_poly(&self.curve, &field).map_err(|e| ConfigError::at("curve", e))?;
        if curve.degree_y().is_none_or(|d| d == 0) {
            return Err(ConfigError::at("curve", "the curve must depend on y"));
        }
        let g = parse_rational(&self.g, &field).map_err(|e| ConfigError::at("g", e))?;
        let f = parse_rational(&self.f, &field).map_err(|e| ConfigError::at("f", e))?;
        let chi = MultChar::with_power(field.clone(), self.chi_order, self.chi_power).map_err(|e| match e {
            crate::characters::CharacterError::PowerNotCoprime { .. } => ConfigError::at("chi_power", e),
            _ => ConfigError::at("chi_order", e),
        })?;
        if self.psi_k >= p {
            return Err(ConfigError::at("psi_k", format!("{} is not a residue mod {p}", self.psi_k)));
        }
        let psi = AddChar::new(field.clone(), self.psi_k);
        if !self.theta.is_finite() {
            return Err(ConfigError::at("theta", "must be finite"));
        }
        let (i_lo, i_hi) = self.i.map_or((0, p - 1), |[a, b]| (a, b));
        if i_lo > i_hi || i_hi > p - 1 {
            return Err(ConfigError::at("I", format!("[{i_lo}, {i_hi}] is not inside [0, {}]", p - 1)));
        }
        let (j_lo, j_hi) = self.j.map_or((0, p), |[a, b]| (a, b));
        if j_lo >= j_hi || j_hi > p {
            return Err(ConfigError::at("J", format!("[{j_lo}, {j_hi}) is not a nonempty subinterval of [0, {p})")));
        }
        if self.h < 1 || self.h > p {
            return Err(ConfigError::at("H", format!("{} is not in [1, {p}]", self.h)));
        }
        if self.k_max < 1 || self.k_max > MAX_K {
            return Err(ConfigError::at("k_max", format!("{} is not in [1, {MAX_K}]", self.k_max)));
        }
        if !(self.c_slack.is_finite() && self.c_slack >= 0.0) {
            return Err(ConfigError::at("c_slack", "must be a finite nonnegative number"));
        }
        let rect = Rectangle::new(p, (i_lo, i_hi), (j_lo, j_hi), self.h, self.wrap)
            .map_err(|e| ConfigError::at("I", e))?;
        let mode = match self.mode {
            ModeChoice::Auto if self.chi_order == 1 => TheoremMode::TrivialChi,
            ModeChoice::Auto if self.psi_k == 0 => TheoremMode::TrivialPsi,
            ModeChoice::Auto | ModeChoice::MainTheorem => TheoremMode::MainTheorem,
            ModeChoice::TrivialChi => TheoremMode::TrivialChi,
            ModeChoice::TrivialPsi => TheoremMode::TrivialPsi,
        };
        let model = GaussianModel::select(self.chi_order, self.psi_k == 0, self.theta);
        Ok(Resolved {
            experiment: ExperimentConfig {
                field,
                curve,
                g,
                f,
                chi,
                psi,
                rect,
                theta: self.theta,
                normalization: self.normalization,
            },
            mode,
            model,
            k_max: self.k_max,
            c_slack: self.c_slack,
        })
    }
}

impl Resolved {
    pub fn hypotheses(&self, table: Option<&PointTable>) -> HypothesisReport {
        let e = &self.experiment;
        check_hypotheses(&e.f, &e.g, &e.curve, e.chi.order() as u32, self.mode, table)
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn series_csv(series: &SumSeries) -> String {
    let mut out = String::from("n,re_S,im_S,u,terms,poles_skipped\n");
    for (i, n) in series.indices().enumerate() {
        let s = series.sums[i];
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{}",
            fmt_f64(s.re),
            fmt_f64(s.im),
            fmt_f64(series.projections[i]),
            series.terms[i],
            series.poles_skipped[i]
        );
    }
    out
}

pub fn moments_json(report: &MomentReport) -> String {
    let mut s = serde_json::to_string_pretty(&report.rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn points_csv(table: &PointTable) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in table.points() {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("left,width,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", fmt_f64(b.left), fmt_f64(b.width), b.count);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionSummary<'a> {
    pub n: usize,
    pub ks_var_half: f64,
    pub ks_standard: f64,
    pub model_selected: GaussianModel,
    pub ks_threshold: f64,
    pub histogram: &'a [HistogramBin],
}

impl<'a> DistributionSummary<'a> {
    pub fn new(report: &'a DistributionReport, model: GaussianModel) -> Self {
        DistributionSummary {
            n: report.len(),
            ks_var_half: report.ks_distance(GaussianModel::VarHalf),
            ks_standard: report.ks_distance(GaussianModel::Standard),
            model_selected: model,
            ks_threshold: crate::stats::ks_threshold(report.len()),
            histogram: report.histogram(),
        }
    }

    pub fn ks_selected(&self) -> f64 {
        match self.model_selected {
            GaussianModel::VarHalf => self.ks_var_half,
            GaussianModel::Standard => self.ks_standard,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub fn bounds_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("config_id,p,D,d_g,d_f,m,abs_S,bound,ratio,degenerate\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.config_id,
            r.p,
            r.d,
            r.d_g,
            r.d_f,
            r.m,
            fmt_f64(r.abs_s),
            fmt_f64(r.bound),
            fmt_f64(r.ratio),
            r.degenerate
        );
    }
    out
}
