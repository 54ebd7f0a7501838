//! The computations behind each subcommand, producing file contents only.

use std::fmt::Write as _;

use anyhow::Result;
use hybridsum::algebra::Verdict;
use hybridsum::bounds::{max_nondegenerate_ratio, SweepItem};
use hybridsum::config::{
    bounds_csv, fmt_f64, histogram_csv, moments_json, points_csv, series_csv, DistributionSummary, Resolved,
};
use hybridsum::geometry::{count_matching_tuples, tuple_excess_constant};
use hybridsum::stats::DistributionReport;
use hybridsum::sums::{compute_series, moments};
use serde_json::json;

use crate::store::Outputs;

/// Number of single-window rows in the bounds report besides the full box.
const BOUND_WINDOWS: u64 = 64;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Hypothesis(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn other<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Other(anyhow::anyhow!("{e}"))
}

/// Refuses configurations that fail a decidable theorem hypothesis.
pub fn check_theorem(r: &Resolved, force: bool) -> Result<String, Failure> {
    let report = r.hypotheses(None);
    let text = serde_json::to_string_pretty(&report).map_err(other)? + "\n";
    if report.verdict == Verdict::Fail && !force {
        return Err(Failure::Hypothesis(report.reasons.join("; ")));
    }
    Ok(text)
}

pub fn points(r: &Resolved) -> Result<Outputs, Failure> {
    let table = r.experiment.point_table().map_err(other)?;
    let mut out = Outputs::default();
    out.files.insert("points.csv".into(), points_csv(&table));
    out.stdout = format!("{} points\n", table.len());
    Ok(out)
}

pub fn sums(r: &Resolved, hypotheses: String) -> Result<Outputs, Failure> {
    let table = r.experiment.point_table().map_err(other)?;
    let series = compute_series(&r.experiment, &table).map_err(other)?;
    let mut out = Outputs::default();
    out.files.insert("sums.csv".into(), series_csv(&series));
    out.files.insert("hypotheses.json".into(), hypotheses);
    out.stdout = format!("{} windows\n", series.len());
    Ok(out)
}

pub fn moments_cmd(r: &Resolved, hypotheses: String) -> Result<Outputs, Failure> {
    let table = r.experiment.point_table().map_err(other)?;
    let series = compute_series(&r.experiment, &table).map_err(other)?;
    let report = moments(&series, r.k_max, r.model);
    let mut out = Outputs::default();
    out.files.insert("moments.json".into(), moments_json(&report));
    out.files.insert("hypotheses.json".into(), hypotheses);
    let mut s = format!("model {:?}, |I| = {}\n k  normalized  mu_k\n", report.model, report.interval_len);
    for row in &report.rows {
        let _ = writeln!(s, "{:>2}  {:>10.4}  {:>4}", row.k, row.normalized, row.mu_k);
    }
    out.stdout = s;
    Ok(out)
}

pub fn distribution(r: &Resolved, hypotheses: String) -> Result<Outputs, Failure> {
    let table = r.experiment.point_table().map_err(other)?;
    let series = compute_series(&r.experiment, &table).map_err(other)?;
    let dist = DistributionReport::new(&series.projections);
    let summary = DistributionSummary::new(&dist, r.model);
    let mut out = Outputs::default();
    out.files.insert("distribution.json".into(), summary.to_json());
    out.files.insert("histogram.csv".into(), histogram_csv(dist.histogram()));
    out.files.insert("hypotheses.json".into(), hypotheses);
    out.stdout = format!(
        "n = {}, model {:?}: KS {} (threshold {})\n",
        summary.n,
        summary.model_selected,
        fmt_f64(summary.ks_selected()),
        fmt_f64(summary.ks_threshold)
    );
    Ok(out)
}

/// The full box `x` in `[n_lo, n_hi]` and evenly spaced single windows,
/// all without wrap-around, against the complete-sum bound.
pub fn bounds(r: &Resolved) -> Result<Outputs, Failure> {
    let e = &r.experiment;
    let p = e.field.modulus();
    let table = e.point_table().map_err(other)?;
    let item = |x_range| SweepItem {
        field: e.field.clone(),
        curve: e.curve.clone(),
        g: e.g.clone(),
        f: e.f.clone(),
        chi: e.chi.clone(),
        psi: e.psi.clone(),
        x_range,
        j_range: (e.rect.j_lo, e.rect.j_hi),
    };
    let mut items = vec![item((e.rect.n_lo, e.rect.n_hi + 1))];
    let len = e.rect.interval_len();
    let count = len.min(BOUND_WINDOWS);
    for i in 0..count {
        let n = e.rect.n_lo + i * len / count;
        items.push(item(((n + 1).min(p), (n + 1 + e.rect.window).min(p))));
    }
    let mut reports: Vec<_> = items.iter().map(|it| it.report_in(&table, r.c_slack)).collect();
    reports.sort_by(|a, b| a.config_id.cmp(&b.config_id));
    reports.dedup_by(|a, b| a.config_id == b.config_id);
    let mut out = Outputs::default();
    out.files.insert("bounds.csv".into(), bounds_csv(&reports));
    let degenerate = reports.iter().any(|r| r.degenerate);
    out.stdout = format!(
        "{} boxes, max |S|/B = {}{}\n",
        reports.len(),
        fmt_f64(max_nondegenerate_ratio(&reports)),
        if degenerate { " (degenerate configuration, excluded)" } else { "" }
    );
    Ok(out)
}

pub fn tuples(r: &Resolved, j: u32) -> Result<Outputs, Failure> {
    if j == 0 || j > 8 {
        return Err(Failure::Validation(format!("--j: {j} is not in [1, 8]")));
    }
    let h = r.experiment.rect.window;
    let count = count_matching_tuples(h, j);
    let excess = tuple_excess_constant(h, j);
    let ratio = 1.0 + excess * (j * j) as f64 / h as f64;
    let body = json!({
        "H": h,
        "j": j,
        "count": count.to_string(),
        "ratio_to_main_term": ratio,
        "excess_constant": excess,
    });
    let mut out = Outputs::default();
    out.files.insert("tuples.json".into(), serde_json::to_string_pretty(&body).map_err(other)? + "\n");
    out.stdout = format!("{count}\n");
    Ok(out)
}
