use std::fmt::Write as _;

use super::metrics::{EvalReport, Prf};

fn pct(v: f64) -> String {
    format!("{v:.1}")
}

/// Aligned text table, one row per `(name, report)`, percentages to one
/// decimal.
pub fn report_table(rows: &[(String, EvalReport)]) -> String {
    let header = ["Model", "P", "R", "F", "95% CI (F)", "n"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|(name, r)| {
            let ci = r
                .ci
                .map_or_else(|| "-".to_string(), |c| format!("[{}, {}]", pct(c.low), pct(c.high)));
            [
                name.clone(),
                pct(r.macro_prf.p),
                pct(r.macro_prf.r),
                pct(r.macro_prf.f),
                ci,
                r.instances.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &[&str], out: &mut String| {
        let mut parts = Vec::with_capacity(cells.len());
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                parts.push(format!("{cell:<w$}"));
            } else {
                parts.push(format!("{cell:>w$}"));
            }
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&header, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&cells, &mut out);
    }
    out
}

/// `class\tP\tR\tF\tCI_low\tCI_high` per evaluated class, then `macro`.
/// Missing intervals print as `NA`.
pub fn metric_lines(report: &EvalReport) -> String {
    let mut out = String::new();
    let mut emit = |name: &str, prf: &Prf, ci: Option<super::metrics::Interval>| {
        let (lo, hi) = ci.map_or(("NA".to_string(), "NA".to_string()), |c| (format!("{:.4}", c.low), format!("{:.4}", c.high)));
        let _ = writeln!(out, "{name}\t{:.4}\t{:.4}\t{:.4}\t{lo}\t{hi}", prf.p, prf.r, prf.f);
    };
    for c in &report.classes {
        emit(&c.label, &c.prf, c.ci);
    }
    emit("macro", &report.macro_prf, report.ci);
    out
}

/// Two aggregates over sub-task reports: the unweighted mean of their
/// macro P/R (F recomputed as the harmonic mean), and the mean weighted by
/// instance counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubtaskAggregate {
    pub unweighted: Prf,
    pub instance_weighted: Prf,
}

pub fn aggregate_subtasks(reports: &[EvalReport]) -> SubtaskAggregate {
    let n = reports.len().max(1) as f64;
    let mean = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let total: f64 = reports.iter().map(|r| r.instances as f64).sum::<f64>().max(1.0);
    let weighted = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(|r| f(r) * r.instances as f64).sum::<f64>() / total;
    SubtaskAggregate {
        unweighted: Prf::from_pr(mean(&|r| r.macro_prf.p), mean(&|r| r.macro_prf.r)),
        instance_weighted: Prf::from_pr(weighted(&|r| r.macro_prf.p), weighted(&|r| r.macro_prf.r)),
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
