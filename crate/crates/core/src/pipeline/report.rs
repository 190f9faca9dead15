use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::Denominator;
use super::model::EvalReport;

fn sci(v: f64) -> String {
    format!("{v:.2E}")
}

/// `actual_km,predicted_km,percent_error` per test point.
pub fn eval_csv(r: &EvalReport) -> String {
    let mut s = String::from("actual_km,predicted_km,percent_error\n");
    for row in &r.rows {
        let _ = writeln!(s, "{},{:.4},{:.4}", row.actual_km, row.predicted_km, row.percent_error);
    }
    s
}

/// All scenarios of the scheme, for an actual-vs-predicted plot.
pub fn scatter_csv(r: &EvalReport) -> String {
    let mut s = String::from("actual_km,predicted_km,split\n");
    for (a, p, test) in &r.scatter {
        let _ = writeln!(s, "{a},{p:.4},{}", if *test { "test" } else { "train" });
    }
    s
}

fn denominator_note(d: Denominator, km: f64) -> String {
    match d {
        Denominator::Span => format!("percent error relative to the {km} km target span"),
        Denominator::LineLength => format!("percent error relative to the {km} km line length"),
    }
}

/// Transposed table: one column per test distance.
pub fn eval_markdown(r: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "### {} grounding\n", r.scheme);
    let _ = writeln!(s, "Model: {}, MSE: {}\n", r.model, sci(r.mse_normalized));
    let cells = |f: &dyn Fn(&super::model::EvalRow) -> String| -> String {
        r.rows.iter().map(f).collect::<Vec<_>>().join(" | ")
    };
    let _ = writeln!(s, "| Actual distance (km) | {} |", cells(&|x| format!("{}", x.actual_km)));
    let _ = writeln!(s, "|---|{}", "---|".repeat(r.rows.len()));
    let _ = writeln!(s, "| Predicted distance (km) | {} |", cells(&|x| format!("{:.4}", x.predicted_km)));
    let _ = writeln!(s, "| Percent error | {} |", cells(&|x| format!("{:.4}", x.percent_error)));
    let _ = writeln!(s, "\n{}; config {}.", denominator_note(r.denominator, r.denominator_km), &r.config_hash[..12.min(r.config_hash.len())]);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scheme: String,
    pub ann_model: String,
    pub ann_mse: f64,
    pub ann_max_percent_error: f64,
    pub svr_model: String,
    pub svr_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| Method | Cascade-forward neural network | Support vector regression |\n|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(s, "| {} grounding (MSE) | {} | {} |", r.scheme, sci(r.ann_mse), sci(r.svr_mse));
        }
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "- {}: network `{}`, SVR `{}`", r.scheme, r.ann_model, r.svr_model);
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("scheme,ann_mse,ann_max_percent_error,svr_mse,ann_model,svr_model\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:.4},{:e},{},{}",
                r.scheme, r.ann_mse, r.ann_max_percent_error, r.svr_mse, r.ann_model, r.svr_model
            );
        }
        s
    }
}

/// Full markdown report: comparison plus one table per evaluated model.
pub fn full_report(config_hash: &str, comparison: &Comparison, evals: &[EvalReport]) -> String {
    let mut s = String::from("# Fault location report\n\n");
    let _ = writeln!(s, "Config hash: `{config_hash}`\n");
    if !comparison.rows.is_empty() {
        s.push_str("## Network vs. SVR (normalized test MSE)\n\n");
        s.push_str(&comparison.to_markdown());
        s.push('\n');
    }
    s.push_str("## Test predictions\n\n");
    for e in evals {
        s.push_str(&eval_markdown(e));
        s.push('\n');
    }
    s
}
