//! Report rendering: markdown tables, CSV rows and the JSON report.
//!
//! JSON and CSV carry full-precision values (shortest round-trip decimal form)
//! next to display strings; display rounding never touches the stored numbers.

use std::fmt::Write as _;

use pitcap_core::table1::{Cell, CellKind, Panel, Table1};
use pitcap_core::{CapitalLabel, CapitalReport, ReportWarning};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

/// VaR is shown on the whole-percent grid.
pub fn display_var(x: f64) -> String {
    format!("{:.0}%", clean_zero(x * 100.0))
}

/// Capital and EL are shown to one decimal percent.
pub fn display_capital(x: f64) -> String {
    format!("{:.1}%", clean_zero(x * 100.0))
}

fn display_confidence(alpha: f64) -> String {
    let pct = alpha * 100.0;
    let s = format!("{pct:.1}");
    format!("{}%", s.trim_end_matches('0').trim_end_matches('.'))
}

fn clean_zero(x: f64) -> f64 {
    if x == 0.0 { 0.0 } else { x }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub mode: String,
    pub scenario: String,
    pub engine: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sims: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub workers: Option<usize>,
    pub obligors: usize,
    pub factors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonEntry {
    pub alpha: f64,
    pub var: f64,
    pub ec: f64,
    pub label: CapitalLabel,
    pub var_display: String,
    pub ec_display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub meta: Meta,
    pub el: f64,
    pub el_display: String,
    pub mean_input_pd: f64,
    pub entries: Vec<JsonEntry>,
    pub warnings: Vec<ReportWarning>,
}

impl JsonReport {
    pub fn new(meta: Meta, r: &CapitalReport) -> Self {
        Self {
            meta,
            el: r.expected_loss,
            el_display: display_capital(r.expected_loss),
            mean_input_pd: r.mean_input_pd,
            entries: r
                .entries
                .iter()
                .map(|e| JsonEntry {
                    alpha: e.confidence,
                    var: e.var,
                    ec: e.ec,
                    label: e.label,
                    var_display: display_var(e.var),
                    ec_display: display_capital(e.ec),
                })
                .collect(),
            warnings: r.warnings.clone(),
        }
    }
}

fn warning_text(w: &ReportWarning) -> String {
    match w {
        ReportWarning::NegativeCapital { alpha, ec } => {
            format!("negative capital {} at {}", display_capital(*ec), display_confidence(*alpha))
        }
        ReportWarning::NeutralScenarioPdShift { max_abs_shift } => format!(
            "neutral scenario still shifts PIT input PDs by up to {max_abs_shift:.3e} (thresholds are rescaled by 1/sqrt(1 - rho^2))"
        ),
    }
}

pub fn render_report(meta: &Meta, r: &CapitalReport, format: Format) -> CliResult<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&JsonReport::new(meta.clone(), r))
                .map_err(|e| CliError::Numerical(format!("cannot serialize report: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Numerical(format!("cannot write csv: {e}"));
            w.write_record(["alpha", "label", "var", "ec", "el", "var_display", "ec_display"])
                .map_err(io)?;
            for e in &r.entries {
                w.write_record([
                    e.confidence.to_string(),
                    e.label.to_string(),
                    e.var.to_string(),
                    e.ec.to_string(),
                    r.expected_loss.to_string(),
                    display_var(e.var),
                    display_capital(e.ec),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Numerical(format!("cannot write csv: {e}")))?;
            String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
        }
        Format::Md => {
            let mut s = String::new();
            let mut engine = meta.engine.clone();
            if let Some(n) = meta.nodes {
                let _ = write!(engine, ", {n} nodes");
            }
            if let (Some(n), Some(seed)) = (meta.sims, meta.seed) {
                let _ = write!(engine, ", {n} paths, seed {seed}");
            }
            let _ = writeln!(s, "mode: {} | scenario: {} | engine: {engine}", meta.mode, meta.scenario);
            let _ = writeln!(s, "obligors: {} | factors: {}", meta.obligors, meta.factors);
            let _ = writeln!(s);
            let _ = writeln!(s, "Input PD (mean): {}", display_capital(r.mean_input_pd));
            let _ = writeln!(s, "Expected loss: {}", display_capital(r.expected_loss));
            let _ = writeln!(s);
            let _ = writeln!(s, "| Confidence | VaR | Capital | Label |");
            let _ = writeln!(s, "|---|---|---|---|");
            for e in &r.entries {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} |",
                    display_confidence(e.confidence),
                    display_var(e.var),
                    display_capital(e.ec),
                    e.label
                );
            }
            for w in &r.warnings {
                let _ = writeln!(s, "\nwarning: {}", warning_text(w));
            }
            Ok(s)
        }
    }
}

pub fn warnings_for_stderr(r: &CapitalReport) -> Vec<String> {
    r.warnings.iter().map(warning_text).collect()
}

fn cell_label(c: &Cell) -> String {
    match (c.kind, c.confidence) {
        (CellKind::InputPd, _) if c.panel == Panel::Ttc => "Asset PD (TTC)".to_string(),
        (CellKind::InputPd, _) => "Input PD".to_string(),
        (CellKind::Var, Some(a)) => format!("VaR ({})", display_confidence(a)),
        (CellKind::Capital, Some(a)) => {
            let prefix = if c.panel == Panel::Ttc {
                "Capital"
            } else if a == pitcap_core::table1::TTC_CONFIDENCE {
                "TTC capital"
            } else {
                "PIT capital"
            };
            format!("{prefix} ({})", display_confidence(a))
        }
        _ => String::new(),
    }
}

fn cell_value(c: &Cell) -> String {
    match c.kind {
        CellKind::Var => display_var(c.computed_pct / 100.0),
        _ => display_capital(c.computed_pct / 100.0),
    }
}

/// Human-readable description of a failing cell.
pub fn cell_diff(c: &Cell) -> String {
    format!(
        "{} / {} / PD {}%: expected {}%, computed {:.4}% (tolerance {}pp)",
        c.panel.title(),
        cell_label(c),
        c.column_pd * 100.0,
        c.expected_pct,
        c.computed_pct,
        c.tolerance_pct
    )
}

pub fn render_table1(t: &Table1, engine: &str, format: Format) -> CliResult<String> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                engine: &'a str,
                all_pass: bool,
                confidences: &'a [f64],
                cells: Vec<CellOut<'a>>,
            }
            #[derive(Serialize)]
            struct CellOut<'a> {
                #[serde(flatten)]
                cell: &'a Cell,
                label: String,
                display: String,
                pass: bool,
            }
            let out = Out {
                engine,
                all_pass: t.all_pass(),
                confidences: &t.confidences,
                cells: t
                    .cells
                    .iter()
                    .map(|c| CellOut {
                        cell: c,
                        label: cell_label(c),
                        display: cell_value(c),
                        pass: c.passes(),
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&out)
                .map_err(|e| CliError::Numerical(format!("cannot serialize table: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Numerical(format!("cannot write csv: {e}"));
            w.write_record(["panel", "row", "column_pd", "expected_pct", "computed_pct", "tolerance_pct", "pass"])
                .map_err(io)?;
            for c in &t.cells {
                w.write_record([
                    c.panel.title().to_string(),
                    cell_label(c),
                    c.column_pd.to_string(),
                    c.expected_pct.to_string(),
                    c.computed_pct.to_string(),
                    c.tolerance_pct.to_string(),
                    c.passes().to_string(),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Numerical(format!("cannot write csv: {e}")))?;
            String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
        }
        Format::Md => {
            let mut s = String::new();
            let _ = writeln!(s, "engine: {engine}\n");
            let _ = writeln!(s, "| | Sub-investment grade | Investment grade |");
            let _ = writeln!(s, "|---|---|---|");
            for panel in Panel::ALL {
                let _ = writeln!(s, "| **{}** | | |", panel.title());
                let cells: Vec<&Cell> = t.cells.iter().filter(|c| c.panel == panel).collect();
                let half = cells.len() / 2;
                for (a, b) in cells[..half].iter().zip(&cells[half..]) {
                    let mark = |c: &Cell| if c.passes() { "" } else { " (!)" };
                    let _ = writeln!(
                        s,
                        "| {} | {}{} | {}{} |",
                        cell_label(a),
                        cell_value(a),
                        mark(a),
                        cell_value(b),
                        mark(b)
                    );
                }
            }
            let failing = t.mismatches().len();
            let _ = writeln!(
                s,
                "\n{} of {} cells match the published values",
                t.cells.len() - failing,
                t.cells.len()
            );
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_rounding() {
        assert_eq!(display_var(0.37), "37%");
        assert_eq!(display_var(0.089_999_999), "9%");
        assert_eq!(display_capital(0.3400000000000001), "34.0%");
        assert_eq!(display_capital(0.0867), "8.7%");
        assert_eq!(display_capital(-0.0), "0.0%");
        assert_eq!(display_confidence(0.999), "99.9%");
        assert_eq!(display_confidence(0.986_894_351_370_067_5), "98.7%");
        assert_eq!(display_confidence(0.979_337_206_246_561_8), "97.9%");
        assert_eq!(display_confidence(0.98), "98%");
    }
}
