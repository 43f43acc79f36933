//! Built-in reproduction of the stylised 100-asset study: VaR and capital for
//! TTC PDs of 3% and 0.3% under TTC analysis, PIT input with TTC calculation,
//! and TTC input with PIT calculation at a factor value of −2.33.

use serde::{Deserialize, Serialize};

use crate::capital::{run_analysis_with, AnalysisMode, CapitalReport, Confidence, Engine};
use crate::error::Result;
use crate::model::{Portfolio, Scenario};

pub const ASSETS: usize = 100;
pub const SENSITIVITY: f64 = 0.5;
/// Factor realisation of the stressed (roughly 1-in-100) scenario.
pub const STRESS_FACTOR: f64 = -2.33;
pub const TTC_CONFIDENCE: f64 = 0.999;
pub const BANK_TARGET_PD: f64 = 0.001;
/// Bank sensitivities behind the two PIT confidence levels (≈98.7% and ≈98%).
pub const BANK_SENSITIVITIES: [f64; 2] = [0.5, std::f64::consts::FRAC_1_SQRT_2];
/// Sub-investment grade and investment grade TTC PDs.
pub const COLUMN_PDS: [f64; 2] = [0.03, 0.003];

/// VaR cells must sit on the expected 1% grid point.
pub const VAR_GRID_TOL_PCT: f64 = 1e-6;
/// Capital cells absorb one-decimal rounding of the published figures.
pub const CAPITAL_TOL_PCT: f64 = 0.05;
/// Looser bounds used when the loss law is simulated.
pub const MC_VAR_TOL_PCT: f64 = 1.0;
pub const MC_CAPITAL_TOL_PCT: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Panel {
    Ttc,
    PitInputTtcCalc,
    TtcInputPitCalc,
}

impl Panel {
    pub const ALL: [Panel; 3] = [Panel::Ttc, Panel::PitInputTtcCalc, Panel::TtcInputPitCalc];

    pub fn title(self) -> &'static str {
        match self {
            Panel::Ttc => "TTC analysis",
            Panel::PitInputTtcCalc => "PIT analysis: PIT input, TTC calculation",
            Panel::TtcInputPitCalc => "PIT analysis: TTC input, PIT calculation",
        }
    }

    fn mode(self) -> AnalysisMode {
        match self {
            Panel::Ttc => AnalysisMode::Ttc,
            Panel::PitInputTtcCalc => AnalysisMode::PitInputTtcCalc,
            Panel::TtcInputPitCalc => AnalysisMode::TtcInputPitCalc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    InputPd,
    Var,
    Capital,
}

/// Published figures in percent, per panel and PD column.
#[derive(Debug, Clone, Copy)]
struct Published {
    input_pd: f64,
    /// (VaR, capital) at 99.9%, then the two PIT confidence levels.
    rows: &'static [(f64, f64)],
}

fn published(panel: Panel, column: usize) -> Published {
    const TTC: [Published; 2] = [
        Published { input_pd: 3.0, rows: &[(37.0, 34.0)] },
        Published { input_pd: 0.3, rows: &[(9.0, 8.7)] },
    ];
    const PIT_INPUT: [Published; 2] = [
        Published { input_pd: 20.4, rows: &[(81.0, 60.6), (64.0, 43.6), (60.0, 39.6)] },
        Published { input_pd: 3.4, rows: &[(39.0, 35.6), (21.0, 17.6), (18.0, 14.6)] },
    ];
    const PIT_CALC: [Published; 2] = [
        Published { input_pd: 3.0, rows: &[(34.0, 13.6), (30.0, 9.6), (29.0, 8.6)] },
        Published { input_pd: 0.3, rows: &[(10.0, 6.6), (8.0, 4.6), (7.0, 3.6)] },
    ];
    match panel {
        Panel::Ttc => TTC[column],
        Panel::PitInputTtcCalc => PIT_INPUT[column],
        Panel::TtcInputPitCalc => PIT_CALC[column],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub panel: Panel,
    pub kind: CellKind,
    /// Confidence level of the row (absent for the input-PD row).
    pub confidence: Option<f64>,
    /// TTC PD of the column.
    pub column_pd: f64,
    pub expected_pct: f64,
    pub computed_pct: f64,
    pub tolerance_pct: f64,
}

impl Cell {
    pub fn passes(&self) -> bool {
        match self.kind {
            // published with one decimal
            CellKind::InputPd => ((self.computed_pct * 10.0).round() / 10.0 - self.expected_pct).abs() < 1e-9,
            _ => (self.computed_pct - self.expected_pct).abs() <= self.tolerance_pct + 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub confidences: Vec<f64>,
    pub cells: Vec<Cell>,
    pub reports: Vec<(Panel, f64, CapitalReport)>,
}

impl Table1 {
    pub fn mismatches(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| !c.passes()).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(Cell::passes)
    }
}

/// Confidence levels used by the panels: 99.9% for TTC, then the bank's PIT
/// target levels.
pub fn confidences(panel: Panel) -> Result<Vec<Confidence>> {
    let mut out = vec![Confidence::ttc(TTC_CONFIDENCE)];
    if panel != Panel::Ttc {
        for rho in BANK_SENSITIVITIES {
            out.push(Confidence::pit_target(BANK_TARGET_PD, rho, STRESS_FACTOR)?);
        }
    }
    Ok(out)
}

pub fn portfolio(ttc_pd: f64) -> Result<Portfolio> {
    Portfolio::homogeneous(ASSETS, ttc_pd, SENSITIVITY)
}

/// Computes every panel and compares it with the published figures.
pub fn reproduce(engine: &Engine) -> Result<Table1> {
    let monte_carlo = matches!(engine, Engine::MonteCarlo(_));
    let (var_tol, cap_tol) = if monte_carlo {
        (MC_VAR_TOL_PCT, MC_CAPITAL_TOL_PCT)
    } else {
        (VAR_GRID_TOL_PCT, CAPITAL_TOL_PCT)
    };
    let stress = Scenario::fixed(vec![STRESS_FACTOR])?;
    let mut cells = Vec::new();
    let mut reports = Vec::new();
    for panel in Panel::ALL {
        let scenario = if panel == Panel::Ttc { Scenario::Unconditional } else { stress.clone() };
        let conf = confidences(panel)?;
        for (column, &pd) in COLUMN_PDS.iter().enumerate() {
            let expected = published(panel, column);
            let report = run_analysis_with(&portfolio(pd)?, panel.mode(), &scenario, &conf, engine)?;
            cells.push(Cell {
                panel,
                kind: CellKind::InputPd,
                confidence: None,
                column_pd: pd,
                expected_pct: expected.input_pd,
                computed_pct: report.mean_input_pd * 100.0,
                tolerance_pct: 0.05,
            });
            for (entry, &(var, cap)) in report.entries.iter().zip(expected.rows) {
                cells.push(Cell {
                    panel,
                    kind: CellKind::Var,
                    confidence: Some(entry.confidence),
                    column_pd: pd,
                    expected_pct: var,
                    computed_pct: entry.var * 100.0,
                    tolerance_pct: var_tol,
                });
                cells.push(Cell {
                    panel,
                    kind: CellKind::Capital,
                    confidence: Some(entry.confidence),
                    column_pd: pd,
                    expected_pct: cap,
                    computed_pct: entry.ec * 100.0,
                    tolerance_pct: cap_tol,
                });
            }
            reports.push((panel, pd, report));
        }
    }
    let mut levels: Vec<f64> = confidences(Panel::PitInputTtcCalc)?.iter().map(|c| c.level).collect();
    levels.dedup();
    Ok(Table1 {
        confidences: levels,
        cells,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quadrature::gauss_hermite_rule;

    #[test]
    fn default_engine_matches_every_cell() {
        let t = reproduce(&Engine::default_exact()).unwrap();
        assert_eq!(t.cells.len(), 34);
        let bad = t.mismatches();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn coarse_quadrature_is_detected() {
        let t = reproduce(&Engine::Exact(gauss_hermite_rule(4).unwrap())).unwrap();
        assert!(!t.all_pass());
    }
}
