//! Expected loss, Value-at-Risk and Unexpected-Loss economic capital, and the
//! three analysis modes that combine PD inputs with loss calculations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::loss::{mc_loss_distribution, pit_loss_distribution, ttc_loss_distribution, McConfig, DEFAULT_QUADRATURE_NODES};
use crate::math::distributions::POISSON_BINOMIAL_LIMIT;
use crate::math::quadrature::{gauss_hermite_rule, QuadratureRule};
use crate::model::{validate_portfolio, LossDistribution, Portfolio, Scenario};
use crate::pd::{conditional_pd, ttc_to_pit};

pub fn expected_loss(d: &LossDistribution) -> f64 {
    d.iter().map(|(l, p)| l * p).sum()
}

/// Lower quantile `inf{ℓ : P[L ≤ ℓ] ≥ α}`; always a member of the loss levels.
pub fn value_at_risk(d: &LossDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("confidence level must lie in (0, 1), got {alpha}")));
    }
    let mut cumulative = 0.0;
    for (level, p) in d.iter() {
        cumulative += p;
        if cumulative >= alpha {
            return Ok(level);
        }
    }
    // rounding left the total just short of alpha
    Ok(*d.loss_levels().last().expect("non-empty distribution"))
}

/// `VaR(α) − EL`. Negative values are returned as is.
pub fn economic_capital(d: &LossDistribution, alpha: f64) -> Result<f64> {
    Ok(value_at_risk(d, alpha)? - expected_loss(d))
}

/// Confidence level implied by applying the PIT transform to the bank's own TTC target PD.
pub fn pit_confidence_level(ttc_target_pd: f64, rho_bank: f64, s: f64) -> Result<f64> {
    Ok(1.0 - ttc_to_pit(ttc_target_pd, rho_bank, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CapitalLabel {
    Ttc,
    Pit,
}

impl fmt::Display for CapitalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CapitalLabel::Ttc => "TTC",
            CapitalLabel::Pit => "PIT",
        })
    }
}

/// A requested confidence level and how its capital figure is labelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub level: f64,
    pub label: CapitalLabel,
}

impl Confidence {
    pub fn ttc(level: f64) -> Self {
        Self {
            level,
            label: CapitalLabel::Ttc,
        }
    }

    /// Level derived from a bank target PD via [`pit_confidence_level`].
    pub fn pit_target(ttc_target_pd: f64, rho_bank: f64, s: f64) -> Result<Self> {
        Ok(Self {
            level: pit_confidence_level(ttc_target_pd, rho_bank, s)?,
            label: CapitalLabel::Pit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisMode {
    /// TTC PDs, loss law integrated over the systematic factor.
    Ttc,
    /// PDs transformed to the scenario, then integrated over the factor as in TTC mode.
    PitInputTtcCalc,
    /// TTC PDs, loss law conditional on the scenario.
    TtcInputPitCalc,
}

impl fmt::Display for AnalysisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalysisMode::Ttc => "ttc",
            AnalysisMode::PitInputTtcCalc => "pit-input",
            AnalysisMode::TtcInputPitCalc => "pit-calc",
        })
    }
}

/// Loss-distribution backend.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    /// Quadrature for factor integration, exact convolution for fixed scenarios.
    Exact(QuadratureRule),
    MonteCarlo(McConfig),
}

impl Engine {
    pub fn default_exact() -> Self {
        Engine::Exact(gauss_hermite_rule(DEFAULT_QUADRATURE_NODES).expect("valid default node count"))
    }

    /// Exact when the portfolio fits the exact path, Monte Carlo otherwise.
    pub fn auto(p: &Portfolio, mode: AnalysisMode, mc: McConfig) -> Self {
        let integrates = mode != AnalysisMode::TtcInputPitCalc;
        if p.len() > POISSON_BINOMIAL_LIMIT || (integrates && p.factor_model().k() > 1) {
            Engine::MonteCarlo(mc)
        } else {
            Self::default_exact()
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact(_) => "exact",
            Engine::MonteCarlo(_) => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportWarning {
    /// Capital below zero at a confidence level.
    NegativeCapital { alpha: f64, ec: f64 },
    /// PIT-input PDs differ from the TTC PDs although every obligor sees a
    /// neutral composite factor, because `Φ(T/√(1−ρ²)) ≠ Φ(T)` for `T ≠ 0`.
    NeutralScenarioPdShift { max_abs_shift: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalEntry {
    pub confidence: f64,
    pub var: f64,
    pub ec: f64,
    pub label: CapitalLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalReport {
    pub mode: AnalysisMode,
    pub expected_loss: f64,
    /// Exposure-weighted mean of the PDs fed to the loss model.
    pub mean_input_pd: f64,
    pub entries: Vec<CapitalEntry>,
    pub warnings: Vec<ReportWarning>,
}

fn scenario_values<'a>(mode: AnalysisMode, scenario: &'a Scenario, engine: &Engine) -> Result<Option<&'a [f64]>> {
    match (mode, scenario) {
        (AnalysisMode::Ttc, Scenario::Unconditional) => Ok(None),
        (AnalysisMode::Ttc, other) => Err(Error::Config(format!(
            "ttc mode integrates over the factor and takes no scenario, got {other}"
        ))),
        (_, Scenario::Fixed(s)) => Ok(Some(s.as_slice())),
        (AnalysisMode::TtcInputPitCalc, Scenario::Truncated(_)) if matches!(engine, Engine::MonteCarlo(_)) => Ok(None),
        (AnalysisMode::TtcInputPitCalc, Scenario::Truncated(_)) => Err(Error::Config(
            "truncated scenarios are only simulated; use the Monte Carlo engine".into(),
        )),
        (m, other) => Err(Error::Config(format!("{m} mode needs a fixed scenario, got {other}"))),
    }
}

/// Runs one analysis with the default exact engine.
pub fn run_analysis(
    p: &Portfolio,
    mode: AnalysisMode,
    scenario: &Scenario,
    confidences: &[Confidence],
) -> Result<CapitalReport> {
    run_analysis_with(p, mode, scenario, confidences, &Engine::default_exact())
}

/// Runs one analysis.
///
/// Expected loss is `Σ uᵢ·PDᵢ` over the PDs that drive the loss model: the TTC
/// PDs in TTC mode and the scenario-conditional PDs in both PIT modes. A
/// truncated scenario (TTC input, PIT calculation, Monte Carlo only) has no
/// single conditional PD per obligor, so its EL is the mean of the simulated law.
pub fn run_analysis_with(
    p: &Portfolio,
    mode: AnalysisMode,
    scenario: &Scenario,
    confidences: &[Confidence],
    engine: &Engine,
) -> Result<CapitalReport> {
    let report = validate_portfolio(p);
    if !report.is_valid() {
        return Err(Error::Validation(report.messages()));
    }
    let s = scenario_values(mode, scenario, engine)?;
    scenario.check_dimension(p.factor_model().k())?;
    for c in confidences {
        if !(c.level > 0.0 && c.level < 1.0) {
            return Err(domain(format!("confidence level must lie in (0, 1), got {}", c.level)));
        }
    }

    let mut warnings = Vec::new();
    let ttc_pds: Vec<f64> = p.obligors().iter().map(|o| o.ttc_pd).collect();
    let pit_pds: Option<Vec<f64>> = s
        .map(|s| {
            p.obligors()
                .iter()
                .map(|o| Ok(conditional_pd(o.threshold()?, o.sensitivity, o.composite(s))))
                .collect::<Result<Vec<f64>>>()
        })
        .transpose()?;

    let (distribution, input_pds) = match mode {
        AnalysisMode::Ttc => {
            let d = match engine {
                Engine::Exact(rule) => ttc_loss_distribution(p, rule)?,
                Engine::MonteCarlo(cfg) => mc_loss_distribution(p, &Scenario::Unconditional, cfg)?,
            };
            (d, ttc_pds.clone())
        }
        AnalysisMode::PitInputTtcCalc => {
            let pit = pit_pds.clone().expect("scenario checked");
            let s = s.expect("scenario checked");
            if p.obligors().iter().all(|o| o.composite(s) == 0.0) {
                let shift = pit
                    .iter()
                    .zip(&ttc_pds)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if shift > 0.0 {
                    warnings.push(ReportWarning::NeutralScenarioPdShift { max_abs_shift: shift });
                }
            }
            let shifted = p.with_pds(&pit)?;
            let d = match engine {
                Engine::Exact(rule) => ttc_loss_distribution(&shifted, rule)?,
                Engine::MonteCarlo(cfg) => mc_loss_distribution(&shifted, &Scenario::Unconditional, cfg)?,
            };
            (d, pit)
        }
        AnalysisMode::TtcInputPitCalc => {
            let d = match engine {
                Engine::Exact(_) => pit_loss_distribution(p, scenario)?,
                Engine::MonteCarlo(cfg) => mc_loss_distribution(p, scenario, cfg)?,
            };
            (d, ttc_pds.clone())
        }
    };

    let exposures: Vec<f64> = p.obligors().iter().map(|o| o.exposure).collect();
    let weighted = |pds: &[f64]| exposures.iter().zip(pds).map(|(u, pd)| u * pd).sum::<f64>();
    let expected_loss = match scenario {
        Scenario::Truncated(_) => expected_loss(&distribution),
        _ => weighted(pit_pds.as_deref().unwrap_or(&ttc_pds)),
    };
    let mean_input_pd = weighted(&input_pds);

    let mut entries = Vec::with_capacity(confidences.len());
    for c in confidences {
        let var = value_at_risk(&distribution, c.level)?;
        let ec = var - expected_loss;
        if ec < 0.0 {
            warnings.push(ReportWarning::NegativeCapital { alpha: c.level, ec });
        }
        entries.push(CapitalEntry {
            confidence: c.level,
            var,
            ec,
            label: c.label,
        });
    }
    Ok(CapitalReport {
        mode,
        expected_loss,
        mean_input_pd,
        entries,
        warnings,
    })
}
