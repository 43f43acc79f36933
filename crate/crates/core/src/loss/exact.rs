use rayon::prelude::*;

use super::lattice::{ExposureLattice, RiskClasses, DEFAULT_LOSS_GRID};
use crate::error::{Error, Result};
use crate::math::distributions::POISSON_BINOMIAL_LIMIT;
use crate::math::quadrature::QuadratureRule;
use crate::model::{validate_portfolio, DistributionSource, LossDistribution, Portfolio, Scenario};
use crate::pd::conditional_pd;

pub(crate) fn check_exact_capacity(p: &Portfolio) -> Result<()> {
    let report = validate_portfolio(p);
    if !report.is_valid() {
        return Err(Error::Validation(report.messages()));
    }
    if p.len() > POISSON_BINOMIAL_LIMIT {
        return Err(Error::Capacity {
            n: p.len(),
            limit: POISSON_BINOMIAL_LIMIT,
        });
    }
    Ok(())
}

/// Conditional PD of every obligor given per-class composite factor values.
fn obligor_pds(classes: &RiskClasses, composite: impl Fn(usize) -> f64) -> Vec<f64> {
    let class_pd: Vec<f64> = (0..classes.len())
        .map(|c| conditional_pd(classes.thresholds[c], classes.sensitivities[c], composite(c)))
        .collect();
    classes.member_of.iter().map(|&c| class_pd[c]).collect()
}

/// TTC loss law `P[L = ℓ] = ∫ P[L = ℓ | S = s] dP_S(s)` for a one-factor portfolio.
pub fn ttc_loss_distribution(p: &Portfolio, rule: &QuadratureRule) -> Result<LossDistribution> {
    ttc_loss_distribution_with_grid(p, rule, DEFAULT_LOSS_GRID)
}

pub fn ttc_loss_distribution_with_grid(
    p: &Portfolio,
    rule: &QuadratureRule,
    grid: f64,
) -> Result<LossDistribution> {
    let k = p.factor_model().k();
    if k != 1 {
        return Err(Error::Unsupported(format!(
            "quadrature loss distribution needs a one-factor model, got k = {k}; use the Monte Carlo engine"
        )));
    }
    check_exact_capacity(p)?;
    let lattice = ExposureLattice::build(p, grid)?;
    let classes = RiskClasses::build(p)?;
    // w'S = w·σ·Z with Z standard normal
    let sigma = p.factor_model().covariance()[0][0].sqrt();
    let loadings: Vec<f64> = classes.weights.iter().map(|w| w[0] * sigma).collect();

    let conditional: Vec<Vec<f64>> = rule
        .nodes()
        .par_iter()
        .map(|&z| lattice.conditional_pmf(&obligor_pds(&classes, |c| loadings[c] * z)))
        .collect::<Result<_>>()?;

    let mut pmf = vec![0.0; lattice.total_units() + 1];
    for (cond, &w) in conditional.iter().zip(rule.weights()) {
        for (acc, v) in pmf.iter_mut().zip(cond) {
            *acc += w * v;
        }
    }
    lattice.to_distribution(&pmf, DistributionSource::Quadrature)
}

/// Loss law conditional on a fixed systematic-factor realisation; defaults are
/// then independent with PDs `pᵢ(s)`.
pub fn pit_loss_distribution(p: &Portfolio, scenario: &Scenario) -> Result<LossDistribution> {
    let Scenario::Fixed(s) = scenario else {
        return Err(Error::Config(format!(
            "conditional loss distribution needs a fixed scenario, got {scenario}"
        )));
    };
    scenario.check_dimension(p.factor_model().k())?;
    check_exact_capacity(p)?;
    let lattice = ExposureLattice::build(p, DEFAULT_LOSS_GRID)?;
    let classes = RiskClasses::build(p)?;
    let composite: Vec<f64> = classes
        .weights
        .iter()
        .map(|w| w.iter().zip(s).map(|(a, b)| a * b).sum())
        .collect();
    let pmf = lattice.conditional_pmf(&obligor_pds(&classes, |c| composite[c]))?;
    lattice.to_distribution(&pmf, DistributionSource::ConditionalExact)
}
