//! Credit portfolio capital engine built on the default-mode Gaussian copula.
//!
//! * [`math`]: normal distribution, Gauss-Hermite quadrature, exact default-count laws, seeded draws.
//! * [`model`]: obligors, factor models, probit models, scenarios and loss distributions.
//! * [`pd`]: PIT/TTC transforms and the probit/copula parameter correspondence.
//! * [`loss`]: TTC, PIT and Monte Carlo loss distributions.
//! * [`capital`]: EL, VaR, economic capital and analysis modes.
//! * [`table1`]: the built-in 100-asset reproduction.

pub mod capital;
pub mod error;
pub mod loss;
pub mod math;
pub mod model;
pub mod pd;
pub mod table1;

pub use capital::{
    economic_capital, expected_loss, pit_confidence_level, run_analysis, run_analysis_with, value_at_risk,
    AnalysisMode, CapitalEntry, CapitalLabel, CapitalReport, Confidence, Engine, ReportWarning,
};
pub use error::{Error, Result};
pub use loss::{mc_loss_distribution, pit_loss_distribution, ttc_loss_distribution, McConfig, DEFAULT_QUADRATURE_NODES};
pub use math::{gauss_hermite_rule, QuadratureRule};
pub use model::{
    threshold_from_ttc_pd, ttc_pd_from_threshold, validate_portfolio, DistributionSource, FactorModel,
    LossDistribution, Obligor, Portfolio, ProbitModel, Scenario, ValidationReport, Violation,
};
pub use pd::{
    copula_to_probit, naive_ttc_pd, pit_pd_probit, pit_to_ttc, probit_to_copula, ttc_pd_by_integration, ttc_to_pit,
    CopulaParams, TtcPdEstimate,
};
