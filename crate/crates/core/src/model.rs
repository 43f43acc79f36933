//! Portfolio, factor, probit and scenario types for the default-mode Gaussian copula
//!
//! `L = Σ uᵢ·1(Dᵢ)`, `Dᵢ = {√(1−ρᵢ²)·ξᵢ + ρᵢ·wᵢ'S ≤ Tᵢ}`, `S ~ N(0, Σ)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::normal::{cdf, quantile};
use crate::math::sampling::cholesky_psd;

pub const EXPOSURE_SUM_TOL: f64 = 1e-9;
pub const WEIGHT_VARIANCE_TOL: f64 = 1e-8;

/// Default threshold `T = Φ⁻¹(pd)`.
pub fn threshold_from_ttc_pd(pd: f64) -> Result<f64> {
    if !(pd > 0.0 && pd < 1.0) {
        return Err(domain(format!("TTC PD must lie in (0, 1), got {pd}")));
    }
    Ok(quantile(pd))
}

/// TTC PD `Φ(T)` for a finite threshold.
pub fn ttc_pd_from_threshold(threshold: f64) -> Result<f64> {
    if !threshold.is_finite() {
        return Err(domain(format!("threshold must be finite, got {threshold}")));
    }
    Ok(cdf(threshold))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obligor {
    pub id: String,
    /// Loss given default as a fraction of the portfolio (`uᵢ`).
    pub exposure: f64,
    pub ttc_pd: f64,
    /// Sensitivity `ρᵢ` to the composite systematic factor `wᵢ'S`.
    pub sensitivity: f64,
    pub factor_weights: Vec<f64>,
}

impl Obligor {
    pub fn new(
        id: impl Into<String>,
        exposure: f64,
        ttc_pd: f64,
        sensitivity: f64,
        factor_weights: Vec<f64>,
    ) -> Self {
        Self {
            id: id.into(),
            exposure,
            ttc_pd,
            sensitivity,
            factor_weights,
        }
    }

    pub fn threshold(&self) -> Result<f64> {
        threshold_from_ttc_pd(self.ttc_pd)
    }

    /// Composite factor value `wᵢ's` for a factor realisation.
    pub fn composite(&self, s: &[f64]) -> f64 {
        self.factor_weights.iter().zip(s).map(|(w, x)| w * x).sum()
    }
}

/// Covariance of the mean-zero systematic factor vector `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    covariance: Vec<Vec<f64>>,
}

impl FactorModel {
    pub fn new(covariance: Vec<Vec<f64>>) -> Result<Self> {
        let k = covariance.len();
        if k == 0 {
            return Err(domain("factor model needs at least one factor"));
        }
        if covariance.iter().any(|row| row.len() != k || row.iter().any(|v| !v.is_finite())) {
            return Err(domain("factor covariance must be a finite square matrix"));
        }
        for i in 0..k {
            for j in 0..i {
                if (covariance[i][j] - covariance[j][i]).abs() > 1e-12 {
                    return Err(domain(format!("factor covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        cholesky_psd(&covariance)?;
        Ok(Self { covariance })
    }

    pub fn identity(k: usize) -> Self {
        let covariance = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { covariance }
    }

    pub fn k(&self) -> usize {
        self.covariance.len()
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.covariance
    }

    /// `var[v'S] = v'·Σ·v`.
    pub fn variance(&self, v: &[f64]) -> f64 {
        let k = self.k();
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                acc += v[i] * self.covariance[i][j] * v[j];
            }
        }
        acc
    }
}

/// One violated portfolio invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    ExposureSum { sum: f64 },
    NonPositiveExposure { id: String, exposure: f64 },
    PdOutOfRange { id: String, pd: f64 },
    SensitivityOutOfRange { id: String, sensitivity: f64 },
    FactorDimension { id: String, expected: usize, got: usize },
    WeightNormalization { id: String, variance: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "portfolio has no obligors"),
            Violation::ExposureSum { sum } => write!(f, "exposures sum to {sum}, expected 1"),
            Violation::NonPositiveExposure { id, exposure } => {
                write!(f, "obligor {id}: exposure {exposure} must be positive")
            }
            Violation::PdOutOfRange { id, pd } => {
                write!(f, "obligor {id}: ttc_pd {pd} must lie in (0, 1)")
            }
            Violation::SensitivityOutOfRange { id, sensitivity } => {
                write!(f, "obligor {id}: rho {sensitivity} must lie in (-1, 1)")
            }
            Violation::FactorDimension { id, expected, got } => {
                write!(f, "obligor {id}: {got} factor weights, expected {expected}")
            }
            Violation::WeightNormalization { id, variance } => {
                write!(f, "obligor {id}: var[w'S] = {variance}, expected 1")
            }
        }
    }
}

/// Result of [`validate_portfolio`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    obligors: Vec<Obligor>,
    factor_model: FactorModel,
}

impl Portfolio {
    /// Validated constructor.
    pub fn new(obligors: Vec<Obligor>, factor_model: FactorModel) -> Result<Self> {
        let p = Self::from_parts(obligors, factor_model);
        let report = validate_portfolio(&p);
        if report.is_valid() {
            Ok(p)
        } else {
            Err(Error::Validation(report.messages()))
        }
    }

    /// Unvalidated constructor; run [`validate_portfolio`] before computing on it.
    pub fn from_parts(obligors: Vec<Obligor>, factor_model: FactorModel) -> Self {
        Self {
            obligors,
            factor_model,
        }
    }

    /// `n` identical obligors on one standard normal factor with `w = 1`.
    pub fn homogeneous(n: usize, ttc_pd: f64, sensitivity: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("homogeneous portfolio needs at least one obligor"));
        }
        let u = 1.0 / n as f64;
        let obligors = (0..n)
            .map(|i| Obligor::new(format!("a{:03}", i + 1), u, ttc_pd, sensitivity, vec![1.0]))
            .collect();
        Self::new(obligors, FactorModel::identity(1))
    }

    pub fn obligors(&self) -> &[Obligor] {
        &self.obligors
    }

    pub fn factor_model(&self) -> &FactorModel {
        &self.factor_model
    }

    pub fn len(&self) -> usize {
        self.obligors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obligors.is_empty()
    }

    /// Rescales exposures to sum to one.
    pub fn normalize_exposures(&mut self) {
        let total: f64 = self.obligors.iter().map(|o| o.exposure).sum();
        if total > 0.0 {
            self.obligors.iter_mut().for_each(|o| o.exposure /= total);
        }
    }

    /// Rescales each `wᵢ` so that `var[wᵢ'S] = 1`.
    pub fn normalize_weights(&mut self) {
        let fm = &self.factor_model;
        for o in &mut self.obligors {
            if o.factor_weights.len() != fm.k() {
                continue;
            }
            let v = fm.variance(&o.factor_weights);
            if v > 0.0 {
                let s = v.sqrt();
                o.factor_weights.iter_mut().for_each(|w| *w /= s);
            }
        }
    }

    /// Copy with every obligor's TTC PD replaced.
    pub fn with_pds(&self, pds: &[f64]) -> Result<Self> {
        if pds.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: pds.len(),
            });
        }
        let obligors = self
            .obligors
            .iter()
            .zip(pds)
            .map(|(o, &pd)| Obligor { ttc_pd: pd, ..o.clone() })
            .collect();
        Self::new(obligors, self.factor_model.clone())
    }

    /// Copy with every sensitivity set to `rho`.
    pub fn with_sensitivity(&self, rho: f64) -> Result<Self> {
        let obligors = self
            .obligors
            .iter()
            .map(|o| Obligor { sensitivity: rho, ..o.clone() })
            .collect();
        Self::new(obligors, self.factor_model.clone())
    }
}

/// Lists every violated portfolio invariant.
pub fn validate_portfolio(p: &Portfolio) -> ValidationReport {
    let mut violations = Vec::new();
    if p.obligors.is_empty() {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }
    let k = p.factor_model.k();
    let mut sum = 0.0;
    for o in &p.obligors {
        sum += o.exposure;
        if !(o.exposure > 0.0 && o.exposure.is_finite()) {
            violations.push(Violation::NonPositiveExposure {
                id: o.id.clone(),
                exposure: o.exposure,
            });
        }
        if !(o.ttc_pd > 0.0 && o.ttc_pd < 1.0) {
            violations.push(Violation::PdOutOfRange {
                id: o.id.clone(),
                pd: o.ttc_pd,
            });
        }
        if !(o.sensitivity.abs() < 1.0) {
            violations.push(Violation::SensitivityOutOfRange {
                id: o.id.clone(),
                sensitivity: o.sensitivity,
            });
        }
        if o.factor_weights.len() != k {
            violations.push(Violation::FactorDimension {
                id: o.id.clone(),
                expected: k,
                got: o.factor_weights.len(),
            });
        } else {
            let variance = p.factor_model.variance(&o.factor_weights);
            if !((variance - 1.0).abs() <= WEIGHT_VARIANCE_TOL) {
                violations.push(Violation::WeightNormalization {
                    id: o.id.clone(),
                    variance,
                });
            }
        }
    }
    if !((sum - 1.0).abs() <= EXPOSURE_SUM_TOL) {
        violations.insert(0, Violation::ExposureSum { sum });
    }
    ValidationReport { violations }
}

/// Probit PIT PD model `Φ(scoreᵢ + b'S)` with `scoreᵢ = a₀ + a'Fᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitModel {
    pub scores: Vec<f64>,
    pub loading: Vec<f64>,
    /// `var[b'S]` under the factor covariance.
    pub var_bs: f64,
}

impl ProbitModel {
    pub fn new(scores: Vec<f64>, loading: Vec<f64>, fm: &FactorModel) -> Result<Self> {
        if loading.len() != fm.k() {
            return Err(Error::Dimension {
                expected: fm.k(),
                got: loading.len(),
            });
        }
        let var_bs = fm.variance(&loading).max(0.0);
        Ok(Self {
            scores,
            loading,
            var_bs,
        })
    }
}

/// Systematic-factor conditioning for a loss calculation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Scenario {
    /// Integrate over the full law of `S`.
    Unconditional,
    /// Condition on a realisation `S = s`.
    Fixed(Vec<f64>),
    /// Condition on `S` lying in a box of per-factor `[low, high]` intervals.
    Truncated(Vec<(f64, f64)>),
}

impl Scenario {
    pub fn fixed(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(domain("fixed scenario values must be finite and non-empty"));
        }
        Ok(Scenario::Fixed(values))
    }

    pub fn truncated(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(domain("truncation box needs at least one factor"));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || !(lo < hi) {
                return Err(domain(format!("truncation interval {i} must satisfy low < high")));
            }
        }
        Ok(Scenario::Truncated(bounds))
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            Scenario::Unconditional => None,
            Scenario::Fixed(v) => Some(v.len()),
            Scenario::Truncated(b) => Some(b.len()),
        }
    }

    pub fn check_dimension(&self, k: usize) -> Result<()> {
        match self.dimension() {
            Some(d) if d != k => Err(Error::Dimension { expected: k, got: d }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = |v: f64| {
            if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else if v == f64::INFINITY {
                "inf".to_string()
            } else {
                v.to_string()
            }
        };
        match self {
            Scenario::Unconditional => write!(f, "unconditional"),
            Scenario::Fixed(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "fixed:{}", parts.join(","))
            }
            Scenario::Truncated(b) => {
                let parts: Vec<String> = b
                    .iter()
                    .enumerate()
                    .map(|(i, &(lo, hi))| format!("f{}={}..{}", i + 1, bound(lo), bound(hi)))
                    .collect();
                write!(f, "trunc:{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionSource {
    Quadrature,
    ConditionalExact,
    MonteCarlo,
}

impl DistributionSource {
    pub fn tolerance(self) -> f64 {
        match self {
            DistributionSource::MonteCarlo => 1e-9,
            _ => 1e-10,
        }
    }
}

/// Discrete law of the relative portfolio loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossDistribution {
    loss_levels: Vec<f64>,
    probabilities: Vec<f64>,
    source: DistributionSource,
    mc_stderr: Option<Vec<f64>>,
}

impl LossDistribution {
    pub fn new(
        loss_levels: Vec<f64>,
        probabilities: Vec<f64>,
        source: DistributionSource,
        mc_stderr: Option<Vec<f64>>,
    ) -> Result<Self> {
        if loss_levels.is_empty() || loss_levels.len() != probabilities.len() {
            return Err(domain("loss levels and probabilities must be non-empty and equal length"));
        }
        if let Some(se) = &mc_stderr {
            if se.len() != loss_levels.len() {
                return Err(domain("standard errors must match the loss levels"));
            }
        }
        if loss_levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("loss levels must be strictly ascending"));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(domain("probabilities must be nonnegative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > source.tolerance() {
            return Err(domain(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self {
            loss_levels,
            probabilities,
            source,
            mc_stderr,
        })
    }

    /// A single atom at `level`.
    pub fn point_mass(level: f64, source: DistributionSource) -> Self {
        Self {
            loss_levels: vec![level],
            probabilities: vec![1.0],
            source,
            mc_stderr: None,
        }
    }

    pub fn loss_levels(&self) -> &[f64] {
        &self.loss_levels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn source(&self) -> DistributionSource {
        self.source
    }

    pub fn mc_stderr(&self) -> Option<&[f64]> {
        self.mc_stderr.as_deref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.loss_levels.iter().copied().zip(self.probabilities.iter().copied())
    }

    /// Probability mass at `level`, matched within `1e-12`.
    pub fn mass_at(&self, level: f64) -> f64 {
        self.iter()
            .find(|(l, _)| (l - level).abs() <= 1e-12)
            .map_or(0.0, |(_, p)| p)
    }

    /// `P[L ≤ level]`.
    pub fn cdf(&self, level: f64) -> f64 {
        self.iter()
            .take_while(|(l, _)| *l <= level + 1e-12)
            .map(|(_, p)| p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        assert!((threshold_from_ttc_pd(0.003).unwrap() + 2.747_781_385_444_993).abs() < 1e-12);
        assert_eq!(threshold_from_ttc_pd(0.5).unwrap(), 0.0);
        assert!((threshold_from_ttc_pd(0.03).unwrap() + 1.880_793_608_151_251).abs() < 1e-12);
        assert!(threshold_from_ttc_pd(0.0).is_err());
        assert!(threshold_from_ttc_pd(1.0).is_err());
        assert!(ttc_pd_from_threshold(f64::NAN).is_err());
    }

    #[test]
    fn threshold_round_trip() {
        let mut pd = 1e-6;
        while pd < 1.0 - 1e-6 {
            let t = threshold_from_ttc_pd(pd).unwrap();
            let back = ttc_pd_from_threshold(t).unwrap();
            assert!((back - pd).abs() <= 1e-10, "pd={pd}");
            pd *= 1.07;
        }
    }

    #[test]
    fn homogeneous_portfolio_is_valid() {
        for pd in [0.03, 0.003] {
            let p = Portfolio::homogeneous(100, pd, 0.5).unwrap();
            assert!(validate_portfolio(&p).is_valid());
            assert_eq!(p.len(), 100);
        }
    }

    #[test]
    fn exposure_sum_violation() {
        let obligors = (0..10)
            .map(|i| Obligor::new(format!("o{i}"), 0.09, 0.01, 0.3, vec![1.0]))
            .collect();
        let p = Portfolio::from_parts(obligors, FactorModel::identity(1));
        let report = validate_portfolio(&p);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::ExposureSum { sum } if (sum - 0.9).abs() < 1e-12));
        let mut fixed = p.clone();
        fixed.normalize_exposures();
        assert!(validate_portfolio(&fixed).is_valid());
    }

    #[test]
    fn weight_normalization_violation() {
        let p = Portfolio::from_parts(
            vec![Obligor::new("x", 1.0, 0.01, 0.3, vec![2.0])],
            FactorModel::identity(1),
        );
        let report = validate_portfolio(&p);
        assert_eq!(
            report.violations,
            vec![Violation::WeightNormalization { id: "x".into(), variance: 4.0 }]
        );
        let mut fixed = p;
        fixed.normalize_weights();
        assert!(validate_portfolio(&fixed).is_valid());
        assert_eq!(fixed.obligors()[0].factor_weights, vec![1.0]);
    }

    #[test]
    fn unit_sensitivity_rejected_negative_accepted() {
        let p = Portfolio::from_parts(
            vec![
                Obligor::new("a", 0.5, 0.01, 1.0, vec![1.0]),
                Obligor::new("b", 0.5, 0.01, -0.6, vec![1.0]),
            ],
            FactorModel::identity(1),
        );
        let report = validate_portfolio(&p);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(&report.violations[0], Violation::SensitivityOutOfRange { id, .. } if id == "a"));
    }

    #[test]
    fn factor_model_checks() {
        assert!(FactorModel::new(vec![vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(FactorModel::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        let fm = FactorModel::new(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!((fm.variance(&[1.0, 1.0]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn scenario_checks() {
        assert!(Scenario::fixed(vec![f64::NAN]).is_err());
        assert!(Scenario::truncated(vec![(1.0, 1.0)]).is_err());
        let s = Scenario::truncated(vec![(f64::NEG_INFINITY, -1.0)]).unwrap();
        assert_eq!(s.to_string(), "trunc:f1=-inf..-1");
        assert_eq!(Scenario::fixed(vec![-2.33]).unwrap().to_string(), "fixed:-2.33");
    }

    #[test]
    fn loss_distribution_checks() {
        assert!(LossDistribution::new(vec![0.0, 0.5], vec![0.5, 0.4], DistributionSource::ConditionalExact, None).is_err());
        assert!(LossDistribution::new(vec![0.5, 0.0], vec![0.5, 0.5], DistributionSource::ConditionalExact, None).is_err());
        let d = LossDistribution::new(vec![0.0, 0.5, 1.0], vec![0.25, 0.5, 0.25], DistributionSource::ConditionalExact, None).unwrap();
        assert_eq!(d.cdf(0.5), 0.75);
        assert_eq!(d.mass_at(1.0), 0.25);
    }
}
