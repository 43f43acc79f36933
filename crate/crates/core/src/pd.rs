//! PD transforms between point-in-time and through-the-cycle views, and the
//! correspondence between probit PD models and copula parameters.
//!
//! Given the composite factor value `s = w'S` (unit variance), an obligor with
//! threshold `T` and sensitivity `ρ` has conditional PD
//! `Φ((T − ρ·s)/√(1−ρ²))`. A probit model `Φ(score + b'S)` describes the same
//! conditional PD when
//!
//! * `ρ = √v / √(1+v)` with `v = var[b'S]`,
//! * `w = −b / √v`,
//! * `T = score / √(1+v) = score·√(1−ρ²)`,
//!
//! and the inverse map is `v = ρ²/(1−ρ²)`, `b = −w·ρ/√(1−ρ²)`,
//! `score = T/√(1−ρ²)`. Integrating the probit PD over `S` gives the TTC PD
//! `Φ(score/√(1+v)) = Φ(T)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::normal::{cdf, quantile};
use crate::math::quadrature::QuadratureRule;
use crate::model::{FactorModel, ProbitModel};

/// Copula-side parameters for a segment of obligors sharing `ρ` and `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaParams {
    pub sensitivity: f64,
    pub weights: Vec<f64>,
    pub thresholds: Vec<f64>,
}

fn check_sensitivity(rho: f64) -> Result<()> {
    if rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("sensitivity must lie in (-1, 1), got {rho}")))
    }
}

fn check_open_probability(p: f64, what: &str) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{what} must lie in (0, 1), got {p}")))
    }
}

/// Conditional PD for a threshold; no argument checks.
#[inline]
pub fn conditional_pd(threshold: f64, rho: f64, s: f64) -> f64 {
    if rho == 0.0 {
        return cdf(threshold);
    }
    cdf((threshold - rho * s) / (1.0 - rho * rho).sqrt())
}

/// Probit PIT PD `Φ(score + b's)`.
pub fn pit_pd_probit(score: f64, loading: &[f64], s: &[f64]) -> Result<f64> {
    if loading.len() != s.len() {
        return Err(Error::Dimension {
            expected: loading.len(),
            got: s.len(),
        });
    }
    if !score.is_finite() || s.iter().chain(loading).any(|v| !v.is_finite()) {
        return Err(domain("probit inputs must be finite"));
    }
    let bs: f64 = loading.iter().zip(s).map(|(b, x)| b * x).sum();
    Ok(cdf(score + bs))
}

/// Maps a probit model onto copula parameters.
///
/// The returned sensitivity is always positive; a vanishing loading has no
/// copula counterpart with `ρ > 0` and is reported as [`Error::Degenerate`].
pub fn probit_to_copula(pm: &ProbitModel, fm: &FactorModel) -> Result<CopulaParams> {
    if pm.loading.len() != fm.k() {
        return Err(Error::Dimension {
            expected: fm.k(),
            got: pm.loading.len(),
        });
    }
    let v = pm.var_bs;
    if !(v >= 0.0) {
        return Err(domain(format!("var[b'S] must be nonnegative, got {v}")));
    }
    if v == 0.0 {
        return Err(Error::Degenerate(
            "var[b'S] = 0: no systematic dependence; use rho = 0, any unit-variance w, and thresholds equal to the scores"
                .into(),
        ));
    }
    let sd = v.sqrt();
    let scale = (1.0 + v).sqrt();
    Ok(CopulaParams {
        sensitivity: sd / scale,
        weights: pm.loading.iter().map(|b| -b / sd).collect(),
        thresholds: pm.scores.iter().map(|score| score / scale).collect(),
    })
}

/// Maps copula parameters back onto a probit model.
///
/// `ρ = 0` yields the explicit degenerate model `b = 0`, `var[b'S] = 0`,
/// `score = T`.
pub fn copula_to_probit(cp: &CopulaParams, fm: &FactorModel) -> Result<ProbitModel> {
    check_sensitivity(cp.sensitivity)?;
    if cp.weights.len() != fm.k() {
        return Err(Error::Dimension {
            expected: fm.k(),
            got: cp.weights.len(),
        });
    }
    let wv = fm.variance(&cp.weights);
    if (wv - 1.0).abs() > 1e-10 {
        return Err(domain(format!("copula weights must have var[w'S] = 1, got {wv}")));
    }
    let rho = cp.sensitivity;
    if rho == 0.0 {
        return Ok(ProbitModel {
            scores: cp.thresholds.clone(),
            loading: vec![0.0; fm.k()],
            var_bs: 0.0,
        });
    }
    let root = (1.0 - rho * rho).sqrt();
    Ok(ProbitModel {
        scores: cp.thresholds.iter().map(|t| t / root).collect(),
        loading: cp.weights.iter().map(|w| -w * rho / root).collect(),
        var_bs: rho * rho / (1.0 - rho * rho),
    })
}

/// PIT PD of an obligor with TTC PD `ttc_pd` when the composite factor equals `w_dot_s`.
pub fn ttc_to_pit(ttc_pd: f64, rho: f64, w_dot_s: f64) -> Result<f64> {
    check_open_probability(ttc_pd, "TTC PD")?;
    check_sensitivity(rho)?;
    if !w_dot_s.is_finite() {
        return Err(domain("scenario value must be finite"));
    }
    if rho == 0.0 {
        return Ok(ttc_pd);
    }
    Ok(conditional_pd(quantile(ttc_pd), rho, w_dot_s))
}

/// Inverse of [`ttc_to_pit`] in its first argument.
pub fn pit_to_ttc(pit_pd: f64, rho: f64, w_dot_s: f64) -> Result<f64> {
    check_open_probability(pit_pd, "PIT PD")?;
    check_sensitivity(rho)?;
    if !w_dot_s.is_finite() {
        return Err(domain("scenario value must be finite"));
    }
    if rho == 0.0 {
        return Ok(pit_pd);
    }
    Ok(cdf(quantile(pit_pd) * (1.0 - rho * rho).sqrt() + rho * w_dot_s))
}

/// TTC PD of a probit model computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtcPdEstimate {
    /// `∫ Φ(score + y) dP_{b'S}(y)` under the quadrature rule.
    pub quadrature: f64,
    /// `Φ(score / √(1 + var[b'S]))`.
    pub closed_form: f64,
}

pub fn ttc_pd_by_integration(score: f64, var_bs: f64, rule: &QuadratureRule) -> Result<TtcPdEstimate> {
    if !(var_bs >= 0.0) || !var_bs.is_finite() {
        return Err(domain(format!("var[b'S] must be finite and nonnegative, got {var_bs}")));
    }
    if !score.is_finite() {
        return Err(domain("score must be finite"));
    }
    let sd = var_bs.sqrt();
    Ok(TtcPdEstimate {
        quadrature: rule.integrate(|x| cdf(score + sd * x)),
        closed_form: cdf(score / (1.0 + var_bs).sqrt()),
    })
}

/// PD obtained by dropping the systematic term from a probit score.
///
/// This is not the TTC PD: for negative scores it underestimates
/// `Φ(score/√(1+var[b'S]))` and for positive scores it overestimates it.
pub fn naive_ttc_pd(score: f64) -> f64 {
    cdf(score)
}
