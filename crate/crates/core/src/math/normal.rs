//! Standard normal density, distribution function and quantile.
//!
//! `erfc` is evaluated with the positive-term series for small arguments and a
//! continued fraction (modified Lentz) in the tail, which keeps relative accuracy
//! near machine precision down to the underflow limit of `Φ`. The quantile starts
//! from Acklam's rational approximation and is polished with one Halley step.

use crate::error::{domain, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Switch point between the series and the continued fraction for `erfc`.
const ERFC_SERIES_LIMIT: f64 = 2.0;

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `exp(−x²/2)` with `x²` split so the exponent keeps full relative accuracy.
fn exp_half_square(x: f64) -> f64 {
    let hi = (x * 16.0).trunc() / 16.0;
    let lo = x - hi;
    (-0.5 * hi * hi).exp() * (-0.5 * lo * (x + hi)).exp()
}

/// Upper tail `Q(t) = 1 − Φ(t) = erfc(t/√2)/2` for `t >= 0`.
fn upper_tail(t: f64) -> f64 {
    let z = t * std::f64::consts::FRAC_1_SQRT_2;
    if z < ERFC_SERIES_LIMIT {
        0.5 * erfc_nonneg(z)
    } else {
        0.25 * FRAC_2_SQRT_PI * exp_half_square(t) / erfc_continued_fraction(z)
    }
}

/// Continued fraction `z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))`, modified Lentz.
fn erfc_continued_fraction(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// Complementary error function for `z >= 0`.
fn erfc_nonneg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < ERFC_SERIES_LIMIT {
        // erf(z) = 2/sqrt(pi) e^{-z^2} sum_n 2^n z^{2n+1} / (2n+1)!!
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term > sum * 1e-17 {
            n += 1.0;
            term *= 2.0 * z2 / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - FRAC_2_SQRT_PI * (-z2).exp() * sum
    } else {
        // erfc(z) = e^{-z^2}/sqrt(pi) / CF(z)
        0.5 * FRAC_2_SQRT_PI * (-z * z).exp() / erfc_continued_fraction(z)
    }
}

/// Unchecked `Φ(x)`; NaN propagates.
#[inline]
pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let tail = upper_tail(x.abs());
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Standard normal distribution function `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("normal cdf argument must be finite, got {x}")));
    }
    Ok(cdf(x))
}

// Acklam's rational approximation, relative error 1.15e-9 before refinement.
#[allow(clippy::excessive_precision)]
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

fn acklam_lower(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Unchecked `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn quantile(p: f64) -> f64 {
    if p > 0.5 {
        return -quantile(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let x = acklam_lower(p);
    // Halley step on Φ(x) - p.
    let e = cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Standard normal quantile `Φ⁻¹(p)`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("quantile probability must lie in (0, 1), got {p}")));
    }
    Ok(quantile(p))
}
