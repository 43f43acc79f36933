//! Exact default-count and loss-lattice laws for conditionally independent defaults.

use crate::error::{domain, Error, Result};

/// Largest obligor count handled by the O(N²) exact convolutions.
pub const POISSON_BINOMIAL_LIMIT: usize = 5000;

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("probability must lie in [0, 1], got {p}")))
    }
}

/// Binomial(n, p) pmf as a vector of length `n + 1`.
///
/// Ratios `f(k+1)/f(k)` are accumulated outward from the mode and the result is
/// normalized, so nothing overflows for large `n`; far tails underflow to zero.
pub fn binomial_pmf_vector(n: usize, p: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("binomial trial count must be at least 1"));
    }
    check_probability(p)?;
    let mut pmf = vec![0.0; n + 1];
    if p == 0.0 {
        pmf[0] = 1.0;
        return Ok(pmf);
    }
    if p == 1.0 {
        pmf[n] = 1.0;
        return Ok(pmf);
    }
    let q = 1.0 - p;
    let odds = p / q;
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    pmf[mode] = 1.0;
    for k in mode..n {
        let next = pmf[k] * (n - k) as f64 / (k + 1) as f64 * odds;
        if next == 0.0 {
            break;
        }
        pmf[k + 1] = next;
    }
    for k in (1..=mode).rev() {
        let prev = pmf[k] * k as f64 / (n - k + 1) as f64 / odds;
        if prev == 0.0 {
            break;
        }
        pmf[k - 1] = prev;
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|v| *v /= total);
    Ok(pmf)
}

/// Law of the number of successes among independent Bernoulli(pᵢ) trials.
///
/// Exact dynamic-programming convolution. Inputs longer than
/// [`POISSON_BINOMIAL_LIMIT`] are refused; those portfolios belong on the
/// Monte Carlo path.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.len() > POISSON_BINOMIAL_LIMIT {
        return Err(Error::Capacity {
            n: probs.len(),
            limit: POISSON_BINOMIAL_LIMIT,
        });
    }
    for &p in probs {
        check_probability(p)?;
    }
    let mut pmf = vec![0.0; probs.len() + 1];
    pmf[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        for k in (1..=i + 1).rev() {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[0] *= q;
    }
    Ok(pmf)
}

/// Law of `Σ unitsᵢ·1(defaultᵢ)` on the integer lattice `0..=Σ unitsᵢ`.
///
/// Generalizes [`poisson_binomial_pmf`] to unequal exposures expressed as
/// integer multiples of a common loss unit.
pub fn lattice_loss_pmf(units: &[usize], probs: &[f64]) -> Result<Vec<f64>> {
    if units.len() != probs.len() {
        return Err(Error::Dimension {
            expected: units.len(),
            got: probs.len(),
        });
    }
    if units.len() > POISSON_BINOMIAL_LIMIT {
        return Err(Error::Capacity {
            n: units.len(),
            limit: POISSON_BINOMIAL_LIMIT,
        });
    }
    for &p in probs {
        check_probability(p)?;
    }
    let total: usize = units.iter().sum();
    let mut pmf = vec![0.0; total + 1];
    pmf[0] = 1.0;
    let mut reach = 0usize;
    for (&u, &p) in units.iter().zip(probs) {
        let q = 1.0 - p;
        for j in (0..=reach).rev() {
            let mass = pmf[j];
            if mass != 0.0 {
                pmf[j + u] += mass * p;
                pmf[j] = mass * q;
            }
        }
        reach += u;
    }
    Ok(pmf)
}

/// Lattice points attainable by some subset of obligors defaulting.
pub fn lattice_support(units: &[usize]) -> Vec<bool> {
    let total: usize = units.iter().sum();
    let mut reachable = vec![false; total + 1];
    reachable[0] = true;
    let mut reach = 0usize;
    for &u in units {
        for j in (0..=reach).rev() {
            if reachable[j] {
                reachable[j + u] = true;
            }
        }
        reach += u;
    }
    reachable
}
