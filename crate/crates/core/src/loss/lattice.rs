use std::collections::HashMap;

use crate::error::{domain, Result};
use crate::math::distributions::{
    binomial_pmf_vector, lattice_loss_pmf, lattice_support, poisson_binomial_pmf,
};
use crate::model::{DistributionSource, LossDistribution, Portfolio};

/// Grid (as a fraction of the portfolio) used to round unequal exposures.
pub const DEFAULT_LOSS_GRID: f64 = 1e-4;

/// Integer representation of obligor losses as multiples of a common unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureLattice {
    unit: f64,
    units: Vec<usize>,
    /// All exposures equal: the lattice index is the default count.
    equal: bool,
}

impl ExposureLattice {
    pub fn build(p: &Portfolio, grid: f64) -> Result<Self> {
        if !(grid > 0.0 && grid <= 1.0) {
            return Err(domain(format!("loss grid must lie in (0, 1], got {grid}")));
        }
        let exposures: Vec<f64> = p.obligors().iter().map(|o| o.exposure).collect();
        let first = *exposures.first().ok_or_else(|| domain("empty portfolio"))?;
        let equal = exposures.iter().all(|u| (u - first).abs() <= 1e-12 * first);
        if equal {
            return Ok(Self {
                unit: first,
                units: vec![1; exposures.len()],
                equal: true,
            });
        }
        let units = exposures
            .iter()
            .map(|u| ((u / grid).round() as usize).max(1))
            .collect();
        Ok(Self {
            unit: grid,
            units,
            equal: false,
        })
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn total_units(&self) -> usize {
        self.units.iter().sum()
    }

    pub fn is_equal_exposure(&self) -> bool {
        self.equal
    }

    pub fn level(&self, index: usize) -> f64 {
        index as f64 * self.unit
    }

    /// Exact law of the lattice loss given independent default probabilities.
    pub fn conditional_pmf(&self, probs: &[f64]) -> Result<Vec<f64>> {
        if self.equal {
            let p0 = probs[0];
            if probs.iter().all(|&p| p == p0) {
                return binomial_pmf_vector(probs.len(), p0);
            }
            return poisson_binomial_pmf(probs);
        }
        lattice_loss_pmf(&self.units, probs)
    }

    /// Turns a pmf over lattice indices into a [`LossDistribution`], keeping
    /// every attainable level.
    pub fn to_distribution(&self, pmf: &[f64], source: DistributionSource) -> Result<LossDistribution> {
        let support = if self.equal {
            vec![true; pmf.len()]
        } else {
            lattice_support(&self.units)
        };
        let (levels, probs): (Vec<f64>, Vec<f64>) = pmf
            .iter()
            .enumerate()
            .filter(|(i, _)| support[*i])
            .map(|(i, &p)| (self.level(i), p.max(0.0)))
            .unzip();
        LossDistribution::new(levels, probs, source, None)
    }
}

/// Obligors grouped by identical `(T, ρ, w)` so conditional PDs are computed once per group.
#[derive(Debug, Clone)]
pub(crate) struct RiskClasses {
    pub thresholds: Vec<f64>,
    pub sensitivities: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    /// Class index of each obligor.
    pub member_of: Vec<usize>,
}

impl RiskClasses {
    pub fn build(p: &Portfolio) -> Result<Self> {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut classes = RiskClasses {
            thresholds: Vec::new(),
            sensitivities: Vec::new(),
            weights: Vec::new(),
            member_of: Vec::with_capacity(p.len()),
        };
        for o in p.obligors() {
            let threshold = o.threshold()?;
            let mut key = vec![threshold.to_bits(), o.sensitivity.to_bits()];
            key.extend(o.factor_weights.iter().map(|w| w.to_bits()));
            let next = classes.thresholds.len();
            let id = *index.entry(key).or_insert(next);
            if id == next {
                classes.thresholds.push(threshold);
                classes.sensitivities.push(o.sensitivity);
                classes.weights.push(o.factor_weights.clone());
            }
            classes.member_of.push(id);
        }
        Ok(classes)
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }
}
