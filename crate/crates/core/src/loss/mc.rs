//! Monte Carlo loss simulation.
//!
//! Paths are generated in fixed-size blocks. Block `b` draws from the ChaCha8
//! substream `(seed, b)` and produces integer histograms, so the merged result
//! is the same for any worker count or scheduling order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::{ExposureLattice, RiskClasses, DEFAULT_LOSS_GRID};
use crate::error::{Error, Result};
use crate::math::sampling::{cholesky_psd, UniformStream};
use crate::model::{validate_portfolio, DistributionSource, LossDistribution, Portfolio, Scenario};
use crate::pd::conditional_pd;

/// Smallest truncation-box acceptance rate accepted before sampling.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-6;

const BLOCK_PATHS: u64 = 1 << 14;
const PILOT_DRAWS: u64 = 2_000_000;
const PILOT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_sims: u64,
    pub seed: u64,
    /// Pair every path with its mirror image (`−S`, `1 − U`).
    pub antithetic: bool,
    pub n_workers: usize,
}

impl McConfig {
    pub fn new(n_sims: u64, seed: u64) -> Self {
        Self {
            n_sims,
            seed,
            antithetic: false,
            n_workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            return Err(Error::Config("n_sims must be at least 1".into()));
        }
        if self.antithetic && self.n_sims % 2 == 1 {
            return Err(Error::Config("antithetic sampling needs an even n_sims".into()));
        }
        if self.n_workers == 0 {
            return Err(Error::Config("n_workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// How each path obtains its factor realisation.
enum FactorDraw {
    Gaussian { chol: Vec<Vec<f64>> },
    Fixed(Vec<f64>),
    Truncated { chol: Vec<Vec<f64>>, bounds: Vec<(f64, f64)> },
}

impl FactorDraw {
    fn correlated(chol: &[Vec<f64>], rng: &mut UniformStream, z: &mut [f64], out: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = rng.normal());
        for (i, row) in chol.iter().enumerate() {
            out[i] = row[..=i].iter().zip(z.iter()).map(|(l, x)| l * x).sum();
        }
    }

    fn inside(bounds: &[(f64, f64)], s: &[f64]) -> bool {
        s.iter().zip(bounds).all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    fn draw(&self, rng: &mut UniformStream, z: &mut [f64], out: &mut [f64]) {
        match self {
            FactorDraw::Gaussian { chol } => Self::correlated(chol, rng, z, out),
            FactorDraw::Fixed(s) => out.copy_from_slice(s),
            FactorDraw::Truncated { chol, bounds } => loop {
                Self::correlated(chol, rng, z, out);
                if Self::inside(bounds, out) {
                    break;
                }
            },
        }
    }

    /// Only the unrestricted Gaussian law is symmetric under `S → −S`.
    fn mirrors(&self) -> bool {
        matches!(self, FactorDraw::Gaussian { .. })
    }
}

struct Histogram {
    counts: Vec<u64>,
    /// Per-level sum of squared pair averages, in units of 1/4 (antithetic only).
    quarter_squares: Vec<u64>,
}

impl Histogram {
    fn new(len: usize, antithetic: bool) -> Self {
        Self {
            counts: vec![0; len],
            quarter_squares: if antithetic { vec![0; len] } else { Vec::new() },
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.quarter_squares.iter_mut().zip(&other.quarter_squares) {
            *a += b;
        }
        self
    }
}

struct Simulator<'a> {
    lattice: &'a ExposureLattice,
    classes: &'a RiskClasses,
    factors: FactorDraw,
    k: usize,
    cfg: McConfig,
}

impl Simulator<'_> {
    fn class_pds(&self, s: &[f64], sign: f64, out: &mut [f64]) {
        for (c, pd) in out.iter_mut().enumerate() {
            let z: f64 = self.classes.weights[c].iter().zip(s).map(|(w, x)| w * x).sum();
            *pd = conditional_pd(self.classes.thresholds[c], self.classes.sensitivities[c], sign * z);
        }
    }

    fn run_block(&self, block: u64, paths: u64) -> Histogram {
        let units = self.lattice.units();
        let members = &self.classes.member_of;
        let mut rng = UniformStream::new(self.cfg.seed, block);
        let mut hist = Histogram::new(self.lattice.total_units() + 1, self.cfg.antithetic);
        let mut z = vec![0.0; self.k];
        let mut s = vec![0.0; self.k];
        let mut pd = vec![0.0; self.classes.len()];
        let mut pd_mirror = vec![0.0; self.classes.len()];

        if !self.cfg.antithetic {
            for _ in 0..paths {
                self.factors.draw(&mut rng, &mut z, &mut s);
                self.class_pds(&s, 1.0, &mut pd);
                let mut loss = 0usize;
                for (i, &c) in members.iter().enumerate() {
                    if rng.uniform() < pd[c] {
                        loss += units[i];
                    }
                }
                hist.counts[loss] += 1;
            }
            return hist;
        }

        let mirror_sign = if self.factors.mirrors() { -1.0 } else { 1.0 };
        for _ in 0..paths / 2 {
            self.factors.draw(&mut rng, &mut z, &mut s);
            self.class_pds(&s, 1.0, &mut pd);
            self.class_pds(&s, mirror_sign, &mut pd_mirror);
            let (mut loss, mut loss_mirror) = (0usize, 0usize);
            for (i, &c) in members.iter().enumerate() {
                let u = rng.uniform();
                if u < pd[c] {
                    loss += units[i];
                }
                if 1.0 - u < pd_mirror[c] {
                    loss_mirror += units[i];
                }
            }
            hist.counts[loss] += 1;
            hist.counts[loss_mirror] += 1;
            if loss == loss_mirror {
                hist.quarter_squares[loss] += 4;
            } else {
                hist.quarter_squares[loss] += 1;
                hist.quarter_squares[loss_mirror] += 1;
            }
        }
        hist
    }
}

fn pilot_acceptance(chol: &[Vec<f64>], bounds: &[(f64, f64)], seed: u64) -> f64 {
    let k = chol.len();
    let mut rng = UniformStream::new(seed, PILOT_STREAM);
    let (mut z, mut s) = (vec![0.0; k], vec![0.0; k]);
    let mut accepted = 0u64;
    for _ in 0..PILOT_DRAWS {
        FactorDraw::correlated(chol, &mut rng, &mut z, &mut s);
        if FactorDraw::inside(bounds, &s) {
            accepted += 1;
        }
    }
    accepted as f64 / PILOT_DRAWS as f64
}

/// Empirical loss distribution from `cfg.n_sims` simulated paths.
///
/// * `Unconditional`: draws `S` and the idiosyncratic shocks.
/// * `Fixed(s)`: holds `S = s` and draws only the idiosyncratic shocks.
/// * `Truncated(box)`: draws `S` from its Gaussian law restricted to the box by
///   rejection, giving `P[L ≤ ℓ | S ∈ box]`. A pilot run measures the
///   acceptance rate first and refuses boxes below [`MIN_ACCEPTANCE_RATE`].
///
/// Idiosyncratic defaults are drawn as `U < pᵢ(s)` with `U` uniform, which has
/// the same law as `√(1−ρ²)ξ + ρ w'S ≤ T` given `S`.
pub fn mc_loss_distribution(p: &Portfolio, scenario: &Scenario, cfg: &McConfig) -> Result<LossDistribution> {
    cfg.validate()?;
    let report = validate_portfolio(p);
    if !report.is_valid() {
        return Err(Error::Validation(report.messages()));
    }
    let k = p.factor_model().k();
    scenario.check_dimension(k)?;
    let chol = cholesky_psd(p.factor_model().covariance())?;
    let factors = match scenario {
        Scenario::Unconditional => FactorDraw::Gaussian { chol },
        Scenario::Fixed(s) => FactorDraw::Fixed(s.clone()),
        Scenario::Truncated(bounds) => {
            let rate = pilot_acceptance(&chol, bounds, cfg.seed);
            if rate < MIN_ACCEPTANCE_RATE {
                return Err(Error::InfeasibleScenario {
                    rate,
                    min: MIN_ACCEPTANCE_RATE,
                });
            }
            FactorDraw::Truncated {
                chol,
                bounds: bounds.clone(),
            }
        }
    };
    let lattice = ExposureLattice::build(p, DEFAULT_LOSS_GRID)?;
    let classes = RiskClasses::build(p)?;
    let sim = Simulator {
        lattice: &lattice,
        classes: &classes,
        factors,
        k,
        cfg: *cfg,
    };

    let n = cfg.n_sims;
    let blocks: Vec<(u64, u64)> = (0..n.div_ceil(BLOCK_PATHS))
        .map(|b| (b, BLOCK_PATHS.min(n - b * BLOCK_PATHS)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.n_workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let hist = pool.install(|| {
        blocks
            .par_iter()
            .map(|&(b, paths)| sim.run_block(b, paths))
            .reduce(
                || Histogram::new(lattice.total_units() + 1, cfg.antithetic),
                Histogram::merge,
            )
    });

    let nf = n as f64;
    let pairs = nf / 2.0;
    let mut levels = Vec::new();
    let mut probs = Vec::new();
    let mut stderr = Vec::new();
    for (i, &count) in hist.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let prob = count as f64 / nf;
        let se = if cfg.antithetic {
            let second_moment = hist.quarter_squares[i] as f64 / (4.0 * pairs);
            ((second_moment - prob * prob).max(0.0) / pairs).sqrt()
        } else {
            (prob * (1.0 - prob) / nf).sqrt()
        };
        levels.push(lattice.level(i));
        probs.push(prob);
        stderr.push(se);
    }
    LossDistribution::new(levels, probs, DistributionSource::MonteCarlo, Some(stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::distributions::binomial_pmf_vector;
    use crate::model::{FactorModel, Obligor};
    use crate::pd::ttc_to_pit;

    fn cfg(n: u64, seed: u64, workers: usize) -> McConfig {
        McConfig {
            n_sims: n,
            seed,
            antithetic: false,
            n_workers: workers,
        }
    }

    #[test]
    fn fixed_scenario_matches_binomial_within_three_stderr() {
        let p = Portfolio::homogeneous(100, 0.03, 0.5).unwrap();
        let s = Scenario::fixed(vec![-2.33]).unwrap();
        let d = mc_loss_distribution(&p, &s, &cfg(400_000, 5, 4)).unwrap();
        let exact = binomial_pmf_vector(100, ttc_to_pit(0.03, 0.5, -2.33).unwrap()).unwrap();
        let se = d.mc_stderr().unwrap();
        let mut beyond = 0;
        for ((level, prob), se) in d.iter().zip(se) {
            let idx = (level * 100.0).round() as usize;
            if (prob - exact[idx]).abs() > 3.0 * se.max(1.0 / 400_000.0) {
                beyond += 1;
            }
        }
        // a handful of 3-sigma excursions are expected over ~40 levels
        assert!(beyond <= 2, "{beyond} levels beyond 3 stderr");
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let p = Portfolio::homogeneous(50, 0.02, 0.4).unwrap();
        let a = mc_loss_distribution(&p, &Scenario::Unconditional, &cfg(100_000, 9, 1)).unwrap();
        let b = mc_loss_distribution(&p, &Scenario::Unconditional, &cfg(100_000, 9, 3)).unwrap();
        assert_eq!(a, b);
        let c = mc_loss_distribution(&p, &Scenario::Unconditional, &cfg(100_000, 10, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_box_truncation_matches_unconditional() {
        let p = Portfolio::homogeneous(20, 0.05, 0.5).unwrap();
        let full = Scenario::truncated(vec![(f64::NEG_INFINITY, f64::INFINITY)]).unwrap();
        let a = mc_loss_distribution(&p, &full, &cfg(200_000, 3, 2)).unwrap();
        let b = mc_loss_distribution(&p, &Scenario::Unconditional, &cfg(200_000, 3, 2)).unwrap();
        // every draw is accepted, so the sample paths coincide
        assert_eq!(a.probabilities(), b.probabilities());
    }

    #[test]
    fn truncation_conditions_on_the_box() {
        let p = Portfolio::homogeneous(10, 0.05, 0.5).unwrap();
        let adverse = Scenario::truncated(vec![(f64::NEG_INFINITY, -1.0)]).unwrap();
        let benign = Scenario::truncated(vec![(1.0, f64::INFINITY)]).unwrap();
        let a = mc_loss_distribution(&p, &adverse, &cfg(50_000, 1, 2)).unwrap();
        let b = mc_loss_distribution(&p, &benign, &cfg(50_000, 1, 2)).unwrap();
        let mean = |d: &LossDistribution| d.iter().map(|(l, p)| l * p).sum::<f64>();
        assert!(mean(&a) > 0.1);
        assert!(mean(&b) < 0.02);
    }

    #[test]
    fn infeasible_box_is_refused() {
        let p = Portfolio::homogeneous(10, 0.05, 0.5).unwrap();
        let far = Scenario::truncated(vec![(9.0, f64::INFINITY)]).unwrap();
        match mc_loss_distribution(&p, &far, &cfg(1000, 1, 1)) {
            Err(Error::InfeasibleScenario { rate, .. }) => assert_eq!(rate, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn antithetic_mean_is_unbiased() {
        let p = Portfolio::homogeneous(40, 0.03, 0.5).unwrap();
        let mut c = cfg(200_000, 2, 2);
        c.antithetic = true;
        let d = mc_loss_distribution(&p, &Scenario::Unconditional, &c).unwrap();
        let mean: f64 = d.iter().map(|(l, p)| l * p).sum();
        assert!((mean - 0.03).abs() < 1e-3);
        assert!(d.mc_stderr().unwrap().iter().all(|s| s.is_finite()));
        c.n_sims = 3;
        assert!(mc_loss_distribution(&p, &Scenario::Unconditional, &c).is_err());
    }

    #[test]
    fn correlated_two_factor_model_runs() {
        let fm = FactorModel::new(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let raw = [1.0, 1.0];
        let norm = fm.variance(&raw).sqrt();
        let w: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let p = Portfolio::new(
            (0..10).map(|i| Obligor::new(format!("o{i}"), 0.1, 0.04, 0.5, w.clone())).collect(),
            fm,
        )
        .unwrap();
        let d = mc_loss_distribution(&p, &Scenario::Unconditional, &cfg(100_000, 4, 2)).unwrap();
        let mean: f64 = d.iter().map(|(l, p)| l * p).sum();
        assert!((mean - 0.04).abs() < 2e-3);
    }
}
