//! Gauss-Hermite quadrature against the standard normal density.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub const MIN_NODES: usize = 2;
pub const MAX_NODES: usize = 256;

/// Nodes and weights such that `Σ wᵢ f(xᵢ) ≈ ∫ f(x) φ(x) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds a rule from raw pairs; weights are normalized to sum to one.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(domain("quadrature nodes and weights differ in length"));
        }
        if nodes.len() < MIN_NODES {
            return Err(domain("quadrature rule needs at least two nodes"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(domain("quadrature weights must be positive and nodes finite"));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `∫ f(x) φ(x) dx` under the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Orthonormal Hermite polynomial `h_n(z)` (weight `e^{-z²}`) and `h_{n-1}(z)`.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

/// Gauss-Hermite rule with `n_nodes` points, rescaled to the standard normal
/// weight (nodes `√2·xᵢ`, weights `wᵢ/√π`).
///
/// Positive roots of the orthonormal Hermite polynomial are bracketed by a sign
/// scan over `(0, √(2n+1)]` and then polished with safeguarded Newton steps.
pub fn gauss_hermite_rule(n_nodes: usize) -> Result<QuadratureRule> {
    if !(MIN_NODES..=MAX_NODES).contains(&n_nodes) {
        return Err(domain(format!(
            "Gauss-Hermite node count must lie in [{MIN_NODES}, {MAX_NODES}], got {n_nodes}"
        )));
    }
    let n = n_nodes;
    let nf = n as f64;
    let derivative = |z: f64| {
        let (_, prev) = hermite_pair(n, z);
        (2.0 * nf).sqrt() * prev
    };

    // Roots are at least ~π/√(2n+1) apart, so this step cannot skip a pair.
    let upper = (2.0 * nf + 1.0).sqrt();
    let steps = 40 * n;
    let h = upper / steps as f64;
    let mut brackets = Vec::with_capacity(n / 2);
    let mut a = if n % 2 == 1 { 0.5 * h } else { 0.0 };
    let mut fa = hermite_pair(n, a).0;
    while a < upper {
        let b = (a + h).min(upper);
        let fb = hermite_pair(n, b).0;
        if fa == 0.0 || fa.signum() != fb.signum() {
            brackets.push((a, b));
        }
        a = b;
        fa = fb;
    }
    if brackets.len() != n / 2 {
        return Err(domain(format!(
            "Gauss-Hermite root scan found {} of {} positive roots",
            brackets.len(),
            n / 2
        )));
    }

    let mut positive: Vec<(f64, f64)> = Vec::with_capacity(n / 2);
    for (mut lo, mut hi) in brackets {
        let f_lo = hermite_pair(n, lo).0;
        let mut z = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (f, prev) = hermite_pair(n, z);
            if f == 0.0 {
                break;
            }
            if f.signum() == f_lo.signum() {
                lo = z;
            } else {
                hi = z;
            }
            let newton = z - f / ((2.0 * nf).sqrt() * prev);
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            let done = (next - z).abs() <= 1e-15 * z.abs().max(1.0);
            z = next;
            if done {
                break;
            }
        }
        let d = derivative(z);
        positive.push((z, 2.0 / (d * d)));
    }

    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for &(z, wt) in positive.iter().rev() {
        x.push(-z);
        w.push(wt);
    }
    if n % 2 == 1 {
        let d = derivative(0.0);
        x.push(0.0);
        w.push(2.0 / (d * d));
    }
    for &(z, wt) in &positive {
        x.push(z);
        w.push(wt);
    }
    let scale = std::f64::consts::SQRT_2;
    let nodes: Vec<f64> = x.iter().map(|v| v * scale).collect();
    QuadratureRule::new(nodes, w)
}
