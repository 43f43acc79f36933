//! Deterministic numerical primitives.

pub mod distributions;
pub mod normal;
pub mod quadrature;
pub mod sampling;

pub use distributions::{binomial_pmf_vector, poisson_binomial_pmf, POISSON_BINOMIAL_LIMIT};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use quadrature::{gauss_hermite_rule, QuadratureRule};
pub use sampling::{cholesky_psd, UniformStream};
