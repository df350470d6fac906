//! Brute-force reference solvers.
//!
//! Everything here validates the closed-form pipeline from the outside:
//! finite differences for the radial boundary-value problems, a collocation
//! solver for the perturbed-membrane transmission problem, and a deliberately
//! naive power series for the Bessel functions. These solvers share no
//! formulas with the modules they check beyond the differential equations
//! themselves. The test suites and the `selftest` command call them; nothing
//! on the production path does.

pub mod perturbed;
pub mod radial;

use std::fmt;

use num_complex::Complex64;

#[derive(Debug)]
pub enum OracleError {
    /// The assembled linear system could not be solved, or the solution
    /// failed its residual check.
    LinearSolveFailed(String),
    /// Interface system too ill-conditioned to trust.
    IllConditioned { cond: f64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::LinearSolveFailed(what) => write!(f, "linear solve failed: {what}"),
            OracleError::IllConditioned { cond } => {
                write!(f, "interface system condition {cond:.2e} exceeds 1e12")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Discretization sizes for the reference solvers: radial intervals per
/// subdomain and angular sample count.
#[derive(Debug, Clone, Copy)]
pub struct PolarGrid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl PolarGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Self {
        assert!(n_r >= 8, "radial grid too coarse");
        assert!(n_theta >= 8 && n_theta % 2 == 0, "angular count must be even");
        PolarGrid { n_r, n_theta }
    }
}

/// Truncated Taylor sum for `J_m(z)` with explicit term-by-term factorials.
/// Slower and less careful than the production routine on purpose.
pub fn bessel_j_series_oracle(m: u32, z: Complex64, terms: usize) -> Complex64 {
    let half = 0.5 * z;
    let mut term = Complex64::new(1.0, 0.0);
    for i in 1..=m {
        term *= half / (i as f64);
    }
    let neg_q = -half * half;
    let mut sum = term;
    for j in 0..terms {
        term *= neg_q / ((j as f64 + 1.0) * (m as f64 + j as f64 + 1.0));
        sum += term;
    }
    sum
}
