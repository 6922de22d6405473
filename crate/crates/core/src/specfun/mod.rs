//! Special functions: Γ, Gauss ₂F₁, ₁F₂, Bessel K and J, and quadrature helpers.

mod bessel;
mod gamma;
mod hyp1f2;
mod hyp2f1;
pub mod quad;

pub use bessel::{bessel_j, bessel_k, bessel_j_zero, lambda_j};
pub use gamma::{gamma, ln_gamma_signed, log_gamma, rgamma, LogProduct};
pub use hyp1f2::{gen_1f2, gen_1f2_with};
pub use hyp2f1::{gauss_2f1, gauss_2f1_with, Hyp2F1};

use crate::error::{domain, Result};

/// Termination controls for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Accuracy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return domain(format!("rel_tol must lie in (0, 1e-3], got {rel_tol}"));
        }
        if max_terms < 100 {
            return domain(format!("max_terms must be at least 100, got {max_terms}"));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for Accuracy {
    fn default() -> Self {
        Self { rel_tol: 1e-16, max_terms: 20_000 }
    }
}
