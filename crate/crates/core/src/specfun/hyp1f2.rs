//! Generalized hypergeometric ₁F₂(a; b₁, b₂; x).

use super::Accuracy;
use crate::error::{domain, Error, Result};

/// Largest tolerated ratio of the peak term to `max(|sum|, 1)`.
///
/// Beyond this the alternating series has lost more than about eight digits.
const CANCELLATION_LIMIT: f64 = 1e8;

/// ₁F₂(a; b₁, b₂; x) at the default accuracy.
pub fn gen_1f2(a: f64, b1: f64, b2: f64, x: f64) -> Result<f64> {
    gen_1f2_with(a, b1, b2, x, Accuracy::default())
}

/// ₁F₂(a; b₁, b₂; x) by compensated series summation.
///
/// Returns an accuracy error when cancellation among the terms exceeds
/// [`CANCELLATION_LIMIT`]; large negative arguments should go through a quadrature
/// of the underlying integral instead.
pub fn gen_1f2_with(a: f64, b1: f64, b2: f64, x: f64, acc: Accuracy) -> Result<f64> {
    for b in [b1, b2] {
        if b <= 0.0 && b == b.round() {
            return domain(format!("1F2 undefined for lower parameter {b}"));
        }
    }
    if !(a.is_finite() && b1.is_finite() && b2.is_finite() && x.is_finite()) {
        return domain("1F2 arguments must be finite");
    }
    let min_n = [a, b1, b2].iter().map(|&p| if p < 0.0 { (-p).ceil() as usize + 1 } else { 0 }).max().unwrap_or(0);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    let mut peak = 1.0f64;
    for n in 0..acc.max_terms {
        let nf = n as f64;
        let ratio = (a + nf) / ((b1 + nf) * (b2 + nf) * (nf + 1.0)) * x;
        term *= ratio;
        if term == 0.0 {
            return finish(sum + comp, peak, a, b1, b2, x);
        }
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        peak = peak.max(term.abs());
        if !peak.is_finite() {
            break;
        }
        if n >= min_n && ratio.abs() < 0.5 && term.abs() <= acc.rel_tol * (sum + comp).abs().max(f64::MIN_POSITIVE) {
            return finish(sum + comp, peak, a, b1, b2, x);
        }
    }
    Err(Error::Accuracy(format!(
        "1F2({a}; {b1}, {b2}; {x}) series did not converge within {} terms",
        acc.max_terms
    )))
}

fn finish(total: f64, peak: f64, a: f64, b1: f64, b2: f64, x: f64) -> Result<f64> {
    if peak > CANCELLATION_LIMIT * total.abs().max(1.0) {
        return Err(Error::Accuracy(format!(
            "1F2({a}; {b1}, {b2}; {x}) cancels catastrophically (peak term {peak:.3e}); \
             argument is in the asymptotic regime, use the quadrature path"
        )));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_argument() {
        assert_eq!(gen_1f2(0.7, 1.3, 2.9, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn reduces_to_sinc() {
        // ₁F₂(a; a, 3/2; −z²/4) = sin z / z
        let v = gen_1f2(1.5, 1.5, 1.5, -PI * PI / 4.0).unwrap();
        assert!(v.abs() <= 1e-10, "{v}");
        let z = PI / 2.0;
        let v = gen_1f2(1.5, 1.5, 1.5, -z * z / 4.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-14, "{v}");
        for &z in &[0.3f64, 2.0, 7.5, 15.0] {
            let v = gen_1f2(2.25, 2.25, 1.5, -z * z / 4.0).unwrap();
            assert!((v - z.sin() / z).abs() < 1e-10, "z={z}: {v}");
        }
    }

    #[test]
    fn bessel_identity() {
        // ₁F₂(a; a, 1; −z²/4) = J₀(z)
        let v = gen_1f2(0.8, 0.8, 1.0, -1.0).unwrap();
        assert!((v - 0.223_890_779_141_235_67).abs() < 1e-14, "{v}");
    }

    #[test]
    fn flags_cancellation() {
        assert!(matches!(gen_1f2(1.5, 1.5, 1.5, -1e6), Err(Error::Accuracy(_))));
    }

    #[test]
    fn rejects_pole() {
        assert!(gen_1f2(1.0, -3.0, 2.0, -1.0).is_err());
    }
}
