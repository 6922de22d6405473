//! Closed forms of the ℋ correlation for integer smoothness or odd dimension.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::specfun::{log_gamma, LogProduct};

const INTEGER_TOL: f64 = 1e-12;

fn as_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < INTEGER_TOL).then_some(r as i64)
}

/// Prepared closed form, evaluated at `r = x/a ∈ [0, 1)`.
#[derive(Debug, Clone)]
pub(crate) enum ClosedForm {
    /// d = 1, κ = k: `(1−r)^{μ+2k} Σ_n c_n (1−r)^{2n} r^{k−n}`.
    OneDim { k: usize, exponent: f64, coefs: Vec<f64> },
    /// d odd, κ = 0: `(1−r)^{μ+(d−1)/2} Σ_n c_n (1−r)^n`.
    OddDimKappaZero { exponent: f64, coefs: Vec<f64> },
    /// d odd, κ = k, μ integer: `P(r²) + r^{2k+1} Q(r²)`.
    OddDimPolynomial { k: usize, p: Vec<f64>, q: Vec<f64> },
    /// d = 2, μ = 1, κ = 0.
    Circular,
    /// d = 2, μ = 1, κ = 1/2.
    PlanarHalf,
    /// d = 2, μ = 1, κ = 1.
    PlanarOne,
}

/// Coefficients of a terminating ₂F₁(a, b; c; z) in powers of z.
fn terminating_coefs(a: f64, b: f64, c: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut t = 1.0;
    for n in 0..10_000 {
        let nf = n as f64;
        t *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0));
        if t == 0.0 {
            break;
        }
        out.push(t);
    }
    out
}

fn horner(coefs: &[f64], z: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

fn ln_factorial(n: usize) -> f64 {
    log_gamma(n as f64 + 1.0).unwrap_or(0.0)
}

impl ClosedForm {
    pub(crate) fn prepare(kappa: f64, mu: f64, d: usize) -> Option<Self> {
        if !(mu >= 1.0) || !(kappa > -0.5) || !mu.is_finite() {
            return None;
        }
        let k = as_integer(kappa).filter(|&k| k >= 0);
        let odd = d % 2 == 1;
        if d == 1 {
            if let Some(k) = k {
                return Some(Self::one_dim(k as usize, mu));
            }
        }
        if odd && k == Some(0) {
            return Some(Self::odd_dim_kappa_zero(mu, d));
        }
        if odd {
            if let (Some(k), Some(m)) = (k, as_integer(mu)) {
                return Self::odd_dim_polynomial(k as usize, m as f64, d);
            }
        }
        if d == 2 && as_integer(mu) == Some(1) {
            if as_integer(kappa) == Some(0) {
                return Some(Self::Circular);
            }
            if (kappa - 0.5).abs() < INTEGER_TOL {
                return Some(Self::PlanarHalf);
            }
            if as_integer(kappa) == Some(1) {
                return Some(Self::PlanarOne);
            }
        }
        None
    }

    fn one_dim(k: usize, mu: f64) -> Self {
        let kf = k as f64;
        let ln_lead = 0.5 * PI.ln() + log_gamma(mu / 2.0 + 2.0 * kf + 1.0).unwrap() - log_gamma(kf + 0.5).unwrap();
        let coefs = (0..=k)
            .map(|n| {
                let nf = n as f64;
                let ln = ln_lead + ln_factorial(n + k)
                    - nf * 4f64.ln()
                    - ln_factorial(n)
                    - log_gamma(nf + mu / 2.0 + kf + 1.0).unwrap()
                    - ln_factorial(k - n);
                ln.exp()
            })
            .collect();
        Self::OneDim { k, exponent: mu + 2.0 * kf, coefs }
    }

    fn odd_dim_kappa_zero(mu: f64, d: usize) -> Self {
        let h = (d - 1) / 2;
        let hf = h as f64;
        let df = d as f64;
        let ln_c = (mu + hf) * 2f64.ln() + log_gamma((mu + 1.0) / 2.0).unwrap() + log_gamma((mu + df + 1.0) / 2.0).unwrap()
            - 0.5 * PI.ln();
        let mut coefs = Vec::with_capacity(h + 1);
        // ((1−d)/2)_n ((d+1)/2)_n / (2^n n!) as a running product
        let mut poch = LogProduct::ONE;
        for n in 0..=h {
            let nf = n as f64;
            if n > 0 {
                let f = ((1.0 - df) / 2.0 + nf - 1.0) * ((df + 1.0) / 2.0 + nf - 1.0) / (2.0 * nf);
                poch = LogProduct { ln_abs: poch.ln_abs + f.abs().ln(), sign: poch.sign * f.signum() };
            }
            let ln = ln_c + poch.ln_abs - log_gamma(nf + hf + mu + 1.0).unwrap();
            coefs.push(poch.sign * ln.exp());
        }
        Self::OddDimKappaZero { exponent: mu + hf, coefs }
    }

    fn odd_dim_polynomial(k: usize, mu: f64, d: usize) -> Option<Self> {
        let kf = k as f64;
        let df = d as f64;
        let p = terminating_coefs(0.5 - kf - mu / 2.0, (1.0 - mu - df) / 2.0 - 2.0 * kf, 0.5 - kf);
        let cb = LogProduct::ONE
            .mul_gamma(kf + (mu + 1.0) / 2.0)
            .ok()?
            .mul_gamma(2.0 * kf + (mu + df + 1.0) / 2.0)
            .ok()?
            .mul_gamma(-kf - 0.5)
            .ok()?
            .div_gamma(kf + 0.5)
            .div_gamma(mu / 2.0)
            .div_gamma((mu + df) / 2.0 + kf)
            .value();
        let q = terminating_coefs(1.0 - (mu + df) / 2.0 - kf, 1.0 - mu / 2.0, kf + 1.5).into_iter().map(|c| c * cb).collect();
        Some(Self::OddDimPolynomial { k, p, q })
    }

    /// Value at `r ∈ [0, 1)`.
    pub(crate) fn eval(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        let s = 1.0 - r;
        match self {
            Self::OneDim { k, exponent, coefs } => {
                let mut sum = 0.0;
                for (n, &c) in coefs.iter().enumerate() {
                    sum += c * s.powi(2 * n as i32) * r.powi((*k - n) as i32);
                }
                s.powf(*exponent) * sum
            }
            Self::OddDimKappaZero { exponent, coefs } => s.powf(*exponent) * horner(coefs, s),
            Self::OddDimPolynomial { k, p, q } => {
                let z = r * r;
                horner(p, z) + r.powi(2 * *k as i32 + 1) * horner(q, z)
            }
            Self::Circular => {
                let sw = (s * (1.0 + r)).sqrt();
                FRAC_2_PI * (sw.asin() - r * sw)
            }
            Self::PlanarHalf => {
                let w = s * (1.0 + r);
                let sw = w.sqrt();
                let r2 = r * r;
                // artanh(√w) = ln((1+√w)/r) since 1 − w = r²
                let atanh = ((1.0 + sw) / r).ln();
                (1.0 + r2 / 2.0) * sw - r2 * (2.0 - r2 / 2.0) * atanh
            }
            Self::PlanarOne => {
                let w = s * (1.0 + r);
                let sw = w.sqrt();
                let r2 = r * r;
                2.0 / (3.0 * PI) * (r * sw * (15.0 - 4.0 * w * (3.0 - r2)) + 3.0 * (6.0 * w - 5.0) * sw.asin())
            }
        }
    }
}

/// Closed-form ℋ(κ, μ, a) in dimension `d` at distance `x`, or `None` when no closed
/// form covers the parameters.
///
/// Covered: d = 1 with integer κ ≥ 0; odd d with κ = 0; odd d with integer κ and
/// integer μ; d = 2, μ = 1 with κ ∈ {0, 1/2, 1}. In every case μ ≥ 1.
pub fn closed_form_h(kappa: f64, mu: f64, a: f64, d: usize, x: f64) -> Option<f64> {
    if !(a > 0.0) || !(x >= 0.0) || d == 0 {
        return None;
    }
    let form = ClosedForm::prepare(kappa, mu, d)?;
    Some(if x >= a { 0.0 } else { form.eval(x / a) })
}
