//! Integral range and the B(κ, μ, d) support constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Family, GhShape, KernelSpec};
use crate::error::{domain, Result};
use crate::specfun::log_gamma;
use crate::specfun::quad::{integrate, QuadTol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMethod {
    ClosedForm,
    Quadrature,
}

/// Integral range `A` (units length^d) and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralRange {
    pub value: f64,
    pub method: RangeMethod,
}

/// B(κ, μ, d) = 2^{2κ+1} Γ((μ+1)/2+κ) Γ((μ+d+1)/2+2κ) / (Γ(μ/2) Γ((μ+d)/2+κ)).
pub fn b_constant(kappa: f64, mu: f64, d: usize) -> Result<f64> {
    if !(mu >= 1.0) || !(kappa > -0.5) || d == 0 || !mu.is_finite() || !kappa.is_finite() {
        return domain(format!("B(kappa, mu, d) needs mu >= 1, kappa > -1/2, d >= 1 (got {kappa}, {mu}, {d})"));
    }
    let df = d as f64;
    let ln = (2.0 * kappa + 1.0) * 2f64.ln() + log_gamma((mu + 1.0) / 2.0 + kappa)?
        + log_gamma((mu + df + 1.0) / 2.0 + 2.0 * kappa)?
        - log_gamma(mu / 2.0)?
        - log_gamma((mu + df) / 2.0 + kappa)?;
    Ok(ln.exp())
}

/// Closed-form integral range of GH(δ, δ+μ/2, δ+μ/2+l, a) with δ = (d+1)/2+κ.
pub fn integral_range_klm(kappa: f64, mu: f64, l: f64, a: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    if !(kappa > -0.5) || !(a > 0.0) || d == 0 || !((mu + 1.0) / 2.0 + kappa > 0.0) || !((mu + 1.0) / 2.0 + kappa + l > 0.0)
    {
        return domain(format!("integral range undefined for kappa = {kappa}, mu = {mu}, l = {l}, a = {a}"));
    }
    let ln = df * a.ln() + 0.5 * df * PI.ln() + log_gamma((df + 1.0) / 2.0 + kappa)?
        + log_gamma((mu + 1.0) / 2.0 + kappa)?
        + log_gamma((mu + 1.0) / 2.0 + kappa + l)?
        - df * 2f64.ln()
        - log_gamma(kappa + 0.5)?
        - log_gamma((mu + 1.0 + df) / 2.0 + kappa)?
        - log_gamma((mu + 1.0 + df) / 2.0 + kappa + l)?;
    Ok(ln.exp())
}

/// Integral range, in closed form where one is known (Matérn, GH, ℋ) and by
/// quadrature of the radial integral otherwise.
pub fn integral_range(spec: &KernelSpec) -> Result<IntegralRange> {
    spec.require_valid()?;
    let r = spec.resolve()?;
    let d = r.d;
    let df = d as f64;
    let closed = |value| Ok(IntegralRange { value, method: RangeMethod::ClosedForm });
    match r.family {
        Family::Matern { nu, alpha } => {
            let ln = df * alpha.ln() + 0.5 * df * PI.ln() + log_gamma(nu + df / 2.0)? - log_gamma(nu)?;
            closed(ln.exp())
        }
        Family::H { kappa, mu, a } => closed(integral_range_klm(kappa, mu, df / 2.0 + kappa, a, d)?),
        Family::Gh { delta, beta, gamma, a } => {
            let s = GhShape::from_raw(delta, beta, gamma, d);
            closed(integral_range_klm(s.kappa, s.mu, s.l, a, d)?)
        }
        Family::Gw { .. } => integral_range_quadrature(spec),
        Family::HReparamB { .. } | Family::HReparamMu { .. } => unreachable!("resolved above"),
    }
}

/// Integral range by adaptive quadrature of
/// `π^{d/2} / (2^{d−1} Γ(d/2)) ∫₀^∞ x^{d−1} φ(x) dx`.
pub fn integral_range_quadrature(spec: &KernelSpec) -> Result<IntegralRange> {
    let kernel = spec.compile()?;
    let d = spec.d;
    let df = d as f64;
    let (upper, breaks) = match spec.resolve()?.family {
        Family::Matern { nu, alpha } => {
            // x^{d−1+ν−1/2} e^{−x/α} is below 1e-16 of its peak well before this point
            let upper = alpha * (60.0 + 2.0 * (nu + df));
            (upper, vec![alpha, 5.0 * alpha, 20.0 * alpha])
        }
        _ => (kernel.support(), vec![]),
    };
    let constant = (0.5 * df * PI.ln() - (df - 1.0) * 2f64.ln() - log_gamma(df / 2.0)?).exp();
    let mut failure = None;
    let q = integrate(
        |x| match kernel.eval(x) {
            Ok(v) => x.powi(d as i32 - 1) * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        upper,
        &breaks,
        QuadTol { abs: 1e-15 * upper.powi(d as i32), rel: 1e-11, max_panels: 4000 },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(IntegralRange { value: constant * q?.value, method: RangeMethod::Quadrature })
}

/// Maximizer of the integral range over the GH(κ, μ, l) family at a = 1:
/// `(l*, μ*, A_max) = (d/2 + κ, 1, A(κ, 1, d/2+κ, 1, d))`.
pub fn max_integral_range_params(kappa: f64, d: usize) -> Result<(f64, f64, f64)> {
    if !(kappa > -0.5) {
        return domain(format!("kappa must exceed -1/2, got {kappa}"));
    }
    let l = d as f64 / 2.0 + kappa;
    Ok((l, 1.0, integral_range_klm(kappa, 1.0, l, 1.0, d)?))
}
