//! Isotropic spectral densities and a Hankel-transform quadrature oracle.
//!
//! Convention: φ̂(z) = (2π)^{−d} ∫ φ(‖x‖) e^{−i z·x} dx, so φ̂(0) is the integral
//! range divided by (2π)^d.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{Family, Kernel, KernelSpec};
use crate::specfun::quad::{integrate, QuadTol};
use crate::specfun::{bessel_j_zero, gen_1f2, lambda_j, log_gamma, LogProduct};

/// A frequency at which to evaluate the spectral density of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralQuery {
    pub spec: KernelSpec,
    pub z: f64,
}

impl SpectralQuery {
    pub fn new(spec: KernelSpec, z: f64) -> Result<Self> {
        check_z(z)?;
        Ok(Self { spec, z })
    }

    /// Closed-form density of the query's kernel.
    pub fn density(&self) -> Result<f64> {
        spectral_density(&self.spec, self.z)
    }
}

fn check_z(z: f64) -> Result<()> {
    if z >= 0.0 && z.is_finite() {
        Ok(())
    } else {
        domain(format!("frequency must be finite and non-negative, got {z}"))
    }
}

/// Matérn spectral density Γ(ν+d/2)/(π^{d/2}Γ(ν)) · α^d/(1+α²z²)^{ν+d/2}.
pub fn matern_spectral(nu: f64, alpha: f64, d: usize, z: f64) -> Result<f64> {
    if !(nu > 0.0 && alpha > 0.0 && nu.is_finite() && alpha.is_finite()) || d == 0 {
        return domain(format!("Matérn spectral density needs nu, alpha > 0 and d ≥ 1 (got {nu}, {alpha}, {d})"));
    }
    check_z(z)?;
    let h = d as f64 / 2.0;
    let az = alpha * z;
    let ln = log_gamma(nu + h)? - h * PI.ln() - log_gamma(nu)? + d as f64 * alpha.ln() - (nu + h) * az.mul_add(az, 1.0).ln();
    Ok(ln.exp())
}

/// Whether (δ, β, γ) satisfy the three sufficient conditions for a positive GH
/// spectral density: δ > d/2, 2(β−δ)(γ−δ) ≥ δ, β+γ ≥ 3δ+1/2.
pub fn gh_sufficient_conditions(delta: f64, beta: f64, gamma: f64, d: usize) -> bool {
    delta > d as f64 / 2.0 && 2.0 * (beta - delta) * (gamma - delta) >= delta && beta + gamma >= 3.0 * delta + 0.5
}

/// GH spectral density via its Γ-ratio prefactor and ₁F₂(δ; β, γ; −(za)²/4).
///
/// Accepts parameters that satisfy either the sufficient conditions or the
/// necessary and sufficient validity bound.
pub fn gh_spectral(delta: f64, beta: f64, gamma: f64, a: f64, d: usize, z: f64) -> Result<f64> {
    check_z(z)?;
    let spec = KernelSpec::gh(delta, beta, gamma, a, d)?;
    if !gh_sufficient_conditions(delta, beta, gamma, d) && !spec.validate().valid {
        return Err(Error::Precondition(format!(
            "GH({delta}, {beta}, {gamma}) in d = {d} has no guaranteed positive spectral density"
        )));
    }
    let h = d as f64 / 2.0;
    let pre = LogProduct::ONE
        .mul_gamma(delta)?
        .mul_gamma(beta - h)?
        .mul_gamma(gamma - h)?
        .div_gamma(delta - h)
        .div_gamma(beta)
        .div_gamma(gamma)
        .mul_ln(d as f64 * (a / 2.0).ln() - h * PI.ln());
    let za = z * a;
    Ok(pre.value() * gen_1f2(delta, beta, gamma, -0.25 * za * za)?)
}

/// Closed-form spectral density of any family (compact families through their
/// GH parameters).
pub fn spectral_density(spec: &KernelSpec, z: f64) -> Result<f64> {
    let r = spec.resolve()?;
    if let Family::Matern { nu, alpha } = r.family {
        return matern_spectral(nu, alpha, r.d, z);
    }
    let (delta, beta, gamma, a) = r.gh_params()?.expect("compact family");
    gh_spectral(delta, beta, gamma, a, r.d, z)
}

const QUAD_TARGET: f64 = 1e-12;
const QUAD_FAIL: f64 = 1e-7;

/// Spectral density by direct quadrature of the Hankel transform
/// z^{1−d/2}/(2π)^{d/2} ∫ u^{d/2} J_{d/2−1}(uz) φ(u) du.
///
/// The validity gate is skipped so that invalid parameters can be probed.
pub fn hankel_spectral_quadrature(spec: &KernelSpec, z: f64) -> Result<f64> {
    check_z(z)?;
    let kernel = Kernel::unchecked(spec, Default::default())?;
    hankel_quadrature(&kernel, spec.d, z)
}

/// [`hankel_spectral_quadrature`] for an already compiled kernel.
pub fn hankel_quadrature(kernel: &Kernel, d: usize, z: f64) -> Result<f64> {
    check_z(z)?;
    let nu = d as f64 / 2.0 - 1.0;
    let df = d as f64;
    // u^{d/2} J_ν(uz) z^{−ν} = u^{d−1} Λ_ν(uz)
    let mut failure = None;
    let mut integrand = |u: f64| -> f64 {
        let v = kernel.eval(u).and_then(|phi| Ok(phi * u.powf(df - 1.0) * lambda_j(nu, u * z)?));
        v.unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        })
    };
    let norm = (2.0 * PI).powf(-df / 2.0);
    let support = kernel.support();
    let tol = QuadTol { abs: QUAD_TARGET / norm, rel: 1e-12, max_panels: 20_000 };
    let value = if support.is_finite() {
        let breaks = bessel_breaks(nu, z, support);
        let q = integrate(&mut integrand, 0.0, support, &breaks, tol)?;
        check_error(q.error * norm)?;
        q.value
    } else {
        oscillatory_tail(&mut integrand, kernel, nu, z, tol)?
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(norm * value)
}

fn check_error(err: f64) -> Result<()> {
    if err > QUAD_FAIL {
        return Err(Error::Accuracy(format!("Hankel quadrature error estimate {err:e} exceeds {QUAD_FAIL:e}")));
    }
    Ok(())
}

/// Zeros of u ↦ J_ν(uz) inside (0, support); for ν = −1/2 the zeros of cos.
fn bessel_breaks(nu: f64, z: f64, support: f64) -> Vec<f64> {
    if z == 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for m in 1.. {
        let u = bessel_j_zero(nu, m) / z;
        if u >= support {
            break;
        }
        out.push(u);
    }
    out
}

/// Infinite-support case: integrate between consecutive Bessel zeros and
/// accelerate the alternating partial sums by repeated averaging (Euler).
fn oscillatory_tail<F: FnMut(f64) -> f64>(f: &mut F, kernel: &Kernel, nu: f64, z: f64, tol: QuadTol) -> Result<f64> {
    // beyond this point φ has decayed below 1e-20 of its peak
    let alpha = match kernel.spec().family {
        Family::Matern { nu: smooth, alpha } => alpha * (50.0 + 2.0 * (smooth + kernel.spec().d as f64)),
        _ => unreachable!("only Matérn has infinite support"),
    };
    if z == 0.0 || bessel_j_zero(nu, 1) / z >= alpha {
        let breaks: Vec<f64> = (1..50).map(|k| alpha * k as f64 / 50.0).collect();
        let q = integrate(f, 0.0, alpha, &breaks, tol)?;
        check_error(q.error * (2.0 * PI).powf(-(nu + 1.0)))?;
        return Ok(q.value);
    }
    let mut partial = Vec::new();
    let mut lo = 0.0;
    let mut total = 0.0;
    let mut err = 0.0;
    for m in 1..=4000 {
        let hi = bessel_j_zero(nu, m) / z;
        let q = integrate(&mut *f, lo, hi, &[], tol)?;
        total += q.value;
        err += q.error;
        partial.push(total);
        lo = hi;
        if hi >= alpha {
            break;
        }
    }
    let k = partial.len().min(12);
    let mut tail: Vec<f64> = partial[partial.len() - k..].to_vec();
    while tail.len() > 1 {
        tail = tail.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    check_error(err * (2.0 * PI).powf(-(nu + 1.0)))?;
    Ok(tail[0])
}
