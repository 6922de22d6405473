//! Beta-type scale-mixture representation of GH kernels over ℋ(κ, 1, b).

use super::closed::ClosedForm;
use super::{EvalPath, Kernel, KernelSpec};
use crate::error::{domain, Error, Result};
use crate::specfun::quad::{integrate, QuadTol};
use crate::specfun::LogProduct;

/// Right-hand side of the scale mixture
///
/// `C ∫₀¹∫₀¹ u^{δ−(d+1)/2} (1−u)^{(μ−3)/2} v^{δ−1/2+κ} (1−v)^{(μ−d−3)/2−κ+l} ℋ_{κ,1,a√(uv),d}(x) du dv`
///
/// evaluated by nested adaptive quadrature, for `δ = (d+1)/2 + κ`, `μ > 1`,
/// `l ≥ 0` and `μ + 2l > 1 + d + 2κ`. It reproduces GH(δ, δ+μ/2, δ+μ/2+l, a)(x).
pub fn gh_scale_mixture(kappa: f64, mu: f64, l: f64, a: f64, d: usize, x: f64, tol: f64) -> Result<f64> {
    let df = d as f64;
    if !(kappa > -0.5) || !(mu > 1.0) || !(l >= 0.0) || !(mu + 2.0 * l > 1.0 + df + 2.0 * kappa) || !(a > 0.0) {
        return domain(format!(
            "scale mixture needs kappa > -1/2, mu > 1, l >= 0, mu + 2l > 1 + d + 2 kappa (got {kappa}, {mu}, {l})"
        ));
    }
    if !(x >= 0.0) {
        return domain("distance must be non-negative");
    }
    if x >= a {
        return Ok(0.0);
    }
    let delta = (df + 1.0) / 2.0 + kappa;
    let c = LogProduct::ONE
        .mul_gamma(delta + (mu - df) / 2.0)?
        .mul_gamma(delta + (mu - df) / 2.0 + l)?
        .div_gamma(delta + (1.0 - df) / 2.0)
        .div_gamma(delta + 0.5 + kappa)
        .div_gamma((mu - 1.0) / 2.0)
        .div_gamma((mu - 1.0 - df) / 2.0 - kappa + l)
        .value();
    let eu = delta - (df + 1.0) / 2.0;
    let eu1 = (mu - 3.0) / 2.0;
    let ev = delta - 0.5 + kappa;
    let ev1 = (mu - df - 3.0) / 2.0 - kappa + l;

    // ℋ_{κ,1,b,d}(x) depends on x/b only; compile once at unit support
    let unit = KernelSpec::h(kappa, 1.0, 1.0, d)?;
    let inner_kernel = match ClosedForm::prepare(kappa, 1.0, d) {
        Some(_) => Kernel::new(&unit, EvalPath::Auto)?,
        None => Kernel::new(&unit, EvalPath::General)?,
    };
    let rho = x / a;
    let h_at = |b_over_a: f64| -> f64 {
        if b_over_a <= rho {
            0.0
        } else {
            inner_kernel.eval(rho / b_over_a).unwrap_or(f64::NAN)
        }
    };
    let tol_q = QuadTol { abs: tol * 1e-3, rel: 1e-9, max_panels: 2000 };
    let mut failure: Option<Error> = None;
    let outer = integrate(
        |v| {
            if v <= 0.0 || v >= 1.0 {
                return 0.0;
            }
            // ℋ vanishes unless a√(uv) > x, i.e. u > ρ²/v
            let u_lo = (rho * rho / v).min(1.0);
            if u_lo >= 1.0 {
                return 0.0;
            }
            let inner = integrate(
                |u| {
                    if u <= 0.0 || u >= 1.0 {
                        return 0.0;
                    }
                    u.powf(eu) * (1.0 - u).powf(eu1) * h_at((u * v).sqrt())
                },
                u_lo,
                1.0,
                &[],
                tol_q,
            );
            match inner {
                Ok(q) => v.powf(ev) * (1.0 - v).powf(ev1) * q.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        rho * rho,
        1.0,
        &[],
        tol_q,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(c * outer?.value)
}
