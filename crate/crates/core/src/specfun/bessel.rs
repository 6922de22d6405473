//! Bessel functions K_ν (modified, second kind) and J_ν (first kind) for real order.

use std::f64::consts::PI;

use super::gamma::{rgamma, RGAMMA1P};
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Switch from the power series to the Hankel expansion for J_ν.
const J_ASYMPTOTIC_FROM: f64 = 12.0;

/// Temme's Γ auxiliaries for |μ| ≤ 1/2: (γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ)).
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut odd = 0.0;
    let mut even = 0.0;
    let mut p = 1.0;
    for (k, &c) in RGAMMA1P.iter().enumerate() {
        if k % 2 == 0 {
            even += c * p;
        } else {
            // contributes c μ^{k-1}
            odd += c * p;
        }
        if k % 2 == 1 {
            p *= mu * mu;
        }
    }
    // even = Σ c_{2j} μ^{2j}, odd = Σ c_{2j+1} μ^{2j}
    let gam1 = -odd;
    let gam2 = even;
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    (gam1, gam2, gampl, gammi)
}

/// K_ν(x) for real ν and x > 0.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return domain(format!("bessel_k needs x > 0, got {x}"));
    }
    if !nu.is_finite() {
        return domain("bessel_k order must be finite");
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let xmu = nu - nl;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut rkmu, mut rk1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..=MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Accuracy(format!("K_{nu}({x}) series did not converge")));
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..=MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Accuracy(format!("K_{nu}({x}) continued fraction did not converge")));
        }
        h *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
    }
    for i in 1..=(nl as usize) {
        let next = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = next;
    }
    Ok(rkmu)
}

/// Hankel asymptotic pieces `(P, Q)` with J_ν(t) = √(2/(πt))(P cos χ − Q sin χ).
fn hankel_pq(nu: f64, t: f64) -> (f64, f64) {
    let m = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (m - odd * odd) / (kf * 8.0 * t);
        if term == 0.0 {
            break;
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // a_k / t^k enters P (even k) or Q (odd k) with sign (−1)^{⌊k/2⌋}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn check_order(nu: f64, t: f64) -> Result<()> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return domain(format!("Bessel J order must be ≥ −1/2, got {nu}"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("Bessel J argument must be finite and ≥ 0, got {t}"));
    }
    Ok(())
}

/// Λ_ν(t) = t^{−ν} J_ν(t), finite at t = 0 with value 1/(2^ν Γ(ν+1)).
pub fn lambda_j(nu: f64, t: f64) -> Result<f64> {
    check_order(nu, t)?;
    if t <= J_ASYMPTOTIC_FROM {
        let z = -0.25 * t * t;
        let mut term = rgamma(nu + 1.0);
        let mut sum = term;
        for k in 1..200 {
            let kf = k as f64;
            term *= z / (kf * (nu + kf));
            sum += term;
            if term.abs() < EPS * sum.abs().max(1e-300) && kf > 0.5 * t {
                break;
            }
        }
        Ok(sum * 2f64.powf(-nu))
    } else {
        let (p, q) = hankel_pq(nu, t);
        let chi = t - (0.5 * nu + 0.25) * PI;
        let j = (2.0 / (PI * t)).sqrt() * (p * chi.cos() - q * chi.sin());
        Ok(j * t.powf(-nu))
    }
}

/// J_ν(t) for ν ≥ −1/2 and t ≥ 0.
pub fn bessel_j(nu: f64, t: f64) -> Result<f64> {
    check_order(nu, t)?;
    if t == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(lambda_j(nu, t)? * t.powf(nu))
}

/// McMahon approximation to the m-th positive zero of J_ν (m ≥ 1).
pub fn bessel_j_zero(nu: f64, m: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let beta = (m as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * beta;
    beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e)
}
