//! Gauss hypergeometric function ₂F₁(a, b; c; w) on `0 ≤ w < 1`.
//!
//! `w ≤ 1/2` uses the Gauss series directly. Above that the linear transformation
//! w → 1−w (A&S 15.3.6) is applied, with both Γ-prefactors kept in log space. When
//! `c−a−b` sits within 1e-6 of an integer the transformation is evaluated at four
//! nearby values of `c` and interpolated back. If the two transformed terms cancel
//! so badly that the result would keep fewer than ~11 digits (large parameters),
//! the Euler integral is integrated instead, which has a positive integrand.

use std::f64::consts::LN_10;

use super::gamma::{ln_gamma_signed, LogProduct};
use super::quad::tanh_sinh;
use super::Accuracy;
use crate::error::{domain, Error, Result};

/// Width of the band around an integer `c−a−b` treated as degenerate.
const DEGENERATE_BAND: f64 = 1e-6;
/// Node spacing for the interpolation across the degenerate point.
const DEGENERATE_STEP: f64 = 3e-4;
/// Largest tolerated ratio between the magnitude of cancelling pieces and the result.
const CANCELLATION_FALLBACK: f64 = 1e3;
const CANCELLATION_LIMIT: f64 = 1e12;

/// Sum of a hypergeometric-type series kept as `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesSum {
    pub ln_abs: f64,
    pub sign: f64,
    /// `ln` of the largest term magnitude, for cancellation diagnostics.
    pub ln_max_term: f64,
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gauss series Σ (a)_n (b)_n / ((c)_n n!) zⁿ with running rescaling and
/// Neumaier-compensated accumulation.
pub(crate) fn gauss_series(a: f64, b: f64, c: f64, z: f64, acc: &Accuracy) -> Result<SeriesSum> {
    const RESCALE: f64 = 1e250;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    let mut max_term = 1.0f64;
    let mut ln_scale = 0.0f64;
    // past every sign change of (a+n), (b+n), (c+n)
    let min_n = [a, b, c].iter().map(|&p| if p < 0.0 { (-p).ceil() as usize + 1 } else { 0 }).max().unwrap_or(0);
    let mut converged = false;
    for n in 0..acc.max_terms {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            converged = true;
            break;
        }
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        max_term = max_term.max(term.abs());
        if max_term > RESCALE {
            term /= RESCALE;
            sum /= RESCALE;
            comp /= RESCALE;
            max_term /= RESCALE;
            ln_scale += 250.0 * LN_10;
        }
        // geometric bound on the tail once the term ratio has settled below 0.9
        if n >= min_n && ratio.abs() < 0.9 && term.abs() <= acc.rel_tol * (1.0 - ratio.abs()) * (sum + comp).abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Accuracy(format!(
            "2F1({a}, {b}; {c}; {z}) series did not converge within {} terms",
            acc.max_terms
        )));
    }
    let total = sum + comp;
    Ok(SeriesSum {
        ln_abs: total.abs().ln() + ln_scale,
        sign: if total == 0.0 { 0.0 } else { total.signum() },
        ln_max_term: max_term.ln() + ln_scale,
    })
}

/// Add two signed log-space values; also returns ln of `|x| + |y|`.
fn log_add(x: LogProduct, y: LogProduct) -> (LogProduct, f64) {
    let m = x.ln_abs.max(y.ln_abs);
    if m == f64::NEG_INFINITY {
        return (LogProduct::ZERO, f64::NEG_INFINITY);
    }
    let vx = x.sign * (x.ln_abs - m).exp();
    let vy = y.sign * (y.ln_abs - m).exp();
    let s = vx + vy;
    let mag = (vx.abs() + vy.abs()).ln() + m;
    (LogProduct::from_value(s).mul_ln(m), mag)
}

#[derive(Debug, Clone)]
enum Route {
    /// a or b is a non-positive integer: terminating series for every w.
    Polynomial,
    /// c−a−b not near an integer.
    Transformed { s: f64, coef1: LogProduct, coef2: LogProduct },
    /// c−a−b within [`DEGENERATE_BAND`] of an integer: cubic interpolation in `c`.
    Degenerate { nodes: Vec<(f64, Hyp2F1)> },
}

/// ₂F₁ with fixed parameters, prepared for repeated evaluation in `w`.
#[derive(Debug, Clone)]
pub struct Hyp2F1 {
    a: f64,
    b: f64,
    c: f64,
    acc: Accuracy,
    route: Route,
}

impl Hyp2F1 {
    pub fn new(a: f64, b: f64, c: f64, acc: Accuracy) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return domain("2F1 parameters must be finite");
        }
        if is_nonpositive_integer(c) {
            return domain(format!("2F1 undefined for c = {c} (non-positive integer)"));
        }
        // symmetric in (a, b); a fixed order makes swapped calls bit-identical
        let (a, b) = if b < a { (b, a) } else { (a, b) };
        let route = if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
            Route::Polynomial
        } else {
            let s = c - a - b;
            let m = s.round();
            if (s - m).abs() < DEGENERATE_BAND {
                let offsets = [-2.0, -1.0, 1.0, 2.0].map(|k| k * DEGENERATE_STEP);
                let target = s - m;
                let mut nodes = Vec::with_capacity(4);
                for (i, &oi) in offsets.iter().enumerate() {
                    // Lagrange weight of node i at the target offset
                    let mut weight = 1.0;
                    for (j, &oj) in offsets.iter().enumerate() {
                        if i != j {
                            weight *= (target - oj) / (oi - oj);
                        }
                    }
                    nodes.push((weight, Hyp2F1::transformed_route(a, b, a + b + m + oi, acc)?));
                }
                Route::Degenerate { nodes }
            } else {
                return Self::transformed_route(a, b, c, acc);
            }
        };
        Ok(Self { a, b, c, acc, route })
    }

    fn transformed_route(a: f64, b: f64, c: f64, acc: Accuracy) -> Result<Self> {
        let s = c - a - b;
        // Γ(c)Γ(s)/(Γ(c−a)Γ(c−b)) and Γ(c)Γ(−s)/(Γ(a)Γ(b))
        let coef1 = LogProduct::ONE.mul_gamma(c)?.mul_gamma(s)?.div_gamma(c - a).div_gamma(c - b);
        let coef2 = LogProduct::ONE.mul_gamma(c)?.mul_gamma(-s)?.div_gamma(a).div_gamma(b);
        Ok(Self { a, b, c, acc, route: Route::Transformed { s, coef1, coef2 } })
    }

    /// Value at `w ∈ [0, 1)`.
    pub fn eval(&self, w: f64) -> Result<f64> {
        let v = self.eval_ln(w, 1.0 - w)?;
        Ok(v.value())
    }

    /// Signed log-space value at `w`, given `omw = 1 − w` computed by the caller
    /// as accurately as it can (e.g. `x²/a²` directly).
    pub(crate) fn eval_ln(&self, w: f64, omw: f64) -> Result<LogProduct> {
        // w may round to 1 while the caller's complement is still positive
        if !((0.0..1.0).contains(&w) || (w == 1.0 && omw > 0.0)) {
            return domain(format!("2F1 argument must lie in [0, 1), got {w}"));
        }
        if w == 0.0 {
            return Ok(LogProduct::ONE);
        }
        if w <= 0.5 || matches!(self.route, Route::Polynomial) {
            let s = gauss_series(self.a, self.b, self.c, w, &self.acc)?;
            return Ok(LogProduct { ln_abs: s.ln_abs, sign: s.sign });
        }
        self.eval_far(w, omw)
    }

    /// Value at `w` through the w → 1−w route regardless of how small `w` is;
    /// meant for cross-checking the two routes where they overlap.
    pub fn eval_transformed(&self, w: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&w) {
            return domain(format!("2F1 argument must lie in [0, 1), got {w}"));
        }
        Ok(self.eval_far(w, 1.0 - w)?.value())
    }

    /// The `w > 1/2` route, usable at any `w` for cross-checks.
    pub(crate) fn eval_far(&self, w: f64, omw: f64) -> Result<LogProduct> {
        match &self.route {
            Route::Polynomial => {
                let s = gauss_series(self.a, self.b, self.c, w, &self.acc)?;
                Ok(LogProduct { ln_abs: s.ln_abs, sign: s.sign })
            }
            Route::Transformed { s, coef1, coef2 } => {
                let (value, loss) = self.transformed(*s, *coef1, *coef2, omw)?;
                self.accept_or_fallback(value, loss, w, omw)
            }
            Route::Degenerate { nodes } => {
                let mut value = LogProduct::ZERO;
                let mut loss = 0.0f64;
                let mut mag = f64::NEG_INFINITY;
                for (weight, node) in nodes {
                    let (v, l) = node.transformed_parts(omw)?;
                    let scaled = LogProduct { ln_abs: v.ln_abs + weight.abs().ln(), sign: v.sign * weight.signum() };
                    mag = mag.max(scaled.ln_abs);
                    value = log_add(value, scaled).0;
                    loss = loss.max(l);
                }
                let loss = loss + (mag - value.ln_abs).max(0.0);
                self.accept_or_fallback(value, loss, w, omw)
            }
        }
    }

    fn transformed_parts(&self, omw: f64) -> Result<(LogProduct, f64)> {
        match &self.route {
            Route::Transformed { s, coef1, coef2 } => self.transformed(*s, *coef1, *coef2, omw),
            _ => unreachable!("perturbed parameters are never degenerate"),
        }
    }

    /// Returns the transformed value and `ln(total magnitude / |value|)`.
    fn transformed(&self, s: f64, coef1: LogProduct, coef2: LogProduct, omw: f64) -> Result<(LogProduct, f64)> {
        let (a, b, c) = (self.a, self.b, self.c);
        // the pieces may cancel, so each is summed well past the requested tolerance
        let inner = Accuracy { rel_tol: (self.acc.rel_tol * 1e-4).max(1e-17), ..self.acc };
        let mut t1 = coef1;
        let mut mag1 = f64::NEG_INFINITY;
        if coef1.sign != 0.0 {
            let f1 = gauss_series(a, b, 1.0 - s, omw, &inner)?;
            t1 = LogProduct { ln_abs: coef1.ln_abs + f1.ln_abs, sign: coef1.sign * f1.sign };
            mag1 = coef1.ln_abs + f1.ln_max_term.max(f1.ln_abs);
        }
        let mut t2 = coef2;
        let mut mag2 = f64::NEG_INFINITY;
        if coef2.sign != 0.0 {
            let f2 = gauss_series(c - a, c - b, 1.0 + s, omw, &inner)?;
            let ln_pow = s * omw.ln();
            t2 = LogProduct { ln_abs: coef2.ln_abs + f2.ln_abs + ln_pow, sign: coef2.sign * f2.sign };
            mag2 = coef2.ln_abs + f2.ln_max_term.max(f2.ln_abs) + ln_pow;
        }
        let (sum, _) = log_add(t1, t2);
        let mag = mag1.max(mag2);
        let loss = if sum.sign == 0.0 { f64::INFINITY } else { mag - sum.ln_abs };
        Ok((sum, loss.max(0.0)))
    }

    fn accept_or_fallback(&self, value: LogProduct, ln_loss: f64, w: f64, omw: f64) -> Result<LogProduct> {
        if ln_loss <= CANCELLATION_FALLBACK.ln() {
            return Ok(value);
        }
        if let Some(v) = euler_integral(self.a, self.b, self.c, w, omw)? {
            return Ok(v);
        }
        if ln_loss <= CANCELLATION_LIMIT.ln() {
            return Ok(value);
        }
        Err(Error::Accuracy(format!(
            "2F1({}, {}; {}; {w}) loses all digits to cancellation and has no integral representation",
            self.a, self.b, self.c
        )))
    }
}

/// Euler integral Γ(c)/(Γ(q)Γ(c−q)) ∫₀¹ t^{q−1}(1−t)^{c−q−1}(1−wt)^{−p} dt with
/// `{p, q} = {a, b}` chosen so that `c > q > 0`. Returns `None` when neither ordering
/// qualifies.
fn euler_integral(a: f64, b: f64, c: f64, w: f64, omw: f64) -> Result<Option<LogProduct>> {
    let (p, q) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return Ok(None);
    };
    // integrate in σ = 1 − t; 1 − w t = omw + w σ
    let alpha = c - q - 1.0;
    let g = |sigma: f64, t: f64| -> f64 { (q - 1.0) * t.ln() + alpha * sigma.ln() - p * (omw + w * sigma).ln() };
    // coarse scan in ln σ for the peak, then golden-section refinement
    let lo_ln = (omw.min(1e-3) * 1e-12).ln().max(-700.0);
    let nscan = 400;
    let mut best = (f64::NEG_INFINITY, 0.0f64);
    let node = |k: usize| lo_ln * (1.0 - k as f64 / nscan as f64);
    for k in 0..=nscan {
        let u = node(k);
        let sigma = u.exp();
        let v = g(sigma, 1.0 - sigma);
        if v > best.0 {
            best = (v, u);
        }
    }
    let step = -lo_ln / nscan as f64;
    let (mut l, mut r) = (best.1 - step, (best.1 + step).min(0.0));
    let gr = 0.618_033_988_749_894_9;
    let eval_u = |u: f64| {
        let sigma = u.exp();
        g(sigma, 1.0 - sigma)
    };
    for _ in 0..80 {
        let m1 = r - gr * (r - l);
        let m2 = l + gr * (r - l);
        if eval_u(m1) < eval_u(m2) {
            l = m1;
        } else {
            r = m2;
        }
    }
    let sigma_star = (0.5 * (l + r)).exp().min(1.0);
    let g_max = g(sigma_star, 1.0 - sigma_star).max(best.0);
    let left = tanh_sinh(
        |_, dl, _| (g(dl, 1.0 - dl) - g_max).exp(),
        0.0,
        sigma_star,
        1e-12,
    )?;
    let right = tanh_sinh(|x, _, dr| (g(x, dr) - g_max).exp(), sigma_star, 1.0, 1e-12)?;
    let integral = left + right;
    if !(integral > 0.0) {
        return Ok(None);
    }
    let (lg_c, s_c) = ln_gamma_signed(c).ok_or_else(|| Error::Domain("pole in Γ(c)".into()))?;
    let (lg_q, _) = ln_gamma_signed(q).ok_or_else(|| Error::Domain("pole in Γ(q)".into()))?;
    let (lg_cq, _) = ln_gamma_signed(c - q).ok_or_else(|| Error::Domain("pole in Γ(c−q)".into()))?;
    Ok(Some(LogProduct { ln_abs: lg_c - lg_q - lg_cq + g_max + integral.ln(), sign: s_c }))
}

/// ₂F₁(a, b; c; w) for `w ∈ [0, 1)` at the given accuracy.
pub fn gauss_2f1_with(a: f64, b: f64, c: f64, w: f64, acc: Accuracy) -> Result<f64> {
    Hyp2F1::new(a, b, c, acc)?.eval(w)
}

/// ₂F₁(a, b; c; w) for `w ∈ [0, 1)` at the default accuracy.
pub fn gauss_2f1(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    gauss_2f1_with(a, b, c, w, Accuracy::default())
}
