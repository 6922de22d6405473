//! Correlation families, validity gates, closed forms and integral ranges.

mod closed;
mod compiled;
mod mixture;
mod range;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::LogProduct;

pub use closed::closed_form_h;
pub use compiled::{EvalPath, Kernel};
pub use mixture::gh_scale_mixture;
pub use table::{RadialTable, TabulatedKernel};
pub use range::{
    b_constant, integral_range, integral_range_klm, integral_range_quadrature, max_integral_range_params,
    IntegralRange, RangeMethod,
};

/// A stationary isotropic correlation φ(x) with a known support.
pub trait Correlation: Send + Sync {
    /// Distance beyond which φ is exactly zero (may be infinite).
    fn support(&self) -> f64;
    fn correlation(&self, x: f64) -> Result<f64>;
}

impl Correlation for Kernel {
    fn support(&self) -> f64 {
        Kernel::support(self)
    }

    fn correlation(&self, x: f64) -> Result<f64> {
        self.eval(x)
    }
}

/// Kernel family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Matern { nu: f64, alpha: f64 },
    /// Generalized Wendland with support `beta`.
    Gw { kappa: f64, mu: f64, beta: f64 },
    Gh { delta: f64, beta: f64, gamma: f64, a: f64 },
    H { kappa: f64, mu: f64, a: f64 },
    /// ℋ with support `α·B(κ,μ,d)^{1/(1+2κ)}`.
    HReparamB { kappa: f64, mu: f64, alpha: f64 },
    /// ℋ with support `μ·α`.
    HReparamMu { kappa: f64, mu: f64, alpha: f64 },
}

/// A correlation family together with the ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: Family,
    pub d: usize,
}

/// Outcome of a validity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    /// The inequality that decides validity; names the violated one when invalid.
    pub binding_constraint: String,
    pub lower_bound_mu: Option<f64>,
}

impl ValidityReport {
    fn new(valid: bool, constraint: impl Into<String>, bound: Option<f64>) -> Self {
        Self { valid, binding_constraint: constraint.into(), lower_bound_mu: bound }
    }
}

/// GH parameters rewritten as (κ, μ, l) with the `γ ≥ β` orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GhShape {
    pub kappa: f64,
    pub mu: f64,
    pub l: f64,
}

impl GhShape {
    pub(crate) fn from_raw(delta: f64, beta: f64, gamma: f64, d: usize) -> Self {
        let (lo, hi) = if gamma < beta { (gamma, beta) } else { (beta, gamma) };
        Self { kappa: delta - (d as f64 + 1.0) / 2.0, mu: 2.0 * (lo - delta), l: hi - lo }
    }
}

/// Smallest admissible μ for GW(κ, μ, ·) in dimension `d`.
pub fn gw_mu_min(kappa: f64, d: usize) -> f64 {
    if d == 1 && kappa < 0.0 {
        ((8.0 * kappa + 9.0).sqrt() - 1.0) / 2.0
    } else {
        kappa + (d as f64 + 1.0) / 2.0
    }
}

/// Smallest admissible μ for GH(δ, δ+μ/2, δ+μ/2+l, ·), `l ≥ 0`, in dimension `d`.
pub fn gh_mu_min(kappa: f64, l: f64, d: usize) -> f64 {
    let df = d as f64;
    if l <= df / 2.0 + kappa {
        let delta = (df + 1.0) / 2.0 + kappa;
        delta - l + 0.5
    } else {
        (2.0 * kappa + l * l + df + 1.0).sqrt() - l
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

impl KernelSpec {
    /// Builds a spec, checking that scale/support parameters are positive and all
    /// parameters finite. Validity of the shape parameters is a separate question,
    /// answered by [`KernelSpec::validate`].
    pub fn new(family: Family, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension d must be at least 1".into()));
        }
        match family {
            Family::Matern { nu, alpha } => {
                finite("nu", nu)?;
                positive("alpha", alpha)?;
            }
            Family::Gw { kappa, mu, beta } => {
                finite("kappa", kappa)?;
                finite("mu", mu)?;
                positive("beta", beta)?;
            }
            Family::Gh { delta, beta, gamma, a } => {
                finite("delta", delta)?;
                finite("beta", beta)?;
                finite("gamma", gamma)?;
                positive("a", a)?;
            }
            Family::H { kappa, mu, a } => {
                finite("kappa", kappa)?;
                finite("mu", mu)?;
                positive("a", a)?;
            }
            Family::HReparamB { kappa, mu, alpha } | Family::HReparamMu { kappa, mu, alpha } => {
                finite("kappa", kappa)?;
                finite("mu", mu)?;
                positive("alpha", alpha)?;
            }
        }
        Ok(Self { family, d })
    }

    pub fn matern(nu: f64, alpha: f64, d: usize) -> Result<Self> {
        Self::new(Family::Matern { nu, alpha }, d)
    }

    pub fn gw(kappa: f64, mu: f64, beta: f64, d: usize) -> Result<Self> {
        Self::new(Family::Gw { kappa, mu, beta }, d)
    }

    pub fn gh(delta: f64, beta: f64, gamma: f64, a: f64, d: usize) -> Result<Self> {
        Self::new(Family::Gh { delta, beta, gamma, a }, d)
    }

    pub fn h(kappa: f64, mu: f64, a: f64, d: usize) -> Result<Self> {
        Self::new(Family::H { kappa, mu, a }, d)
    }

    pub fn h_reparam_b(kappa: f64, mu: f64, alpha: f64, d: usize) -> Result<Self> {
        Self::new(Family::HReparamB { kappa, mu, alpha }, d)
    }

    pub fn h_reparam_mu(kappa: f64, mu: f64, alpha: f64, d: usize) -> Result<Self> {
        Self::new(Family::HReparamMu { kappa, mu, alpha }, d)
    }

    /// Necessary and sufficient validity of the parameters in dimension `d`.
    pub fn validate(&self) -> ValidityReport {
        let d = self.d;
        match self.family {
            Family::Matern { nu, alpha } => {
                if !(nu > 0.0) {
                    ValidityReport::new(false, format!("nu > 0 violated (nu = {nu})"), None)
                } else if !(alpha > 0.0) {
                    ValidityReport::new(false, format!("alpha > 0 violated (alpha = {alpha})"), None)
                } else {
                    ValidityReport::new(true, "nu > 0 and alpha > 0", None)
                }
            }
            Family::Gw { kappa, mu, .. } => {
                if !(kappa > -0.5) {
                    return ValidityReport::new(false, format!("kappa > -1/2 violated (kappa = {kappa})"), None);
                }
                let bound = gw_mu_min(kappa, d);
                let rule = if d == 1 && kappa < 0.0 { "(sqrt(8 kappa + 9) - 1)/2" } else { "kappa + (d+1)/2" };
                ValidityReport::new(
                    mu >= bound,
                    format!("mu >= {rule} = {bound}{}", if mu >= bound { "" } else { " violated" }),
                    Some(bound),
                )
            }
            Family::Gh { delta, beta, gamma, .. } => {
                let s = GhShape::from_raw(delta, beta, gamma, d);
                if !(s.kappa > -0.5) {
                    return ValidityReport::new(
                        false,
                        format!("delta > d/2 (kappa > -1/2) violated (kappa = {})", s.kappa),
                        None,
                    );
                }
                let bound = gh_mu_min(s.kappa, s.l, d);
                let rule = if s.l <= d as f64 / 2.0 + s.kappa {
                    "delta - l + 1/2 (l <= d/2 + kappa)"
                } else {
                    "sqrt(2 kappa + l^2 + d + 1) - l (l > d/2 + kappa)"
                };
                // μ is recovered from differences of the raw parameters; allow for that round-off
                let ok = s.mu >= bound - 1e-12 * bound.abs().max(1.0);
                ValidityReport::new(
                    ok,
                    format!("mu = 2(min(beta,gamma) - delta) >= {rule} = {bound}{}", if ok { "" } else { " violated" }),
                    Some(bound),
                )
            }
            Family::H { kappa, mu, .. } | Family::HReparamB { kappa, mu, .. } | Family::HReparamMu { kappa, mu, .. } => {
                if !(kappa > -0.5) {
                    ValidityReport::new(false, format!("kappa > -1/2 violated (kappa = {kappa})"), Some(1.0))
                } else if !(mu >= 1.0) {
                    ValidityReport::new(false, format!("mu >= 1 violated (mu = {mu})"), Some(1.0))
                } else {
                    ValidityReport::new(true, "mu >= 1 and kappa > -1/2", Some(1.0))
                }
            }
        }
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        let r = self.validate();
        if r.valid {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid kernel parameters: {}", r.binding_constraint)))
        }
    }

    /// Replaces the reparameterized ℋ variants by the plain ℋ family with the
    /// resolved support.
    pub fn resolve(&self) -> Result<Self> {
        let family = match self.family {
            Family::HReparamB { kappa, mu, alpha } => {
                let b = b_constant(kappa, mu, self.d)?;
                Family::H { kappa, mu, a: alpha * (b.ln() / (1.0 + 2.0 * kappa)).exp() }
            }
            Family::HReparamMu { kappa, mu, alpha } => Family::H { kappa, mu, a: mu * alpha },
            f => f,
        };
        Ok(Self { family, d: self.d })
    }

    /// Distance beyond which the correlation vanishes (infinite for Matérn).
    pub fn effective_support(&self) -> Result<f64> {
        self.require_valid()?;
        Ok(match self.resolve()?.family {
            Family::Matern { .. } => f64::INFINITY,
            Family::Gw { beta, .. } => beta,
            Family::Gh { a, .. } | Family::H { a, .. } => a,
            Family::HReparamB { .. } | Family::HReparamMu { .. } => unreachable!("resolved above"),
        })
    }

    /// Smoothness parameter κ where the family has one (ν − 1/2 for Matérn).
    pub fn kappa(&self) -> f64 {
        match self.family {
            Family::Matern { nu, .. } => nu - 0.5,
            Family::Gw { kappa, .. }
            | Family::H { kappa, .. }
            | Family::HReparamB { kappa, .. }
            | Family::HReparamMu { kappa, .. } => kappa,
            Family::Gh { delta, .. } => delta - (self.d as f64 + 1.0) / 2.0,
        }
    }

    /// Prepares an evaluator with all parameter-only constants cached.
    pub fn compile(&self) -> Result<Kernel> {
        Kernel::new(self, EvalPath::Auto)
    }

    /// φ(x) at a single distance.
    pub fn correlation(&self, x: f64) -> Result<f64> {
        self.compile()?.eval(x)
    }

    /// The (δ, β, γ, a) parameters of the GH kernel this spec equals, if any.
    pub fn gh_params(&self) -> Result<Option<(f64, f64, f64, f64)>> {
        let half = self.d as f64 / 2.0;
        Ok(match self.resolve()?.family {
            Family::Matern { .. } => None,
            Family::Gw { kappa, mu, beta } => {
                let delta = half + 0.5 + kappa;
                Some((delta, delta + mu / 2.0, delta + mu / 2.0 + 0.5, beta))
            }
            Family::H { kappa, mu, a } => {
                let delta = half + 0.5 + kappa;
                Some((delta, delta + mu / 2.0, delta + (mu + self.d as f64) / 2.0 + kappa, a))
            }
            Family::Gh { delta, beta, gamma, a } => Some((delta, beta, gamma, a)),
            Family::HReparamB { .. } | Family::HReparamMu { .. } => unreachable!("resolved above"),
        })
    }

    /// Returns a copy with the support (or Matérn scale) replaced.
    pub fn with_support(&self, s: f64) -> Result<Self> {
        let family = match self.family {
            Family::Matern { nu, .. } => Family::Matern { nu, alpha: s },
            Family::Gw { kappa, mu, .. } => Family::Gw { kappa, mu, beta: s },
            Family::Gh { delta, beta, gamma, .. } => Family::Gh { delta, beta, gamma, a: s },
            Family::H { kappa, mu, .. } => Family::H { kappa, mu, a: s },
            Family::HReparamB { kappa, mu, .. } => Family::HReparamB { kappa, mu, alpha: s },
            Family::HReparamMu { kappa, mu, .. } => Family::HReparamMu { kappa, mu, alpha: s },
        };
        Self::new(family, self.d)
    }

    /// The support (GW/GH/ℋ) or scale (Matérn, reparameterized ℋ) parameter.
    pub fn support_param(&self) -> f64 {
        match self.family {
            Family::Matern { alpha, .. } | Family::HReparamB { alpha, .. } | Family::HReparamMu { alpha, .. } => alpha,
            Family::Gw { beta, .. } => beta,
            Family::Gh { a, .. } | Family::H { a, .. } => a,
        }
    }

    /// The shape parameter μ where the family has one.
    pub fn mu(&self) -> Option<f64> {
        match self.family {
            Family::Gw { mu, .. } | Family::H { mu, .. } | Family::HReparamB { mu, .. } | Family::HReparamMu { mu, .. } => {
                Some(mu)
            }
            Family::Gh { delta, beta, gamma, .. } => Some(GhShape::from_raw(delta, beta, gamma, self.d).mu),
            Family::Matern { .. } => None,
        }
    }

    /// Returns a copy with μ and κ replaced where the family carries them.
    pub fn with_shape(&self, kappa: Option<f64>, mu: Option<f64>) -> Result<Self> {
        let family = match self.family {
            Family::Gw { kappa: k, mu: m, beta } => Family::Gw { kappa: kappa.unwrap_or(k), mu: mu.unwrap_or(m), beta },
            Family::H { kappa: k, mu: m, a } => Family::H { kappa: kappa.unwrap_or(k), mu: mu.unwrap_or(m), a },
            Family::HReparamB { kappa: k, mu: m, alpha } => {
                Family::HReparamB { kappa: kappa.unwrap_or(k), mu: mu.unwrap_or(m), alpha }
            }
            Family::HReparamMu { kappa: k, mu: m, alpha } => {
                Family::HReparamMu { kappa: kappa.unwrap_or(k), mu: mu.unwrap_or(m), alpha }
            }
            Family::Matern { nu, alpha } => Family::Matern { nu: kappa.map(|k| k + 0.5).unwrap_or(nu), alpha },
            f @ Family::Gh { .. } => {
                if kappa.is_some() || mu.is_some() {
                    return Err(Error::Domain("GH shape is set through delta, beta, gamma".into()));
                }
                f
            }
        };
        Self::new(family, self.d)
    }
}

/// GH correlation (δ, β, γ, a) in dimension `d` at distance `x`.
pub fn gh_correlation(delta: f64, beta: f64, gamma: f64, a: f64, d: usize, x: f64) -> Result<f64> {
    KernelSpec::gh(delta, beta, gamma, a, d)?.correlation(x)
}

/// Γ-ratio prefactor shared by GH-type kernels:
/// Γ(β−d/2)Γ(γ−d/2) / (Γ(β−δ+γ−d/2) Γ(δ−d/2)).
pub(crate) fn gh_prefactor(delta: f64, beta: f64, gamma: f64, d: usize) -> Result<LogProduct> {
    let h = d as f64 / 2.0;
    Ok(LogProduct::ONE
        .mul_gamma(beta - h)?
        .mul_gamma(gamma - h)?
        .div_gamma(beta - delta + gamma - h)
        .div_gamma(delta - h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gw_bound_example() {
        let r = KernelSpec::gw(1.0, 2.0, 1.0, 2).unwrap().validate();
        assert!(!r.valid);
        assert_eq!(r.lower_bound_mu, Some(2.5));
        assert!(r.binding_constraint.contains("violated"));
    }

    #[test]
    fn gw_negative_kappa_branch() {
        let k = -0.25;
        let bound = ((8.0f64 * k + 9.0).sqrt() - 1.0) / 2.0;
        assert_eq!(gw_mu_min(k, 1), bound);
        assert!(KernelSpec::gw(k, bound, 1.0, 1).unwrap().validate().valid);
        assert!(!KernelSpec::gw(k, bound - 1e-9, 1.0, 1).unwrap().validate().valid);
        // in d = 2 the ordinary bound applies
        assert_eq!(gw_mu_min(k, 2), k + 1.5);
    }

    #[test]
    fn h_bound_is_dimension_free() {
        assert!(!KernelSpec::h(0.0, 0.5, 1.0, 2).unwrap().validate().valid);
        assert!(KernelSpec::h(0.0, 1.0, 1.0, 5).unwrap().validate().valid);
        assert!(!KernelSpec::h(-0.5, 1.0, 1.0, 1).unwrap().validate().valid);
    }

    #[test]
    fn gh_cases_and_swap() {
        // l = 1/2 reproduces the GW bound
        for &(k, d) in &[(0.0, 1usize), (1.0, 2), (0.5, 3), (-0.3, 1)] {
            let delta = (d as f64 + 1.0) / 2.0 + k;
            let mu = gw_mu_min(k, d);
            let ok = KernelSpec::gh(delta, delta + mu / 2.0, delta + mu / 2.0 + 0.5, 1.0, d).unwrap().validate();
            assert!(ok.valid, "{k} {d}: {ok:?}");
            assert!((ok.lower_bound_mu.unwrap() - mu).abs() < 1e-12);
            let swapped = KernelSpec::gh(delta, delta + mu / 2.0 + 0.5, delta + mu / 2.0, 1.0, d).unwrap().validate();
            assert_eq!(ok, swapped);
            let bad = KernelSpec::gh(delta, delta + mu / 2.0 - 0.01, delta + mu / 2.0 + 0.49, 1.0, d).unwrap().validate();
            assert!(!bad.valid);
        }
    }

    #[test]
    fn gh_boundary_equality_is_valid() {
        let (k, d, l) = (0.0, 2usize, 3.0);
        let mu = gh_mu_min(k, l, d);
        let delta = 1.5;
        let s = KernelSpec::gh(delta, delta + mu / 2.0, delta + mu / 2.0 + l, 1.0, d).unwrap();
        assert!(s.validate().valid);
    }

    #[test]
    fn supports() {
        assert!((KernelSpec::h_reparam_b(0.0, 1.0, 1.0, 1).unwrap().effective_support().unwrap() - 1.0).abs() < 1e-14);
        assert!((KernelSpec::h_reparam_mu(0.0, 10.0, 0.2, 2).unwrap().effective_support().unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(KernelSpec::matern(1.0, 1.0, 2).unwrap().effective_support().unwrap(), f64::INFINITY);
        assert_eq!(KernelSpec::gw(0.0, 4.0, 0.7, 2).unwrap().effective_support().unwrap(), 0.7);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(KernelSpec::h(0.0, 1.0, 0.0, 1).is_err());
        assert!(KernelSpec::matern(0.5, -1.0, 1).is_err());
        assert!(KernelSpec::h(0.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = KernelSpec::h(0.5, 4.0, 0.2, 2).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"family\":\"h\""));
        let back: KernelSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
