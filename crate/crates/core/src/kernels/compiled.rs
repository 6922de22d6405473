//! Correlation evaluators with parameter-only constants precomputed.

use serde::{Deserialize, Serialize};

use super::closed::ClosedForm;
use super::{gh_prefactor, Family, KernelSpec};
use crate::error::{domain, Error, Result};
use crate::specfun::{bessel_k, log_gamma, Accuracy, Hyp2F1, LogProduct};

/// Which formula evaluates an ℋ kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    /// Closed form when one applies, otherwise the ₂F₁ representation.
    #[default]
    Auto,
    /// Closed form only; building fails when none applies.
    ClosedForm,
    /// Always the ₂F₁ representation.
    General,
}

#[derive(Debug, Clone)]
enum Imp {
    Matern { nu: f64, alpha: f64, ln_pre: f64 },
    /// `pre · w^p · ₂F₁(·; w)` with `w = 1 − (x/a)²`.
    Hypergeometric { a: f64, pre: LogProduct, p: f64, f: Hyp2F1 },
    Closed { a: f64, form: ClosedForm },
}

/// A compiled correlation function φ(x).
#[derive(Debug, Clone)]
pub struct Kernel {
    spec: KernelSpec,
    imp: Imp,
}

impl Kernel {
    /// Compiles a valid spec; invalid parameters give a precondition error.
    pub fn new(spec: &KernelSpec, path: EvalPath) -> Result<Self> {
        spec.require_valid()?;
        Self::unchecked(spec, path)
    }

    /// Compiles without the validity gate. The result need not be positive
    /// definite; this exists to study parameters outside the valid region.
    pub fn unchecked(spec: &KernelSpec, path: EvalPath) -> Result<Self> {
        let resolved = spec.resolve()?;
        let d = resolved.d;
        let df = d as f64;
        let acc = Accuracy::default();
        let imp = match resolved.family {
            Family::Matern { nu, alpha } => {
                if !(nu > 0.0) {
                    return domain(format!("Matérn smoothness must be positive, got {nu}"));
                }
                Imp::Matern { nu, alpha, ln_pre: (1.0 - nu) * 2f64.ln() - log_gamma(nu)? }
            }
            Family::Gw { kappa, mu, beta } => {
                // Γ(κ)/Γ(2κ) written via the duplication formula so κ = 0 is regular
                let pre = LogProduct::ONE
                    .mul_ln(0.5 * std::f64::consts::PI.ln() - (2.0 * kappa + mu) * 2f64.ln())
                    .mul_gamma(2.0 * kappa + mu + 1.0)?
                    .div_gamma(kappa + 0.5)
                    .div_gamma(kappa + mu + 1.0);
                Imp::Hypergeometric {
                    a: beta,
                    pre,
                    p: kappa + mu,
                    f: Hyp2F1::new(mu / 2.0, (mu + 1.0) / 2.0, kappa + mu + 1.0, acc)?,
                }
            }
            Family::Gh { delta, beta, gamma, a } => {
                // symmetric in (β, γ); fix the order so both orientations round identically
                let (beta, gamma) = if gamma < beta { (gamma, beta) } else { (beta, gamma) };
                let c = beta - delta + gamma - df / 2.0;
                Imp::Hypergeometric {
                    a,
                    pre: gh_prefactor(delta, beta, gamma, d)?,
                    p: c - 1.0,
                    f: Hyp2F1::new(beta - delta, gamma - delta, c, acc)?,
                }
            }
            Family::H { kappa, mu, a } => {
                let closed = match path {
                    EvalPath::General => None,
                    _ => ClosedForm::prepare(kappa, mu, d),
                };
                match (closed, path) {
                    (Some(form), _) => Imp::Closed { a, form },
                    (None, EvalPath::ClosedForm) => {
                        return Err(Error::Precondition(format!(
                            "no closed form for kappa = {kappa}, mu = {mu}, d = {d}"
                        )))
                    }
                    (None, _) => {
                        let c = mu + (df + 1.0) / 2.0 + 2.0 * kappa;
                        let pre = LogProduct::ONE
                            .mul_gamma(kappa + (mu + 1.0) / 2.0)?
                            .mul_gamma(2.0 * kappa + (df + mu + 1.0) / 2.0)?
                            .div_gamma(c)
                            .div_gamma(kappa + 0.5);
                        Imp::Hypergeometric {
                            a,
                            pre,
                            p: mu + (df - 1.0) / 2.0 + 2.0 * kappa,
                            f: Hyp2F1::new(mu / 2.0, (mu + df) / 2.0 + kappa, c, acc)?,
                        }
                    }
                }
            }
            Family::HReparamB { .. } | Family::HReparamMu { .. } => unreachable!("resolved above"),
        };
        if path == EvalPath::ClosedForm && !matches!(imp, Imp::Closed { .. }) {
            return Err(Error::Precondition("closed forms exist only for the H family".into()));
        }
        Ok(Self { spec: *spec, imp })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Distance beyond which φ is exactly zero (infinite for Matérn).
    pub fn support(&self) -> f64 {
        match &self.imp {
            Imp::Matern { .. } => f64::INFINITY,
            Imp::Hypergeometric { a, .. } | Imp::Closed { a, .. } => *a,
        }
    }

    pub fn uses_closed_form(&self) -> bool {
        matches!(self.imp, Imp::Closed { .. })
    }

    /// φ(x) for a distance `x ≥ 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return domain(format!("distance must be non-negative, got {x}"));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        match &self.imp {
            Imp::Matern { nu, alpha, ln_pre } => {
                let t = x / alpha;
                if t.is_infinite() || t > 745.0 {
                    return Ok(0.0);
                }
                let k = bessel_k(*nu, t)?;
                if k == 0.0 {
                    return Ok(0.0);
                }
                Ok((ln_pre + nu * t.ln() + k.ln()).exp())
            }
            Imp::Hypergeometric { a, pre, p, f } => {
                if x >= *a {
                    return Ok(0.0);
                }
                let r = x / a;
                let w = (1.0 - r) * (1.0 + r);
                let v = f.eval_ln(w, r * r)?;
                Ok(pre.sign * v.sign * (pre.ln_abs + p * w.ln() + v.ln_abs).exp())
            }
            Imp::Closed { a, form } => {
                if x >= *a {
                    return Ok(0.0);
                }
                Ok(form.eval(x / a))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matern_exponential() {
        let k = KernelSpec::matern(0.5, 1.0, 1).unwrap().compile().unwrap();
        assert!((k.eval(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.eval(0.0).unwrap(), 1.0);
        // ν = 3/2: (1 + t) e^{−t}
        let k = KernelSpec::matern(1.5, 0.5, 2).unwrap().compile().unwrap();
        let t = 1.3f64 / 0.5;
        assert!((k.eval(1.3).unwrap() - (1.0 + t) * (-t).exp()).abs() < 1e-14);
    }

    #[test]
    fn gw_askey_reduction() {
        let k = KernelSpec::gw(0.0, 4.0, 1.0, 2).unwrap().compile().unwrap();
        assert!((k.eval(0.5).unwrap() - 0.0625).abs() < 1e-13);
        for &x in &[0.01, 0.2, 0.77, 0.999] {
            let want = (1.0f64 - x).powi(4);
            assert!((k.eval(x).unwrap() - want).abs() < 1e-12, "x={x}");
        }
        assert_eq!(k.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn gw_and_gh_embedding() {
        for &(kappa, mu, d) in &[(0.0, 4.0, 2usize), (1.0, 3.5, 2), (0.5, 3.0, 3), (2.0, 5.0, 1)] {
            let gw = KernelSpec::gw(kappa, mu, 0.8, d).unwrap().compile().unwrap();
            let delta = (d as f64 + 1.0) / 2.0 + kappa;
            let gh = KernelSpec::gh(delta, delta + mu / 2.0, delta + mu / 2.0 + 0.5, 0.8, d).unwrap().compile().unwrap();
            for i in 0..20 {
                let x = 0.8 * i as f64 / 20.0;
                let (a, b) = (gw.eval(x).unwrap(), gh.eval(x).unwrap());
                assert!((a - b).abs() < 1e-9, "{kappa} {mu} {d} x={x}: {a} {b}");
            }
        }
    }

    #[test]
    fn closed_path_requirements() {
        let s = KernelSpec::h(0.3, 2.0, 1.0, 2).unwrap();
        assert!(Kernel::new(&s, EvalPath::ClosedForm).is_err());
        assert!(!Kernel::new(&s, EvalPath::Auto).unwrap().uses_closed_form());
        let s = KernelSpec::h(0.0, 1.0, 1.0, 3).unwrap();
        assert!(Kernel::new(&s, EvalPath::Auto).unwrap().uses_closed_form());
        assert!(!Kernel::new(&s, EvalPath::General).unwrap().uses_closed_form());
    }

    #[test]
    fn invalid_spec_is_a_precondition_error() {
        let s = KernelSpec::h(0.0, 0.8, 1.0, 2).unwrap();
        assert!(matches!(s.correlation(0.3), Err(Error::Precondition(_))));
        assert!(Kernel::unchecked(&s, EvalPath::General).unwrap().eval(0.3).is_ok());
    }

    #[test]
    fn distances_below_rounding_of_w() {
        // 1 − (x/a)² rounds to 1 here, yet φ is visibly below 1 for κ < 0
        let k = KernelSpec::h(-0.3, 1.5, 1.0, 1).unwrap().compile().unwrap();
        let v: Vec<f64> = [1e-12, 1e-10, 1e-8, 1e-6].iter().map(|&x| k.eval(x).unwrap()).collect();
        assert!(v.iter().all(|x| *x > 0.0 && *x < 1.0), "{v:?}");
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        assert!(1.0 - v[0] > 1e-6);
    }

    #[test]
    fn large_shape_stays_bounded() {
        let k = KernelSpec::h(0.0, 1000.0, 1.0, 2).unwrap().compile().unwrap();
        let mut prev = 1.0;
        for i in 1..50 {
            let v = k.eval(i as f64 / 50.0).unwrap();
            assert!(v.is_finite() && v >= 0.0 && v <= prev + 1e-12, "i={i} v={v}");
            prev = v;
        }
    }
}
