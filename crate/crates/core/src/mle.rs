//! Gaussian likelihood, profile likelihood and maximum likelihood fitting.

use std::f64::consts::PI;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covmat::{assemble_with, check_dim, cholesky, cholesky_dense, DenseMatrix, PointSet, StorageHint};
use crate::error::{domain, Error, Result};
use crate::kernels::{Correlation, Family, Kernel, KernelSpec, RadialTable, TabulatedKernel};

/// Absolute accuracy of the correlation tables used inside fits.
const TABLE_TOL: f64 = 1e-12;

/// `ln|R|` and `zᵀR⁻¹z` for the correlation matrix with `nugget_ratio` added
/// to the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub log_det: f64,
    pub quad: f64,
    pub n: usize,
}

impl Quadratic {
    pub fn compute(corr: &dyn Correlation, nugget_ratio: f64, points: &PointSet, values: &[f64]) -> Result<Self> {
        if values.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: values.len() });
        }
        if points.is_empty() {
            return domain("likelihood needs at least one observation");
        }
        let r = assemble_with(corr, 1.0, nugget_ratio, points, StorageHint::Dense)?;
        let chol = cholesky(&r)?;
        let y = chol.solve_lower(values)?;
        Ok(Self { log_det: chol.log_det(), quad: y.iter().map(|v| v * v).sum(), n: values.len() })
    }

    pub fn loglik(&self, sigma2: f64) -> f64 {
        let n = self.n as f64;
        -0.5 * (n * (2.0 * PI * sigma2).ln() + self.log_det + self.quad / sigma2)
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.quad / self.n as f64
    }

    /// −½[ln 2π + n ln σ̂² + ln|R| + n], with a single ln 2π term.
    pub fn profile_loglik(&self) -> f64 {
        let n = self.n as f64;
        -0.5 * ((2.0 * PI).ln() + n * self.sigma2_hat().ln() + self.log_det + n)
    }
}

fn check_sigma2(sigma2: f64, nugget: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) || !(nugget >= 0.0 && nugget.is_finite()) {
        return domain(format!("need sigma2 > 0 and nugget >= 0, got {sigma2}, {nugget}"));
    }
    Ok(())
}

fn quadratic(spec: &KernelSpec, nugget_ratio: f64, points: &PointSet, values: &[f64]) -> Result<Quadratic> {
    check_dim(spec.d, points.dim())?;
    Quadratic::compute(&spec.compile()?, nugget_ratio, points, values)
}

/// Gaussian log-likelihood of zero-mean data with covariance σ²R + nugget·I.
pub fn loglik(spec: &KernelSpec, sigma2: f64, nugget: f64, points: &PointSet, values: &[f64]) -> Result<f64> {
    check_sigma2(sigma2, nugget)?;
    Ok(quadratic(spec, nugget / sigma2, points, values)?.loglik(sigma2))
}

/// σ̂²(a) = zᵀR(a)⁻¹z / n.
pub fn sigma2_hat(spec: &KernelSpec, points: &PointSet, values: &[f64]) -> Result<f64> {
    Ok(quadratic(spec, 0.0, points, values)?.sigma2_hat())
}

/// Profile log-likelihood in the support, see [`Quadratic::profile_loglik`].
pub fn profile_loglik(spec: &KernelSpec, points: &PointSet, values: &[f64]) -> Result<f64> {
    Ok(quadratic(spec, 0.0, points, values)?.profile_loglik())
}

/// σ²/a^{2κ+1}.
pub fn microergodic(sigma2: f64, a: f64, kappa: f64) -> f64 {
    sigma2 / a.powf(2.0 * kappa + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Sigma2,
    /// Support (compact families) or scale (Matérn, reparameterized ℋ).
    Support,
    Mu,
    Kappa,
    Nugget,
}

impl Param {
    fn is_log(self) -> bool {
        !matches!(self, Param::Kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub sigma2: Bounds,
    pub support: Bounds,
    pub mu: Bounds,
    pub kappa: Bounds,
    pub nugget: Bounds,
}

impl ParamBounds {
    pub fn get(&self, p: Param) -> Bounds {
        match p {
            Param::Sigma2 => self.sigma2,
            Param::Support => self.support,
            Param::Mu => self.mu,
            Param::Kappa => self.kappa,
            Param::Nugget => self.nugget,
        }
    }
}

/// What to estimate and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub free: Vec<Param>,
    /// Value of σ² when it is not free.
    pub sigma2: f64,
    /// Value of the nugget when it is not free.
    pub nugget: f64,
    pub bounds: ParamBounds,
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Concentrate σ² out analytically when the nugget is fixed at zero.
    pub profile_sigma2: bool,
    /// Evaluate fixed-shape compact kernels through a checked Chebyshev table.
    pub tabulate: bool,
    pub std_errors: bool,
}

impl FitConfig {
    /// Estimate (σ², support) with the support restricted to `[a_lo, a_hi]`.
    pub fn sigma2_support(a_lo: f64, a_hi: f64) -> Self {
        Self {
            free: vec![Param::Sigma2, Param::Support],
            sigma2: 1.0,
            nugget: 0.0,
            bounds: ParamBounds {
                sigma2: Bounds::new(1e-4, 1e4),
                support: Bounds::new(a_lo, a_hi),
                mu: Bounds::new(1.0, 50.0),
                kappa: Bounds::new(-0.49, 5.0),
                nugget: Bounds::new(1e-8, 10.0),
            },
            restarts: 5,
            tol: 1e-8,
            max_iter: 2000,
            seed: 0,
            profile_sigma2: true,
            tabulate: true,
            std_errors: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = self.free.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.free.len() {
            return domain("free parameters listed twice");
        }
        for &p in &self.free {
            let b = self.bounds.get(p);
            let lo_ok = if p.is_log() { b.lo > 0.0 } else { b.lo.is_finite() };
            if !(lo_ok && b.hi.is_finite() && b.lo < b.hi) {
                return domain(format!("bounds for {p:?} must be finite with 0 < lo < hi (lo > -inf for kappa), got {b:?}"));
            }
        }
        let s = self.bounds.support;
        if !(s.lo > 0.0 && s.lo < s.hi && s.hi.is_finite()) {
            return domain(format!("support interval must satisfy 0 < a_L < a_U < inf, got {s:?}"));
        }
        if self.restarts == 0 || self.max_iter == 0 || !(self.tol > 0.0) {
            return domain("restarts, max_iter and tol must be positive");
        }
        check_sigma2(self.sigma2, self.nugget)
    }
}

/// Parameter values of a fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub sigma2: f64,
    pub support: f64,
    pub mu: Option<f64>,
    pub kappa: f64,
    pub nugget: f64,
}

impl Estimates {
    fn get(&self, p: Param) -> f64 {
        match p {
            Param::Sigma2 => self.sigma2,
            Param::Support => self.support,
            Param::Mu => self.mu.unwrap_or(f64::NAN),
            Param::Kappa => self.kappa,
            Param::Nugget => self.nugget,
        }
    }

    fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Sigma2 => self.sigma2 = v,
            Param::Support => self.support = v,
            Param::Mu => self.mu = Some(v),
            Param::Kappa => self.kappa = v,
            Param::Nugget => self.nugget = v,
        }
    }

    /// The template with these shape and support values.
    pub fn spec(&self, template: &KernelSpec) -> Result<KernelSpec> {
        let kappa = match template.family {
            Family::Gh { .. } => None,
            _ => Some(self.kappa),
        };
        let shaped = if matches!(template.family, Family::Gh { .. }) { *template } else { template.with_shape(kappa, self.mu)? };
        shaped.with_support(self.support)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdError {
    pub param: Param,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub estimates: Estimates,
    pub microergodic: f64,
    pub loglik: f64,
    pub std_errors: Option<Vec<StdError>>,
    pub converged: bool,
    pub n_evals: usize,
    pub failed_restarts: usize,
}

/// Outcome of a bounded Nelder–Mead run.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` over the box `[lo, hi]` by Nelder–Mead with projection onto the box.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    max_iter: usize,
) -> NelderMead {
    let k = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..k {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if k == 0 {
        let v = eval(x0, &mut evals);
        return NelderMead { x: Vec::new(), f: v, evals, converged: true };
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..k {
        let mut v = x0.to_vec();
        let step = 0.1 * (hi[i] - lo[i]);
        v[i] = if v[i] + step <= hi[i] { v[i] + step } else { v[i] - step };
        clamp(&mut v);
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();
        let spread = fv[k] - fv[0];
        let size = (1..=k)
            .flat_map(|j| (0..k).map(move |i| (j, i)))
            .map(|(j, i)| (simplex[j][i] - simplex[0][i]).abs() / (hi[i] - lo[i]))
            .fold(0.0, f64::max);
        if fv[0].is_finite() && spread <= tol * (1.0 + fv[0].abs()) && size <= tol.sqrt() {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..k).map(|i| simplex[..k].iter().map(|x| x[i]).sum::<f64>() / k as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..k).map(|i| centroid[i] + t * (simplex[k][i] - centroid[i])).collect();
            clamp(&mut v);
            v
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < fv[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[k] = xe;
                fv[k] = fe;
            } else {
                simplex[k] = xr;
                fv[k] = fr;
            }
            continue;
        }
        if fr < fv[k - 1] {
            simplex[k] = xr;
            fv[k] = fr;
            continue;
        }
        let (xc, fc) = if fr < fv[k] {
            let x = along(-0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < fv[k].min(fr) {
            simplex[k] = xc;
            fv[k] = fc;
            continue;
        }
        for j in 1..=k {
            let v: Vec<f64> = (0..k).map(|i| simplex[0][i] + 0.5 * (simplex[j][i] - simplex[0][i])).collect();
            fv[j] = eval(&v, &mut evals);
            simplex[j] = v;
        }
    }
    let best = (0..=k).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap_or(0);
    NelderMead { x: simplex[best].clone(), f: fv[best], evals, converged }
}

/// Latin-hypercube sample of `m` points in the box.
fn latin_hypercube(rng: &mut ChaCha8Rng, m: usize, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let k = lo.len();
    let mut pts = vec![vec![0.0; k]; m];
    for i in 0..k {
        let mut strata: Vec<usize> = (0..m).collect();
        for j in (1..m).rev() {
            strata.swap(j, (rng.next_u64() % (j as u64 + 1)) as usize);
        }
        for (p, s) in pts.iter_mut().zip(strata) {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            p[i] = lo[i] + (s as f64 + u) / m as f64 * (hi[i] - lo[i]);
        }
    }
    pts
}

fn to_internal(p: Param, v: f64) -> f64 {
    if p.is_log() {
        v.ln()
    } else {
        v
    }
}

fn from_internal(p: Param, v: f64) -> f64 {
    if p.is_log() {
        v.exp()
    } else {
        v
    }
}

/// Builds correlation evaluators for candidate parameters.
struct Evaluator<'a> {
    template: KernelSpec,
    table: Option<Arc<RadialTable>>,
    points: &'a PointSet,
    values: &'a [f64],
}

impl Evaluator<'_> {
    fn quadratic(&self, est: &Estimates) -> Result<Quadratic> {
        let spec = est.spec(&self.template)?;
        spec.require_valid()?;
        let nugget_ratio = est.nugget / est.sigma2;
        match &self.table {
            Some(t) => {
                let corr = TabulatedKernel::new(t.clone(), spec.effective_support()?);
                Quadratic::compute(&corr, nugget_ratio, self.points, self.values)
            }
            None => Quadratic::compute(&Kernel::new(&spec, Default::default())?, nugget_ratio, self.points, self.values),
        }
    }
}

fn initial_estimates(template: &KernelSpec, config: &FitConfig) -> Estimates {
    Estimates {
        sigma2: config.sigma2,
        support: template.support_param(),
        mu: template.mu().filter(|_| !matches!(template.family, Family::Gh { .. })),
        kappa: template.kappa(),
        nugget: config.nugget,
    }
}

/// Maximum likelihood fit of the free parameters in `config`.
pub fn fit(config: &FitConfig, template: &KernelSpec, points: &PointSet, values: &[f64]) -> Result<FitResult> {
    config.validate()?;
    check_dim(template.d, points.dim())?;
    if values.len() != points.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: values.len() });
    }
    if points.len() < config.free.len() + 1 {
        return Err(Error::Fit(format!("{} observations cannot identify {} parameters", points.len(), config.free.len())));
    }
    let is_gh = matches!(template.family, Family::Gh { .. });
    if is_gh && config.free.iter().any(|p| matches!(p, Param::Mu | Param::Kappa)) {
        return domain("GH shape is fixed through delta, beta, gamma");
    }
    if matches!(template.family, Family::Matern { .. }) && config.free.contains(&Param::Mu) {
        return domain("the Matérn family has no mu");
    }
    let base = initial_estimates(template, config);
    let profile = config.profile_sigma2
        && config.free.contains(&Param::Sigma2)
        && !config.free.contains(&Param::Nugget)
        && config.nugget == 0.0;
    let shape_free = config.free.iter().any(|p| matches!(p, Param::Mu | Param::Kappa));
    let table = if config.tabulate && !shape_free && !matches!(template.family, Family::Matern { .. }) {
        Some(TabulatedKernel::shape(&base.spec(template)?, TABLE_TOL)?)
    } else {
        None
    };
    let ev = Evaluator { template: *template, table, points, values };

    let search: Vec<Param> = config.free.iter().copied().filter(|&p| !(profile && p == Param::Sigma2)).collect();
    let lo: Vec<f64> = search.iter().map(|&p| to_internal(p, config.bounds.get(p).lo)).collect();
    let hi: Vec<f64> = search.iter().map(|&p| to_internal(p, config.bounds.get(p).hi)).collect();

    let decode = |x: &[f64]| -> Estimates {
        let mut e = base;
        for (&p, &v) in search.iter().zip(x) {
            e.set(p, from_internal(p, v));
        }
        if config.free.contains(&Param::Support) {
            e.support = e.support.clamp(config.bounds.support.lo, config.bounds.support.hi);
        }
        e
    };
    // returns the log-likelihood and the estimates with σ² filled in when profiled
    let objective = |x: &[f64]| -> Result<(f64, Estimates)> {
        let mut e = decode(x);
        if profile {
            e.sigma2 = 1.0;
            let q = ev.quadratic(&e)?;
            e.sigma2 = q.sigma2_hat().clamp(config.bounds.sigma2.lo, config.bounds.sigma2.hi);
            Ok((q.loglik(e.sigma2), e))
        } else {
            Ok((ev.quadratic(&e)?.loglik(e.sigma2), e))
        }
    };

    if search.is_empty() {
        let (ll, est) = if profile {
            let e = base;
            let q = quadratic(&e.spec(template)?, 0.0, points, values)?;
            let s2 = q.sigma2_hat();
            (q.loglik(s2), Estimates { sigma2: s2, ..e })
        } else {
            objective(&[])?
        };
        return finish(config, template, points, values, est, ll, true, 1, 0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts = latin_hypercube(&mut rng, config.restarts, &lo, &hi);
    let runs: Vec<(NelderMead, Option<Error>)> = starts
        .par_iter()
        .map(|x0| {
            let mut first_err = None;
            let nm = nelder_mead(
                |x| match objective(x) {
                    Ok((ll, _)) if ll.is_finite() => -ll,
                    Ok(_) => f64::INFINITY,
                    Err(e) => {
                        first_err.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                x0,
                &lo,
                &hi,
                config.tol,
                config.max_iter,
            );
            (nm, first_err)
        })
        .collect();
    let n_evals = runs.iter().map(|(r, _)| r.evals).sum();
    let failed = runs.iter().filter(|(r, _)| !r.f.is_finite()).count();
    let mut best: Option<(f64, Estimates, bool)> = None;
    for (r, _) in &runs {
        if !r.f.is_finite() {
            continue;
        }
        let (ll, est) = objective(&r.x)?;
        let better = match &best {
            None => true,
            Some((bl, be, _)) => ll > *bl || (ll == *bl && est.support < be.support),
        };
        if better {
            best = Some((ll, est, r.converged));
        }
    }
    let Some((ll, est, converged)) = best else {
        let why = runs.iter().find_map(|(_, e)| e.clone()).map_or("non-finite likelihood".to_string(), |e| e.to_string());
        return Err(Error::Fit(format!("all {} restarts failed; first failure: {why}", config.restarts)));
    };
    // the returned likelihood always comes from the exact kernel
    let exact = quadratic(&est.spec(template)?, est.nugget / est.sigma2, points, values).map(|q| q.loglik(est.sigma2)).unwrap_or(ll);
    finish(config, template, points, values, est, exact, converged, n_evals, failed)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    config: &FitConfig,
    template: &KernelSpec,
    points: &PointSet,
    values: &[f64],
    est: Estimates,
    loglik: f64,
    converged: bool,
    n_evals: usize,
    failed_restarts: usize,
) -> Result<FitResult> {
    let std_errors = if config.std_errors {
        let se = std_errors(template, &est, &config.free, points, values)?;
        Some(config.free.iter().zip(se).map(|(&param, value)| StdError { param, value }).collect())
    } else {
        None
    };
    Ok(FitResult {
        microergodic: microergodic(est.sigma2, est.support, est.kappa),
        estimates: est,
        loglik,
        std_errors,
        converged,
        n_evals,
        failed_restarts,
    })
}

/// Default relative finite-difference step for [`std_errors`].
pub const HESSIAN_STEP: f64 = 1e-4;

/// Standard errors from the inverse observed information, one per entry of `free`.
pub fn std_errors(
    template: &KernelSpec,
    estimates: &Estimates,
    free: &[Param],
    points: &PointSet,
    values: &[f64],
) -> Result<Vec<f64>> {
    std_errors_with_step(template, estimates, free, points, values, HESSIAN_STEP)
}

/// [`std_errors`] with an explicit relative step in the transformed scale.
pub fn std_errors_with_step(
    template: &KernelSpec,
    estimates: &Estimates,
    free: &[Param],
    points: &PointSet,
    values: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let k = free.len();
    let theta: Vec<f64> = free.iter().map(|&p| to_internal(p, estimates.get(p))).collect();
    let h: Vec<f64> = theta.iter().map(|t| step * t.abs().max(1.0)).collect();
    let nll = |x: &[f64]| -> Result<f64> {
        let mut e = *estimates;
        for (&p, &v) in free.iter().zip(x) {
            e.set(p, from_internal(p, v));
        }
        Ok(-quadratic(&e.spec(template)?, e.nugget / e.sigma2, points, values)?.loglik(e.sigma2))
    };
    let at = |di: &[(usize, f64)]| -> Result<f64> {
        let mut x = theta.clone();
        for &(i, s) in di {
            x[i] += s * h[i];
        }
        nll(&x)
    };
    let f0 = nll(&theta)?;
    let mut hess = DenseMatrix::zeros(k);
    for i in 0..k {
        let v = (at(&[(i, 1.0)])? - 2.0 * f0 + at(&[(i, -1.0)])?) / (h[i] * h[i]);
        hess.set(i, i, v);
        for j in 0..i {
            let v = (at(&[(i, 1.0), (j, 1.0)])? - at(&[(i, 1.0), (j, -1.0)])? - at(&[(i, -1.0), (j, 1.0)])?
                + at(&[(i, -1.0), (j, -1.0)])?)
                / (4.0 * h[i] * h[j]);
            hess.set(i, j, v);
            hess.set(j, i, v);
        }
    }
    let chol = cholesky_dense(&hess).map_err(|e| Error::Fit(format!("observed information is not invertible: {e}")))?;
    let mut out = Vec::with_capacity(k);
    for (i, &p) in free.iter().enumerate() {
        let mut unit = vec![0.0; k];
        unit[i] = 1.0;
        let var = chol.solve(&unit)?[i];
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::Fit(format!("non-positive variance for {p:?}")));
        }
        let se = var.sqrt();
        out.push(if p.is_log() { se * estimates.get(p) } else { se });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_examples() {
        let spec = KernelSpec::h(0.0, 1.0, 1.0, 2).unwrap();
        let p = PointSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let ll = loglik(&spec, 1.0, 0.0, &p, &[0.0]).unwrap();
        assert!((ll + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let pl = profile_loglik(&spec, &p, &[1.0]).unwrap();
        assert!((pl + 0.5 * ((2.0 * PI).ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn microergodic_examples() {
        assert_eq!(microergodic(1.0, 0.5, 0.0), 2.0);
        assert_eq!(microergodic(1.0, 0.5, 1.0), 8.0);
        let (k, a) = (1.0f64, 0.3f64);
        assert!((microergodic(a.powf(2.0 * k + 1.0), a, k) - microergodic(1.0, 1.0, k)).abs() < 1e-15);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.0, 1.5],
            &[-3.0, -3.0],
            &[3.0, 3.0],
            1e-14,
            10_000,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
        // minimum on the boundary
        let r = nelder_mead(|x| x[0], &[0.5], &[0.1], &[1.0], 1e-12, 1000);
        assert_eq!(r.x[0], 0.1);
    }

    #[test]
    fn config_validation() {
        let mut c = FitConfig::sigma2_support(0.05, 1.0);
        assert!(c.validate().is_ok());
        c.bounds.support = Bounds::new(0.0, 1.0);
        assert!(c.validate().is_err());
        let mut c = FitConfig::sigma2_support(0.05, 1.0);
        c.free.push(Param::Sigma2);
        assert!(c.validate().is_err());
    }
}
