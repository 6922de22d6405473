//! Gaussian random-field simulation, perturbed grid designs, Tukey-h
//! transformation, empirical semivariograms and the Monte Carlo harness.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covmat::{assemble, cholesky, CholFactor, PointSet, StorageHint};
use crate::error::{domain, Error, Result};
use crate::kernels::KernelSpec;
use crate::mle::{fit, microergodic, FitConfig};

/// Generator for stream `stream` of seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the open interval (0, 1).
pub fn uniform_open(rng: &mut impl Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative accuracy).
pub fn inverse_normal(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.872_028_758_796_431e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_546,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];
    fn ratio(num: &[f64; 8], den: &[f64; 8], x: f64) -> f64 {
        let p = num.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let q = den.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        p / q
    }
    if !(p > 0.0 && p < 1.0) {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * ratio(&A, &B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let v = if r <= 5.0 { ratio(&C, &D, r - 1.6) } else { ratio(&E, &F, r - 5.0) };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    inverse_normal(uniform_open(rng))
}

/// Regular grid on a box with a per-coordinate uniform perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDesign {
    pub increment: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub perturbation: f64,
    pub seed: u64,
}

impl GridDesign {
    /// The unit square `[0, 1]²` with the given increment and perturbation.
    pub fn unit_square(increment: f64, perturbation: f64, seed: u64) -> Self {
        Self { increment, lower: vec![0.0, 0.0], upper: vec![1.0, 1.0], perturbation, seed }
    }

    /// Grid nodes per axis.
    pub fn counts(&self) -> Result<Vec<usize>> {
        if !(self.increment > 0.0 && self.increment.is_finite()) {
            return domain(format!("grid increment must be positive, got {}", self.increment));
        }
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::DimensionMismatch { expected: self.lower.len().max(1), got: self.upper.len() });
        }
        if !(self.perturbation >= 0.0 && self.perturbation < self.increment / 2.0) {
            return domain(format!(
                "perturbation half-width {} must lie in [0, increment/2)",
                self.perturbation
            ));
        }
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                let steps = (hi - lo) / self.increment;
                let m = steps.round();
                if !(hi > lo) || (steps - m).abs() > 1e-9 * steps.max(1.0) {
                    return domain(format!("increment {} does not divide [{lo}, {hi}]", self.increment));
                }
                Ok(m as usize + 1)
            })
            .collect()
    }
}

/// The design's grid, row-major with the last axis fastest, then perturbed.
pub fn perturbed_grid(design: &GridDesign) -> Result<PointSet> {
    let counts = design.counts()?;
    let d = counts.len();
    let n: usize = counts.iter().product();
    let mut rng = stream_rng(design.seed, 0);
    let mut coords = Vec::with_capacity(n * d);
    let mut idx = vec![0usize; d];
    for _ in 0..n {
        for k in 0..d {
            let base = design.lower[k] + idx[k] as f64 * design.increment;
            let shift = if design.perturbation > 0.0 {
                design.perturbation * (2.0 * uniform_open(&mut rng) - 1.0)
            } else {
                0.0
            };
            coords.push(base + shift);
        }
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    PointSet::new(d, coords)
}

/// One replicate `L·ε` for a precomputed factor, drawing ε from stream `stream`.
pub fn draw(chol: &CholFactor, seed: u64, stream: u64) -> Vec<f64> {
    let n = chol.n();
    let mut rng = stream_rng(seed, stream);
    let eps: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    (0..n).map(|i| (0..=i).map(|k| chol.get(i, k) * eps[k]).sum()).collect()
}

/// `n_reps` independent zero-mean Gaussian fields at `points`; replicate `r`
/// uses stream `r` of `seed`. Returned as `[replicate][point]`.
pub fn simulate_gaussian(
    spec: &KernelSpec,
    sigma2: f64,
    nugget: f64,
    points: &PointSet,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let cov = assemble(spec, sigma2, nugget, points, StorageHint::Dense)?;
    let chol = cholesky(&cov)?;
    Ok((0..n_reps as u64).into_par_iter().map(|r| draw(&chol, seed, r)).collect())
}

/// σ·z·exp(h z²/2) elementwise.
pub fn tukey_h(values: &[f64], sigma: f64, h: f64) -> Result<Vec<f64>> {
    if !(0.0..0.5).contains(&h) {
        return domain(format!("Tukey h must lie in [0, 1/2), got {h}"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("Tukey sigma must be positive, got {sigma}"));
    }
    Ok(values.iter().map(|&z| if h == 0.0 { sigma * z } else { sigma * z * (0.5 * h * z * z).exp() }).collect())
}

/// Binned Matheron semivariogram estimate. Empty bins have count 0 and a NaN
/// estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Semivariogram {
    pub centers: Vec<f64>,
    pub gamma: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn empirical_semivariogram(points: &PointSet, values: &[f64], n_bins: usize, max_dist: f64) -> Result<Semivariogram> {
    if values.len() != points.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: values.len() });
    }
    if points.len() < 2 || n_bins == 0 || !(max_dist > 0.0 && max_dist.is_finite()) {
        return domain("semivariogram needs at least two points, one bin and a positive maximum distance");
    }
    let width = max_dist / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0u64; n_bins];
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let x = points.dist(i, j);
            if x > max_dist {
                continue;
            }
            let b = ((x / width) as usize).min(n_bins - 1);
            let diff = values[i] - values[j];
            sums[b] += diff * diff;
            counts[b] += 1;
        }
    }
    let gamma = sums.iter().zip(&counts).map(|(&s, &c)| if c == 0 { f64::NAN } else { s / (2.0 * c as f64) }).collect();
    let centers = (0..n_bins).map(|b| (b as f64 + 0.5) * width).collect();
    Ok(Semivariogram { centers, gamma, counts })
}

/// One ℋ(κ, μ, a) scenario of a Monte Carlo study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub kappa: f64,
    pub mu: f64,
    pub a: f64,
}

/// Options for [`run_mc_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub sigma2: f64,
    /// The support search interval is `[a/ratio, a·ratio]`.
    pub support_ratio: f64,
    pub restarts: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { sigma2: 1.0, support_ratio: 5.0, restarts: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    /// Monte Carlo standard error of the mean, sd/√n.
    pub mc_se: f64,
}

impl Summary {
    pub fn of(values: &[f64], truth: f64) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::NAN };
        let sd = var.sqrt();
        Self { truth, mean, bias: mean - truth, sd, mc_se: sd / n.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfigReport {
    pub config: McConfig,
    pub replicates: usize,
    pub failures: usize,
    pub sigma2: Summary,
    pub support: Summary,
    pub microergodic: Summary,
    /// Per successful replicate: (σ̂², â).
    pub estimates: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStudyReport {
    pub seed: u64,
    pub replicates: usize,
    pub n_points: usize,
    pub configs: Vec<McConfigReport>,
}

/// Simulates and refits (σ², a) with κ and μ known for every configuration.
///
/// The design is perturbed once and shared by all replicates and
/// configurations. Configuration `c`, replicate `r` draws from stream
/// `(c << 32) | r`. Failed fits are excluded and counted.
pub fn run_mc_study(
    configs: &[McConfig],
    design: &GridDesign,
    n_reps: usize,
    seed: u64,
    options: &McOptions,
) -> Result<McStudyReport> {
    if n_reps == 0 {
        return domain("a Monte Carlo study needs at least one replicate");
    }
    let points = perturbed_grid(design)?;
    let d = points.dim();
    let mut reports = Vec::with_capacity(configs.len());
    for (ci, cfg) in configs.iter().enumerate() {
        let spec = KernelSpec::h(cfg.kappa, cfg.mu, cfg.a, d)?;
        spec.validate().valid.then_some(()).ok_or_else(|| {
            Error::Precondition(format!("invalid study configuration {cfg:?}: {}", spec.validate().binding_constraint))
        })?;
        let cov = assemble(&spec, options.sigma2, 0.0, &points, StorageHint::Dense)?;
        let chol = cholesky(&cov)?;
        let mut fit_config = FitConfig::sigma2_support(cfg.a / options.support_ratio, cfg.a * options.support_ratio);
        fit_config.restarts = options.restarts;
        let outcomes: Vec<Option<(f64, f64)>> = (0..n_reps as u64)
            .into_par_iter()
            .map(|r| {
                let stream = ((ci as u64) << 32) | r;
                let z = draw(&chol, seed, stream);
                let mut fc = fit_config.clone();
                fc.seed = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                fit(&fc, &spec, &points, &z).ok().map(|f| (f.estimates.sigma2, f.estimates.support))
            })
            .collect();
        let estimates: Vec<(f64, f64)> = outcomes.iter().flatten().copied().collect();
        let failures = n_reps - estimates.len();
        let s2: Vec<f64> = estimates.iter().map(|e| e.0).collect();
        let aa: Vec<f64> = estimates.iter().map(|e| e.1).collect();
        let me: Vec<f64> = estimates.iter().map(|e| microergodic(e.0, e.1, cfg.kappa)).collect();
        reports.push(McConfigReport {
            config: *cfg,
            replicates: n_reps,
            failures,
            sigma2: Summary::of(&s2, options.sigma2),
            support: Summary::of(&aa, cfg.a),
            microergodic: Summary::of(&me, microergodic(options.sigma2, cfg.a, cfg.kappa)),
            estimates,
        });
    }
    Ok(McStudyReport { seed, replicates: n_reps, n_points: points.len(), configs: reports })
}
