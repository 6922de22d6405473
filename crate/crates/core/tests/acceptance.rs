//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hyperkernel::covmat::{assemble, pairwise_dist, simple_krige, PointSet, StorageHint};
use hyperkernel::kernels::{
    closed_form_h, gh_mu_min, gh_scale_mixture, integral_range, integral_range_klm, integral_range_quadrature, EvalPath,
    Kernel, RangeMethod,
};
use hyperkernel::mle::{loglik, sigma2_hat};
use hyperkernel::sim::{
    perturbed_grid, run_mc_study, simulate_gaussian, standard_normal, stream_rng, uniform_open, GridDesign, McConfig,
    McOptions,
};
use hyperkernel::spectral::{hankel_spectral_quadrature, spectral_density};
use hyperkernel::KernelSpec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn h(kappa: f64, mu: f64, a: f64, d: usize) -> Result<KernelSpec, String> {
    ok(KernelSpec::h(kappa, mu, a, d))
}

fn general(kappa: f64, mu: f64, a: f64, d: usize) -> Result<Kernel, String> {
    ok(Kernel::new(&h(kappa, mu, a, d)?, EvalPath::General))
}

fn random_points(seed: u64, n: usize, d: usize, scale: f64) -> PointSet {
    let mut rng = stream_rng(seed, 1);
    PointSet::new(d, (0..n * d).map(|_| scale * uniform_open(&mut rng)).collect()).unwrap()
}

fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, 2);
    (0..n).map(|_| standard_normal(&mut rng)).collect()
}

fn dense_cov(spec: &KernelSpec, sigma2: f64, nugget: f64, p: &PointSet) -> Result<DMatrix<f64>, String> {
    let dist = pairwise_dist(p);
    let n = p.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = sigma2 * ok(spec.correlation(dist.get(i, j)))? + if i == j { nugget } else { 0.0 };
        }
    }
    Ok(m)
}

fn sample_stats(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

fn closed_form_equivalence() -> Outcome {
    type Named = (&'static str, f64, f64, usize, fn(f64) -> f64);
    let named: [Named; 8] = [
        ("triangular", 0.0, 1.0, 1, |r| 1.0 - r),
        ("spherical", 0.0, 1.0, 3, |r| 1.0 - 1.5 * r + 0.5 * r.powi(3)),
        ("pentaspherical", 0.0, 1.0, 5, |r| 1.0 - 15.0 * r / 8.0 + 5.0 * r.powi(3) / 4.0 - 3.0 * r.powi(5) / 8.0),
        ("cubic", 1.0, 1.0, 3, |r| 1.0 - 7.0 * r * r + 35.0 * r.powi(3) / 4.0 - 3.5 * r.powi(5) + 0.75 * r.powi(7)),
        ("penta", 2.0, 1.0, 3, |r| {
            1.0 - 22.0 * r * r / 3.0 + 33.0 * r.powi(4) - 38.5 * r.powi(5) + 16.5 * r.powi(7) - 5.5 * r.powi(9)
                + 5.0 * r.powi(11) / 6.0
        }),
        ("circular", 0.0, 1.0, 2, |r| {
            let s = (1.0 - r * r).sqrt();
            2.0 / PI * (s.asin() - r * s)
        }),
        ("kappa 1/2", 0.5, 1.0, 2, |r| {
            if r == 0.0 {
                return 1.0;
            }
            let s = (1.0 - r * r).sqrt();
            (1.0 + r * r / 2.0) * s - r * r * (2.0 - r * r / 2.0) * s.atanh()
        }),
        ("kappa 1", 1.0, 1.0, 2, |r| {
            let w = 1.0 - r * r;
            let s = w.sqrt();
            2.0 / (3.0 * PI) * (r * s * (15.0 - 4.0 * w * (3.0 - r * r)) + 3.0 * (6.0 * w - 5.0) * s.asin())
        }),
    ];
    let a = 0.8;
    let grid: Vec<f64> = (0..50).map(|i| a * i as f64 / 49.0).collect();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (name, kappa, mu, d, f) in named {
        let k = general(kappa, mu, a, d)?;
        for &x in &grid {
            let want = if x >= a { 0.0 } else { f(x / a) };
            let got = ok(k.eval(x))?;
            let gap = (got - want).abs();
            worst = worst.max(gap);
            ensure!(gap <= 1e-9, "{name} at x={x}: general {got} vs closed {want}");
        }
        cases += 1;
    }
    let mut families = vec![];
    for kappa in [0.0, 1.0, 2.0] {
        for mu in [1.0, 2.0, 4.0] {
            families.push((kappa, mu, 1usize));
        }
    }
    for d in [3usize, 5] {
        for mu in [1.0, 3.0] {
            families.push((0.0, mu, d));
        }
    }
    for (kappa, mu, d) in families {
        let k = general(kappa, mu, a, d)?;
        for &x in &grid {
            let c = closed_form_h(kappa, mu, a, d, x).ok_or(format!("no closed form for ({kappa}, {mu}, d={d})"))?;
            let gap = (c - ok(k.eval(x))?).abs();
            worst = worst.max(gap);
            ensure!(gap <= 1e-9, "closed form ({kappa}, {mu}, d={d}) at x={x}: gap {gap:e}");
        }
        cases += 1;
    }
    Ok(format!("{cases} cases x 50 points, max gap {worst:.2e}"))
}

fn validity_sharpness() -> Outcome {
    let mut rng = stream_rng(2024, 0);
    let mut worst = f64::INFINITY;
    for c in 0..30u64 {
        let d = 1 + (c % 3) as usize;
        let kappa = -0.45 + 2.45 * uniform_open(&mut rng);
        let a = 0.1 + 0.9 * uniform_open(&mut rng);
        let n = 20 + (uniform_open(&mut rng) * 181.0) as usize;
        let spec = h(kappa, 1.0, a, d)?;
        let p = random_points(500 + c, n.min(200), d, 1.0);
        let m = dense_cov(&spec, 1.0, 0.0, &p)?;
        let min = SymmetricEigen::new(m).eigenvalues.min();
        worst = worst.min(min);
        ensure!(min >= -1e-8, "config {c} (kappa={kappa}, a={a}, d={d}, n={n}): min eigenvalue {min:e}");
    }
    let bad = h(0.0, 0.8, 1.0, 1)?;
    let mut min_density = f64::INFINITY;
    let mut at = 0.0;
    for i in 0..=400 {
        let z = 0.25 * i as f64;
        let v = ok(hankel_spectral_quadrature(&bad, z))?;
        if v < min_density {
            min_density = v;
            at = z;
        }
    }
    ensure!(min_density < 0.0, "no negative spectral density for mu=0.8 on [0, 100] (min {min_density:e})");
    Ok(format!("min eigenvalue {worst:.2e} over 30 configs; mu=0.8 density {min_density:.3e} at z={at}"))
}

fn integral_range_checks() -> Outcome {
    let mut specs = vec![];
    for (kappa, mu, a, d) in [
        (0.0, 1.0, 1.0, 1usize),
        (0.0, 2.0, 0.7, 2),
        (0.5, 1.0, 1.3, 2),
        (1.0, 3.0, 0.5, 3),
        (-0.3, 1.5, 1.0, 1),
        (2.0, 4.0, 2.0, 2),
        (0.25, 6.0, 1.0, 3),
        (1.5, 1.0, 0.9, 1),
        (0.0, 8.0, 1.5, 2),
        (0.75, 2.5, 1.1, 3),
    ] {
        specs.push(h(kappa, mu, a, d)?);
    }
    for (nu, alpha, d) in [(0.5, 1.0, 1usize), (1.5, 0.3, 2), (2.5, 0.7, 3), (0.8, 1.2, 2), (3.0, 0.5, 1)] {
        specs.push(ok(KernelSpec::matern(nu, alpha, d))?);
    }
    // GH members with l away from d/2 + κ
    for (kappa, l, extra, a, d) in [(0.0, 0.3, 0.5, 1.0, 2usize), (1.0, 3.0, 0.2, 0.8, 2), (0.5, 0.0, 1.0, 1.0, 1), (0.0, 2.0, 0.0, 1.2, 3), (2.0, 1.0, 2.0, 1.0, 2)] {
        let df = d as f64;
        let delta = (df + 1.0) / 2.0 + kappa;
        let mu = gh_mu_min(kappa, l, d) + extra;
        specs.push(ok(KernelSpec::gh(delta, delta + mu / 2.0, delta + mu / 2.0 + l, a, d))?);
    }
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let c = ok(integral_range(spec)).map_err(|e| format!("{spec:?}: {e}"))?;
        ensure!(c.method == RangeMethod::ClosedForm, "{spec:?} has no closed form");
        let q = ok(integral_range_quadrature(spec)).map_err(|e| format!("{spec:?} quad: {e}"))?.value;
        let rel = ((c.value - q) / q).abs();
        worst = worst.max(rel);
        ensure!(rel <= 1e-6, "{spec:?}: closed {} vs quadrature {q}", c.value);
    }
    let anchor = ok(integral_range(&h(0.0, 1.0, 1.0, 1)?))?.value;
    ensure!((anchor - 0.5).abs() <= 1e-12, "triangle integral range {anchor}");
    for d in 1..=3usize {
        for kappa in [0.0, 0.5, 1.0, 2.0] {
            let l0 = d as f64 / 2.0 + kappa;
            let mut prev = f64::INFINITY;
            for mu in [1.0, 2.0, 4.0, 8.0, 16.0] {
                let v = ok(integral_range_klm(kappa, mu, l0, 1.0, d))?;
                ensure!(v <= prev, "A not non-increasing in mu at kappa={kappa}, d={d}, mu={mu}");
                prev = v;
            }
            let best = ok(integral_range_klm(kappa, 1.0, l0, 1.0, d))?;
            for i in 0..20 {
                let l = (d as f64 + 2.0 * kappa) * i as f64 / 19.0;
                let v = ok(integral_range_klm(kappa, gh_mu_min(kappa, l, d), l, 1.0, d))?;
                ensure!(v <= best * (1.0 + 1e-12), "l={l} beats l=d/2+kappa at kappa={kappa}, d={d}: {v} > {best}");
            }
        }
    }
    Ok(format!("{} specs, max relative gap {worst:.2e}; anchor {anchor}", specs.len()))
}

fn matern_limit() -> Outcome {
    let alpha = 0.2;
    let xs: Vec<f64> = (0..=300).map(|i| 2.0 * i as f64 / 300.0).collect();
    let mut notes = vec![];
    for kappa in [0.0, 1.0] {
        let mt = ok(Kernel::new(&ok(KernelSpec::matern(kappa + 0.5, alpha, 2))?, EvalPath::Auto))?;
        let sup = |spec: KernelSpec| -> Result<f64, String> {
            let k = ok(spec.compile())?;
            xs.iter().map(|&x| Ok((ok(k.eval(x))? - ok(mt.eval(x))?).abs())).try_fold(0.0f64, |m, v: Result<f64, String>| Ok(m.max(v?)))
        };
        for (name, make) in [
            ("b", KernelSpec::h_reparam_b as fn(f64, f64, f64, usize) -> hyperkernel::Result<KernelSpec>),
            ("mu*alpha", KernelSpec::h_reparam_mu),
        ] {
            let far = sup(ok(make(kappa, 1000.0, alpha, 2))?)?;
            let near = sup(ok(make(kappa, 10.0, alpha, 2))?)?;
            ensure!(far < 0.01 && far < near, "kappa={kappa} {name}: sup at mu=1000 {far:e}, at mu=10 {near:e}");
            notes.push(format!("k={kappa} {name}: {far:.1e}<{near:.1e}"));
        }
    }
    Ok(notes.join("; "))
}

fn scale_mixture() -> Outcome {
    let k = ok(h(0.0, 3.0, 1.0, 1)?.compile())?;
    let mut worst: f64 = 0.0;
    for x in [0.1, 0.4, 0.8] {
        let m = ok(gh_scale_mixture(0.0, 3.0, 0.5, 1.0, 1, x, 1e-6))?;
        let gap = (m - ok(k.eval(x))?).abs();
        worst = worst.max(gap);
        ensure!(gap <= 1e-4, "x={x}: mixture {m} vs direct");
    }
    Ok(format!("max gap {worst:.2e}"))
}

fn spectral_oracle() -> Outcome {
    let specs = [
        h(0.0, 1.0, 1.0, 1)?,
        h(0.0, 4.0, 0.8, 2)?,
        h(1.0, 2.0, 1.3, 2)?,
        h(0.5, 1.5, 1.0, 3)?,
        h(0.25, 3.0, 0.5, 1)?,
        ok(KernelSpec::gw(0.0, 1.0, 1.0, 1))?,
        ok(KernelSpec::gw(1.0, 3.5, 1.2, 2))?,
        ok(KernelSpec::gw(0.5, 3.0, 0.9, 3))?,
        ok(KernelSpec::gw(2.0, 5.0, 1.0, 2))?,
        ok(KernelSpec::gw(0.0, 2.0, 0.6, 3))?,
    ];
    let mut worst: f64 = 0.0;
    for spec in &specs {
        for z in [0.1, 1.0, 5.0, 10.0] {
            let c = ok(spectral_density(spec, z))?;
            let q = ok(hankel_spectral_quadrature(spec, z))?;
            worst = worst.max((c - q).abs());
            ensure!((c - q).abs() <= 1e-6, "{spec:?} z={z}: {c} vs {q}");
        }
    }
    Ok(format!("10 specs x 4 frequencies, max gap {worst:.2e}"))
}

fn likelihood_oracles() -> Outcome {
    let cases = [
        (h(0.0, 4.0, 0.4, 2)?, 1.3, 0.0, 25usize),
        (h(1.0, 2.0, 0.6, 2)?, 0.7, 0.05, 20),
        (ok(KernelSpec::gw(0.5, 3.0, 0.5, 3))?, 2.0, 0.0, 25),
        (ok(KernelSpec::matern(1.5, 0.2, 2))?, 1.0, 0.1, 18),
        (h(0.0, 1.0, 0.3, 1)?, 1.1, 0.0, 15),
    ];
    let mut worst: f64 = 0.0;
    for (c, (spec, sigma2, nugget, n)) in cases.iter().enumerate() {
        let seed = 70 + c as u64;
        let p = random_points(seed, *n, spec.d, 1.0);
        let z = normals(seed, *n);
        let cov = dense_cov(spec, *sigma2, *nugget, &p)?;
        let chol = cov.clone().cholesky().ok_or("oracle Cholesky failed")?;
        let zv = DVector::from_column_slice(&z);
        let alpha = chol.solve(&zv);
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let want = -0.5 * (*n as f64 * (2.0 * PI).ln() + log_det + zv.dot(&alpha));
        let got = ok(loglik(spec, *sigma2, *nugget, &p, &z))?;
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() <= 1e-8, "case {c}: loglik {got} vs {want}");

        let r = dense_cov(spec, 1.0, 0.0, &p)?;
        let rz = r.clone().cholesky().ok_or("oracle Cholesky failed")?.solve(&zv);
        let s_want = zv.dot(&rz) / *n as f64;
        let s_got = ok(sigma2_hat(spec, &p, &z))?;
        worst = worst.max((s_got - s_want).abs());
        ensure!((s_got - s_want).abs() <= 1e-8 * s_want.max(1.0), "case {c}: sigma2_hat {s_got} vs {s_want}");
        // σ̂² maximizes the nugget-free likelihood along a fine σ² grid
        let at = ok(loglik(spec, s_got, 0.0, &p, &z))?;
        for k in 1..=50 {
            let s = s_got * (0.5 + k as f64 / 50.0);
            ensure!(ok(loglik(spec, s, 0.0, &p, &z))? <= at + 1e-12, "case {c}: sigma2 {s} beats sigma2_hat");
        }

        let t = random_points(seed + 100, 7, spec.d, 1.0);
        let kr = ok(simple_krige(spec, *sigma2, *nugget, &p, &z, &t))?;
        let kernel = ok(spec.compile())?;
        for j in 0..t.len() {
            let c0 = DVector::from_iterator(
                *n,
                (0..*n).map(|i| {
                    let dx: f64 = t.point(j).iter().zip(p.point(i)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    sigma2 * kernel.eval(dx).unwrap()
                }),
            );
            let pred = c0.dot(&alpha);
            let var = sigma2 + nugget - c0.dot(&chol.solve(&c0));
            let gap = (kr.predictions[j] - pred).abs().max((kr.variances[j] - var).abs());
            worst = worst.max(gap);
            ensure!(gap <= 1e-8, "case {c} target {j}: kriging gap {gap:e}");
        }
    }
    Ok(format!("5 instances (n <= 25), max gap {worst:.2e}"))
}

fn ratio_monotone() -> Outcome {
    let grid: Vec<f64> = (0..40).map(|i| 0.05 + 0.95 * i as f64 / 39.0).collect();
    let mut violations = 0;
    for seed in 0..20u64 {
        let p = random_points(3000 + seed, 50, 2, 1.0);
        let z = normals(3000 + seed, 50);
        let r: Vec<f64> = grid
            .iter()
            .map(|&a| Ok(ok(sigma2_hat(&h(0.0, 4.0, a, 2)?, &p, &z))? / a))
            .collect::<Result<_, String>>()?;
        violations += r.windows(2).filter(|w| w[1] > w[0] + 1e-10 * w[0].abs()).count();
    }
    ensure!(violations == 0, "{violations} increases of sigma2_hat(a)/a over the grid");
    Ok("20 datasets x 40 supports, ratio non-increasing, 0 violations".into())
}

fn desk_table() -> Outcome {
    let design = GridDesign::unit_square(0.05, 0.01, 20240);
    let configs = [
        McConfig { kappa: 0.0, mu: 4.0, a: 0.1 },
        McConfig { kappa: 0.0, mu: 4.0, a: 0.25 },
        McConfig { kappa: 0.0, mu: 4.0, a: 0.5 },
        McConfig { kappa: 0.0, mu: 6.0, a: 0.25 },
        McConfig { kappa: 0.0, mu: 8.0, a: 0.25 },
    ];
    let report = ok(run_mc_study(&configs, &design, 100, 7, &McOptions::default()))?;
    ensure!(report.n_points == 441, "design has {} points", report.n_points);
    let mut lines = vec![];
    let mut failures = vec![];
    for r in &report.configs {
        let c = r.config;
        lines.push(format!(
            "(mu={}, a={}): bias s2 {:+.4} (se {:.4}), bias a {:+.4} (se {:.4}), sd s2 {:.4}, failed {}",
            c.mu, c.a, r.sigma2.bias, r.sigma2.mc_se, r.support.bias, r.support.mc_se, r.sigma2.sd, r.failures
        ));
        if r.sigma2.bias.abs() > 3.0 * r.sigma2.mc_se {
            failures.push(format!("|bias(sigma2)| > 3 se at mu={}, a={}", c.mu, c.a));
        }
        if r.support.bias.abs() > 3.0 * r.support.mc_se {
            failures.push(format!("|bias(a)| > 3 se at mu={}, a={}", c.mu, c.a));
        }
    }
    let micro = |i: usize| report.configs[i].microergodic.sd;
    if !(micro(2) < micro(0)) {
        failures.push(format!("sd(micro) at a=0.5 ({}) not below a=0.1 ({})", micro(2), micro(0)));
    }
    // sd(σ̂²) over μ = 4, 6, 8 at a = 0.25, each sd carrying a standard error sd/√(2(m−1))
    for (i, j) in [(1usize, 3usize), (3, 4)] {
        let (a, b) = (&report.configs[i], &report.configs[j]);
        let se = |r: &hyperkernel::sim::McConfigReport| r.sigma2.sd / (2.0 * (r.replicates as f64 - 1.0)).sqrt();
        let tol = 2.0 * (se(a).powi(2) + se(b).powi(2)).sqrt();
        if b.sigma2.sd > a.sigma2.sd + tol {
            failures.push(format!("sd(sigma2) rises from mu={} to mu={} beyond 2 se", a.config.mu, b.config.mu));
        }
    }
    for l in &lines {
        println!("    {l}");
    }
    ensure!(failures.is_empty(), "{}", failures.join("; "));
    Ok(format!("5 configs x 100 replicates at n=441; sd(micro) a=0.1 {:.3}, a=0.5 {:.3}", micro(0), micro(2)))
}

fn normality() -> Outcome {
    let (a0, a_fixed, sigma0) = (0.5, 0.4, 1.0);
    let p = ok(perturbed_grid(&GridDesign::unit_square(0.05, 0.01, 31337)))?;
    let n = p.len() as f64;
    let truth = h(0.0, 4.0, a0, 2)?;
    let fixed = h(0.0, 4.0, a_fixed, 2)?;
    let fields = ok(simulate_gaussian(&truth, sigma0, 0.0, &p, 200, 99))?;
    let target = sigma0 / a0;
    let stats: Vec<f64> = fields
        .iter()
        .map(|z| Ok((n.sqrt() * (ok(sigma2_hat(&fixed, &p, z))? / a_fixed - target)) / (2f64.sqrt() * target)))
        .collect::<Result<_, String>>()?;
    let (mean, var) = sample_stats(&stats);
    ensure!(mean > -0.3 && mean < 0.3 && var > 0.7 && var < 1.4, "mean {mean:.4}, variance {var:.4}");
    Ok(format!("200 replicates at n=441, a fixed at {a_fixed} (a0={a0}): mean {mean:.4}, variance {var:.4}"))
}

fn sparsity() -> Outcome {
    let mut c = Vec::new();
    for i in 0..60 {
        for j in 0..60 {
            c.extend([i as f64, j as f64]);
        }
    }
    let p = ok(PointSet::new(2, c))?;
    let support = 6.0;
    let spec = h(0.0, 2.0, support, 2)?;
    let m = ok(assemble(&spec, 1.0, 0.0, &p, StorageHint::Csr))?;
    let n = p.len();
    let kernel = ok(spec.compile())?;
    let mut zeros = 0u64;
    for i in 0..n {
        for j in 0..n {
            if ok(kernel.eval(p.dist(i, j)))? == 0.0 {
                zeros += 1;
            }
        }
    }
    let total = (n * n) as f64;
    let covered = 1.0 - zeros as f64 / total;
    let touched = m.pairs_examined() as f64 / total;
    ensure!(m.zero_count() == zeros, "zero_count {} vs brute force {zeros}", m.zero_count());
    ensure!((m.pct_zero() - 100.0 * zeros as f64 / total).abs() < 1e-12, "pct_zero {}", m.pct_zero());
    ensure!(touched <= 0.1, "assembly examined {:.1}% of pairs", 100.0 * touched);
    Ok(format!("coverage {:.2}%, pairs examined {:.2}%, pct_zero {:.4}", 100.0 * covered, 100.0 * touched, m.pct_zero()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("closed-form equivalence", closed_form_equivalence, Duration::from_secs(5)),
        ("validity sharpness", validity_sharpness, Duration::from_secs(60)),
        ("integral range", integral_range_checks, Duration::from_secs(30)),
        ("Matern limit", matern_limit, Duration::from_secs(10)),
        ("scale-mixture identity", scale_mixture, Duration::from_secs(30)),
        ("spectral oracle", spectral_oracle, Duration::from_secs(60)),
        ("likelihood oracles", likelihood_oracles, Duration::from_secs(5)),
        ("variance ratio monotonicity", ratio_monotone, Duration::from_secs(30)),
        ("desk-scale bias and sd", desk_table, Duration::from_secs(15 * 60)),
        ("microergodic normality", normality, Duration::from_secs(20 * 60)),
        ("sparse assembly", sparsity, Duration::from_secs(30)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
