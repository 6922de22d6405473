//! Command-line front end.
//!
//! Every artifact records the tool version, the fully resolved command and the
//! seed, so `replay` can rebuild it from the artifact alone.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covmat::{assemble, simple_krige, PointSet, Storage, StorageHint};
use crate::error::Error;
use crate::kernels::{integral_range, EvalPath, Family, Kernel, KernelSpec};
use crate::mle::{fit, loglik, Bounds, FitConfig, Param};
use crate::sim::{perturbed_grid, run_mc_study, simulate_gaussian, tukey_h, GridDesign, McConfig, McOptions};

pub const TOOL: &str = "hyperkernel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage, input and numerical errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit status for invalid kernel parameters.
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Compactly supported hypergeometric correlation kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Matern,
    Gw,
    Gh,
    H,
    HReparamB,
    HReparamMu,
}

/// Kernel selection flags shared by most subcommands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Support of the GH and H families.
    #[arg(long)]
    pub a: Option<f64>,
    /// Support of the GW family.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Scale of the Matérn and reparameterized H families.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

impl KernelArgs {
    pub fn spec(&self) -> Result<KernelSpec, CliError> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Usage(format!("--{name} is required for this family")));
        let family = match self.family {
            FamilyArg::Matern => Family::Matern { nu: need(self.nu, "nu")?, alpha: need(self.alpha, "alpha")? },
            FamilyArg::Gw => Family::Gw { kappa: need(self.kappa, "kappa")?, mu: need(self.mu, "mu")?, beta: need(self.beta, "beta")? },
            FamilyArg::Gh => Family::Gh {
                delta: need(self.delta, "delta")?,
                beta: need(self.beta, "beta")?,
                gamma: need(self.gamma, "gamma")?,
                a: need(self.a, "a")?,
            },
            FamilyArg::H => Family::H { kappa: need(self.kappa, "kappa")?, mu: need(self.mu, "mu")?, a: need(self.a, "a")? },
            FamilyArg::HReparamB => {
                Family::HReparamB { kappa: need(self.kappa, "kappa")?, mu: need(self.mu, "mu")?, alpha: need(self.alpha, "alpha")? }
            }
            FamilyArg::HReparamMu => {
                Family::HReparamMu { kappa: need(self.kappa, "kappa")?, mu: need(self.mu, "mu")?, alpha: need(self.alpha, "alpha")? }
            }
        };
        KernelSpec::new(family, self.d).map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StorageArg {
    Dense,
    Csr,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Check kernel validity (exit 0 valid, 2 invalid).
    Validate {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
    },
    /// Tabulate φ(x) on an even grid.
    Eval {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
        /// Grid end (default: 1.25 × support, or 5 × scale for Matérn).
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Only the closed-form expression.
        #[arg(long, conflicts_with = "general")]
        closed_form: bool,
        /// Only the hypergeometric representation.
        #[arg(long)]
        general: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble a covariance matrix and write its non-zero entries.
    Covariance {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
        /// CSV with columns x1..xd.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.0)]
        nugget: f64,
        #[arg(long, value_enum, default_value_t = StorageArg::Csr)]
        storage: StorageArg,
        /// Triplet CSV (i, j, value) of the stored entries.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate Gaussian (optionally Tukey-h) fields by Cholesky factorization.
    Simulate {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
        /// CSV with columns x1..xd; otherwise a perturbed grid on the unit box.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        increment: f64,
        #[arg(long, default_value_t = 0.0)]
        perturbation: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.0)]
        nugget: f64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        tukey_h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum likelihood fit of a kernel to data.
    Fit {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
        /// CSV with columns x1..xd, value.
        #[arg(long)]
        data: PathBuf,
        /// JSON fit options.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simple kriging at target locations.
    Predict {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        data: PathBuf,
        /// CSV with columns x1..xd and an optional truth column.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.0)]
        nugget: f64,
        /// Prediction CSV; the JSON summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integral range of a kernel, or a table over κ and μ grids.
    IntegralRange {
        #[command(flatten)]
        #[serde(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        kappa_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        mu_grid: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo study of (σ², a) estimation for the H family.
    McStudy {
        #[arg(long, value_delimiter = ',', default_value = "0")]
        kappa: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        a: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        increment: f64,
        #[arg(long, default_value_t = 0.01)]
        perturbation: f64,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        #[arg(long, default_value_t = 5.0)]
        support_ratio: f64,
        /// JSON report destination (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tidy per-configuration summary CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-run the command recorded in an artifact and compare the output.
    Replay { artifact: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Eval { .. } => "eval",
            Command::Covariance { .. } => "covariance",
            Command::Simulate { .. } => "simulate",
            Command::Fit { .. } => "fit",
            Command::Predict { .. } => "predict",
            Command::IntegralRange { .. } => "integral-range",
            Command::McStudy { .. } => "mc-study",
            Command::Replay { .. } => "replay",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Simulate { seed, .. } | Command::McStudy { seed, .. } => Some(*seed),
            Command::Fit { seed, .. } => *seed,
            _ => None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invalid(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            _ => EXIT_ERROR,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) | CliError::Runtime(m) => m,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Json,
    Csv,
}

/// One output document and where it goes.
#[derive(Debug, Clone)]
struct Artifact {
    kind: Kind,
    text: String,
    dest: Option<PathBuf>,
}

struct Outcome {
    artifacts: Vec<Artifact>,
    code: i32,
}

fn header(cmd: &Command) -> Result<(Value, Value), CliError> {
    let config = serde_json::to_value(cmd).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((json!({ "name": TOOL, "version": VERSION }), config))
}

fn json_artifact(cmd: &Command, result: Value, dest: Option<PathBuf>) -> Result<Artifact, CliError> {
    json_artifact_seeded(cmd, cmd.seed(), result, dest)
}

fn json_artifact_seeded(cmd: &Command, seed: Option<u64>, result: Value, dest: Option<PathBuf>) -> Result<Artifact, CliError> {
    let (tool, config) = header(cmd)?;
    let doc = json!({ "tool": tool, "command": cmd.name(), "config": config, "seed": seed, "result": result });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    Ok(Artifact { kind: Kind::Json, text, dest })
}

fn csv_artifact(cmd: &Command, extra: &[(&str, String)], body: String, dest: Option<PathBuf>) -> Result<Artifact, CliError> {
    let (_, config) = header(cmd)?;
    let mut text = String::new();
    let _ = writeln!(text, "# tool: {TOOL} {VERSION}");
    let _ = writeln!(text, "# command: {}", cmd.name());
    let _ = writeln!(text, "# config: {config}");
    match cmd.seed() {
        Some(s) => {
            let _ = writeln!(text, "# seed: {s}");
        }
        None => text.push_str("# seed: none\n"),
    }
    for (k, v) in extra {
        let _ = writeln!(text, "# {k}: {v}");
    }
    text.push_str(&body);
    Ok(Artifact { kind: Kind::Csv, text, dest })
}

fn to_json<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(e.to_string()))
}

/// A numeric table read from CSV: header names and rows.
struct Table {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let names: Vec<String> = reader.headers().map_err(|e| io_err(path, e))?.iter().map(str::to_string).collect();
    if names.is_empty() {
        return Err(CliError::Usage(format!("{}: missing header row", path.display())));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Usage(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() {
            return Err(CliError::Usage(format!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                names.len(),
                rec.len()
            )));
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Usage(format!("{}: line {line}: '{f}' is not a finite number", path.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { names, rows })
}

fn points_of(rows: &[Vec<f64>], d: usize) -> Result<PointSet, CliError> {
    PointSet::new(d, rows.iter().flat_map(|r| r[..d].iter().copied()).collect()).map_err(CliError::from)
}

/// Locations from a CSV with columns x1..xd (extra columns ignored).
fn read_points(path: &Path, d: usize) -> Result<(PointSet, Table), CliError> {
    let t = read_table(path)?;
    if t.names.len() < d {
        return Err(CliError::Usage(format!("{}: expected at least {d} coordinate columns", path.display())));
    }
    Ok((points_of(&t.rows, d)?, t))
}

/// Locations and values from a CSV with columns x1..xd, value.
fn read_data(path: &Path, d: usize) -> Result<(PointSet, Vec<f64>), CliError> {
    let t = read_table(path)?;
    if t.names.len() != d + 1 {
        return Err(CliError::Usage(format!(
            "{}: expected columns x1..x{d},value but found {} columns",
            path.display(),
            t.names.len()
        )));
    }
    let values = t.rows.iter().map(|r| r[d]).collect();
    Ok((points_of(&t.rows, d)?, values))
}

fn coord_header(d: usize) -> String {
    (1..=d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",")
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let cells: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn require_valid(spec: &KernelSpec) -> Result<(), CliError> {
    let r = spec.validate();
    if r.valid {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("invalid kernel parameters: {}", r.binding_constraint)))
    }
}

/// Fit options read from the `--config` JSON; absent fields take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitFile {
    pub free: Option<Vec<Param>>,
    pub sigma2: Option<f64>,
    pub nugget: Option<f64>,
    pub sigma2_bounds: Option<Bounds>,
    pub support_bounds: Option<Bounds>,
    pub mu_bounds: Option<Bounds>,
    pub kappa_bounds: Option<Bounds>,
    pub nugget_bounds: Option<Bounds>,
    pub restarts: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub std_errors: Option<bool>,
}

impl FitFile {
    /// Resolved options; the default support interval is a tenth to ten times
    /// the template's support.
    pub fn resolve(&self, template: &KernelSpec, seed: Option<u64>) -> FitConfig {
        let s = template.support_param();
        let mut c = FitConfig::sigma2_support(s / 10.0, s * 10.0);
        if let Some(f) = &self.free {
            c.free = f.clone();
        }
        c.sigma2 = self.sigma2.unwrap_or(c.sigma2);
        c.nugget = self.nugget.unwrap_or(c.nugget);
        c.bounds.sigma2 = self.sigma2_bounds.unwrap_or(c.bounds.sigma2);
        c.bounds.support = self.support_bounds.unwrap_or(c.bounds.support);
        c.bounds.mu = self.mu_bounds.unwrap_or(c.bounds.mu);
        c.bounds.kappa = self.kappa_bounds.unwrap_or(c.bounds.kappa);
        c.bounds.nugget = self.nugget_bounds.unwrap_or(c.bounds.nugget);
        c.restarts = self.restarts.unwrap_or(c.restarts);
        c.tol = self.tol.unwrap_or(c.tol);
        c.max_iter = self.max_iter.unwrap_or(c.max_iter);
        c.seed = seed.or(self.seed).unwrap_or(c.seed);
        c.std_errors = self.std_errors.unwrap_or(true);
        c
    }
}

fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let ok = |artifacts| Ok(Outcome { artifacts, code: EXIT_OK });
    match cmd {
        Command::Validate { kernel } => {
            let spec = kernel.spec()?;
            let report = spec.validate();
            let code = if report.valid { EXIT_OK } else { EXIT_INVALID };
            let a = json_artifact(cmd, json!({ "spec": to_json(&spec)?, "report": to_json(&report)? }), None)?;
            Ok(Outcome { artifacts: vec![a], code })
        }
        Command::Eval { kernel, xmax, steps, closed_form, general, out } => {
            let spec = kernel.spec()?;
            require_valid(&spec)?;
            let path = if *closed_form {
                EvalPath::ClosedForm
            } else if *general {
                EvalPath::General
            } else {
                EvalPath::Auto
            };
            let k = Kernel::new(&spec, path)?;
            let xmax = match xmax {
                Some(x) if *x > 0.0 && x.is_finite() => *x,
                Some(x) => return Err(CliError::Usage(format!("--xmax must be positive, got {x}"))),
                None if k.support().is_finite() => 1.25 * k.support(),
                None => 5.0 * spec.support_param(),
            };
            if *steps == 0 {
                return Err(CliError::Usage("--steps must be positive".into()));
            }
            let mut body = String::from("x,phi\n");
            for i in 0..=*steps {
                let x = xmax * i as f64 / *steps as f64;
                push_row(&mut body, [x, k.eval(x)?]);
            }
            let extra = [("support", k.support().to_string()), ("closed_form", k.uses_closed_form().to_string())];
            ok(vec![csv_artifact(cmd, &extra, body, out.clone())?])
        }
        Command::Covariance { kernel, points, sigma2, nugget, storage, out } => {
            let spec = kernel.spec()?;
            require_valid(&spec)?;
            let (p, _) = read_points(points, spec.d)?;
            let hint = match storage {
                StorageArg::Dense => StorageHint::Dense,
                StorageArg::Csr => StorageHint::Csr,
            };
            let m = assemble(&spec, *sigma2, *nugget, &p, hint)?;
            let mut body = String::from("i,j,value\n");
            match m.storage() {
                Storage::Csr(c) => {
                    for i in 0..m.n() {
                        for k in c.row_ptr[i]..c.row_ptr[i + 1] {
                            let _ = writeln!(body, "{i},{},{}", c.col_idx[k], c.values[k]);
                        }
                    }
                }
                Storage::Dense(d) => {
                    for i in 0..m.n() {
                        for j in 0..m.n() {
                            let _ = writeln!(body, "{i},{j},{}", d.get(i, j));
                        }
                    }
                }
            }
            let summary = json!({
                "n": m.n(),
                "stored_entries": m.nnz(),
                "zero_entries": m.zero_count(),
                "pct_zero": m.pct_zero(),
                "pairs_examined": m.pairs_examined(),
            });
            let extra = [("pct_zero", m.pct_zero().to_string())];
            let mut arts = vec![json_artifact(cmd, summary, None)?];
            if out.is_some() {
                arts.push(csv_artifact(cmd, &extra, body, out.clone())?);
            }
            ok(arts)
        }
        Command::Simulate { kernel, points, increment, perturbation, sigma2, nugget, reps, seed, tukey_h: h, out } => {
            let spec = kernel.spec()?;
            require_valid(&spec)?;
            let p = match points {
                Some(path) => read_points(path, spec.d)?.0,
                None => perturbed_grid(&GridDesign {
                    increment: *increment,
                    lower: vec![0.0; spec.d],
                    upper: vec![1.0; spec.d],
                    perturbation: *perturbation,
                    seed: *seed,
                })?,
            };
            if *reps == 0 {
                return Err(CliError::Usage("--reps must be positive".into()));
            }
            // Tukey-h acts on unit-variance Gaussian marginals, scaled by σ afterwards
            let (s2, ng) = if h.is_some() { (1.0, nugget / sigma2) } else { (*sigma2, *nugget) };
            let mut fields = simulate_gaussian(&spec, s2, ng, &p, *reps, *seed)?;
            if let Some(h) = h {
                let scale = (1.0 + ng).sqrt();
                for f in &mut fields {
                    let z: Vec<f64> = f.iter().map(|v| v / scale).collect();
                    *f = tukey_h(&z, sigma2.sqrt(), *h)?;
                }
            }
            let d = spec.d;
            let mut body = coord_header(d);
            if *reps == 1 {
                body.push_str(",value\n");
            } else {
                for r in 1..=*reps {
                    let _ = write!(body, ",value_{r}");
                }
                body.push('\n');
            }
            for i in 0..p.len() {
                push_row(&mut body, p.point(i).iter().copied().chain(fields.iter().map(|f| f[i])));
            }
            ok(vec![csv_artifact(cmd, &[("n", p.len().to_string())], body, out.clone())?])
        }
        Command::Fit { kernel, data, config, seed, out } => {
            let spec = kernel.spec()?;
            require_valid(&spec)?;
            let (p, z) = read_data(data, spec.d)?;
            let file: FitFile = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                    serde_json::from_str(&text).map_err(|e| io_err(path, e))?
                }
                None => FitFile::default(),
            };
            let fc = file.resolve(&spec, *seed);
            let result = fit(&fc, &spec, &p, &z)?;
            let fitted = result.estimates.spec(&spec)?;
            let cov = assemble(&fitted, result.estimates.sigma2, result.estimates.nugget, &p, StorageHint::Csr)?;
            let k = fc.free.len() as f64;
            let aic = 2.0 * k - 2.0 * result.loglik;
            let body = json!({
                "fit_config": to_json(&fc)?,
                "fit": to_json(&result)?,
                "fitted_spec": to_json(&fitted)?,
                "n": p.len(),
                "k": fc.free.len(),
                "aic": aic,
                "pct_zero": cov.pct_zero(),
            });
            ok(vec![json_artifact_seeded(cmd, Some(fc.seed), body, out.clone())?])
        }
        Command::Predict { kernel, data, targets, sigma2, nugget, out } => {
            let spec = kernel.spec()?;
            require_valid(&spec)?;
            let d = spec.d;
            let (p, z) = read_data(data, d)?;
            let (t, table) = read_points(targets, d)?;
            let truth_col = table.names.iter().position(|n| n == "truth");
            let k = simple_krige(&spec, *sigma2, *nugget, &p, &z, &t)?;
            let mut body = coord_header(d);
            body.push_str(if truth_col.is_some() { ",prediction,variance,truth\n" } else { ",prediction,variance\n" });
            let mut sq = 0.0;
            let mut ab = 0.0;
            for i in 0..t.len() {
                let mut row: Vec<f64> = t.point(i).to_vec();
                row.extend([k.predictions[i], k.variances[i]]);
                if let Some(c) = truth_col {
                    let e = k.predictions[i] - table.rows[i][c];
                    sq += e * e;
                    ab += e.abs();
                    row.push(table.rows[i][c]);
                }
                push_row(&mut body, row);
            }
            let n = t.len().max(1) as f64;
            let (rmse, mae) = if truth_col.is_some() { (Some((sq / n).sqrt()), Some(ab / n)) } else { (None, None) };
            let ll = loglik(&spec, *sigma2, *nugget, &p, &z)?;
            let summary = json!({ "n_data": p.len(), "n_targets": t.len(), "rmse": rmse, "mae": mae, "data_loglik": ll });
            let mut arts = vec![json_artifact(cmd, summary, None)?];
            arts.push(csv_artifact(cmd, &[], body, out.clone())?);
            if out.is_none() {
                arts.pop();
            }
            ok(arts)
        }
        Command::IntegralRange { kernel, kappa_grid, mu_grid, out } => {
            if kappa_grid.is_empty() && mu_grid.is_empty() {
                let spec = kernel.spec()?;
                require_valid(&spec)?;
                let r = integral_range(&spec)?;
                return ok(vec![json_artifact(cmd, json!({ "spec": to_json(&spec)?, "integral_range": to_json(&r)? }), out.clone())?]);
            }
            let base = kernel.spec()?;
            let kappas = if kappa_grid.is_empty() { vec![base.kappa()] } else { kappa_grid.clone() };
            let mus = if mu_grid.is_empty() { base.mu().into_iter().collect() } else { mu_grid.clone() };
            if mus.is_empty() {
                return Err(CliError::Usage("--mu-grid needs a family with a mu parameter".into()));
            }
            let mut body = String::from("kappa,mu,valid,integral_range,method\n");
            for &kk in &kappas {
                for &mm in &mus {
                    let spec = base.with_shape(Some(kk), Some(mm))?;
                    match integral_range(&spec) {
                        Ok(r) => {
                            let method = to_json(&r.method)?;
                            let _ = writeln!(body, "{kk},{mm},true,{},{}", r.value, method.as_str().unwrap_or(""));
                        }
                        Err(Error::Precondition(_)) => {
                            let _ = writeln!(body, "{kk},{mm},false,,");
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            ok(vec![csv_artifact(cmd, &[], body, out.clone())?])
        }
        Command::McStudy { kappa, mu, a, increment, perturbation, reps, seed, restarts, support_ratio, out, csv } => {
            let configs: Vec<McConfig> = kappa
                .iter()
                .flat_map(|&k| mu.iter().flat_map(move |&m| a.iter().map(move |&s| McConfig { kappa: k, mu: m, a: s })))
                .collect();
            let design = GridDesign::unit_square(*increment, *perturbation, *seed);
            let options = McOptions { restarts: *restarts, support_ratio: *support_ratio, ..McOptions::default() };
            let report = run_mc_study(&configs, &design, *reps, *seed, &options)?;
            let mut arts = vec![json_artifact(cmd, to_json(&report)?, out.clone())?];
            if csv.is_some() {
                let mut body = String::from(
                    "kappa,mu,a,replicates,failures,sigma2_bias,sigma2_sd,sigma2_mc_se,a_bias,a_sd,a_mc_se,micro_bias,micro_sd,micro_mc_se\n",
                );
                for r in &report.configs {
                    push_row(
                        &mut body,
                        [
                            r.config.kappa,
                            r.config.mu,
                            r.config.a,
                            r.replicates as f64,
                            r.failures as f64,
                            r.sigma2.bias,
                            r.sigma2.sd,
                            r.sigma2.mc_se,
                            r.support.bias,
                            r.support.sd,
                            r.support.mc_se,
                            r.microergodic.bias,
                            r.microergodic.sd,
                            r.microergodic.mc_se,
                        ],
                    );
                }
                arts.push(csv_artifact(cmd, &[], body, csv.clone())?);
            }
            ok(arts)
        }
        Command::Replay { artifact } => replay(artifact),
    }
}

fn embedded_config(text: &str) -> Option<(Kind, Value)> {
    if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(text).ok()?;
        return Some((Kind::Json, doc.get("config")?.clone()));
    }
    let line = text.lines().find_map(|l| l.strip_prefix("# config: "))?;
    Some((Kind::Csv, serde_json::from_str(line).ok()?))
}

fn replay(path: &Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let (kind, config) =
        embedded_config(&text).ok_or_else(|| CliError::Usage(format!("{}: no embedded configuration", path.display())))?;
    let cmd: Command = serde_json::from_value(config).map_err(|e| io_err(path, e))?;
    if matches!(cmd, Command::Replay { .. }) {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    let rerun = execute(&cmd)?;
    let identical = rerun.artifacts.iter().any(|a| a.kind == kind && a.text == text);
    let summary = json!({ "artifact": path.display().to_string(), "command": cmd.name(), "identical": identical });
    let replay_cmd = Command::Replay { artifact: path.to_path_buf() };
    let a = json_artifact(&replay_cmd, summary, None)?;
    Ok(Outcome { artifacts: vec![a], code: if identical { EXIT_OK } else { EXIT_ERROR } })
}

fn configure_threads() {
    if let Some(n) = std::env::var("HYPERKERNEL_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // an already-initialized pool keeps its size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli.command) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                match &a.dest {
                    Some(p) => {
                        if let Err(e) = std::fs::write(p, &a.text) {
                            eprintln!("error: {}: {e}", p.display());
                            return EXIT_ERROR;
                        }
                    }
                    None => print!("{}", a.text),
                }
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            if let CliError::Usage(_) = e {
                let mut app = Cli::command();
                let usage = match app.find_subcommand_mut(cli.command.name()) {
                    Some(sub) => sub.clone().bin_name(format!("{TOOL} {}", cli.command.name())).render_usage(),
                    None => app.render_usage(),
                };
                eprintln!("\n{usage}");
            }
            e.code()
        }
    }
}
