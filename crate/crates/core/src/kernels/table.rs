//! Piecewise Chebyshev tabulation of a compactly supported correlation in `r = x/a`.
//!
//! Fitting loops re-evaluate the same correlation shape at many supports; the
//! table is built once from the exact evaluator, with every panel checked against
//! it, and then evaluated by Clenshaw recurrence.

use std::sync::Arc;

use super::{Correlation, Kernel, KernelSpec};
use crate::error::{Error, Result};

const DEGREE: usize = 16;
const MIN_WIDTH: f64 = 1e-9;
const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone)]
struct Panel {
    lo: f64,
    hi: f64,
    coefs: [f64; DEGREE + 1],
}

impl Panel {
    fn eval(&self, r: f64) -> f64 {
        let t = (2.0 * r - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefs[1..].iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coefs[0]
    }
}

fn fit_panel(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Panel> {
    let n = DEGREE + 1;
    let mut vals = [0.0; DEGREE + 1];
    for (k, v) in vals.iter_mut().enumerate() {
        let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
        *v = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * t)?;
    }
    let mut coefs = [0.0; DEGREE + 1];
    for (j, c) in coefs.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, v) in vals.iter().enumerate() {
            s += v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
        }
        *c = s * 2.0 / n as f64;
    }
    coefs[0] *= 0.5;
    Ok(Panel { lo, hi, coefs })
}

/// Tabulated `g(r) = φ(r·a)` on `r ∈ [0, 1)` for a compact correlation φ with support a.
#[derive(Debug, Clone)]
pub struct RadialTable {
    starts: Vec<f64>,
    panels: Vec<Panel>,
    max_error: f64,
}

impl RadialTable {
    /// Builds the table so that the checked deviation from the exact kernel stays
    /// below `tol` (absolute).
    pub fn new(kernel: &Kernel, tol: f64) -> Result<Self> {
        let a = kernel.support();
        if !a.is_finite() {
            return Err(Error::Precondition("tabulation needs a compactly supported kernel".into()));
        }
        let f = |r: f64| kernel.eval(r * a);
        let mut stack: Vec<(f64, f64)> = (0..8).rev().map(|i| (i as f64 / 8.0, (i + 1) as f64 / 8.0)).collect();
        let mut panels = Vec::new();
        let mut max_error = 0.0f64;
        while let Some((lo, hi)) = stack.pop() {
            let p = fit_panel(&f, lo, hi)?;
            let mut err = 0.0f64;
            for k in 0..=2 * DEGREE {
                let r = lo + (hi - lo) * (k as f64 + 0.5) / (2 * DEGREE + 1) as f64;
                err = err.max((p.eval(r) - f(r)?).abs());
            }
            if err > tol && hi - lo > MIN_WIDTH {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi));
                stack.push((lo, mid));
            } else {
                max_error = max_error.max(err);
                panels.push(p);
            }
            if panels.len() + stack.len() > MAX_PANELS {
                return Err(Error::Accuracy("correlation table needs too many panels".into()));
            }
        }
        let starts = panels.iter().map(|p| p.lo).collect();
        Ok(Self { starts, panels, max_error })
    }

    pub fn max_error(&self) -> f64 {
        self.max_error
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    /// `g(r)`; exactly 1 at 0 and exactly 0 for `r ≥ 1`.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        if r >= 1.0 {
            return 0.0;
        }
        let i = self.starts.partition_point(|&s| s <= r).saturating_sub(1);
        self.panels[i].eval(r)
    }
}

/// A tabulated correlation shape at a given support.
#[derive(Debug, Clone)]
pub struct TabulatedKernel {
    table: Arc<RadialTable>,
    support: f64,
}

impl TabulatedKernel {
    /// Tabulates the shape of `spec` (its support is irrelevant).
    pub fn shape(spec: &KernelSpec, tol: f64) -> Result<Arc<RadialTable>> {
        let unit = spec.resolve()?.with_support(1.0)?;
        Ok(Arc::new(RadialTable::new(&unit.compile()?, tol)?))
    }

    pub fn new(table: Arc<RadialTable>, support: f64) -> Self {
        Self { table, support }
    }
}

impl Correlation for TabulatedKernel {
    fn support(&self) -> f64 {
        self.support
    }

    fn correlation(&self, x: f64) -> Result<f64> {
        Ok(self.table.eval(x / self.support))
    }
}
