//! C ABI over the hyperkernel library.
//!
//! Every fallible function returns an [`HkStatus`]. On failure a message is
//! kept per thread and read back with [`hk_last_error_message`]. Handles are
//! opaque; each `*_new` has a matching `*_free`.

#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hyperkernel::covmat::{assemble, simple_krige, CovMatrix, PointSet, StorageHint};
use hyperkernel::kernels::{integral_range, EvalPath, Family, Kernel, KernelSpec};
use hyperkernel::mle::{fit, loglik, FitConfig};
use hyperkernel::sim::simulate_gaussian;
use hyperkernel::spectral::spectral_density;
use hyperkernel::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HkStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Accuracy = 3,
    /// Invalid kernel parameters or a violated precondition.
    InvalidKernel = 4,
    NotPositiveDefinite = 5,
    DimensionMismatch = 6,
    FitFailed = 7,
    Panic = 8,
}

/// Storage layout requested for a covariance matrix.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HkStorage {
    Dense = 0,
    Csr = 1,
}

/// Opaque kernel handle.
pub struct HkKernel {
    spec: KernelSpec,
    compiled: Option<Kernel>,
}

/// Opaque covariance matrix handle.
pub struct HkCovMatrix {
    inner: CovMatrix,
}

/// Outcome of [`hk_fit_sigma2_support`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HkFitResult {
    pub sigma2: f64,
    pub support: f64,
    pub microergodic: f64,
    pub loglik: f64,
    pub converged: bool,
    pub n_evals: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HkStatus {
    match e {
        Error::Domain(_) => HkStatus::Domain,
        Error::Accuracy(_) => HkStatus::Accuracy,
        Error::Precondition(_) => HkStatus::InvalidKernel,
        Error::NotPositiveDefinite { .. } => HkStatus::NotPositiveDefinite,
        Error::DimensionMismatch { .. } => HkStatus::DimensionMismatch,
        Error::Fit(_) => HkStatus::FitFailed,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HkStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            HkStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            HkStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn view<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn view_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

impl HkKernel {
    fn compiled(&self) -> Result<&Kernel, Fail> {
        match &self.compiled {
            Some(k) => Ok(k),
            None => Err(Fail::Lib(Kernel::new(&self.spec, EvalPath::Auto).err().unwrap_or_else(|| {
                Error::Precondition("kernel could not be compiled".into())
            }))),
        }
    }

    unsafe fn points(&self, coords: *const f64, n: usize, what: &'static str) -> Result<PointSet, Fail> {
        let d = self.spec.d;
        let len = n.checked_mul(d).ok_or(Fail::Lib(Error::Domain("point count overflows".into())))?;
        Ok(PointSet::new(d, view(coords, len, what)?.to_vec())?)
    }
}

fn new_kernel(family: Family, d: usize, out_kernel: *mut *mut HkKernel) -> HkStatus {
    guard(|| {
        let slot = unsafe { out(out_kernel, "out_kernel") }?;
        *slot = ptr::null_mut();
        let spec = KernelSpec::new(family, d)?;
        let compiled = Kernel::new(&spec, EvalPath::Auto).ok();
        *slot = Box::into_raw(Box::new(HkKernel { spec, compiled }));
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing why the most recent call on this thread failed, or NULL
/// if it succeeded. The pointer is valid until the next call into the library
/// on the same thread.
#[no_mangle]
pub extern "C" fn hk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// ℋ(κ, μ, a) on ℝ^d. Invalid parameters still yield a handle so that
/// [`hk_kernel_validate`] can report on them; evaluation then fails.
#[no_mangle]
pub extern "C" fn hk_kernel_new_h(kappa: f64, mu: f64, a: f64, d: usize, out_kernel: *mut *mut HkKernel) -> HkStatus {
    new_kernel(Family::H { kappa, mu, a }, d, out_kernel)
}

/// Generalized Wendland kernel with support `beta`.
#[no_mangle]
pub extern "C" fn hk_kernel_new_gw(kappa: f64, mu: f64, beta: f64, d: usize, out_kernel: *mut *mut HkKernel) -> HkStatus {
    new_kernel(Family::Gw { kappa, mu, beta }, d, out_kernel)
}

/// Gauss hypergeometric kernel with support `a`.
#[no_mangle]
pub extern "C" fn hk_kernel_new_gh(
    delta: f64,
    beta: f64,
    gamma: f64,
    a: f64,
    d: usize,
    out_kernel: *mut *mut HkKernel,
) -> HkStatus {
    new_kernel(Family::Gh { delta, beta, gamma, a }, d, out_kernel)
}

#[no_mangle]
pub extern "C" fn hk_kernel_new_matern(nu: f64, alpha: f64, d: usize, out_kernel: *mut *mut HkKernel) -> HkStatus {
    new_kernel(Family::Matern { nu, alpha }, d, out_kernel)
}

#[no_mangle]
pub extern "C" fn hk_kernel_free(kernel: *mut HkKernel) {
    if !kernel.is_null() {
        drop(unsafe { Box::from_raw(kernel) });
    }
}

/// Writes 1 to `out_valid` for a valid kernel and 0 otherwise, and the lower
/// bound on μ (NaN when the family has none) to `out_mu_bound` if non-NULL.
#[no_mangle]
pub extern "C" fn hk_kernel_validate(kernel: *const HkKernel, out_valid: *mut i32, out_mu_bound: *mut f64) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        let valid = unsafe { out(out_valid, "out_valid") }?;
        let r = k.spec.validate();
        *valid = i32::from(r.valid);
        if let Some(b) = unsafe { out_mu_bound.as_mut() } {
            *b = r.lower_bound_mu.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Support radius (infinite for Matérn).
#[no_mangle]
pub extern "C" fn hk_kernel_support(kernel: *const HkKernel, out_support: *mut f64) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?.compiled()?;
        *unsafe { out(out_support, "out_support") }? = k.support();
        Ok(())
    })
}

/// φ at each of the `n` distances in `x`, written to `out_values`.
#[no_mangle]
pub extern "C" fn hk_kernel_eval(kernel: *const HkKernel, x: *const f64, n: usize, out_values: *mut f64) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?.compiled()?;
        let xs = unsafe { view(x, n, "x") }?;
        let ys = unsafe { view_mut(out_values, n, "out_values") }?;
        for (y, &x) in ys.iter_mut().zip(xs) {
            *y = k.eval(x)?;
        }
        Ok(())
    })
}

/// Spectral density at frequency norm `z`.
#[no_mangle]
pub extern "C" fn hk_spectral_density(kernel: *const HkKernel, z: f64, out_value: *mut f64) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        *unsafe { out(out_value, "out_value") }? = spectral_density(&k.spec, z)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn hk_integral_range(kernel: *const HkKernel, out_value: *mut f64) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        *unsafe { out(out_value, "out_value") }? = integral_range(&k.spec)?.value;
        Ok(())
    })
}

/// Covariance of `n` points given row-major in `coords` (`n × d`).
#[no_mangle]
pub extern "C" fn hk_covmat_new(
    kernel: *const HkKernel,
    sigma2: f64,
    nugget: f64,
    coords: *const f64,
    n: usize,
    storage: HkStorage,
    out_matrix: *mut *mut HkCovMatrix,
) -> HkStatus {
    guard(|| {
        let slot = unsafe { out(out_matrix, "out_matrix") }?;
        *slot = ptr::null_mut();
        let k = unsafe { deref(kernel, "kernel") }?;
        let p = unsafe { k.points(coords, n, "coords") }?;
        let hint = match storage {
            HkStorage::Dense => StorageHint::Dense,
            HkStorage::Csr => StorageHint::Csr,
        };
        let inner = assemble(&k.spec, sigma2, nugget, &p, hint)?;
        *slot = Box::into_raw(Box::new(HkCovMatrix { inner }));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn hk_covmat_free(matrix: *mut HkCovMatrix) {
    if !matrix.is_null() {
        drop(unsafe { Box::from_raw(matrix) });
    }
}

/// Entry (i, j); 0 outside the matrix.
#[no_mangle]
pub extern "C" fn hk_covmat_get(matrix: *const HkCovMatrix, i: usize, j: usize) -> f64 {
    match unsafe { matrix.as_ref() } {
        Some(m) if i < m.inner.n() && j < m.inner.n() => m.inner.get(i, j),
        _ => 0.0,
    }
}

/// Dimension, stored entries and percentage of exact zeros.
#[no_mangle]
pub extern "C" fn hk_covmat_info(matrix: *const HkCovMatrix, out_n: *mut usize, out_nnz: *mut usize, out_pct_zero: *mut f64) -> HkStatus {
    guard(|| {
        let m = &unsafe { deref(matrix, "matrix") }?.inner;
        *unsafe { out(out_n, "out_n") }? = m.n();
        *unsafe { out(out_nnz, "out_nnz") }? = m.nnz();
        *unsafe { out(out_pct_zero, "out_pct_zero") }? = m.pct_zero();
        Ok(())
    })
}

/// Gaussian log-likelihood of `values` observed at `coords`.
#[no_mangle]
pub extern "C" fn hk_loglik(
    kernel: *const HkKernel,
    sigma2: f64,
    nugget: f64,
    coords: *const f64,
    values: *const f64,
    n: usize,
    out_value: *mut f64,
) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        let p = unsafe { k.points(coords, n, "coords") }?;
        let z = unsafe { view(values, n, "values") }?;
        *unsafe { out(out_value, "out_value") }? = loglik(&k.spec, sigma2, nugget, &p, z)?;
        Ok(())
    })
}

/// `reps` fields at `n` points; replicate `r` fills `out_fields[r*n .. (r+1)*n]`.
#[no_mangle]
pub extern "C" fn hk_simulate(
    kernel: *const HkKernel,
    sigma2: f64,
    nugget: f64,
    coords: *const f64,
    n: usize,
    reps: usize,
    seed: u64,
    out_fields: *mut f64,
) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        let p = unsafe { k.points(coords, n, "coords") }?;
        let len = n.checked_mul(reps).ok_or(Fail::Lib(Error::Domain("field size overflows".into())))?;
        let dst = unsafe { view_mut(out_fields, len, "out_fields") }?;
        let fields = simulate_gaussian(&k.spec, sigma2, nugget, &p, reps, seed)?;
        for (chunk, f) in dst.chunks_mut(n.max(1)).zip(&fields) {
            chunk.copy_from_slice(f);
        }
        Ok(())
    })
}

/// Simple kriging predictions and variances at `m` targets.
#[no_mangle]
pub extern "C" fn hk_krige(
    kernel: *const HkKernel,
    sigma2: f64,
    nugget: f64,
    coords: *const f64,
    values: *const f64,
    n: usize,
    targets: *const f64,
    m: usize,
    out_pred: *mut f64,
    out_var: *mut f64,
) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        let p = unsafe { k.points(coords, n, "coords") }?;
        let t = unsafe { k.points(targets, m, "targets") }?;
        let z = unsafe { view(values, n, "values") }?;
        let pred = unsafe { view_mut(out_pred, m, "out_pred") }?;
        let var = unsafe { view_mut(out_var, m, "out_var") }?;
        let r = simple_krige(&k.spec, sigma2, nugget, &p, z, &t)?;
        pred.copy_from_slice(&r.predictions);
        var.copy_from_slice(&r.variances);
        Ok(())
    })
}

/// Maximum likelihood (σ², support) with the shape of `kernel` held fixed and
/// the support searched in `[a_lo, a_hi]`.
#[no_mangle]
pub extern "C" fn hk_fit_sigma2_support(
    kernel: *const HkKernel,
    coords: *const f64,
    values: *const f64,
    n: usize,
    a_lo: f64,
    a_hi: f64,
    restarts: usize,
    seed: u64,
    out_result: *mut HkFitResult,
) -> HkStatus {
    guard(|| {
        let k = unsafe { deref(kernel, "kernel") }?;
        let res = unsafe { out(out_result, "out_result") }?;
        let p = unsafe { k.points(coords, n, "coords") }?;
        let z = unsafe { view(values, n, "values") }?;
        let mut config = FitConfig::sigma2_support(a_lo, a_hi);
        config.restarts = restarts;
        config.seed = seed;
        let r = fit(&config, &k.spec, &p, z)?;
        *res = HkFitResult {
            sigma2: r.estimates.sigma2,
            support: r.estimates.support,
            microergodic: r.microergodic,
            loglik: r.loglik,
            converged: r.converged,
            n_evals: r.n_evals,
        };
        Ok(())
    })
}
