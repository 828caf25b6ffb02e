//! C ABI over `nrqmc`.
//!
//! Matrices, masks, solver configurations and reports are opaque handles
//! created by `*_new` functions and released with the matching `*_free`.
//! Every fallible call returns an [`NrqmcStatus`]; on failure a description is
//! available from [`nrqmc_last_error`] until the next failing call on the same
//! thread. Quaternion matrices cross the boundary as four row-major `double`
//! planes holding the real, `i`, `j` and `k` parts.
//!
//! The header `include/nrqmc.h` declares this interface.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nrqmc::imaging::{gen_mask, CorruptionSpec};
use nrqmc::prox::{prox_mcp, qgst, GstParams, McpParams};
use nrqmc::qcore::{mcp_norm, singular_values};
use nrqmc::solver::{self, ObservationMask, RecoveryReport, SolverConfig, TolMode};
use nrqmc::{Error, QMatrix, Quaternion};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NrqmcStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    Parameter = 3,
    Input = 4,
    Domain = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Quaternion matrix handle.
pub struct NrqmcMatrix(QMatrix);
/// Observation mask handle.
pub struct NrqmcMask(ObservationMask);
/// Solver configuration handle.
pub struct NrqmcConfig(SolverConfig);
/// Solver result handle.
pub struct NrqmcReport(RecoveryReport);

/// Scalar results of a solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NrqmcSummary {
    pub iterations: usize,
    pub converged: c_int,
    pub lambda: f64,
    pub r_grad: f64,
    pub r_sparse: f64,
    pub r_comp: f64,
    pub r_feas: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> NrqmcStatus {
    match e {
        Error::Dimension(_) => NrqmcStatus::Dimension,
        Error::Parameter(_) => NrqmcStatus::Parameter,
        Error::Input(_) => NrqmcStatus::Input,
        Error::Domain(_) => NrqmcStatus::Domain,
        Error::Numerical(_) => NrqmcStatus::Numerical,
        Error::Iteration { source, .. } => status_of(source),
        Error::Groups { first, .. } => status_of(first),
        Error::Io(_) | Error::Image(_) | Error::Json(_) => NrqmcStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult = std::result::Result<(), Failure>;

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> FfiResult) -> NrqmcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NrqmcStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            NrqmcStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            NrqmcStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> FfiResult {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice_in<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    (!p.is_null()).then(|| std::slice::from_raw_parts(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nrqmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nrqmc_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string has an interior NUL"),
    };
    VERSION.as_ptr()
}

/// Builds a `rows × cols` matrix from row-major planes of `rows·cols`
/// doubles. A null plane is taken as zero.
///
/// # Safety
/// Non-null plane pointers must reference `rows·cols` readable doubles, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_matrix_new(
    rows: usize,
    cols: usize,
    w: *const f64,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    out: *mut *mut NrqmcMatrix,
) -> NrqmcStatus {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or_else(|| Error::Dimension("size overflows".into()))?;
        let zero = vec![0.0; len];
        let plane = |p| slice_in(p, len).unwrap_or(&zero);
        let m = QMatrix::from_planes(rows, cols, plane(w), plane(x), plane(y), plane(z))?;
        write_out(out, boxed(NrqmcMatrix(m)), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_matrix_free(m: *mut NrqmcMatrix) {
    release(m)
}

/// # Safety
/// `m` must be a live handle; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_matrix_shape(
    m: *const NrqmcMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> NrqmcStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        write_out(rows, m.0.rows(), "rows")?;
        write_out(cols, m.0.cols(), "cols")
    })
}

/// Copies the planes out, row-major. Null destination planes are skipped;
/// `len` must equal `rows·cols`.
///
/// # Safety
/// `m` must be a live handle and non-null planes must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_matrix_planes(
    m: *const NrqmcMatrix,
    w: *mut f64,
    x: *mut f64,
    y: *mut f64,
    z: *mut f64,
    len: usize,
) -> NrqmcStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        if len != m.len() {
            return Err(Error::Dimension(format!("buffer of {len} for {} entries", m.len())).into());
        }
        let cols = m.cols();
        for (plane, dst) in m.planes().into_iter().zip([w, x, y, z]) {
            if dst.is_null() {
                continue;
            }
            let dst = std::slice::from_raw_parts_mut(dst, len);
            for (i, v) in dst.iter_mut().enumerate() {
                *v = plane[(i / cols, i % cols)];
            }
        }
        Ok(())
    })
}

/// Writes the `min(rows, cols)` singular values, descending.
///
/// # Safety
/// `m` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_matrix_singular_values(
    m: *const NrqmcMatrix,
    out: *mut f64,
    len: usize,
) -> NrqmcStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        let sigma = singular_values(m)?;
        if len != sigma.len() {
            return Err(Error::Dimension(format!("buffer of {len} for {} values", sigma.len())).into());
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&sigma);
        Ok(())
    })
}

/// MCP rank surrogate `Σ Φ_{c,η}(σ_i)`.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_mcp_norm(
    m: *const NrqmcMatrix,
    c: f64,
    eta: f64,
    out: *mut f64,
) -> NrqmcStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        let v = mcp_norm(m, McpParams::new(c, eta)?)?;
        write_out(out, v, "out")
    })
}

/// Mask from `rows·cols` row-major flags; nonzero means observed.
///
/// # Safety
/// `flags` must reference `rows·cols` readable bytes and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_mask_new(
    rows: usize,
    cols: usize,
    flags: *const u8,
    out: *mut *mut NrqmcMask,
) -> NrqmcStatus {
    guard(|| {
        if flags.is_null() {
            return Err(Failure::Null("flags"));
        }
        let len = rows.checked_mul(cols).ok_or_else(|| Error::Dimension("size overflows".into()))?;
        let flags = std::slice::from_raw_parts(flags, len);
        let mask = ObservationMask::from_flags(rows, cols, flags.iter().map(|&f| f != 0).collect())?;
        write_out(out, boxed(NrqmcMask(mask)), "out")
    })
}

/// Uniform mask observing `round(sr·rows·cols)` entries, reproducible per seed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_mask_random(
    rows: usize,
    cols: usize,
    sr: f64,
    seed: u64,
    out: *mut *mut NrqmcMask,
) -> NrqmcStatus {
    guard(|| {
        let spec = CorruptionSpec::new(sr, 0.0, seed)?;
        write_out(out, boxed(NrqmcMask(gen_mask(rows, cols, &spec))), "out")
    })
}

/// Number of observed entries.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_mask_count(m: *const NrqmcMask, out: *mut usize) -> NrqmcStatus {
    guard(|| {
        let m = borrow(m, "mask")?;
        write_out(out, m.0.count(), "out")
    })
}

/// # Safety
/// `m` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_mask_free(m: *mut NrqmcMask) {
    release(m)
}

/// A configuration holding the library defaults.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_new(out: *mut *mut NrqmcConfig) -> NrqmcStatus {
    guard(|| write_out(out, boxed(NrqmcConfig(SolverConfig::default())), "out"))
}

/// # Safety
/// `c` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_free(c: *mut NrqmcConfig) {
    release(c)
}

/// Applies `f` to a copy and keeps it only if the result validates.
unsafe fn edit_config(c: *mut NrqmcConfig, f: impl FnOnce(&mut SolverConfig)) -> NrqmcStatus {
    guard(|| {
        let c = borrow_mut(c, "config")?;
        let mut next = c.0.clone();
        f(&mut next);
        next.validate()?;
        c.0 = next;
        Ok(())
    })
}

/// Fixes the sparse weight; a value ≤ 0 restores the sampling-ratio default.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_set_lambda(c: *mut NrqmcConfig, lambda: f64) -> NrqmcStatus {
    edit_config(c, |cfg| cfg.lambda = (lambda > 0.0).then_some(lambda))
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_set_p(c: *mut NrqmcConfig, p: f64) -> NrqmcStatus {
    edit_config(c, |cfg| cfg.p = p)
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_set_mcp(c: *mut NrqmcConfig, mcp_c: f64, eta: f64) -> NrqmcStatus {
    edit_config(c, |cfg| cfg.mcp = McpParams { c: mcp_c, eta })
}

/// Stopping tolerance; `relative` nonzero scales it by `max(1, ‖X‖_F)`.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_set_tol(c: *mut NrqmcConfig, tol: f64, relative: c_int) -> NrqmcStatus {
    edit_config(c, |cfg| {
        cfg.tol = tol;
        cfg.tol_mode = if relative != 0 { TolMode::Relative } else { TolMode::Absolute };
    })
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_config_set_max_iters(c: *mut NrqmcConfig, max_iters: usize) -> NrqmcStatus {
    edit_config(c, |cfg| cfg.max_iters = max_iters)
}

/// Runs the solver on `x` observed at `mask`. A null `config` uses the defaults.
///
/// # Safety
/// `x` and `mask` must be live handles, `config` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_solve(
    x: *const NrqmcMatrix,
    mask: *const NrqmcMask,
    config: *const NrqmcConfig,
    out: *mut *mut NrqmcReport,
) -> NrqmcStatus {
    guard(|| {
        let x = borrow(x, "x")?;
        let mask = borrow(mask, "mask")?;
        let default = SolverConfig::default();
        let config = config.as_ref().map_or(&default, |c| &c.0);
        let report = solver::nrqmc_solve(&x.0, &mask.0, config)?;
        write_out(out, boxed(NrqmcReport(report)), "out")
    })
}

/// # Safety
/// `r` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_report_free(r: *mut NrqmcReport) {
    release(r)
}

/// A new matrix handle holding the recovered low-rank part.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_report_low_rank(r: *const NrqmcReport, out: *mut *mut NrqmcMatrix) -> NrqmcStatus {
    guard(|| {
        let r = borrow(r, "report")?;
        write_out(out, boxed(NrqmcMatrix(r.0.l.clone())), "out")
    })
}

/// A new matrix handle holding the sparse part (zero off the mask).
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_report_sparse(r: *const NrqmcReport, out: *mut *mut NrqmcMatrix) -> NrqmcStatus {
    guard(|| {
        let r = borrow(r, "report")?;
        write_out(out, boxed(NrqmcMatrix(r.0.s.clone())), "out")
    })
}

/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_report_summary(r: *const NrqmcReport, out: *mut NrqmcSummary) -> NrqmcStatus {
    guard(|| {
        let r = &borrow(r, "report")?.0;
        let summary = NrqmcSummary {
            iterations: r.iterations,
            converged: r.converged as c_int,
            lambda: r.lambda,
            r_grad: r.kkt.r_grad,
            r_sparse: r.kkt.r_sparse,
            r_comp: r.kkt.r_comp,
            r_feas: r.kkt.r_feas,
        };
        write_out(out, summary, "out")
    })
}

/// Scalar MCP proximal map `argmin_t Φ_{c,η}(|t|) + (μ/2)(t − y)²`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_prox_mcp(y: f64, mu: f64, c: f64, eta: f64, out: *mut f64) -> NrqmcStatus {
    guard(|| {
        if !(mu > 0.0) {
            return Err(Error::Parameter(format!("mu must be > 0, got {mu}")).into());
        }
        write_out(out, prox_mcp(y, mu, McpParams::new(c, eta)?), "out")
    })
}

/// Quaternion generalized soft thresholding of `q = (w, x, y, z)`.
///
/// # Safety
/// `q` must reference 4 readable doubles and `out` 4 writable ones.
#[no_mangle]
pub unsafe extern "C" fn nrqmc_qgst(q: *const f64, nu: f64, p: f64, iters: usize, out: *mut f64) -> NrqmcStatus {
    guard(|| {
        let q = slice_in(q, 4).ok_or(Failure::Null("q"))?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let r = qgst(Quaternion::new(q[0], q[1], q[2], q[3]), GstParams::new(nu, p, iters)?);
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&[r.w, r.x, r.y, r.z]);
        Ok(())
    })
}
