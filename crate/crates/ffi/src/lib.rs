//! C ABI over `jcsim`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Every fallible call returns a
//! [`JcStatus`]; on failure [`jc_last_error_message`] describes the error
//! raised most recently on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jcsim::hilbert::ModeSpace;
use jcsim::lindblad::SystemParams;
use jcsim::observables::{photon_number, q_function, qubit_moments, reduce_cavity, GridSpec};
use jcsim::pipeline::SolverConfig;
use jcsim::semiclassical::{mb_steady_roots, Stability};
use jcsim::steady::DensityMatrix;
use jcsim::JcError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Truncation = 4,
    SingularSystem = 5,
    NotConverged = 6,
    DimensionTooLarge = 7,
    SingularGammaTilde = 8,
    Numerical = 9,
    Io = 10,
    Panic = 11,
}

/// Stability codes written by [`jc_mb_roots`].
pub const JC_STABLE: c_int = 0;
pub const JC_UNSTABLE: c_int = 1;
pub const JC_MARGINAL: c_int = 2;
pub const JC_UNKNOWN: c_int = 3;

/// System parameters; rates in the same unit as `kappa`.
pub struct JcParams {
    inner: SystemParams,
}

/// A solved steady state.
pub struct JcState {
    rho: DensityMatrix,
    space: ModeSpace,
    residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &JcError) -> JcStatus {
    match e {
        JcError::InvalidParams(_)
        | JcError::Validation { .. }
        | JcError::Parse { .. }
        | JcError::DeltaZero => JcStatus::InvalidArgument,
        JcError::DimensionMismatch { .. } => JcStatus::InvalidArgument,
        JcError::Truncation { .. } | JcError::TruncationCapExceeded { .. } => JcStatus::Truncation,
        JcError::SingularSystem(_) | JcError::DegenerateNullSpace { .. } => {
            JcStatus::SingularSystem
        }
        JcError::NotConverged { .. }
        | JcError::ResidualTooLarge { .. }
        | JcError::StepSizeUnderflow { .. } => JcStatus::NotConverged,
        JcError::DimensionTooLarge { .. } => JcStatus::DimensionTooLarge,
        JcError::SingularGammaTilde => JcStatus::SingularGammaTilde,
        JcError::GridTooCoarse { .. } => JcStatus::Numerical,
        JcError::Io(_) | JcError::Json(_) => JcStatus::Io,
        JcError::Panel { source, .. } => status_of(source),
    }
}

/// Runs `f`, recording errors and panics for [`jc_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), (JcStatus, String)>) -> JcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            JcStatus::Panic
        }
    }
}

fn lib(e: JcError) -> (JcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (JcStatus, String) {
    (JcStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (JcStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(p: *mut T, name: &str, v: T) -> Result<(), (JcStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(v);
    Ok(())
}

/// Creates a parameter handle. Fails with `INVALID_ARGUMENT` for
/// non-finite values, `kappa <= 0`, or negative `g`, `gamma`, `eps_d`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn jc_params_new(
    g: f64,
    kappa: f64,
    gamma: f64,
    eps_d: f64,
    dwc: f64,
    delta: f64,
    out: *mut *mut JcParams,
) -> JcStatus {
    guard(|| {
        let inner = SystemParams::new(g, kappa, gamma, eps_d, dwc, delta).map_err(lib)?;
        write(out, "out", Box::into_raw(Box::new(JcParams { inner })))
    })
}

/// # Safety
/// `params` must be null or a handle from [`jc_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jc_params_free(params: *mut JcParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn solve(params: &JcParams, n_max: Option<usize>) -> Result<JcState, (JcStatus, String)> {
    let cfg = SolverConfig {
        n_max,
        ..SolverConfig::default()
    };
    let sol = cfg.solve(&params.inner).map_err(lib)?;
    Ok(JcState {
        rho: sol.rho,
        space: sol.space,
        residual: sol.report.residual_norm,
    })
}

/// Steady state at a fixed Fock cutoff `n_max` (direct sparse solve).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_steady_state(
    params: *const JcParams,
    n_max: usize,
    out: *mut *mut JcState,
) -> JcStatus {
    guard(|| {
        let p = deref(params, "params")?;
        if n_max < 1 {
            return Err((JcStatus::InvalidArgument, "n_max must be at least 1".into()));
        }
        let s = solve(p, Some(n_max))?;
        write(out, "out", Box::into_raw(Box::new(s)))
    })
}

/// Steady state with the cutoff grown until ⟨n⟩ and the Fock tail settle.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_steady_state_auto(
    params: *const JcParams,
    out: *mut *mut JcState,
) -> JcStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let s = solve(p, None)?;
        write(out, "out", Box::into_raw(Box::new(s)))
    })
}

/// # Safety
/// `state` must be null or a handle from a steady-state call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jc_state_free(state: *mut JcState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `n_max` and `residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_state_info(
    state: *const JcState,
    n_max: *mut usize,
    residual: *mut f64,
) -> JcStatus {
    guard(|| {
        let s = deref(state, "state")?;
        write(n_max, "n_max", s.space.n_max())?;
        write(residual, "residual", s.residual)
    })
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_state_photon_number(state: *const JcState, out: *mut f64) -> JcStatus {
    guard(|| {
        let s = deref(state, "state")?;
        write(out, "out", photon_number(&s.rho, s.space).map_err(lib)?)
    })
}

/// ⟨σ−⟩ and the Bloch vector `(x, y, z)` written to `bloch[0..3]`.
///
/// # Safety
/// `state` must be a live handle; `re`, `im` writable; `bloch` must point to
/// at least three doubles.
#[no_mangle]
pub unsafe extern "C" fn jc_state_qubit(
    state: *const JcState,
    re: *mut f64,
    im: *mut f64,
    bloch: *mut f64,
) -> JcStatus {
    guard(|| {
        let s = deref(state, "state")?;
        if bloch.is_null() {
            return Err(null("bloch"));
        }
        let (sm, b) = qubit_moments(&s.rho, s.space).map_err(lib)?;
        write(re, "re", sm.re)?;
        write(im, "im", sm.im)?;
        let out = std::slice::from_raw_parts_mut(bloch, 3);
        out.copy_from_slice(&[b.x, b.y, b.z]);
        Ok(())
    })
}

/// Q function of the cavity on a `points × points` grid over
/// `[-half_width, half_width]²`, row-major with y as the slow index.
/// `half_width <= 0` selects √⟨n⟩ + 5.
///
/// # Safety
/// `state` must be a live handle; `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn jc_state_q_function(
    state: *const JcState,
    half_width: f64,
    points: usize,
    buf: *mut f64,
    len: usize,
) -> JcStatus {
    guard(|| {
        let s = deref(state, "state")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if points < 2 || !half_width.is_finite() {
            return Err((
                JcStatus::InvalidArgument,
                "need points >= 2 and a finite half width".into(),
            ));
        }
        let need = points.saturating_mul(points);
        if len < need {
            return Err((
                JcStatus::BufferTooSmall,
                format!("buffer holds {len} values, grid needs {need}"),
            ));
        }
        let hw = if half_width > 0.0 {
            half_width
        } else {
            photon_number(&s.rho, s.space).map_err(lib)?.max(0.0).sqrt() + 5.0
        };
        let rc = reduce_cavity(&s.rho, s.space).map_err(lib)?;
        let q = q_function(&rc, &GridSpec::square(hw, points)).map_err(lib)?;
        std::slice::from_raw_parts_mut(buf, need).copy_from_slice(&q.values);
        Ok(())
    })
}

/// Maxwell-Bloch fixed points. Writes up to `cap` roots (photon number,
/// field amplitude, stability code) and the total count to `count`; fails
/// with `BUFFER_TOO_SMALL` when `cap < count`, after setting `count`.
///
/// # Safety
/// `params` must be a live handle; each array must hold `cap` elements;
/// `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_mb_roots(
    params: *const JcParams,
    n: *mut f64,
    re_alpha: *mut f64,
    im_alpha: *mut f64,
    stability: *mut c_int,
    cap: usize,
    count: *mut usize,
) -> JcStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let roots = mb_steady_roots(&p.inner).map_err(lib)?;
        write(count, "count", roots.len())?;
        if cap < roots.len() {
            return Err((
                JcStatus::BufferTooSmall,
                format!("{} roots, capacity {cap}", roots.len()),
            ));
        }
        if roots.is_empty() {
            return Ok(());
        }
        if n.is_null() || re_alpha.is_null() || im_alpha.is_null() || stability.is_null() {
            return Err(null("output array"));
        }
        for (i, b) in roots.iter().enumerate() {
            n.add(i).write(b.n);
            re_alpha.add(i).write(b.alpha.re);
            im_alpha.add(i).write(b.alpha.im);
            stability.add(i).write(match b.stability {
                Stability::Stable => JC_STABLE,
                Stability::Unstable => JC_UNSTABLE,
                Stability::Marginal => JC_MARGINAL,
                Stability::Unknown => JC_UNKNOWN,
            });
        }
        Ok(())
    })
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len − 1` bytes, into `buf`. Returns the full message
/// length in bytes without the terminator; pass `len = 0` to query it.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null with `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn jc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn jc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
