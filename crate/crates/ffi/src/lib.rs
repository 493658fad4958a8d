//! C ABI over `spinor_tf`. Every call returns a `SpinorStatus`; on failure the
//! message is available from `spinor_last_error` on the same thread.
//! Handles are created by `*_new` and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinor_tf::geodesic::{geodesic_cost, GeodesicOptions};
use spinor_tf::sharp_interface::young_angle;
use spinor_tf::{
    build_w, classify, critical_q1, critical_q2, solve, Error, ModelParams, PotentialW, Regime, SpinState, TFSolution,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinorStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RegimeMismatch = 3,
    Degenerate = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinorRegime {
    NsMs = 0,
    Ns2c = 1,
    Pure2c = 2,
    MsMs = 3,
    Pure3c = 4,
    FerroQ0Degenerate = 5,
    Alpha0Q0 = 6,
    Alpha0QPos = 7,
    Alpha0QNeg = 8,
}

impl From<Regime> for SpinorRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::NsMs => SpinorRegime::NsMs,
            Regime::Ns2c => SpinorRegime::Ns2c,
            Regime::Pure2c => SpinorRegime::Pure2c,
            Regime::MsMs => SpinorRegime::MsMs,
            Regime::Pure3c => SpinorRegime::Pure3c,
            Regime::FerroQ0Degenerate => SpinorRegime::FerroQ0Degenerate,
            Regime::Alpha0Q0 => SpinorRegime::Alpha0Q0,
            Regime::Alpha0QPos => SpinorRegime::Alpha0QPos,
            Regime::Alpha0QNeg => SpinorRegime::Alpha0QNeg,
        }
    }
}

/// Parameters together with their Thomas-Fermi solution.
pub struct SpinorSolution {
    params: ModelParams,
    solution: TFSolution,
}

/// Calibrated bulk potential W.
pub struct SpinorPotential {
    w: PotentialW,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SpinorStatus {
    match e {
        Error::NonPositiveMass(_)
        | Error::InvalidCoupling(_)
        | Error::MagnetizationExceedsMass { .. }
        | Error::InvalidParameter(_)
        | Error::WrongSign(_)
        | Error::ZeroTension
        | Error::Usage(_)
        | Error::Io(_) => SpinorStatus::InvalidArgument,
        Error::RegimeMismatch(_) => SpinorStatus::RegimeMismatch,
        Error::DegenerateRegime(_) => SpinorStatus::Degenerate,
        _ => SpinorStatus::Numerical,
    }
}

/// Run `f`, record any error or panic, and turn the outcome into a status.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> SpinorStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpinorStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SpinorStatus::Panic
        }
    }
}

fn null_error(name: &str) -> Error {
    Error::InvalidParameter(format!("{name} is null"))
}

unsafe fn read3(p: *const f64, name: &str) -> Result<[f64; 3], Error> {
    if p.is_null() {
        return Err(null_error(name));
    }
    Ok([*p, *p.add(1), *p.add(2)])
}

/// Same as `guard` but reports null output pointers as `NullPointer`.
fn guard_out<T>(out: *mut T, f: impl FnOnce() -> Result<(), Error>) -> SpinorStatus {
    if out.is_null() {
        LAST_ERROR.with(|e| *e.borrow_mut() = None);
        set_error("output pointer is null".into());
        return SpinorStatus::NullPointer;
    }
    guard(f)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spinor_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn spinor_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Tag of a regime ("NS_MS", "MS_MS", ...) as a static string.
#[no_mangle]
pub extern "C" fn spinor_regime_name(regime: SpinorRegime) -> *const c_char {
    let s: &'static CStr = match regime {
        SpinorRegime::NsMs => c"NS_MS",
        SpinorRegime::Ns2c => c"NS_2C",
        SpinorRegime::Pure2c => c"PURE_2C",
        SpinorRegime::MsMs => c"MS_MS",
        SpinorRegime::Pure3c => c"PURE_3C",
        SpinorRegime::FerroQ0Degenerate => c"FERRO_Q0_DEGENERATE",
        SpinorRegime::Alpha0Q0 => c"ALPHA0_Q0",
        SpinorRegime::Alpha0QPos => c"ALPHA0_QPOS",
        SpinorRegime::Alpha0QNeg => c"ALPHA0_QNEG",
    };
    s.as_ptr()
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_critical_q1(alpha: f64, n: f64, m: f64, out: *mut f64) -> SpinorStatus {
    guard_out(out, || {
        *out = critical_q1(&ModelParams::new(alpha, 0.0, n, m)?)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_critical_q2(alpha: f64, n: f64, m: f64, out: *mut f64) -> SpinorStatus {
    guard_out(out, || {
        *out = critical_q2(&ModelParams::new(alpha, 0.0, n, m)?)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_classify(alpha: f64, q: f64, n: f64, m: f64, out: *mut SpinorRegime) -> SpinorStatus {
    guard_out(out, || {
        *out = classify(&ModelParams::new(alpha, q, n, m)?).into();
        Ok(())
    })
}

/// Solve the Thomas-Fermi problem; on success `*out` owns a new handle.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_solution_new(
    alpha: f64,
    q: f64,
    n: f64,
    m: f64,
    out: *mut *mut SpinorSolution,
) -> SpinorStatus {
    guard_out(out, || {
        *out = std::ptr::null_mut();
        let params = ModelParams::new(alpha, q, n, m)?;
        let solution = solve(&params)?;
        *out = Box::into_raw(Box::new(SpinorSolution { params, solution }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from `spinor_solution_new` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn spinor_solution_free(handle: *mut SpinorSolution) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live solution handle; `regime`, `r` and `e0` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn spinor_solution_info(
    handle: *const SpinorSolution,
    regime: *mut SpinorRegime,
    r: *mut f64,
    e0: *mut f64,
) -> SpinorStatus {
    if handle.is_null() || regime.is_null() || r.is_null() || e0.is_null() {
        set_error("null pointer argument".into());
        return SpinorStatus::NullPointer;
    }
    guard(|| {
        let s = &(*handle).solution;
        *regime = s.regime.into();
        *r = s.r;
        *e0 = s.e0;
        Ok(())
    })
}

/// Write well `which` (0 for a, 1 for b) as (u₁, u₀, u₋₁) into `out[0..3]`.
///
/// # Safety
/// `handle` must be a live solution handle and `out` valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn spinor_solution_state(
    handle: *const SpinorSolution,
    which: u32,
    out: *mut f64,
) -> SpinorStatus {
    if handle.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return SpinorStatus::NullPointer;
    }
    guard(|| {
        let s = &(*handle).solution;
        let state = match which {
            0 => s.state_a,
            1 => s.state_b.ok_or_else(|| Error::InvalidParameter(format!("regime {} has a single state", s.regime)))?,
            _ => return Err(Error::InvalidParameter(format!("state index must be 0 or 1, got {which}"))),
        };
        std::ptr::copy_nonoverlapping(state.to_array().as_ptr(), out, 3);
        Ok(())
    })
}

/// Mass and magnetization residuals of the solution.
///
/// # Safety
/// `handle` must be a live solution handle; `mass` and `mag` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn spinor_solution_residuals(
    handle: *const SpinorSolution,
    mass: *mut f64,
    mag: *mut f64,
) -> SpinorStatus {
    if handle.is_null() || mass.is_null() || mag.is_null() {
        set_error("null pointer argument".into());
        return SpinorStatus::NullPointer;
    }
    guard(|| {
        let h = &*handle;
        *mass = h.solution.mass_residual(&h.params);
        *mag = h.solution.magnetization_residual(&h.params);
        Ok(())
    })
}

/// Build the calibrated potential of a solution.
///
/// # Safety
/// `solution` must be a live solution handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_potential_new(
    solution: *const SpinorSolution,
    out: *mut *mut SpinorPotential,
) -> SpinorStatus {
    if solution.is_null() {
        set_error("solution is null".into());
        return SpinorStatus::NullPointer;
    }
    guard_out(out, || {
        *out = std::ptr::null_mut();
        let s = &*solution;
        let w = build_w(&s.params, &s.solution)?;
        *out = Box::into_raw(Box::new(SpinorPotential { w }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from `spinor_potential_new` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn spinor_potential_free(handle: *mut SpinorPotential) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live potential handle, `u` readable for three values, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_potential_eval(
    handle: *const SpinorPotential,
    u: *const f64,
    out: *mut f64,
) -> SpinorStatus {
    if handle.is_null() {
        set_error("potential is null".into());
        return SpinorStatus::NullPointer;
    }
    guard_out(out, || {
        *out = (*handle).w.eval(read3(u, "u")?);
        Ok(())
    })
}

/// # Safety
/// `handle` must be a live potential handle, `u` readable and `out` writable for three values.
#[no_mangle]
pub unsafe extern "C" fn spinor_potential_grad(
    handle: *const SpinorPotential,
    u: *const f64,
    out: *mut f64,
) -> SpinorStatus {
    if handle.is_null() {
        set_error("potential is null".into());
        return SpinorStatus::NullPointer;
    }
    guard_out(out, || {
        let g = (*handle).w.grad(read3(u, "u")?);
        std::ptr::copy_nonoverlapping(g.as_ptr(), out, 3);
        Ok(())
    })
}

/// Surface tension g(from, to) by the string method with `nodes` path nodes (0 for the default).
///
/// # Safety
/// `handle` must be a live potential handle, `from` and `to` readable for three values,
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_geodesic_cost(
    handle: *const SpinorPotential,
    from: *const f64,
    to: *const f64,
    nodes: usize,
    out: *mut f64,
) -> SpinorStatus {
    if handle.is_null() {
        set_error("potential is null".into());
        return SpinorStatus::NullPointer;
    }
    guard_out(out, || {
        let mut opts = GeodesicOptions::default();
        if nodes > 0 {
            opts.nodes = nodes;
        }
        let (a, b) = (SpinState::from_array(read3(from, "from")?), SpinState::from_array(read3(to, "to")?));
        *out = geodesic_cost(&(*handle).w, a, b, &opts)?.cost;
        Ok(())
    })
}

/// Contact angle in radians from g_ab cos θ + g_0a − g_0b = 0.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn spinor_young_angle(g_ab: f64, g_0a: f64, g_0b: f64, out: *mut f64) -> SpinorStatus {
    guard_out(out, || {
        *out = young_angle(g_ab, g_0a, g_0b)?;
        Ok(())
    })
}
