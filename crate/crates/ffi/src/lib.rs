//! C interface to `persuasion-core`.
//!
//! Problems and solutions are opaque heap handles, released with their `_free`
//! functions. Every fallible call returns a [`PersuasionStatus`]; on failure the
//! message is available from [`persuasion_last_error`] on the same thread until
//! the next failing call. Strings returned through `char **` are owned by the
//! caller and released with [`persuasion_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use persuasion_core::analysis::{check_all, solve, SolveConfig, Solution};
use persuasion_core::cli::spec::{load_source, parse_spec};
use persuasion_core::lp::Pricing;
use persuasion_core::model::Problem;
use persuasion_core::nad::{solve_nad, verify_against_lp};
use persuasion_core::presets::{preset, GridSpec, Params};
use persuasion_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PersuasionStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    UnknownPreset = 4,
    Parse = 5,
    ShapeMismatch = 6,
    SchemaVersion = 7,
    Infeasible = 8,
    SizeLimit = 9,
    IllPosed = 10,
    Numerical = 11,
    BufferTooSmall = 12,
    Io = 13,
    Internal = 14,
    Panic = 15,
}

fn status_of(e: &Error) -> PersuasionStatus {
    use PersuasionStatus as S;
    match e {
        Error::InvalidGrid(_)
        | Error::InvalidPrior(_)
        | Error::InvalidPosterior(_)
        | Error::InvalidSignal(_)
        | Error::ParamOutOfRange { .. }
        | Error::GridSnap { .. } => S::InvalidArgument,
        Error::UnknownPreset(_) => S::UnknownPreset,
        Error::Parse { .. } => S::Parse,
        Error::ShapeMismatch { .. } => S::ShapeMismatch,
        Error::SchemaVersionMismatch { .. } => S::SchemaVersion,
        Error::Infeasible(_) | Error::Unbounded => S::Infeasible,
        Error::SizeLimit { .. } => S::SizeLimit,
        Error::IllPosed(_) | Error::PairwiseRequired { .. } | Error::NotStrictlyDipped(_) => S::IllPosed,
        Error::NoRoot(_) | Error::DegenerateBasis(_) | Error::ShootingFailed(_) | Error::StiffStep { .. } => S::Numerical,
        Error::Io(_) => S::Io,
        Error::Internal(_) => S::Internal,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PersuasionStatus, msg: impl Into<String>) -> PersuasionStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PersuasionStatus>) -> PersuasionStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PersuasionStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PersuasionStatus::Panic, msg)
        }
    }
}

fn core<T>(r: persuasion_core::Result<T>) -> Result<T, PersuasionStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, PersuasionStatus> {
    if p.is_null() {
        return Err(fail(PersuasionStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PersuasionStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, PersuasionStatus> {
    p.as_ref().ok_or_else(|| fail(PersuasionStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), PersuasionStatus> {
    if out.is_null() {
        return Err(fail(PersuasionStatus::NullPointer, "output pointer is NULL"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), PersuasionStatus> {
    if out.is_null() {
        return Err(fail(PersuasionStatus::NullPointer, "output pointer is NULL"));
    }
    let c = CString::new(s).map_err(|_| fail(PersuasionStatus::Internal, "string has an interior NUL"))?;
    *out = c.into_raw();
    Ok(())
}

/// Opaque problem handle.
pub struct PersuasionProblem(Problem);

/// Opaque LP solution handle.
pub struct PersuasionSolution(Solution);

/// LP solve options. Zero or negative fields select the defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PersuasionSolveOptions {
    /// 1 selects Bland's rule throughout, anything else Dantzig pricing.
    pub bland: i32,
    pub optimality_tol: f64,
    /// Contact tolerance relative to the payoff scale.
    pub contact_tol: f64,
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failure.
#[no_mangle]
pub extern "C" fn persuasion_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn persuasion_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a catalog preset. `params` may be NULL or `"k=v,k=v"`. `grid_m = 0` keeps the preset's action grid.
///
/// # Safety
/// `id` and `params` must be NULL or NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_problem_from_preset(
    id: *const c_char,
    params: *const c_char,
    grid_n: usize,
    grid_m: usize,
    out: *mut *mut PersuasionProblem,
) -> PersuasionStatus {
    guard(|| {
        let id = text(id, "id")?;
        let params = if params.is_null() { Params::new() } else { core(Params::parse(text(params, "params")?))? };
        let grid = if grid_m == 0 { GridSpec::new(grid_n) } else { GridSpec::with_actions(grid_n, grid_m) };
        core(persuasion_core::cli::spec::check_grid(&grid))?;
        let (p, _) = core(preset(id, &params, grid))?;
        put(out, PersuasionProblem(p))
    })
}

/// Builds a problem from spec-file JSON text (preset reference or inline tables).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_problem_from_json(json: *const c_char, out: *mut *mut PersuasionProblem) -> PersuasionStatus {
    guard(|| {
        let src = core(parse_spec(text(json, "json")?))?;
        let loaded = core(load_source(src, None))?;
        put(out, PersuasionProblem(loaded.problem))
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn persuasion_problem_free(p: *mut PersuasionProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Grid sizes of a problem; either output may be NULL.
///
/// # Safety
/// `p` must be a live problem handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_problem_dims(
    p: *const PersuasionProblem,
    n_states: *mut usize,
    n_actions: *mut usize,
) -> PersuasionStatus {
    guard(|| {
        let p = &get(p, "problem")?.0;
        if let Some(n) = n_states.as_mut() {
            *n = p.n_states();
        }
        if let Some(m) = n_actions.as_mut() {
            *m = p.n_actions();
        }
        Ok(())
    })
}

/// Solves the outcome LP. `opts` may be NULL.
///
/// # Safety
/// `p` must be a live problem handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_solve(
    p: *const PersuasionProblem,
    opts: *const PersuasionSolveOptions,
    out: *mut *mut PersuasionSolution,
) -> PersuasionStatus {
    guard(|| {
        let p = &get(p, "problem")?.0;
        let mut cfg = SolveConfig::default();
        if let Some(o) = opts.as_ref() {
            if o.bland == 1 {
                cfg.pricing = Pricing::Bland;
            }
            if o.optimality_tol > 0.0 {
                cfg.tol_lp = Some(o.optimality_tol);
            }
            if o.contact_tol > 0.0 {
                cfg.tol_contact = o.contact_tol;
            }
        }
        let s = core(solve(p, &cfg))?;
        put(out, PersuasionSolution(s))
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn persuasion_solution_free(s: *mut PersuasionSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Primal objective and |primal − dual|; either output may be NULL.
///
/// # Safety
/// `s` must be a live solution handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_solution_objective(
    s: *const PersuasionSolution,
    objective: *mut f64,
    duality_gap: *mut f64,
) -> PersuasionStatus {
    guard(|| {
        let s = &get(s, "solution")?.0;
        if let Some(o) = objective.as_mut() {
            *o = s.objective;
        }
        if let Some(g) = duality_gap.as_mut() {
            *g = s.duality_gap;
        }
        Ok(())
    })
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), PersuasionStatus> {
    if dst.is_null() {
        return Err(fail(PersuasionStatus::NullPointer, "buffer is NULL"));
    }
    if len < src.len() {
        return Err(fail(PersuasionStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Copies the outcome, row-major by action (`n_actions * n_states` values), into `buf`.
///
/// # Safety
/// `s` must be a live solution handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn persuasion_solution_outcome(s: *const PersuasionSolution, buf: *mut f64, len: usize) -> PersuasionStatus {
    guard(|| copy_out(get(s, "solution")?.0.outcome.as_slice(), buf, len))
}

/// Copies the state prices (`n_states`) and obedience multipliers (`n_actions`).
///
/// # Safety
/// `s` must be a live solution handle; `p` and `q` valid for `np` and `nq` doubles.
#[no_mangle]
pub unsafe extern "C" fn persuasion_solution_prices(
    s: *const PersuasionSolution,
    p: *mut f64,
    np: usize,
    q: *mut f64,
    nq: usize,
) -> PersuasionStatus {
    guard(|| {
        let prices = &get(s, "solution")?.0.prices;
        copy_out(&prices.p, p, np)?;
        copy_out(&prices.q, q, nq)
    })
}

/// Runs every structure checker and returns the verdicts as a JSON array in `*out`.
///
/// # Safety
/// `p` and `s` must be live handles, `s` solved from `p`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_check_json(
    p: *const PersuasionProblem,
    s: *const PersuasionSolution,
    out: *mut *mut c_char,
) -> PersuasionStatus {
    guard(|| {
        let (p, s) = (&get(p, "problem")?.0, &get(s, "solution")?.0);
        if s.outcome.n_states() != p.n_states() || s.outcome.n_actions() != p.n_actions() {
            return Err(fail(PersuasionStatus::InvalidArgument, "solution does not belong to this problem"));
        }
        let json = serde_json::to_string(&check_all(p, s)).map_err(|e| fail(PersuasionStatus::Internal, e.to_string()))?;
        put_string(out, json)
    })
}

/// Solves the NAD boundary-value problem with the problem's prior density and
/// returns nodes, residuals and the LP comparison (when `s` is non-NULL) as JSON.
///
/// # Safety
/// `p` must be a live problem handle, `s` NULL or a solution of `p`, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn persuasion_nad_json(
    p: *const PersuasionProblem,
    s: *const PersuasionSolution,
    out: *mut *mut c_char,
) -> PersuasionStatus {
    guard(|| {
        let p = &get(p, "problem")?.0;
        let f = p.density().ok_or_else(|| fail(PersuasionStatus::IllPosed, "problem has no prior density"))?.clone();
        let nad = core(solve_nad(p, &|x| f(x)))?;
        let lp = s.as_ref().map(|s| verify_against_lp(p, &nad, &s.0.outcome));
        let doc = serde_json::json!({ "solution": nad, "lp_comparison": lp });
        put_string(out, doc.to_string())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn persuasion_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
