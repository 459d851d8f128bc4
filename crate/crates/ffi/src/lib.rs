//! C ABI over the solver. Handles are opaque; every call returns a `PpStatus`
//! and the message of the last failure on this thread is kept for `pp_last_error`.

use properpath::game::{generate_random, parse_game, GeneratorKind, GeneratorParams};
use properpath::{fixtures, solve, Error, GameTree, Method, SolveOptions, SolveReport, TraceStatus};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotConverged = 2,
    InputError = 3,
    CapExceeded = 4,
    Internal = 5,
}

/// Parsed game.
pub struct PpGame {
    game: GameTree,
}

/// Outcome of one trace.
pub struct PpSolveResult {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> PpStatus {
    match e {
        Error::InvalidParameter(_) | Error::Dimension(_) | Error::UnknownSequence(_) => PpStatus::InvalidArgument,
        Error::NormalFormTooLarge { .. } | Error::FamilyCap { .. } => PpStatus::CapExceeded,
        Error::NotConverged(_) | Error::Singular(_) => PpStatus::NotConverged,
        Error::Precondition(_) | Error::NotInterior(_) => PpStatus::Internal,
        _ => PpStatus::InputError,
    }
}

fn guard(f: impl FnOnce() -> Result<PpStatus, (PpStatus, String)>) -> PpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            PpStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (PpStatus, String) {
    (status_of(&e), e.to_string())
}

fn arg_err(msg: &str) -> (PpStatus, String) {
    (PpStatus::InvalidArgument, msg.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PpStatus, String)> {
    if p.is_null() {
        return Err(arg_err(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| arg_err(&format!("{what} is not UTF-8")))
}

unsafe fn put_game(out: *mut *mut PpGame, game: GameTree) -> PpStatus {
    *out = Box::into_raw(Box::new(PpGame { game }));
    PpStatus::Ok
}

/// Message of the last failed call on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn pp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parse a game from text in the tree file format.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_game_parse(text: *const c_char, out: *mut *mut PpGame) -> PpStatus {
    guard(|| {
        if out.is_null() {
            return Err(arg_err("out is null"));
        }
        let text = str_arg(text, "text")?;
        Ok(put_game(out, parse_game(text).map_err(lib_err)?))
    })
}

/// Load a bundled game by name (`fig1`, `fig2`, `fig3`).
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_game_fixture(name: *const c_char, out: *mut *mut PpGame) -> PpStatus {
    guard(|| {
        if out.is_null() {
            return Err(arg_err("out is null"));
        }
        let name = str_arg(name, "name")?;
        let text = fixtures::by_name(name).ok_or_else(|| arg_err(&format!("unknown fixture `{name}`")))?;
        Ok(put_game(out, parse_game(text).map_err(lib_err)?))
    })
}

/// Random game of type 1 or 2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_game_generate(
    kind: u32,
    players: usize,
    depth: usize,
    actions: usize,
    seed: u64,
    out: *mut *mut PpGame,
) -> PpStatus {
    guard(|| {
        if out.is_null() {
            return Err(arg_err("out is null"));
        }
        let kind = match kind {
            1 => GeneratorKind::Type1,
            2 => GeneratorKind::Type2,
            _ => return Err(arg_err("kind must be 1 or 2")),
        };
        let g = generate_random(&GeneratorParams::new(kind, players, depth, actions, seed)).map_err(lib_err)?;
        Ok(put_game(out, g))
    })
}

/// # Safety
/// `game` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_game_free(game: *mut PpGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_game_num_players(game: *const PpGame, out: *mut usize) -> PpStatus {
    guard(|| {
        if game.is_null() || out.is_null() {
            return Err(arg_err("null argument"));
        }
        *out = (*game).game.num_players;
        Ok(PpStatus::Ok)
    })
}

/// Trace from a seeded random start. `method` is `lgpr` or `etpr`; `max_iterations`
/// of 0 keeps the default cap. A result handle is produced whenever the trace ran,
/// so non-convergence (status 2) and caps (status 4) can still be inspected.
///
/// # Safety
/// `game` must be a live handle, `method` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_solve(
    game: *const PpGame,
    method: *const c_char,
    seed: u64,
    max_iterations: usize,
    certify: bool,
    out: *mut *mut PpSolveResult,
) -> PpStatus {
    guard(|| {
        if game.is_null() || out.is_null() {
            return Err(arg_err("null argument"));
        }
        *out = ptr::null_mut();
        let method: Method = str_arg(method, "method")?.parse().map_err(lib_err)?;
        let mut opts = SolveOptions::seeded(method, seed);
        if max_iterations > 0 {
            opts.tracer.max_iterations = max_iterations;
        }
        opts.certify = certify;
        let report = solve(&(*game).game, &opts).map_err(lib_err)?;
        let status = match report.status {
            TraceStatus::Converged => PpStatus::Ok,
            TraceStatus::StepUnderflow => PpStatus::NotConverged,
            TraceStatus::IterationCap | TraceStatus::TimeCap => PpStatus::CapExceeded,
        };
        if status != PpStatus::Ok {
            set_error(format!("trace ended with status {}", report.status.name()));
        }
        *out = Box::into_raw(Box::new(PpSolveResult { report }));
        Ok(status)
    })
}

/// # Safety
/// `result` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_result_free(result: *mut PpSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle; the out pointers writable (any may be null).
#[no_mangle]
pub unsafe extern "C" fn pp_result_summary(
    result: *const PpSolveResult,
    converged: *mut bool,
    iterations: *mut usize,
    final_t: *mut f64,
) -> PpStatus {
    guard(|| {
        if result.is_null() {
            return Err(arg_err("result is null"));
        }
        let r = &(*result).report;
        if !converged.is_null() {
            *converged = r.converged();
        }
        if !iterations.is_null() {
            *iterations = r.iterations;
        }
        if !final_t.is_null() {
            *final_t = r.final_t;
        }
        Ok(PpStatus::Ok)
    })
}

/// Expected payoffs, one per player. `len` must be at least the player count;
/// the count is written to `written`.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_result_payoffs(
    result: *const PpSolveResult,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> PpStatus {
    guard(|| {
        if result.is_null() || buf.is_null() || written.is_null() {
            return Err(arg_err("null argument"));
        }
        let eq = (*result).report.equilibrium.as_ref().ok_or((PpStatus::NotConverged, "no equilibrium".into()))?;
        copy_out(&eq.payoffs, buf, len, written)
    })
}

/// Realization plan of `player` (0-based), in sequence order including the root.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_result_plan(
    result: *const PpSolveResult,
    player: usize,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> PpStatus {
    guard(|| {
        if result.is_null() || buf.is_null() || written.is_null() {
            return Err(arg_err("null argument"));
        }
        let eq = (*result).report.equilibrium.as_ref().ok_or((PpStatus::NotConverged, "no equilibrium".into()))?;
        let plan = eq.gamma.plans.get(player).ok_or_else(|| arg_err("player out of range"))?;
        copy_out(plan, buf, len, written)
    })
}

unsafe fn copy_out(v: &[f64], buf: *mut f64, len: usize, written: *mut usize) -> Result<PpStatus, (PpStatus, String)> {
    *written = v.len();
    if len < v.len() {
        return Err(arg_err(&format!("buffer holds {len}, need {}", v.len())));
    }
    ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
    Ok(PpStatus::Ok)
}

/// Full report as JSON; free with `pp_string_free`.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pp_result_to_json(result: *const PpSolveResult, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        if result.is_null() || out.is_null() {
            return Err(arg_err("null argument"));
        }
        let s = serde_json::to_string(&(*result).report).map_err(|e| (PpStatus::Internal, e.to_string()))?;
        *out = CString::new(s).map_err(|e| (PpStatus::Internal, e.to_string()))?.into_raw();
        Ok(PpStatus::Ok)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
