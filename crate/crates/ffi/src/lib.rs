//! C ABI for citysim.
//!
//! Every function returns a [`CsStatus`]. On failure the message is kept
//! per thread and can be copied out with [`cs_last_error`]. Simulations are
//! opaque [`CsSimulation`] handles released with [`cs_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use citysim::matching::{solve_assignment, MatchMode, MatchWeights};
use citysim::model::{InteractionMatrix, TraitVector};
use citysim::scenario::{parse_scenario, preset};
use citysim::sim::{RunStatus, Simulation};
use citysim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Config = 4,
    Parse = 5,
    Io = 6,
    Internal = 7,
    Panic = 8,
    BufferTooSmall = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsRunState {
    Running = 0,
    Completed = 1,
    Extinct = 2,
    NoFertilePairs = 3,
}

/// Opaque simulation handle.
pub struct CsSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: CsStatus, msg: impl Into<String>) -> CsStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> CsStatus {
    let status = match &e {
        Error::DimensionMismatch { .. } => CsStatus::DimensionMismatch,
        Error::EmptyPopulation | Error::Config { .. } => CsStatus::Config,
        Error::Parse { .. } => CsStatus::Parse,
        Error::Io { .. } => CsStatus::Io,
        Error::Consistency(_) => CsStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> CsStatus) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == CsStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(CsStatus::Panic, "panic inside citysim"),
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CsStatus> {
    if p.is_null() {
        return Err(fail(CsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], CsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated).
/// `needed` receives the required size including the terminator.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn cs_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> CsStatus {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        if len < bytes.len() + 1 || buf.is_null() {
            return CsStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
        *buf.add(bytes.len()) = 0;
        CsStatus::Ok
    })
}

/// Happiness `x^T I theta` against the built-in interaction matrix. Values
/// outside [0, 1] are rejected.
///
/// # Safety
/// `x` and `theta` must point to `x_len` and `theta_len` doubles; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_happiness(
    x: *const f64,
    x_len: usize,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let (x, theta) = match (slice(x, x_len, "x"), slice(theta, theta_len, "theta")) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if out.is_null() {
            return fail(CsStatus::NullPointer, "out is null");
        }
        let m = InteractionMatrix::default();
        let vectors = TraitVector::try_new("x", x.to_vec())
            .and_then(|x| Ok((x, TraitVector::try_new("theta", theta.to_vec())?)));
        let (x, theta) = match vectors {
            Ok(v) => v,
            Err(e) => return fail(CsStatus::InvalidArgument, e.to_string()),
        };
        match citysim::model::happiness(&x, &m, &theta) {
            Ok(h) => {
                *out = h;
                CsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Maximum-weight assignment of a row-major `rows x cols` matrix. Writes
/// `min(rows, cols)` pairs as (row, col) into `pairs` (two entries each) and
/// their total weight into `total`.
///
/// # Safety
/// `weights` must hold `rows * cols` doubles, `pairs` room for
/// `2 * min(rows, cols)` values and `total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_solve_assignment(
    weights: *const f64,
    rows: usize,
    cols: usize,
    pairs: *mut usize,
    total: *mut f64,
) -> CsStatus {
    guard(|| {
        let Some(n) = rows.checked_mul(cols) else {
            return fail(CsStatus::InvalidArgument, "matrix too large");
        };
        let w = match slice(weights, n, "weights") {
            Ok(w) => w,
            Err(s) => return s,
        };
        let k = rows.min(cols);
        if (k > 0 && pairs.is_null()) || total.is_null() {
            return fail(CsStatus::NullPointer, "output pointer is null");
        }
        let mw = match MatchWeights::dense(MatchMode::Noisy, (0..rows as u64).collect(), (0..cols as u64).collect(), w.to_vec()) {
            Ok(mw) => mw,
            Err(e) => return from_error(e),
        };
        let plan = solve_assignment(&mw);
        for (i, &(r, c)) in plan.pairs.iter().enumerate() {
            *pairs.add(2 * i) = r as usize;
            *pairs.add(2 * i + 1) = c as usize;
        }
        *total = plan.total_weight;
        CsStatus::Ok
    })
}

fn boxed(sim: Simulation, out: *mut *mut CsSimulation) -> CsStatus {
    unsafe { *out = Box::into_raw(Box::new(CsSimulation { sim })) };
    CsStatus::Ok
}

/// Creates a simulation from scenario TOML text.
///
/// # Safety
/// `scenario_toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_from_toml(scenario_toml: *const c_char, out: *mut *mut CsSimulation) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullPointer, "out is null");
        }
        let text = match c_str(scenario_toml, "scenario_toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_scenario(text, Path::new("<ffi>")).and_then(|sc| Simulation::new(sc.simulation)) {
            Ok(sim) => boxed(sim, out),
            Err(e) => from_error(e),
        }
    })
}

/// Creates a simulation from a built-in preset with the given seed.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_from_preset(
    name: *const c_char,
    seed: u64,
    out: *mut *mut CsSimulation,
) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullPointer, "out is null");
        }
        let name = match c_str(name, "name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let made = preset(name).and_then(|mut sc| {
            sc.simulation.seed = seed;
            Simulation::new(sc.simulation)
        });
        match made {
            Ok(sim) => boxed(sim, out),
            Err(e) => from_error(e),
        }
    })
}

unsafe fn handle<'a>(sim: *mut CsSimulation) -> Result<&'a mut CsSimulation, CsStatus> {
    sim.as_mut().ok_or_else(|| fail(CsStatus::NullPointer, "simulation handle is null"))
}

/// Advances up to `rounds` rounds; stops early when the run ends.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_step(sim: *mut CsSimulation, rounds: u64) -> CsStatus {
    guard(|| {
        let h = match handle(sim) {
            Ok(h) => h,
            Err(s) => return s,
        };
        for _ in 0..rounds {
            if h.sim.is_finished() {
                break;
            }
            if let Err(e) = h.sim.step() {
                return from_error(e);
            }
        }
        CsStatus::Ok
    })
}

/// Runs to the end of the configured horizon or until extinction.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_run(sim: *mut CsSimulation) -> CsStatus {
    cs_simulation_step(sim, u64::MAX)
}

/// Current time, population size, mean happiness and run state.
///
/// # Safety
/// `sim` must be a live handle; every output pointer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_state(
    sim: *mut CsSimulation,
    time: *mut f64,
    population: *mut usize,
    mean_happiness: *mut f64,
    state: *mut CsRunState,
) -> CsStatus {
    guard(|| {
        let h = match handle(sim) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let pop = h.sim.population();
        if !time.is_null() {
            *time = h.sim.time();
        }
        if !population.is_null() {
            *population = pop.len();
        }
        if !mean_happiness.is_null() {
            *mean_happiness = if pop.is_empty() {
                0.0
            } else {
                pop.iter().map(|p| p.happiness).sum::<f64>() / pop.len() as f64
            };
        }
        if !state.is_null() {
            *state = match h.sim.status() {
                None => CsRunState::Running,
                Some(RunStatus::Completed) => CsRunState::Completed,
                Some(RunStatus::Extinct) => CsRunState::Extinct,
                Some(RunStatus::NoFertilePairs) => CsRunState::NoFertilePairs,
            };
        }
        CsStatus::Ok
    })
}

/// Copies the society vector into `out`, which must hold `len` doubles.
/// `dim` receives the vector length.
///
/// # Safety
/// `sim` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_theta(sim: *mut CsSimulation, out: *mut f64, len: usize, dim: *mut usize) -> CsStatus {
    guard(|| {
        let h = match handle(sim) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let theta = h.sim.theta().as_slice();
        if !dim.is_null() {
            *dim = theta.len();
        }
        if len < theta.len() || out.is_null() {
            return fail(CsStatus::BufferTooSmall, format!("need room for {} values", theta.len()));
        }
        ptr::copy_nonoverlapping(theta.as_ptr(), out, theta.len());
        CsStatus::Ok
    })
}

/// Writes the per-round log CSV to `path`.
///
/// # Safety
/// `sim` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_write_log(sim: *mut CsSimulation, path: *const c_char) -> CsStatus {
    guard(|| {
        let h = match handle(sim) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let path = match c_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match std::fs::write(path, h.sim.log().to_csv_string()) {
            Ok(()) => CsStatus::Ok,
            Err(e) => from_error(Error::io(path, e)),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from a constructor here and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cs_simulation_free(sim: *mut CsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
