//! C ABI over the steppe engine.
//!
//! A simulation is an opaque `SteppeSim` handle created by
//! [`steppe_sim_new`] and released by [`steppe_sim_free`]. Every fallible
//! function returns a [`SteppeStatus`]; on failure the message is available
//! from [`steppe_last_error`] on the same thread. Strings handed out by the
//! library are NUL-terminated UTF-8 and must be released with
//! [`steppe_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use steppe::kernel::{inspect_entity, set_attribute, EntityId};
use steppe::observation::{render_pov, sample_probes};
use steppe::server::ErrorCode;
use steppe::{init_simulation, models, step, ModelDefinition, SimError, SimulationState, Timeline, Value};

/// Result of every fallible call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteppeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    NoEntity = 4,
    Range = 5,
    BadTick = 6,
    Internal = 7,
    Panic = 8,
}

impl From<&SimError> for SteppeStatus {
    fn from(e: &SimError) -> Self {
        match ErrorCode::from(e) {
            ErrorCode::NoEntity => SteppeStatus::NoEntity,
            ErrorCode::Range => SteppeStatus::Range,
            ErrorCode::BadTick => SteppeStatus::BadTick,
            ErrorCode::Malformed => SteppeStatus::InvalidJson,
            _ => SteppeStatus::Internal,
        }
    }
}

/// Opaque simulation handle: a model, its recorded timeline and the state at
/// the timeline cursor.
pub struct SteppeSim {
    def: ModelDefinition,
    timeline: Timeline,
    state: SimulationState,
}

struct Failure(SteppeStatus, String);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure(SteppeStatus::from(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure and turns panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SteppeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SteppeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside steppe");
            SteppeStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SteppeStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SteppeStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn sim<'a>(p: *mut SteppeSim) -> Result<&'a mut SteppeSim, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(SteppeStatus::NullArgument, "simulation handle is null".into()))
}

fn json<T>(r: serde_json::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure(SteppeStatus::InvalidJson, e.to_string()))
}

unsafe fn hand_out(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SteppeStatus::NullArgument, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(SteppeStatus::Internal, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn entity(kind: &str, index: u64) -> EntityId {
    EntityId {
        kind: kind.to_owned(),
        index,
    }
}

/// Creates a simulation of `model` at tick 0.
///
/// `params_json` is a JSON object of parameter overrides, or null for
/// defaults. On success `*out` receives a handle to free with
/// [`steppe_sim_free`].
///
/// # Safety
/// `model` must be a valid C string, `params_json` null or a valid C string,
/// and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_new(
    model: *const c_char,
    params_json: *const c_char,
    seed: u64,
    out: *mut *mut SteppeSim,
) -> SteppeStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(SteppeStatus::NullArgument, "output pointer is null".into()));
        }
        let model = text(model, "model")?;
        let params = if params_json.is_null() {
            Default::default()
        } else {
            let obj: serde_json::Map<String, serde_json::Value> = json(serde_json::from_str(text(params_json, "params_json")?))?;
            models::params_from_json(&obj)?
        };
        let def = models::definition(model, &params)?;
        let state = init_simulation(&def, seed)?;
        let timeline = Timeline::starting_at(&state)?;
        *out = Box::into_raw(Box::new(SteppeSim { def, timeline, state }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`steppe_sim_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_free(sim: *mut SteppeSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances `count` ticks from the cursor, recording each one. Stepping from
/// a rewound tick replays the recorded future while it matches and branches
/// when it does not.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_step(sim: *mut SteppeSim, count: u64) -> SteppeStatus {
    guard(|| {
        let s = self::sim(sim)?;
        for _ in 0..count {
            let next = step(&s.def, &s.state);
            s.timeline.advance(&next)?;
            s.state = next;
        }
        Ok(())
    })
}

/// Moves the cursor to a recorded tick.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_rewind(sim: *mut SteppeSim, tick: u64) -> SteppeStatus {
    guard(|| {
        let s = self::sim(sim)?;
        s.state = s.timeline.rewind(tick)?;
        Ok(())
    })
}

/// Tick of the state at the cursor, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_tick(sim: *const SteppeSim) -> u64 {
    sim.as_ref().map_or(0, |s| s.state.tick)
}

/// Last recorded tick, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_max_tick(sim: *const SteppeSim) -> u64 {
    sim.as_ref().map_or(0, |s| s.timeline.max())
}

/// Number of times an edit or a diverging replay discarded recorded ticks.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_branch_count(sim: *const SteppeSim) -> u64 {
    sim.as_ref().map_or(0, |s| s.timeline.branch_count())
}

/// 64-bit digest of the state at the cursor, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_hash(sim: *const SteppeSim) -> u64 {
    sim.as_ref().map_or(0, |s| s.state.digest())
}

/// Sets one attribute of the state at the cursor. `value_json` is a JSON
/// scalar (`true`, `3`, `0.5`, `"text"`). A change discards the recorded
/// ticks after the cursor.
///
/// # Safety
/// `sim` must be a live handle; `kind`, `attr` and `value_json` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_set_attribute(
    sim: *mut SteppeSim,
    kind: *const c_char,
    index: u64,
    attr: *const c_char,
    value_json: *const c_char,
) -> SteppeStatus {
    guard(|| {
        let s = self::sim(sim)?;
        let raw: serde_json::Value = json(serde_json::from_str(text(value_json, "value_json")?))?;
        let value = Value::from_json(&raw)
            .ok_or_else(|| Failure(SteppeStatus::InvalidJson, "value must be a boolean, number or string".into()))?;
        let id = entity(text(kind, "kind")?, index);
        let edited = set_attribute(&s.def, &s.state, &id, text(attr, "attr")?, value)?;
        s.timeline.resume(Some(&edited))?;
        s.state = edited;
        Ok(())
    })
}

/// Writes a JSON object `{"entity","cell","attrs"}` describing one entity.
///
/// # Safety
/// `sim` must be a live handle, `kind` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_inspect_json(
    sim: *mut SteppeSim,
    kind: *const c_char,
    index: u64,
    out: *mut *mut c_char,
) -> SteppeStatus {
    guard(|| {
        let s = self::sim(sim)?;
        let rec = inspect_entity(&s.def, &s.state, &entity(text(kind, "kind")?, index))?;
        hand_out(out, json(serde_json::to_string(&rec))?)
    })
}

/// Writes a JSON object mapping each probe name to its value at the cursor
/// (`null` when the probe fails).
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_probes_json(sim: *mut SteppeSim, out: *mut *mut c_char) -> SteppeStatus {
    guard(|| {
        let s = self::sim(sim)?;
        let obj: serde_json::Map<String, serde_json::Value> = sample_probes(&s.state, &s.def.probes)
            .into_iter()
            .map(|r| (r.name, r.value.ok().map_or(serde_json::Value::Null, serde_json::Value::from)))
            .collect();
        hand_out(out, json(serde_json::to_string(&obj))?)
    })
}

/// Writes the frame for point of view `pov` in the wire encoding.
///
/// # Safety
/// `sim` must be a live handle, `pov` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn steppe_sim_render_json(
    sim: *mut SteppeSim,
    pov: *const c_char,
    out: *mut *mut c_char,
) -> SteppeStatus {
    guard(|| {
        let s = self::sim(sim)?;
        let name = text(pov, "pov")?;
        let p = s.def.pov(name).ok_or_else(|| SimError::UnknownPov(name.to_owned()))?;
        let frame = render_pov(&s.def, &s.state, p)?;
        hand_out(out, json(serde_json::to_string(&frame))?)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn steppe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on this
/// thread.
#[no_mangle]
pub extern "C" fn steppe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
