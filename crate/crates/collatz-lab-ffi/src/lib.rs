//! C ABI over the workbench: opaque handles, status codes, plain-C data.
//!
//! Every function returns a [`CollatzStatus`]; results travel through out
//! pointers. Handles own their data and must be released with the matching
//! `_free` call. No panic crosses the boundary: unwinds surface as
//! `COLLATZ_STATUS_PANIC`.

use collatz_lab::numeric::big_ln;
use collatz_lab::orbit_stats::{seed_stats, total_stopping_time};
use collatz_lab::{ld, trees, Error, MapSpec, Variant};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result discipline for every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollatzStatus {
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// Arguments outside the documented domain (bad multiplier, bad enum
    /// value, malformed UTF-8 name).
    InvalidArgument = 2,
    /// The computation is well-posed but ran out of its step budget.
    Truncated = 3,
    /// The requested quantity does not exist (unknown constant name,
    /// undefined statistic).
    Undefined = 4,
    /// The result exists but does not fit the requested integer width.
    Overflow = 5,
    /// A panic was caught at the boundary; state is unspecified but memory
    /// safe.
    Panic = 6,
}

/// Map variant selector mirroring the library's three forms.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollatzVariant {
    /// a*n + b on odds, halve evens.
    Classic = 0,
    /// (a*n + b)/2 on odds, halve evens.
    Halved = 1,
    /// (a*n + b) / 2^ord2(a*n + b) on odds only.
    Accelerated = 2,
}

/// Opaque handle to a configured map.
pub struct CollatzMap {
    spec: MapSpec,
}

/// Orbit summary for one seed, plain-C layout. `sigma_infty` is u64::MAX
/// when the orbit did not reach 1 within the budget; ratio fields are NaN
/// when undefined (seed < 2 or stopping undefined).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CollatzOrbitStats {
    pub sigma_infty: u64,
    pub ones: u64,
    pub ones_ratio: f64,
    pub gamma_ratio: f64,
    pub rho_ratio: f64,
    pub ln_max_excursion: f64,
    pub budget_exhausted: bool,
}

fn status_of(err: &Error) -> CollatzStatus {
    match err {
        Error::Undefined(_) | Error::EmptySample | Error::NoBracket { .. } | Error::Solver(_) => {
            CollatzStatus::Undefined
        }
        _ => CollatzStatus::InvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> CollatzStatus) -> CollatzStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(CollatzStatus::Panic)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn collatz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static human-readable name for a status code.
#[no_mangle]
pub extern "C" fn collatz_status_name(status: CollatzStatus) -> *const c_char {
    let name: &'static str = match status {
        CollatzStatus::Ok => "ok\0",
        CollatzStatus::NullPointer => "null pointer\0",
        CollatzStatus::InvalidArgument => "invalid argument\0",
        CollatzStatus::Truncated => "budget truncated\0",
        CollatzStatus::Undefined => "undefined\0",
        CollatzStatus::Overflow => "overflow\0",
        CollatzStatus::Panic => "panic\0",
    };
    name.as_ptr().cast()
}

/// Create a map handle. On success writes an owned pointer to `out`;
/// release it with [`collatz_map_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn collatz_map_new(
    multiplier: u64,
    offset: i64,
    variant: CollatzVariant,
    out: *mut *mut CollatzMap,
) -> CollatzStatus {
    if out.is_null() {
        return CollatzStatus::NullPointer;
    }
    guarded(|| {
        let v = match variant {
            CollatzVariant::Classic => Variant::C,
            CollatzVariant::Halved => Variant::T,
            CollatzVariant::Accelerated => Variant::U,
        };
        match MapSpec::new(multiplier, offset, v) {
            Ok(spec) => {
                unsafe { out.write(Box::into_raw(Box::new(CollatzMap { spec }))) };
                CollatzStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Release a handle from [`collatz_map_new`]. Null is a no-op.
///
/// # Safety
/// `map` must be null or a pointer returned by `collatz_map_new` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn collatz_map_free(map: *mut CollatzMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// One step of the map. Fails with `Overflow` when the exact result does
/// not fit an i64, and `InvalidArgument` for even input to the accelerated
/// form.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collatz_map_apply(
    map: *const CollatzMap,
    n: i64,
    out: *mut i64,
) -> CollatzStatus {
    if map.is_null() || out.is_null() {
        return CollatzStatus::NullPointer;
    }
    guarded(|| {
        let spec = unsafe { &(*map).spec };
        match spec.apply(&BigInt::from(n)) {
            Ok(v) => match v.to_i64() {
                Some(x) => {
                    unsafe { out.write(x) };
                    CollatzStatus::Ok
                }
                None => CollatzStatus::Overflow,
            },
            Err(e) => status_of(&e),
        }
    })
}

/// Total stopping time: steps until the orbit first reaches 1. `Truncated`
/// when the budget ran out first.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collatz_total_stopping_time(
    map: *const CollatzMap,
    n: u64,
    budget: u64,
    out: *mut u64,
) -> CollatzStatus {
    if map.is_null() || out.is_null() {
        return CollatzStatus::NullPointer;
    }
    guarded(|| {
        let spec = unsafe { &(*map).spec };
        let budget = usize::try_from(budget).unwrap_or(usize::MAX);
        match total_stopping_time(spec, n, budget) {
            Ok(Some(s)) => {
                unsafe { out.write(s) };
                CollatzStatus::Ok
            }
            Ok(None) => CollatzStatus::Truncated,
            Err(e) => status_of(&e),
        }
    })
}

/// Full orbit summary for one seed.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collatz_orbit_stats(
    map: *const CollatzMap,
    seed: i64,
    budget: u64,
    out: *mut CollatzOrbitStats,
) -> CollatzStatus {
    if map.is_null() || out.is_null() {
        return CollatzStatus::NullPointer;
    }
    guarded(|| {
        let spec = unsafe { &(*map).spec };
        let budget = usize::try_from(budget).unwrap_or(usize::MAX);
        match seed_stats(spec, seed, None, budget) {
            Ok(s) => {
                let stats = CollatzOrbitStats {
                    sigma_infty: s.sigma_infty.unwrap_or(u64::MAX),
                    ones: s.ones,
                    ones_ratio: s.ones_ratio.unwrap_or(f64::NAN),
                    gamma_ratio: s.gamma_ratio.unwrap_or(f64::NAN),
                    rho_ratio: s.rho_ratio.unwrap_or(f64::NAN),
                    ln_max_excursion: big_ln(&s.max_excursion).unwrap_or(f64::NAN),
                    budget_exhausted: s.budget_exhausted,
                };
                unsafe { out.write(stats) };
                if stats.budget_exhausted {
                    CollatzStatus::Truncated
                } else {
                    CollatzStatus::Ok
                }
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Look up a predicted constant by its name (as listed by the `constants`
/// CLI subcommand), e.g. "gamma_rrw_3".
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collatz_constant(
    name: *const c_char,
    out: *mut f64,
) -> CollatzStatus {
    if name.is_null() || out.is_null() {
        return CollatzStatus::NullPointer;
    }
    guarded(|| {
        let Ok(name) = unsafe { CStr::from_ptr(name) }.to_str() else {
            return CollatzStatus::InvalidArgument;
        };
        match ld::constant(name) {
            Some(v) => {
                unsafe { out.write(v) };
                CollatzStatus::Ok
            }
            None => CollatzStatus::Undefined,
        }
    })
}

/// Extreme leaf counts (N_k-, N_k+) of the depth-k pruned inverse trees.
///
/// # Safety
/// `out_min` and `out_max` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collatz_census_bounds(
    g: u64,
    k: u32,
    out_min: *mut u64,
    out_max: *mut u64,
) -> CollatzStatus {
    if out_min.is_null() || out_max.is_null() {
        return CollatzStatus::NullPointer;
    }
    guarded(|| match trees::tree_census(g, k) {
        Ok(row) => {
            unsafe {
                out_min.write(row.n_minus);
                out_max.write(row.n_plus);
            }
            CollatzStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// The scaled stopping-time constant gamma for the repeated-random-walk
/// model of the g-map. Only the 3x+1 walk descends, so only g = 3 has a
/// stopping constant; g = 5 reports `Undefined`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collatz_gamma_rrw(g: u64, out: *mut f64) -> CollatzStatus {
    if out.is_null() {
        return CollatzStatus::NullPointer;
    }
    if g != 3 && g != 5 {
        return CollatzStatus::InvalidArgument;
    }
    guarded(|| match ld::solve_gamma(&ld::Mgf::rrw(g)) {
        Ok(sol) => {
            unsafe { out.write(sol.gamma) };
            CollatzStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}
