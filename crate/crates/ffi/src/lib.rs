//! C ABI for `monosync`.
//!
//! Objects are opaque handles created by `ms_*_new`-style constructors and
//! released with the matching `ms_*_free`. Every fallible call returns an
//! `MsStatus`; on failure a description is available from
//! `ms_last_error_message` on the same thread. Panics never cross the
//! boundary.
//!
//! Reduced states are passed as N−1 sorted doubles θ_k − θ_1 in [0, 2π].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use monosync::{
    derivative_terms, reduced_vector_field, simulate, tv_distance, CouplingFunction, CriticalSet,
    Curvature, Error, Extremum, InitialState, ModelParams, Monotonicity, ReducedState, SimConfig,
    Terminal, Trajectory,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotMonotone = 3,
    MixedCurvature = 4,
    DimensionMismatch = 5,
    EmptyDecomposition = 6,
    SynchronizedPair = 7,
    NumericalDivergence = 8,
    BufferTooSmall = 9,
    OutOfRange = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsMonotonicity {
    Increasing = 1,
    Decreasing = -1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsCurvature {
    Convex = 1,
    Concave = -1,
    Affine = 0,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsExtremum {
    Min = -1,
    Max = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsTerminal {
    Horizon = 0,
    FullSync = 1,
    SplayConverged = 2,
}

/// Integrator settings for `ms_simulate`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MsSimOptions {
    pub dt: f64,
    pub t_end: f64,
    pub sync_eps: f64,
    pub record_every: usize,
    pub splay_tol: f64,
}

/// Opaque coupling function.
pub struct MsCoupling(CouplingFunction);

/// Opaque model: coupling, natural frequency and population size.
pub struct MsModel(ModelParams);

/// Opaque simulation result.
pub struct MsTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: MsStatus, msg: impl Into<String>) -> MsStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> MsStatus {
    match e {
        Error::NotMonotone => MsStatus::NotMonotone,
        Error::MixedCurvature => MsStatus::MixedCurvature,
        Error::DimensionMismatch { .. } => MsStatus::DimensionMismatch,
        Error::EmptyDecomposition => MsStatus::EmptyDecomposition,
        Error::SynchronizedPair { .. } => MsStatus::SynchronizedPair,
        Error::NumericalDivergence { .. } => MsStatus::NumericalDivergence,
        Error::Trial { source, .. } => status_of(source),
        _ => MsStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> MsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, turning panics into `MsStatus::Panic`.
fn guard(f: impl FnOnce() -> MsStatus) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MsStatus::Panic, "internal panic"),
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], MsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(MsStatus::NullPointer, "null array pointer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], MsStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(MsStatus::NullPointer, "null output pointer"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn reduced(p: *const f64, len: usize) -> Result<ReducedState, MsStatus> {
    let v = slice(p, len)?;
    ReducedState::new(v.to_vec()).map_err(from_error)
}

macro_rules! try_ms {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(MsStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(c) => c,
            Err(_) => panic!("version string"),
        };
    V.as_ptr()
}

fn put_coupling(out: *mut *mut MsCoupling, g: CouplingFunction) -> MsStatus {
    unsafe { *out = Box::into_raw(Box::new(MsCoupling(g))) };
    MsStatus::Ok
}

/// Γ(θ) = s·(a + e^{−θ})/n with s = ±1, a > 0, n ≥ 2.
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_expfam(
    s: i32,
    a: f64,
    n: usize,
    out: *mut *mut MsCoupling,
) -> MsStatus {
    guard(|| {
        non_null!(out);
        match CouplingFunction::expfam(s, a, n) {
            Ok(g) => put_coupling(out, g),
            Err(e) => from_error(e),
        }
    })
}

/// Γ(θ) = slope·θ + intercept on (0, 2π).
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_affine(
    slope: f64,
    intercept: f64,
    out: *mut *mut MsCoupling,
) -> MsStatus {
    guard(|| {
        non_null!(out);
        match CouplingFunction::affine(slope, intercept) {
            Ok(g) => put_coupling(out, g),
            Err(e) => from_error(e),
        }
    })
}

/// Piecewise-linear coupling through `len` knots (`theta[i]`, `value[i]`),
/// with `theta` strictly increasing inside (0, 2π).
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_tabulated(
    theta: *const f64,
    value: *const f64,
    len: usize,
    out: *mut *mut MsCoupling,
) -> MsStatus {
    guard(|| {
        non_null!(out);
        let xs = try_ms!(slice(theta, len));
        let ys = try_ms!(slice(value, len));
        let knots: Vec<[f64; 2]> = xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect();
        match CouplingFunction::tabulated(&knots) {
            Ok(g) => put_coupling(out, g),
            Err(e) => from_error(e),
        }
    })
}

/// Overrides Γ(0).
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_set_value_at_zero(g: *mut MsCoupling, value: f64) -> MsStatus {
    guard(|| {
        non_null!(g);
        let g = &mut *g;
        match g.0.clone().with_value_at_zero(value) {
            Ok(next) => {
                g.0 = next;
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a coupling. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_free(g: *mut MsCoupling) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Γ(x) for any finite x.
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_eval(g: *const MsCoupling, x: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        non_null!(g, out);
        match (*g).0.eval(x) {
            Ok(v) => {
                *out = v;
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Monotonicity and curvature class on a uniform grid of `n_samples` points
/// (0 selects the default).
#[no_mangle]
pub unsafe extern "C" fn ms_coupling_classify(
    g: *const MsCoupling,
    n_samples: usize,
    monotonicity: *mut MsMonotonicity,
    curvature: *mut MsCurvature,
) -> MsStatus {
    guard(|| {
        non_null!(g, monotonicity, curvature);
        let n = if n_samples == 0 {
            monosync::coupling::DEFAULT_CLASSIFY_SAMPLES
        } else {
            n_samples
        };
        match (*g).0.classify(n, None) {
            Ok(c) => {
                *monotonicity = match c.monotonicity {
                    Monotonicity::Increasing => MsMonotonicity::Increasing,
                    Monotonicity::Decreasing => MsMonotonicity::Decreasing,
                };
                *curvature = match c.curvature {
                    Curvature::Convex => MsCurvature::Convex,
                    Curvature::Concave => MsCurvature::Concave,
                    Curvature::Affine => MsCurvature::Affine,
                };
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Total-variation distance between two reduced states of length `len`.
#[no_mangle]
pub unsafe extern "C" fn ms_tv_distance(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        non_null!(out);
        let x = try_ms!(reduced(x, len));
        let y = try_ms!(reduced(y, len));
        match tv_distance(&x, &y) {
            Ok(d) => {
                *out = d;
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Critical decomposition of a difference vector `d` of length `len`.
///
/// Writes the 1-based critical indices and their kinds into buffers of
/// capacity `cap`, the count into `n_critical` and the alternating sum into
/// `alternating_sum`. When `cap` is too small the count is still written
/// and `MsStatus::BufferTooSmall` is returned.
#[no_mangle]
pub unsafe extern "C" fn ms_decompose(
    d: *const f64,
    len: usize,
    indices: *mut usize,
    kinds: *mut MsExtremum,
    cap: usize,
    n_critical: *mut usize,
    alternating_sum: *mut f64,
) -> MsStatus {
    guard(|| {
        non_null!(n_critical, alternating_sum);
        let d = try_ms!(slice(d, len));
        let cs = match CriticalSet::from_differences(d) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        *n_critical = cs.n_c();
        if cs.n_c() > cap {
            return fail(
                MsStatus::BufferTooSmall,
                format!("need room for {} critical indices", cs.n_c()),
            );
        }
        non_null!(indices, kinds);
        for (k, (i, kind)) in cs.iter().enumerate() {
            *indices.add(k) = i;
            *kinds.add(k) = match kind {
                Extremum::Min => MsExtremum::Min,
                Extremum::Max => MsExtremum::Max,
            };
        }
        match cs.alternating_sum(d) {
            Ok(a) => {
                *alternating_sum = a;
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Model with `n` oscillators of natural frequency `omega`. The coupling is
/// copied and must be admissible.
#[no_mangle]
pub unsafe extern "C" fn ms_model_new(
    g: *const MsCoupling,
    omega: f64,
    n: usize,
    out: *mut *mut MsModel,
) -> MsStatus {
    guard(|| {
        non_null!(g, out);
        match ModelParams::new((*g).0.clone(), omega, n) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(MsModel(p)));
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a model. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_model_free(m: *mut MsModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Rotating-frame vector field at an interior reduced state; `x` and `out`
/// both hold `len` = N−1 doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_reduced_field(
    m: *const MsModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        non_null!(m);
        let x = try_ms!(reduced(x, len));
        let dst = try_ms!(slice_mut(out, len));
        match reduced_vector_field(&(*m).0, &x) {
            Ok(v) => {
                dst.copy_from_slice(&v);
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Analytic rate of change of the total-variation distance between two
/// interior states.
#[no_mangle]
pub unsafe extern "C" fn ms_distance_rate(
    m: *const MsModel,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        non_null!(m, out);
        let x = try_ms!(reduced(x, len));
        let y = try_ms!(reduced(y, len));
        match derivative_terms(&(*m).0, &x, &y) {
            Ok(t) => {
                *out = t.distance_rate;
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Default integrator settings.
#[no_mangle]
pub extern "C" fn ms_sim_options_default() -> MsSimOptions {
    MsSimOptions {
        dt: 1e-3,
        t_end: 500.0,
        sync_eps: monosync::integrator::DEFAULT_SYNC_EPS,
        record_every: 100,
        splay_tol: monosync::integrator::DEFAULT_SPLAY_TOL,
    }
}

/// Integrates from the reduced state `x` (length N−1, oscillator 1 at
/// phase 0). `opts` may be NULL for the defaults.
#[no_mangle]
pub unsafe extern "C" fn ms_simulate(
    m: *const MsModel,
    x: *const f64,
    len: usize,
    opts: *const MsSimOptions,
    out: *mut *mut MsTrajectory,
) -> MsStatus {
    guard(|| {
        non_null!(m, out);
        let x = try_ms!(reduced(x, len));
        let o = if opts.is_null() {
            ms_sim_options_default()
        } else {
            *opts
        };
        let cfg = SimConfig {
            params: (*m).0.clone(),
            initial: InitialState::Reduced(x),
            dt: o.dt,
            t_end: o.t_end,
            sync_eps: o.sync_eps,
            record_every: o.record_every,
            splay_tol: o.splay_tol,
        };
        match simulate(&cfg) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(MsTrajectory(t)));
                MsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a trajectory. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_trajectory_free(t: *mut MsTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of recorded samples, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn ms_trajectory_n_samples(t: *const MsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Number of synchronization events, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn ms_trajectory_n_events(t: *const MsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.events.len())
}

/// Time and N absolute phases (wrapped into [0, 2π)) of sample `i`.
#[no_mangle]
pub unsafe extern "C" fn ms_trajectory_sample(
    t: *const MsTrajectory,
    i: usize,
    time: *mut f64,
    phases: *mut f64,
    len: usize,
) -> MsStatus {
    guard(|| {
        non_null!(t, time);
        let traj = &(*t).0;
        let Some(s) = traj.samples.get(i) else {
            return fail(MsStatus::OutOfRange, format!("sample {i} out of range"));
        };
        let p = s.state.phases();
        if len < p.len() {
            return fail(
                MsStatus::BufferTooSmall,
                format!("need room for {} phases", p.len()),
            );
        }
        let dst = try_ms!(slice_mut(phases, p.len()));
        dst.copy_from_slice(&p);
        *time = s.t;
        MsStatus::Ok
    })
}

/// How the run ended; `time` receives the terminal time (the horizon is
/// reported as the last sample time).
#[no_mangle]
pub unsafe extern "C" fn ms_trajectory_terminal(
    t: *const MsTrajectory,
    kind: *mut MsTerminal,
    time: *mut f64,
) -> MsStatus {
    guard(|| {
        non_null!(t, kind, time);
        let traj = &(*t).0;
        let (k, at) = match traj.terminal {
            Terminal::Horizon => (MsTerminal::Horizon, traj.last().t),
            Terminal::FullSync { t } => (MsTerminal::FullSync, t),
            Terminal::SplayConverged { t } => (MsTerminal::SplayConverged, t),
        };
        *kind = k;
        *time = at;
        MsStatus::Ok
    })
}

/// Time and resulting multiplicity of event `i`.
#[no_mangle]
pub unsafe extern "C" fn ms_trajectory_event(
    t: *const MsTrajectory,
    i: usize,
    time: *mut f64,
    multiplicity: *mut usize,
) -> MsStatus {
    guard(|| {
        non_null!(t, time, multiplicity);
        let traj = &(*t).0;
        let Some(e) = traj.events.get(i) else {
            return fail(MsStatus::OutOfRange, format!("event {i} out of range"));
        };
        *time = e.t;
        *multiplicity = e.multiplicity;
        MsStatus::Ok
    })
}
