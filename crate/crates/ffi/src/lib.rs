//! C ABI for `dsoslrc`.
//!
//! Every function returns a [`DsStatus`]; results are written through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free` function. Indices are 0-based. Panics never cross the boundary;
//! they surface as [`DsStatus::Panic`].

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use dsoslrc::dantzig::{solve_dantzig, DantzigProblem};
use nalgebra::{DMatrix, DVector};
use dsoslrc::orchestration::{Algorithm, AlgorithmConfig, Learner, Mode};
use dsoslrc::sampling::{InclusionLaw, InclusionProbabilities, SamplingWeights};
use dsoslrc::schedule::{
    derive_constants, gamma_hat, nu, ons_params, practical_scale, NuState, ProblemConstants, ScheduleConstants,
};
use dsoslrc::simplex::SimplexOptions;
use dsoslrc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    BufferTooSmall = 4,
    Infeasible = 5,
    Unbounded = 6,
    IterationLimit = 7,
    ProtocolViolation = 8,
    Panic = 9,
}

impl From<&Error> for DsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Infeasible => DsStatus::Infeasible,
            Error::Unbounded => DsStatus::Unbounded,
            Error::IterationLimit(_) => DsStatus::IterationLimit,
            Error::DimensionMismatch { .. } => DsStatus::DimensionMismatch,
            Error::InvalidParameter { name: "protocol", .. } => DsStatus::ProtocolViolation,
            _ => DsStatus::InvalidArgument,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsAlgorithm {
    DsOslrc = 0,
    DsPoslrc = 1,
    UniformBaseline = 2,
    FullInfoOracle = 3,
}

// raw integers cross the boundary so an out-of-range value from C is an
// error rather than an invalid enum
fn algorithm_from_raw(a: u32) -> Option<Algorithm> {
    const ALL: [(DsAlgorithm, Algorithm); 4] = [
        (DsAlgorithm::DsOslrc, Algorithm::DsOslrc),
        (DsAlgorithm::DsPoslrc, Algorithm::DsPoslrc),
        (DsAlgorithm::UniformBaseline, Algorithm::UniformBaseline),
        (DsAlgorithm::FullInfoOracle, Algorithm::FullInfoOracle),
    ];
    ALL.iter().find(|(c, _)| *c as u32 == a).map(|(_, alg)| *alg)
}

/// Problem description shared by the schedule and learner constructors.
/// `k0 = 0` selects the base protocol; `c` in `(0, 1]` scales the threshold
/// (`c = 1` is the exact schedule).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsProblem {
    pub d: usize,
    pub k: usize,
    pub k0: usize,
    pub sigma: f64,
    pub delta: f64,
    pub delta_s: f64,
    pub c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DsConstants {
    pub g: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub s0: f64,
    pub s1: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub y_delta: f64,
    pub rho: f64,
    pub epsilon: f64,
}

/// Threshold schedule with its running `nu` state.
pub struct DsSchedule {
    pc: ProblemConstants,
    sc: ScheduleConstants,
    nu: NuState,
}

/// Step-wise learner.
pub struct DsLearner {
    inner: Learner,
}

fn guard(f: impl FnOnce() -> DsStatus) -> DsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(DsStatus::Panic)
}

fn status(r: Result<(), Error>) -> DsStatus {
    match r {
        Ok(()) => DsStatus::Ok,
        Err(e) => DsStatus::from(&e),
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Option<&'a [T]> {
    if n == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, n))
    }
}

unsafe fn slice_mut<'a, T>(p: *mut T, n: usize) -> Option<&'a mut [T]> {
    if n == 0 {
        Some(&mut [])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(p, n))
    }
}

fn problem_constants(p: &DsProblem) -> Result<ProblemConstants, Error> {
    if p.k0 == 0 {
        ProblemConstants::oslr(p.d, p.k, p.sigma, p.delta, p.delta_s)
    } else {
        ProblemConstants::poslr(p.d, p.k, p.k0, p.sigma, p.delta, p.delta_s)
    }
}

/// Library version as a NUL-terminated string with static lifetime.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static description of a `DsStatus` value.
#[no_mangle]
pub extern "C" fn ds_status_message(status: u32) -> *const c_char {
    let s: &'static str = match status {
        0 => "ok\0",
        1 => "null pointer argument\0",
        2 => "invalid argument\0",
        3 => "dimension mismatch\0",
        4 => "output buffer too small\0",
        5 => "problem is infeasible\0",
        6 => "problem is unbounded\0",
        7 => "iteration limit reached\0",
        8 => "learner calls out of order\0",
        9 => "internal panic\0",
        _ => "unknown status\0",
    };
    s.as_ptr().cast()
}

/// Joint inclusion probability of `n` (1 to 3) distinct indices under the
/// sampler with weights `q[0..d]` (normalized internally) and budget `k`.
///
/// # Safety
/// `q` must point to `d` readable doubles, `idx` to `n` indices, and `out`
/// to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ds_inclusion_probability(
    q: *const f64,
    d: usize,
    k: usize,
    idx: *const usize,
    n: usize,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        let (Some(q), Some(idx)) = (slice(q, d), slice(idx, n)) else {
            return DsStatus::NullPointer;
        };
        if out.is_null() {
            return DsStatus::NullPointer;
        }
        if q.iter().any(|v| !v.is_finite() || *v < 0.0) || d == 0 {
            return DsStatus::InvalidArgument;
        }
        let w = SamplingWeights::from_weights(q);
        let r = match idx {
            [i] => dsoslrc::sampling::p_single(&w, k, *i),
            [i, j] => dsoslrc::sampling::p_pair(&w, k, *i, *j),
            [i, j, r] => dsoslrc::sampling::p_triple(&w, k, *i, *j, *r),
            _ => return DsStatus::InvalidArgument,
        };
        match r {
            Ok(p) => {
                *out = p;
                DsStatus::Ok
            }
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// Inclusion probabilities of every single index, written to `out[0..d]`.
///
/// # Safety
/// `q` and `out` must point to `d` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_single_inclusion(q: *const f64, d: usize, k: usize, out: *mut f64) -> DsStatus {
    guard(|| {
        let (Some(q), Some(out)) = (slice(q, d), slice_mut(out, d)) else {
            return DsStatus::NullPointer;
        };
        if d == 0 || q.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return DsStatus::InvalidArgument;
        }
        match InclusionLaw::new(SamplingWeights::from_weights(q), k) {
            Ok(law) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = law.single(i);
                }
                DsStatus::Ok
            }
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// Solves `min ||w||_1` subject to `||bbar - M w||_inf <= gamma` with `M`
/// given row-major.
///
/// # Safety
/// `bbar` and `w_out` must hold `d` doubles, `mbar` `d * d` doubles;
/// `objective_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn ds_solve_dantzig(
    bbar: *const f64,
    mbar: *const f64,
    d: usize,
    gamma: f64,
    w_out: *mut f64,
    objective_out: *mut f64,
) -> DsStatus {
    guard(|| {
        let (Some(b), Some(m), Some(w_out)) = (slice(bbar, d), slice(mbar, d * d), slice_mut(w_out, d)) else {
            return DsStatus::NullPointer;
        };
        let problem = match DantzigProblem::new(DVector::from_row_slice(b), DMatrix::from_row_slice(d, d, m), gamma) {
            Ok(p) => p,
            Err(e) => return DsStatus::from(&e),
        };
        match solve_dantzig(&problem, &SimplexOptions::default()) {
            Ok(sol) => {
                w_out.copy_from_slice(sol.w.as_slice());
                if !objective_out.is_null() {
                    *objective_out = sol.objective;
                }
                DsStatus::Ok
            }
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// # Safety
/// `problem` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_schedule_new(problem: *const DsProblem, out: *mut *mut DsSchedule) -> DsStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return DsStatus::NullPointer;
        }
        let p = *problem;
        let built = problem_constants(&p)
            .and_then(|pc| Ok((pc, derive_constants(&pc)?)))
            .and_then(|(pc, sc)| Ok((pc, practical_scale(&sc, p.c)?)));
        match built {
            Ok((pc, sc)) => {
                *out = Box::into_raw(Box::new(DsSchedule {
                    pc,
                    sc,
                    nu: NuState::new(),
                }));
                DsStatus::Ok
            }
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// Threshold for exploration index `s`; calls must use nondecreasing `s`.
///
/// # Safety
/// `h` must come from [`ds_schedule_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_schedule_gamma_hat(h: *mut DsSchedule, s: u64, out: *mut f64) -> DsStatus {
    guard(|| {
        let (Some(h), false) = (h.as_mut(), out.is_null()) else {
            return DsStatus::NullPointer;
        };
        if s == 0 || s < h.nu.s() {
            return DsStatus::InvalidArgument;
        }
        let v = nu(s, &mut h.nu, &h.sc, &h.pc);
        *out = gamma_hat(s, v, &h.sc, &h.pc);
        DsStatus::Ok
    })
}

/// # Safety
/// `h` must come from [`ds_schedule_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_schedule_constants(h: *const DsSchedule, out: *mut DsConstants) -> DsStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return DsStatus::NullPointer;
        };
        let ons = match ons_params(h.pc.sigma, h.pc.delta, h.pc.k) {
            Ok(o) => o,
            Err(e) => return DsStatus::from(&e),
        };
        let sc = &h.sc;
        *out = DsConstants {
            g: sc.g,
            mu1: sc.mu1,
            mu2: sc.mu2,
            s0: sc.s0,
            s1: sc.s1,
            a1: sc.a1,
            a2: sc.a2,
            a3: sc.a3,
            a4: sc.a4,
            a5: sc.a5,
            y_delta: ons.y_delta,
            rho: ons.rho,
            epsilon: ons.epsilon,
        };
        DsStatus::Ok
    })
}

/// # Safety
/// `h` must come from [`ds_schedule_new`] (or be null) and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ds_schedule_free(h: *mut DsSchedule) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Creates a learner; `algorithm` is a `DsAlgorithm` value.
///
/// # Safety
/// `problem` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_new(
    algorithm: u32,
    problem: *const DsProblem,
    seed: u64,
    out: *mut *mut DsLearner,
) -> DsStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return DsStatus::NullPointer;
        }
        let Some(alg) = algorithm_from_raw(algorithm) else {
            return DsStatus::InvalidArgument;
        };
        let p = *problem;
        let built = problem_constants(&p).and_then(|pc| {
            let cfg = AlgorithmConfig::new(pc, u64::MAX, Mode::Practical { c: p.c }, seed);
            Learner::new(alg, &cfg)
        });
        match built {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DsLearner { inner }));
                DsStatus::Ok
            }
            Err(e) => DsStatus::from(&e),
        }
    })
}

unsafe fn write_indices(src: &[usize], out: *mut usize, cap: usize, n_out: *mut usize) -> DsStatus {
    *n_out = src.len();
    if src.len() > cap {
        return DsStatus::BufferTooSmall;
    }
    if let Some(dst) = slice_mut(out, src.len()) {
        dst.copy_from_slice(src);
        DsStatus::Ok
    } else {
        DsStatus::NullPointer
    }
}

/// Starts a round; writes the coordinates to reveal before predicting.
/// `cap` must be at least `d`.
///
/// # Safety
/// `h` must come from [`ds_learner_new`]; `idx_out` must hold `cap` indices.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_query(
    h: *mut DsLearner,
    idx_out: *mut usize,
    cap: usize,
    n_out: *mut usize,
) -> DsStatus {
    guard(|| {
        let (Some(h), false) = (h.as_mut(), n_out.is_null()) else {
            return DsStatus::NullPointer;
        };
        if cap < h.inner.dim() {
            *n_out = h.inner.dim();
            return DsStatus::BufferTooSmall;
        }
        match h.inner.query() {
            Ok(idx) => write_indices(idx, idx_out, cap, n_out),
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// # Safety
/// `values` must hold `n` doubles (the queried coordinates, in query order);
/// `y_hat_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_predict(
    h: *mut DsLearner,
    values: *const f64,
    n: usize,
    y_hat_out: *mut f64,
) -> DsStatus {
    guard(|| {
        let (Some(h), Some(v), false) = (h.as_mut(), slice(values, n), y_hat_out.is_null()) else {
            return DsStatus::NullPointer;
        };
        match h.inner.predict(v) {
            Ok(y) => {
                *y_hat_out = y;
                DsStatus::Ok
            }
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// Records the label; writes the coordinates to reveal afterwards (none for
/// the base protocol). `cap` must be at least `d`.
///
/// # Safety
/// `h` must come from [`ds_learner_new`]; `idx_out` must hold `cap` indices.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_observe_label(
    h: *mut DsLearner,
    y: f64,
    idx_out: *mut usize,
    cap: usize,
    n_out: *mut usize,
) -> DsStatus {
    guard(|| {
        let (Some(h), false) = (h.as_mut(), n_out.is_null()) else {
            return DsStatus::NullPointer;
        };
        if cap < h.inner.dim() {
            *n_out = h.inner.dim();
            return DsStatus::BufferTooSmall;
        }
        match h.inner.observe_label(y) {
            Ok(idx) => write_indices(idx, idx_out, cap, n_out),
            Err(e) => DsStatus::from(&e),
        }
    })
}

/// Finishes the round with the follow-up values.
///
/// # Safety
/// `values` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_complete(h: *mut DsLearner, values: *const f64, n: usize) -> DsStatus {
    guard(|| {
        let (Some(h), Some(v)) = (h.as_mut(), slice(values, n)) else {
            return DsStatus::NullPointer;
        };
        status(h.inner.complete(v).map(|_| ()))
    })
}

/// Copies the current selector estimate into `w_out[0..d]`.
///
/// # Safety
/// `w_out` must hold `d` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_weights(h: *const DsLearner, w_out: *mut f64, d: usize) -> DsStatus {
    guard(|| {
        let Some(h) = h.as_ref() else {
            return DsStatus::NullPointer;
        };
        if d != h.inner.dim() {
            return DsStatus::DimensionMismatch;
        }
        let Some(out) = slice_mut(w_out, d) else {
            return DsStatus::NullPointer;
        };
        out.copy_from_slice(h.inner.weights().as_slice());
        DsStatus::Ok
    })
}

/// Writes the current estimated support (increasing order).
///
/// # Safety
/// `idx_out` must hold `cap` indices.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_support(
    h: *const DsLearner,
    idx_out: *mut usize,
    cap: usize,
    n_out: *mut usize,
) -> DsStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), n_out.is_null()) else {
            return DsStatus::NullPointer;
        };
        write_indices(h.inner.support(), idx_out, cap, n_out)
    })
}

/// # Safety
/// `h` must come from [`ds_learner_new`] (or be null) and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ds_learner_free(h: *mut DsLearner) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
