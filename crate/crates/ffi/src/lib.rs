//! C ABI for bellkit.
//!
//! Every fallible function returns a [`BkStatus`]; on failure the message is
//! kept in a thread-local slot readable through [`bk_last_error_message`].
//! States and witnesses are opaque handles released with their `_free`
//! functions. Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bellkit::bds::{bds_from_probabilities, ProbabilityMatrix};
use bellkit::builtins::named_support;
use bellkit::criteria::{
    ccnr_from_correlation, de_vicente_from_correlation, ppt_check, ssc_value, BdsCorrelationKernel, CorrelationMatrix,
};
use bellkit::error::Error;
use bellkit::nalgebra::DMatrix;
use bellkit::qlinalg::BipartiteDims;
use bellkit::search::{dichotomous_state, diophantine_solutions};
use bellkit::state::DensityMatrix;
use bellkit::witness::{noise_threshold, optimal_witness, witness_expectation, WitnessOperator, DETECTION_SLACK};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Unsupported = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Bell diagonal state together with its correlation matrix.
pub struct BkState {
    rho: DensityMatrix,
    probabilities: ProbabilityMatrix,
    correlation: CorrelationMatrix,
}

/// Optimal SSC witness.
pub struct BkWitness {
    inner: WitnessOperator,
}

/// Criterion value with its threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BkCriterion {
    pub value: f64,
    pub threshold: f64,
    pub detected: bool,
}

/// One row of the homogeneity diophantine table.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BkDiophantine {
    pub d: usize,
    pub size: usize,
    pub k: usize,
    pub ccnr_excess: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> BkStatus {
    match e {
        Error::Numerical(_) => BkStatus::Numerical,
        Error::Unsupported(_) | Error::BudgetExceeded { .. } => BkStatus::Unsupported,
        _ => BkStatus::InvalidArgument,
    }
}

struct Fail(BkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BkStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic in the thread-local slot.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BkStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            BkStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn state_ref<'a>(s: *const BkState) -> Result<&'a BkState, Fail> {
    s.as_ref().ok_or_else(|| null("state"))
}

fn boxed_state(p: ProbabilityMatrix) -> *mut BkState {
    let correlation = BdsCorrelationKernel::new(p.dims()).correlation(&p);
    let rho = bds_from_probabilities(&p);
    Box::into_raw(Box::new(BkState { rho, probabilities: p, correlation }))
}

/// Length in bytes of the last error message of this thread, without the
/// terminating NUL; 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn bk_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |m| m.len()))
}

/// Copies the last error message (NUL terminated, truncated to fit) into
/// `buf` and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bk_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let msg = e.as_deref().unwrap_or("");
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a Bell diagonal state from a row-major `d_a * d_b` probability matrix.
///
/// # Safety
/// `p` must point to `d_a * d_b` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn bk_state_from_probabilities(
    d_a: usize,
    d_b: usize,
    p: *const f64,
    out_state: *mut *mut BkState,
) -> BkStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        if p.is_null() {
            return Err(null("p"));
        }
        let dims = BipartiteDims::new(d_a, d_b)?;
        let n = d_a.checked_mul(d_b).ok_or_else(|| Fail(BkStatus::InvalidArgument, "dimension overflow".into()))?;
        let values = std::slice::from_raw_parts(p, n);
        let pm = ProbabilityMatrix::new(dims, DMatrix::from_row_slice(d_a, d_b, values))?;
        *slot = boxed_state(pm);
        Ok(())
    })
}

/// Creates the dichotomous state of a named support (e.g. "eq21").
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn bk_state_from_builtin(name: *const c_char, out_state: *mut *mut BkState) -> BkStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name =
            CStr::from_ptr(name).to_str().map_err(|_| Fail(BkStatus::InvalidArgument, "name is not UTF-8".into()))?;
        *slot = boxed_state(dichotomous_state(&named_support(name)?));
        Ok(())
    })
}

/// New state `(1 - eps) rho + eps * identity / (d_a d_b)`.
///
/// # Safety
/// `state` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn bk_state_with_noise(
    state: *const BkState,
    eps: f64,
    out_state: *mut *mut BkState,
) -> BkStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let s = state_ref(state)?;
        if !(0.0..=1.0).contains(&eps) {
            return Err(Fail(BkStatus::InvalidArgument, format!("eps must lie in [0, 1], got {eps}")));
        }
        let p = &s.probabilities;
        let n = p.dims().total() as f64;
        let m = p.matrix().map(|v| (1.0 - eps) * v + eps / n);
        *slot = boxed_state(ProbabilityMatrix::new(p.dims(), m)?);
        Ok(())
    })
}

/// Releases a state handle; null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_state_free(state: *mut BkState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Local dimensions of a state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_state_dims(state: *const BkState, d_a: *mut usize, d_b: *mut usize) -> BkStatus {
    guard(|| {
        let dims = state_ref(state)?.rho.dims();
        *out(d_a, "d_a")? = dims.d_a();
        *out(d_b, "d_b")? = dims.d_b();
        Ok(())
    })
}

/// Copies the row-major `(d_a d_b)^2` density matrix into `re` and `im`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bk_state_density(state: *const BkState, re: *mut f64, im: *mut f64, len: usize) -> BkStatus {
    guard(|| copy_matrix(state_ref(state)?.rho.matrix(), re, im, len))
}

unsafe fn copy_matrix(m: &bellkit::qlinalg::CMatrix, re: *mut f64, im: *mut f64, len: usize) -> Result<(), Fail> {
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    let n = m.nrows() * m.ncols();
    if len < n {
        return Err(Fail(BkStatus::BufferTooSmall, format!("buffer holds {len} entries, {n} needed")));
    }
    let (re, im) = (std::slice::from_raw_parts_mut(re, n), std::slice::from_raw_parts_mut(im, n));
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            re[r * m.ncols() + c] = z.re;
            im[r * m.ncols() + c] = z.im;
        }
    }
    Ok(())
}

/// CCNR criterion.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_state_ccnr(state: *const BkState, result: *mut BkCriterion) -> BkStatus {
    guard(|| {
        let r = ccnr_from_correlation(&state_ref(state)?.correlation)?;
        *out(result, "result")? = BkCriterion { value: r.value, threshold: r.threshold, detected: r.detected };
        Ok(())
    })
}

/// de Vicente criterion.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_state_de_vicente(state: *const BkState, result: *mut BkCriterion) -> BkStatus {
    guard(|| {
        let r = de_vicente_from_correlation(&state_ref(state)?.correlation)?;
        *out(result, "result")? = BkCriterion { value: r.value, threshold: r.threshold, detected: r.detected };
        Ok(())
    })
}

/// Smallest eigenvalue of the partial transpose and the PPT verdict.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_state_ppt(state: *const BkState, min_eig: *mut f64, is_ppt: *mut bool) -> BkStatus {
    guard(|| {
        let r = ppt_check(&state_ref(state)?.rho)?;
        *out(min_eig, "min_eig")? = r.min_eig;
        *out(is_ppt, "is_ppt")? = r.is_ppt;
        Ok(())
    })
}

/// SSC value `g(x, y)` and its bound `R(x, y)`; negative `g` detects entanglement.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_state_ssc(state: *const BkState, x: f64, y: f64, g: *mut f64, bound: *mut f64) -> BkStatus {
    guard(|| {
        let r = ssc_value(&state_ref(state)?.correlation, x, y)?;
        *out(g, "g")? = r.g;
        *out(bound, "bound")? = r.bound;
        Ok(())
    })
}

/// Largest white-noise fraction still detected at `(x, y)`, by bisection to `tol`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_state_noise_threshold(
    state: *const BkState,
    x: f64,
    y: f64,
    tol: f64,
    eps_max: *mut f64,
) -> BkStatus {
    guard(|| {
        *out(eps_max, "eps_max")? = noise_threshold(&state_ref(state)?.correlation, x, y, tol)?;
        Ok(())
    })
}

/// Optimal witness at `(x, y)` and its expectation value on the state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_witness_optimal(
    state: *const BkState,
    x: f64,
    y: f64,
    out_witness: *mut *mut BkWitness,
    value: *mut f64,
) -> BkStatus {
    guard(|| {
        let slot = out(out_witness, "out_witness")?;
        let v = out(value, "value")?;
        let (w, val) = optimal_witness(&state_ref(state)?.rho, x, y)?;
        *v = val;
        *slot = Box::into_raw(Box::new(BkWitness { inner: w }));
        Ok(())
    })
}

/// Whether an expectation value counts as a detection.
#[no_mangle]
pub extern "C" fn bk_is_detection(value: f64) -> bool {
    value < -DETECTION_SLACK
}

/// Expectation value of a witness on a state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_witness_expectation(
    witness: *const BkWitness,
    state: *const BkState,
    value: *mut f64,
) -> BkStatus {
    guard(|| {
        let w = witness.as_ref().ok_or_else(|| null("witness"))?;
        *out(value, "value")? = witness_expectation(&w.inner, &state_ref(state)?.rho)?;
        Ok(())
    })
}

/// Copies the row-major `(d_a d_b)^2` witness operator into `re` and `im`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bk_witness_matrix(
    witness: *const BkWitness,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> BkStatus {
    guard(|| {
        let w = witness.as_ref().ok_or_else(|| null("witness"))?;
        copy_matrix(w.inner.matrix(), re, im, len)
    })
}

/// Releases a witness handle; null is ignored.
///
/// # Safety
/// `witness` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_witness_free(witness: *mut BkWitness) {
    if !witness.is_null() {
        drop(Box::from_raw(witness));
    }
}

/// Fills `rows` with the nontrivial homogeneity solutions for `dmin <= d <= dmax`.
/// `count` receives the total number of rows; when it exceeds `cap` the call
/// returns `BufferTooSmall` after writing the first `cap` rows.
///
/// # Safety
/// `rows` must be null (with `cap == 0`) or point to `cap` writable rows.
#[no_mangle]
pub unsafe extern "C" fn bk_diophantine(
    dmin: usize,
    dmax: usize,
    rows: *mut BkDiophantine,
    cap: usize,
    count: *mut usize,
) -> BkStatus {
    guard(|| {
        let count = out(count, "count")?;
        let sols = diophantine_solutions(dmin, dmax)?;
        *count = sols.len();
        if cap > 0 && rows.is_null() {
            return Err(null("rows"));
        }
        for (k, s) in sols.iter().take(cap).enumerate() {
            *rows.add(k) = BkDiophantine { d: s.d, size: s.cardinality, k: s.k, ccnr_excess: s.ccnr_excess };
        }
        if sols.len() > cap {
            return Err(Fail(BkStatus::BufferTooSmall, format!("{} rows available, capacity {cap}", sols.len())));
        }
        Ok(())
    })
}
