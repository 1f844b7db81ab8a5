//! C ABI over the `coherent` crate.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/builder
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`CoherentStatus`]; the message of the most recent failure on the
//! calling thread is available from [`coherent_last_error`].
//!
//! Complex numbers are passed as interleaved `(re, im)` pairs of doubles and
//! matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coherent::classical_gates::{apply_cnot, truth_table, GateKind};
use coherent::complex_sets::{decode, encode, CSet, Label};
use coherent::contour::{kernel_of_projector, kernel_product, kernel_trace, ContourKernel};
use coherent::fock::{FockOperator, TruncationPolicy, C64};
use coherent::gates::{build_controlled, GateMatrix};
use coherent::spaces::{projector, q_function};
use coherent::{CoherentSpace, Error};

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherentStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    InvalidArgument = 3,
    Parse = 4,
    DuplicateLabel = 5,
    NonFiniteLabel = 6,
    NotASubset = 7,
    TooLarge = 8,
    InadequateTruncation = 9,
    DimensionMismatch = 10,
    IllConditioned = 11,
    DegenerateSpectrum = 12,
    WrongSpaceSize = 13,
    NotInSpace = 14,
    NotTraceClass = 15,
    NotADensityMatrix = 16,
    GridTooSmall = 17,
    Panic = 99,
}

impl From<&Error> for CoherentStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotASubset => Self::NotASubset,
            Error::CodeOutOfRange { .. } | Error::InvalidArgument(_) => Self::InvalidArgument,
            Error::TooLarge { .. } => Self::TooLarge,
            Error::DuplicateLabel { .. } => Self::DuplicateLabel,
            Error::NonFiniteLabel { .. } => Self::NonFiniteLabel,
            Error::InadequateTruncation { .. } => Self::InadequateTruncation,
            Error::DimensionMismatch { .. } => Self::DimensionMismatch,
            Error::IllConditioned { .. } => Self::IllConditioned,
            Error::NotInSpace { .. } => Self::NotInSpace,
            Error::NotADensityMatrix(_) => Self::NotADensityMatrix,
            Error::GridTooSmall { .. } => Self::GridTooSmall,
            Error::NotTraceClass => Self::NotTraceClass,
            Error::DegenerateSpectrum { .. } => Self::DegenerateSpectrum,
            Error::WrongSpaceSize { .. } => Self::WrongSpaceSize,
            Error::Parse(_) => Self::Parse,
        }
    }
}

/// Classical gate selector for [`coherent_truth_table_csv`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum CoherentGateKind {
    Or = 0,
    And = 1,
    Xor = 2,
    Not = 3,
    Cnot = 4,
}

impl From<CoherentGateKind> for GateKind {
    fn from(k: CoherentGateKind) -> Self {
        match k {
            CoherentGateKind::Or => GateKind::Or,
            CoherentGateKind::And => GateKind::And,
            CoherentGateKind::Xor => GateKind::Xor,
            CoherentGateKind::Not => GateKind::Not,
            CoherentGateKind::Cnot => GateKind::Cnot,
        }
    }
}

/// Opaque coherent space.
pub struct CoherentSpaceHandle(CoherentSpace);
/// Opaque quantum controlled gate on two coherent spaces.
pub struct CoherentGateHandle(GateMatrix);
/// Opaque residue-calculus operator kernel.
pub struct CoherentKernelHandle(ContourKernel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Status(CoherentStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type FResult<T> = std::result::Result<T, Fail>;

fn null(what: &str) -> Fail {
    Fail::Status(CoherentStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, recording any failure (or panic) as the thread's last error.
fn guard<F: FnOnce() -> FResult<()>>(f: F) -> CoherentStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoherentStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            CoherentStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CoherentStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> FResult<&'a [T]> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn labels_from(re_im: *const f64, n: usize) -> FResult<Vec<Label>> {
    let raw = slice(re_im, 2 * n, "labels")?;
    Ok(raw.chunks_exact(2).map(|c| Label::new(c[0], c[1])).collect())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> FResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies `values` as interleaved pairs into a caller buffer of `cap` doubles.
unsafe fn write_complex(values: impl ExactSizeIterator<Item = C64>, out: *mut f64, cap: usize) -> FResult<()> {
    let need = 2 * values.len();
    if cap < need {
        return Err(Fail::Status(
            CoherentStatus::BufferTooSmall,
            format!("buffer holds {cap} doubles, {need} needed"),
        ));
    }
    if need == 0 {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let buf = std::slice::from_raw_parts_mut(out, need);
    for (k, z) in values.enumerate() {
        buf[2 * k] = z.re;
        buf[2 * k + 1] = z.im;
    }
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coherent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn coherent_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn coherent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a coherent space from `n` labels given as `2n` doubles.
///
/// # Safety
/// `labels_re_im` must point to `2n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_new(
    labels_re_im: *const f64,
    n: usize,
    out: *mut *mut CoherentSpaceHandle,
) -> CoherentStatus {
    guard(|| {
        let labels = labels_from(labels_re_im, n)?;
        let s = CoherentSpace::new(&labels)?;
        write_out(out, boxed(CoherentSpaceHandle(s)), "out")
    })
}

/// # Safety
/// `space` must come from [`coherent_space_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_free(space: *mut CoherentSpaceHandle) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of labels, or 0 for NULL.
///
/// # Safety
/// `space` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_dim(space: *const CoherentSpaceHandle) -> usize {
    space.as_ref().map_or(0, |s| s.0.dim())
}

/// Gram metric g as an n x n row-major complex matrix (`2n^2` doubles).
///
/// # Safety
/// `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_gram(
    space: *const CoherentSpaceHandle,
    out: *mut f64,
    cap: usize,
) -> CoherentStatus {
    guard(|| {
        let s = &handle(space, "space")?.0;
        write_complex(s.g().transpose().iter().copied(), out, cap)
    })
}

/// Inverse metric G, same layout as [`coherent_space_gram`].
///
/// # Safety
/// `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_inverse_gram(
    space: *const CoherentSpaceHandle,
    out: *mut f64,
    cap: usize,
) -> CoherentStatus {
    guard(|| {
        let s = &handle(space, "space")?.0;
        write_complex(s.ginv().transpose().iter().copied(), out, cap)
    })
}

/// Eigenvalues of g in descending order into `n` doubles.
///
/// # Safety
/// `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_eigenvalues(
    space: *const CoherentSpaceHandle,
    out: *mut f64,
    cap: usize,
) -> CoherentStatus {
    guard(|| {
        let s = &handle(space, "space")?.0;
        let ev = s.eigvals();
        if cap < ev.len() {
            return Err(Fail::Status(
                CoherentStatus::BufferTooSmall,
                format!("buffer holds {cap} doubles, {} needed", ev.len()),
            ));
        }
        if !ev.is_empty() {
            if out.is_null() {
                return Err(null("output buffer"));
            }
            std::slice::from_raw_parts_mut(out, ev.len()).copy_from_slice(ev);
        }
        Ok(())
    })
}

/// Trace of the truncated-Fock projector onto the space.
///
/// # Safety
/// `out_trace` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_projector_trace(
    space: *const CoherentSpaceHandle,
    n_max: usize,
    out_trace: *mut f64,
) -> CoherentStatus {
    guard(|| {
        let s = &handle(space, "space")?.0;
        let p = projector(s, &TruncationPolicy::new(n_max))?;
        write_out(out_trace, p.trace().re, "out_trace")
    })
}

/// Generalized Q-function `Tr[P(S) rho]` for a `d x d` row-major density
/// matrix embedded in the Fock space truncated at `n_max`.
///
/// # Safety
/// `rho_re_im` must hold `2 d^2` doubles; `out_q` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_q_function(
    space: *const CoherentSpaceHandle,
    rho_re_im: *const f64,
    d: usize,
    n_max: usize,
    out_q: *mut f64,
) -> CoherentStatus {
    guard(|| {
        let s = &handle(space, "space")?.0;
        let trunc = TruncationPolicy::new(n_max);
        if d == 0 || d > trunc.dim() {
            return Err(Fail::Lib(Error::DimensionMismatch { expected: trunc.dim(), found: d }));
        }
        let raw = slice(rho_re_im, 2 * d * d, "rho")?;
        let mut m = nalgebra::DMatrix::zeros(trunc.dim(), trunc.dim());
        for i in 0..d {
            for j in 0..d {
                let k = 2 * (i * d + j);
                m[(i, j)] = C64::new(raw[k], raw[k + 1]);
            }
        }
        let q = q_function(&FockOperator(m), s, &trunc)?;
        write_out(out_q, q, "out_q")
    })
}

/// Metric-aware controlled gate with control space `a` and target space `b`
/// of equal size (CNOT for two points).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_gate_controlled(
    a: *const CoherentSpaceHandle,
    b: *const CoherentSpaceHandle,
    out: *mut *mut CoherentGateHandle,
) -> CoherentStatus {
    guard(|| {
        let (a, b) = (&handle(a, "a")?.0, &handle(b, "b")?.0);
        let gate = build_controlled(a, b)?;
        write_out(out, boxed(CoherentGateHandle(gate)), "out")
    })
}

/// # Safety
/// `gate` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn coherent_gate_free(gate: *mut CoherentGateHandle) {
    if !gate.is_null() {
        drop(Box::from_raw(gate));
    }
}

/// Applies the gate to a coordinate vector of length `|A| |B|` (control index
/// major); `out` receives the same number of complex entries.
///
/// # Safety
/// `v_re_im` holds `2 len` doubles; `out` holds `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn coherent_gate_apply(
    gate: *const CoherentGateHandle,
    v_re_im: *const f64,
    len: usize,
    out: *mut f64,
    cap: usize,
) -> CoherentStatus {
    guard(|| {
        let g = &handle(gate, "gate")?.0;
        let (na, nb) = g.dims();
        if len != na * nb {
            return Err(Fail::Lib(Error::DimensionMismatch { expected: na * nb, found: len }));
        }
        let raw = slice(v_re_im, 2 * len, "v")?;
        let v = nalgebra::DVector::from_iterator(len, raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])));
        let w = g.apply(&v)?;
        write_complex(w.iter().copied(), out, cap)
    })
}

/// Metric unitarity residual `max |U (G x G) U^+ - g x g|`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_gate_unitarity_residual(
    gate: *const CoherentGateHandle,
    out: *mut f64,
) -> CoherentStatus {
    guard(|| write_out(out, handle(gate, "gate")?.0.unitarity_residual(), "out"))
}

/// Kernel of the projector onto `space`.
///
/// # Safety
/// `space` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_kernel_projector(
    space: *const CoherentSpaceHandle,
    out: *mut *mut CoherentKernelHandle,
) -> CoherentStatus {
    guard(|| {
        let k = kernel_of_projector(&handle(space, "space")?.0);
        write_out(out, boxed(CoherentKernelHandle(k)), "out")
    })
}

/// Operator product `k1 k2` by residues.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_kernel_product(
    k1: *const CoherentKernelHandle,
    k2: *const CoherentKernelHandle,
    out: *mut *mut CoherentKernelHandle,
) -> CoherentStatus {
    guard(|| {
        let k = kernel_product(&handle(k1, "k1")?.0, &handle(k2, "k2")?.0);
        write_out(out, boxed(CoherentKernelHandle(k)), "out")
    })
}

/// Trace by residues; fails with `NotTraceClass` for kernels containing the
/// identity.
///
/// # Safety
/// `k` must be live; `out_re`, `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_kernel_trace(
    k: *const CoherentKernelHandle,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CoherentStatus {
    guard(|| {
        let t = kernel_trace(&handle(k, "kernel")?.0)?;
        write_out(out_re, t.re, "out_re")?;
        write_out(out_im, t.im, "out_im")
    })
}

/// Kernel as a JSON string; release it with [`coherent_string_free`].
///
/// # Safety
/// `k` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_kernel_to_json(
    k: *const CoherentKernelHandle,
    out: *mut *mut c_char,
) -> CoherentStatus {
    guard(|| {
        let text = serde_json::to_string(&handle(k, "kernel")?.0)
            .map_err(|e| Fail::Status(CoherentStatus::InvalidArgument, e.to_string()))?;
        let c = CString::new(text).expect("JSON has no NUL");
        write_out(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `k` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn coherent_kernel_free(k: *mut CoherentKernelHandle) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Classical CNOT on ideal codes over the base set `R`:
/// `(c1, c2) -> (c1, code(S1 + S2))`.
///
/// # Safety
/// `base_re_im` holds `2 n` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_cnot_classical(
    base_re_im: *const f64,
    n: usize,
    c1: u64,
    c2: u64,
    out_c1: *mut u64,
    out_c2: *mut u64,
) -> CoherentStatus {
    guard(|| {
        let base = CSet::new(labels_from(base_re_im, n)?)?;
        let (s1, s2) = (decode(&base, c1)?, decode(&base, c2)?);
        let (o1, o2) = apply_cnot(&s1, &s2, &base)?;
        write_out(out_c1, encode(&base, &o1)?.code, "out_c1")?;
        write_out(out_c2, encode(&base, &o2)?.code, "out_c2")
    })
}

/// Truth table as CSV text; release it with [`coherent_string_free`].
///
/// # Safety
/// `base_re_im` holds `2 n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_truth_table_csv(
    kind: CoherentGateKind,
    base_re_im: *const f64,
    n: usize,
    first_varying: bool,
    out: *mut *mut c_char,
) -> CoherentStatus {
    guard(|| {
        let base = CSet::new(labels_from(base_re_im, n)?)?;
        let csv = truth_table(kind.into(), &base)?.to_csv_string(first_varying);
        let c = CString::new(csv).expect("CSV has no NUL");
        write_out(out, c.into_raw(), "out")
    })
}

/// Parses labels from a JSON string `[[re, im], ...]` into a new space.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coherent_space_from_json(
    json: *const c_char,
    out: *mut *mut CoherentSpaceHandle,
) -> CoherentStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail::Status(CoherentStatus::Parse, e.to_string()))?;
        let labels = coherent::io::parse_labels(text)?;
        let s = CoherentSpace::new(&labels)?;
        write_out(out, boxed(CoherentSpaceHandle(s)), "out")
    })
}
