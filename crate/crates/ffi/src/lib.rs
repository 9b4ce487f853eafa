//! C ABI over `unitary-fisher`.
//!
//! Every entry point returns a [`UfStatus`]. On failure a message is kept per
//! thread and can be copied out with [`uf_last_error_message`]. POVMs are
//! passed around as opaque [`UfPovm`] handles that must be released with
//! [`uf_povm_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use unitary_fisher::channel_model::ProbeFamily;
use unitary_fisher::fisher::{self, FisherMatrix};
use unitary_fisher::povm::{self, Povm};
use unitary_fisher::{Error, Tolerances};

/// Result codes returned by every function in this library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Domain = 4,
    InvalidPovm = 5,
    SingularOutcome = 6,
    NotPositiveDefinite = 7,
    NonIdentifiable = 8,
    NotAchievable = 9,
    NoConvergence = 10,
    Parse = 11,
    Io = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

/// Opaque POVM handle.
pub struct UfPovm {
    inner: Povm,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> UfStatus {
    match err {
        Error::DimensionMismatch(_) => UfStatus::DimensionMismatch,
        Error::InvalidArgument(_) | Error::InvalidDistribution(_) => UfStatus::InvalidArgument,
        Error::Domain(_) => UfStatus::Domain,
        Error::NotPositiveDefinite { .. } | Error::IllPosedSld { .. } => {
            UfStatus::NotPositiveDefinite
        }
        Error::SingularOutcome { .. } => UfStatus::SingularOutcome,
        Error::InvalidPovm(_) => UfStatus::InvalidPovm,
        Error::NonIdentifiable { .. } => UfStatus::NonIdentifiable,
        Error::NotAchievable { .. } => UfStatus::NotAchievable,
        Error::NoConvergence { .. } => UfStatus::NoConvergence,
        Error::Parse(_) => UfStatus::Parse,
        Error::Io(_) => UfStatus::Io,
    }
}

fn fail(status: UfStatus, msg: impl Into<String>) -> UfStatus {
    set_error(msg.into());
    status
}

/// Run `f`, translating library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), UfStatus>) -> UfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(UfStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: unitary_fisher::Result<T>) -> Result<T, UfStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn povm_ref<'a>(p: *const UfPovm) -> Result<&'a Povm, UfStatus> {
    if p.is_null() {
        return Err(fail(UfStatus::NullPointer, "null POVM handle"));
    }
    Ok(&(*p).inner)
}

fn check_out<T>(p: *mut T) -> Result<(), UfStatus> {
    if p.is_null() {
        Err(fail(UfStatus::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

unsafe fn emit_povm(
    out: *mut *mut UfPovm,
    r: unitary_fisher::Result<Povm>,
) -> Result<(), UfStatus> {
    check_out(out)?;
    let inner = lift(r)?;
    *out = Box::into_raw(Box::new(UfPovm { inner }));
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, UfStatus> {
    if path.is_null() {
        return Err(fail(UfStatus::NullPointer, "null path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| fail(UfStatus::InvalidArgument, "path is not valid UTF-8"))
}

unsafe fn write_matrix(m: &FisherMatrix, out: *mut f64, len: usize) -> Result<(), UfStatus> {
    check_out(out)?;
    let p = m.size();
    if len < p * p {
        return Err(fail(
            UfStatus::BufferTooSmall,
            format!("output holds {len} values, need {}", p * p),
        ));
    }
    let e = m.entries();
    for i in 0..p {
        for j in 0..p {
            *out.add(i * p + j) = e[(i, j)];
        }
    }
    Ok(())
}

unsafe fn theta_arg(theta: *const f64, len: usize) -> Result<Vec<f64>, UfStatus> {
    if theta.is_null() {
        return Err(fail(UfStatus::NullPointer, "null parameter vector"));
    }
    Ok(std::slice::from_raw_parts(theta, len).to_vec())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf`.
///
/// Returns the number of bytes needed including the terminator, or 0 when no
/// error is recorded. The copy is truncated when `len` is too small.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn uf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Two-qubit Bell-basis measurement.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_bell(out: *mut *mut UfPovm) -> UfStatus {
    guard(|| emit_povm(out, Ok(povm::bell_basis())))
}

/// Bell measurement that resolves only Bell state `k` (1..=4).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_reduced_bell(k: usize, out: *mut *mut UfPovm) -> UfStatus {
    guard(|| emit_povm(out, povm::reduced_bell(k)))
}

/// Linear-optics Bell measurement resolving Bell states `k` and `l` (1..=4, distinct).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_linear_optics_bell(
    k: usize,
    l: usize,
    out: *mut *mut UfPovm,
) -> UfStatus {
    guard(|| emit_povm(out, povm::linear_optics_bell(k, l)))
}

/// Time-shared local spin measurement on two qubits.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_local_spin(out: *mut *mut UfPovm) -> UfStatus {
    guard(|| emit_povm(out, Ok(povm::local_spin_povm())))
}

/// Random product-basis measurement on `d x d`, time-shared over `n_bases` bases.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_random_product(
    d: usize,
    n_bases: usize,
    seed: u64,
    out: *mut *mut UfPovm,
) -> UfStatus {
    guard(|| emit_povm(out, povm::random_product_povm(d, n_bases, seed)))
}

/// Read a POVM from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_load(path: *const c_char, out: *mut *mut UfPovm) -> UfStatus {
    guard(|| {
        let path = path_arg(path)?;
        emit_povm(out, povm::read_povm(path, &Tolerances::default()))
    })
}

/// Write a POVM to a JSON file.
///
/// # Safety
/// `povm` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_save(povm: *const UfPovm, path: *const c_char) -> UfStatus {
    guard(|| {
        let p = povm_ref(povm)?;
        let path = path_arg(path)?;
        lift(povm::write_povm(p, path))
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `povm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_free(povm: *mut UfPovm) {
    if !povm.is_null() {
        drop(Box::from_raw(povm));
    }
}

/// Number of outcomes, or 0 for a null handle.
///
/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_len(povm: *const UfPovm) -> usize {
    povm.as_ref().map_or(0, |p| p.inner.len())
}

/// Hilbert-space dimension the POVM acts on, or 0 for a null handle.
///
/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uf_povm_dim(povm: *const UfPovm) -> usize {
    povm.as_ref().map_or(0, |p| p.inner.dim())
}

/// Quantum Fisher information of the singlet probe at polar angles, as a
/// row-major 3x3 matrix.
///
/// # Safety
/// `out` must be valid for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn uf_qfi_su2(
    alpha: f64,
    theta: f64,
    phi: f64,
    out: *mut f64,
    out_len: usize,
) -> UfStatus {
    guard(|| {
        let fam = ProbeFamily::su2_singlet();
        let model = lift(fam.output_model(&[alpha, theta, phi]))?;
        write_matrix(&fisher::qfi_pure(&model), out, out_len)
    })
}

/// Classical Fisher information of `povm` on the singlet probe, row-major 3x3.
///
/// # Safety
/// `povm` must be a live handle and `out` valid for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn uf_fisher_su2(
    povm: *const UfPovm,
    alpha: f64,
    theta: f64,
    phi: f64,
    out: *mut f64,
    out_len: usize,
) -> UfStatus {
    guard(|| {
        let p = povm_ref(povm)?;
        let fam = ProbeFamily::su2_singlet();
        let model = lift(fam.output_model(&[alpha, theta, phi]))?;
        let i = lift(fisher::classical_fi_pure(&model, p, fam.tolerances()))?;
        write_matrix(&i, out, out_len)
    })
}

/// Merit `tr H^{-1} I` of `povm` on the singlet probe.
///
/// # Safety
/// `povm` must be a live handle and `out` valid for one double.
#[no_mangle]
pub unsafe extern "C" fn uf_merit_su2(
    povm: *const UfPovm,
    alpha: f64,
    theta: f64,
    phi: f64,
    out: *mut f64,
) -> UfStatus {
    guard(|| {
        let p = povm_ref(povm)?;
        check_out(out)?;
        let fam = ProbeFamily::su2_singlet();
        let model = lift(fam.output_model(&[alpha, theta, phi]))?;
        let (_, _, report) = lift(fisher::evaluate(&model, p, fam.tolerances()))?;
        *out = report.merit;
        Ok(())
    })
}

/// Quantum Fisher information of the maximally entangled `d x d` probe in
/// exponential coordinates. `theta` holds `d*d - 1` values; `out` receives a
/// row-major square matrix of that size.
///
/// # Safety
/// `theta` must be valid for `theta_len` doubles and `out` for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn uf_qfi_exp_maxent(
    d: usize,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
    out_len: usize,
) -> UfStatus {
    guard(|| {
        let fam = lift(ProbeFamily::exp_max_entangled(d))?;
        let model = lift(fam.output_model(&theta_arg(theta, theta_len)?))?;
        write_matrix(&fisher::qfi_pure(&model), out, out_len)
    })
}

/// Merit of `povm` on the maximally entangled `d x d` probe in exponential
/// coordinates.
///
/// # Safety
/// `povm` must be a live handle, `theta` valid for `theta_len` doubles and
/// `out` for one double.
#[no_mangle]
pub unsafe extern "C" fn uf_merit_exp_maxent(
    povm: *const UfPovm,
    d: usize,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
) -> UfStatus {
    guard(|| {
        let p = povm_ref(povm)?;
        check_out(out)?;
        let fam = lift(ProbeFamily::exp_max_entangled(d))?;
        let model = lift(fam.output_model(&theta_arg(theta, theta_len)?))?;
        let (_, _, report) = lift(fisher::evaluate(&model, p, fam.tolerances()))?;
        *out = report.merit;
        Ok(())
    })
}
