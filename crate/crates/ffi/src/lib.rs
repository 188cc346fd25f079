//! C ABI over `bogodiag`.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns a [`BogoStatus`]; on
//! failure a message is kept per thread and can be read with
//! [`bogo_last_error`]. Matrices cross the boundary as row-major arrays of
//! real and imaginary parts; a null imaginary pointer means zero input or
//! skipped output.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bogodiag::diag::{self, DiagonalizationResult};
use bogodiag::fock::{self, Form, TruncatedFock};
use bogodiag::linalg::{c64, CMatrix};
use bogodiag::model::{self, QuadraticHamiltonian};
use bogodiag::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BogoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NotDiagonalizable = 3,
    NotPositiveDefinite = 4,
    InvariantViolated = 5,
    NumericalFailure = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BogoMatrix {
    U = 0,
    V = 1,
    Xi = 2,
    Gamma = 3,
    Alpha = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BogoCondition {
    pub norm_g: f64,
    pub hs_g: f64,
    pub hs_kh_half: f64,
    pub lower_bound: f64,
    pub diagonalizable: bool,
    pub implementable: bool,
    pub bounded_below: bool,
}

/// Validated quadratic Hamiltonian.
pub struct BogoHamiltonian(QuadraticHamiltonian);

/// Result of a symplectic diagonalization.
pub struct BogoDiagonalization(DiagonalizationResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BogoStatus {
    match e {
        Error::NotDiagonalizable { .. } => BogoStatus::NotDiagonalizable,
        Error::NotPositiveDefinite { .. } => BogoStatus::NotPositiveDefinite,
        _ => match e.exit_code() {
            1 => BogoStatus::InvariantViolated,
            2 => BogoStatus::InvalidInput,
            _ => BogoStatus::NumericalFailure,
        },
    }
}

fn guard(f: impl FnOnce() -> Result<(), BogoStatus>) -> BogoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BogoStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            BogoStatus::Panic
        }
    }
}

fn lift<T>(r: bogodiag::Result<T>) -> Result<T, BogoStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn null_check<T>(p: *const T, name: &str) -> Result<(), BogoStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(BogoStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn read_matrix(n: usize, re: *const f64, im: *const f64, name: &str) -> Result<CMatrix, BogoStatus> {
    null_check(re, name)?;
    let len = n * n;
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
    Ok(CMatrix::from_fn(n, n, |i, j| c64(re[i * n + j], im.map_or(0.0, |v| v[i * n + j]))))
}

unsafe fn write_matrix(m: &CMatrix, re: *mut f64, im: *mut f64, len: usize) -> Result<(), BogoStatus> {
    null_check(re, "re")?;
    let (rows, cols) = m.shape();
    if len < rows * cols {
        set_error(format!("buffer holds {len} entries, need {}", rows * cols));
        return Err(BogoStatus::BufferTooSmall);
    }
    let re = std::slice::from_raw_parts_mut(re, rows * cols);
    let mut im = if im.is_null() { None } else { Some(std::slice::from_raw_parts_mut(im, rows * cols)) };
    for i in 0..rows {
        for j in 0..cols {
            re[i * cols + j] = m[(i, j)].re;
            if let Some(im) = im.as_mut() {
                im[i * cols + j] = m[(i, j)].im;
            }
        }
    }
    Ok(())
}

unsafe fn write_reals(values: &[f64], out: *mut f64, len: usize) -> Result<(), BogoStatus> {
    null_check(out, "out")?;
    if len < values.len() {
        set_error(format!("buffer holds {len} entries, need {}", values.len()));
        return Err(BogoStatus::BufferTooSmall);
    }
    std::slice::from_raw_parts_mut(out, values.len()).copy_from_slice(values);
    Ok(())
}

unsafe fn hamiltonian<'a>(h: *const BogoHamiltonian) -> Result<&'a QuadraticHamiltonian, BogoStatus> {
    null_check(h, "hamiltonian")?;
    Ok(&(*h).0)
}

unsafe fn diagonalization<'a>(d: *const BogoDiagonalization) -> Result<&'a DiagonalizationResult, BogoStatus> {
    null_check(d, "diagonalization")?;
    Ok(&(*d).0)
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bogo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn bogo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a Hamiltonian from row-major `n x n` blocks `h` and `k`.
///
/// # Safety
/// `h_re` and `k_re` must point to `n * n` doubles, as must `h_im` and `k_im`
/// when non-null. `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bogo_hamiltonian_new(
    n: usize,
    h_re: *const f64,
    h_im: *const f64,
    k_re: *const f64,
    k_im: *const f64,
    out: *mut *mut BogoHamiltonian,
) -> BogoStatus {
    guard(|| {
        null_check(out, "out")?;
        if n == 0 {
            set_error("mode count must be positive".into());
            return Err(BogoStatus::InvalidInput);
        }
        let h = read_matrix(n, h_re, h_im, "h_re")?;
        let k = read_matrix(n, k_re, k_im, "k_re")?;
        let q = lift(QuadraticHamiltonian::new(h, k))?;
        *out = Box::into_raw(Box::new(BogoHamiltonian(q)));
        Ok(())
    })
}

/// Two-mode `(p, -p)` sector of the weakly interacting Bose gas.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bogo_hamiltonian_pair(p: f64, rho: f64, vhat: f64, out: *mut *mut BogoHamiltonian) -> BogoStatus {
    guard(|| {
        null_check(out, "out")?;
        let q = lift(model::bogoliubov_1947_pair(p, rho, vhat))?;
        *out = Box::into_raw(Box::new(BogoHamiltonian(q)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `bogo_hamiltonian_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bogo_hamiltonian_free(h: *mut BogoHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bogo_hamiltonian_modes(h: *const BogoHamiltonian) -> usize {
    if h.is_null() {
        0
    } else {
        (*h).0.n()
    }
}

/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bogo_hamiltonian_classify(h: *const BogoHamiltonian, out: *mut BogoCondition) -> BogoStatus {
    guard(|| {
        let q = hamiltonian(h)?;
        null_check(out, "out")?;
        let c = lift(model::classify(q))?;
        *out = BogoCondition {
            norm_g: c.norm_g,
            hs_g: c.hs_g,
            hs_kh_half: c.hs_kh_half,
            lower_bound: c.lower_bound,
            diagonalizable: c.diagonalizable,
            implementable: c.implementable,
            bounded_below: c.bounded_below,
        };
        Ok(())
    })
}

/// Lowest `count` eigenvalues of the normal-ordered operator on the Fock
/// space truncated at total number `cutoff`.
///
/// # Safety
/// `h` must be a live handle and `out` must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn bogo_fock_spectrum(h: *const BogoHamiltonian, cutoff: usize, count: usize, out: *mut f64) -> BogoStatus {
    guard(|| {
        let q = hamiltonian(h)?;
        let f = lift(TruncatedFock::new(q.n(), cutoff))?;
        let op = lift(fock::assemble(q, &f, Form::NormalOrdered))?;
        let levels = fock::exact_spectrum(&op, count);
        if levels.len() < count {
            set_error(format!("Fock space has only {} states", levels.len()));
            return Err(BogoStatus::InvalidInput);
        }
        write_reals(&levels, out, count)
    })
}

/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bogo_diagonalize(h: *const BogoHamiltonian, out: *mut *mut BogoDiagonalization) -> BogoStatus {
    guard(|| {
        let q = hamiltonian(h)?;
        null_check(out, "out")?;
        let r = lift(diag::diagonalize(q))?;
        *out = Box::into_raw(Box::new(BogoDiagonalization(r)));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a handle from `bogo_diagonalize` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bogo_diagonalization_free(d: *mut BogoDiagonalization) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bogo_diagonalization_ground_energy(d: *const BogoDiagonalization, out: *mut f64) -> BogoStatus {
    guard(|| {
        let r = diagonalization(d)?;
        null_check(out, "out")?;
        *out = r.ground_energy;
        Ok(())
    })
}

/// Quasiparticle energies in ascending order.
///
/// # Safety
/// `d` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bogo_diagonalization_xi_eigs(d: *const BogoDiagonalization, out: *mut f64, len: usize) -> BogoStatus {
    guard(|| write_reals(&diagonalization(d)?.xi_eigs, out, len))
}

/// Copy an `n x n` result matrix in row-major order.
///
/// # Safety
/// `d` must be a live handle, `re` must hold `len` doubles and `im` must be
/// null or hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bogo_diagonalization_matrix(
    d: *const BogoDiagonalization,
    which: BogoMatrix,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> BogoStatus {
    guard(|| {
        let r = diagonalization(d)?;
        let m = match which {
            BogoMatrix::U => r.transform.u(),
            BogoMatrix::V => r.transform.v(),
            BogoMatrix::Xi => &r.xi,
            BogoMatrix::Gamma => &r.ground_state.gamma,
            BogoMatrix::Alpha => &r.ground_state.alpha,
        };
        write_matrix(m, re, im, len)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::NotDiagonalizable { norm_g: 1.2 }), BogoStatus::NotDiagonalizable);
        assert_eq!(status_of(&Error::InvalidParameter("x".into())), BogoStatus::InvalidInput);
        assert_eq!(status_of(&Error::TakagiFailure { residual: 1.0 }), BogoStatus::NumericalFailure);
    }

    #[test]
    fn panics_are_contained() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, BogoStatus::Panic);
        let msg = unsafe { CStr::from_ptr(bogo_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(bogo_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
