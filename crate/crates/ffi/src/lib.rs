//! C ABI over `affine-cs`.
//!
//! Every fallible call returns an [`AcsStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`acs_last_error_message`]. Coherent states are opaque handles owned
//! by the caller and released with [`acs_cs_free`].

use affine_cs::coherent::{husimi_density, overlap, CSParams};
use affine_cs::dynamics::{PhasePoint, Semiclassical};
use affine_cs::fiducial::{c0, xi_star};
use affine_cs::propagator::{fidelity_report, FidelityOptions};
use affine_cs::su11::{self, Side};
use affine_cs::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcsStatus {
    Ok = 0,
    InvalidInput = 1,
    Divergent = 2,
    NoConvergence = 3,
    Evaluation = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcsComplex {
    pub re: f64,
    pub im: f64,
}

/// The SU(1,1) matrix [[alpha, beta], [conj(beta), conj(alpha)]].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcsSu11 {
    pub alpha: AcsComplex,
    pub beta: AcsComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcsCartan {
    pub theta: f64,
    pub zeta: AcsComplex,
    pub delta: f64,
    pub xi_c: AcsComplex,
}

/// Opaque coherent state |q,p;nu,n>.
pub struct AcsCoherentState(CSParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AcsStatus {
    match e {
        Error::InvalidInput(_) => AcsStatus::InvalidInput,
        Error::Divergent(_) => AcsStatus::Divergent,
        Error::NoConvergence(_) => AcsStatus::NoConvergence,
        Error::Evaluation(_) => AcsStatus::Evaluation,
    }
}

fn guard(f: impl FnOnce() -> Result<(), AcsStatus>) -> AcsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AcsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            AcsStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn status(self) -> Result<T, AcsStatus>;
}

impl<T> OrStatus<T> for affine_cs::Result<T> {
    fn status(self) -> Result<T, AcsStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), AcsStatus> {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(AcsStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

unsafe fn state<'a>(h: *const AcsCoherentState) -> Result<&'a CSParams, AcsStatus> {
    match h.as_ref() {
        Some(s) => Ok(&s.0),
        None => {
            set_error("null coherent state handle".into());
            Err(AcsStatus::NullPointer)
        }
    }
}

fn complex(z: num_complex::Complex64) -> AcsComplex {
    AcsComplex { re: z.re, im: z.im }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn acs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or 0
/// when the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn acs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Fiducial scale xi_{nu,n}.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_xi_star(nu: f64, n: u32, out: *mut f64) -> AcsStatus {
    guard(|| write(out, xi_star(nu, n as usize).status()?))
}

/// Normalization c0 of the frame measure.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_c0(nu: f64, n: u32, out: *mut f64) -> AcsStatus {
    guard(|| write(out, c0(nu, n as usize).status()?))
}

/// Creates the coherent state |q,p;nu,n>.
///
/// # Safety
/// `out` must be a valid pointer. The handle is released with [`acs_cs_free`].
#[no_mangle]
pub unsafe extern "C" fn acs_cs_new(
    q: f64,
    p: f64,
    nu: f64,
    n: u32,
    out: *mut *mut AcsCoherentState,
) -> AcsStatus {
    guard(|| {
        let cs = CSParams::new(q, p, nu, n as usize).status()?;
        write(out, Box::into_raw(Box::new(AcsCoherentState(cs))))
    })
}

/// Releases a handle from [`acs_cs_new`]. Null is ignored.
///
/// # Safety
/// `h` must come from [`acs_cs_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn acs_cs_free(h: *mut AcsCoherentState) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Wavefunction value at x > 0.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_cs_wavefunction(
    h: *const AcsCoherentState,
    x: f64,
    out: *mut AcsComplex,
) -> AcsStatus {
    guard(|| {
        let cs = state(h)?;
        if !(x > 0.0 && x.is_finite()) {
            set_error(format!("x must be positive and finite (got {x})"));
            return Err(AcsStatus::InvalidInput);
        }
        write(out, complex(cs.wavefunction(x)))
    })
}

/// Closed-form energy expectation.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_cs_expectation_h(
    h: *const AcsCoherentState,
    out: *mut f64,
) -> AcsStatus {
    guard(|| write(out, state(h)?.expectation_h()))
}

/// Overlap <a|b>.
///
/// # Safety
/// Both handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_cs_overlap(
    a: *const AcsCoherentState,
    b: *const AcsCoherentState,
    out: *mut AcsComplex,
) -> AcsStatus {
    guard(|| write(out, complex(overlap(state(a)?, state(b)?).status()?)))
}

/// Husimi density of `h` at (q, p), analysed with the n = 0 states of index nu.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_husimi_density(
    nu: f64,
    q: f64,
    p: f64,
    h: *const AcsCoherentState,
    out: *mut f64,
) -> AcsStatus {
    guard(|| write(out, husimi_density(nu, q, p, state(h)?).status()?))
}

/// Semiclassical flow of (q, p) over time t.
///
/// # Safety
/// `q_out` and `p_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn acs_flow(
    nu: f64,
    n: u32,
    q: f64,
    p: f64,
    t: f64,
    q_out: *mut f64,
    p_out: *mut f64,
) -> AcsStatus {
    guard(|| {
        let sc = Semiclassical::new(nu, n as usize).status()?;
        let x = sc.flow(PhasePoint::new(q, p).status()?, t);
        write(q_out, x.q)?;
        write(p_out, x.p)
    })
}

/// F(t) = <q_t,p_t|exp(-iHt)|q0,p0> in a basis of `size` functions.
/// `delta` receives |F_N - F_2N|; pass null to skip it.
///
/// # Safety
/// `out` must be a valid pointer; `delta` may be null.
#[no_mangle]
pub unsafe extern "C" fn acs_fidelity(
    nu: f64,
    n: u32,
    q0: f64,
    p0: f64,
    t: f64,
    size: u32,
    out: *mut AcsComplex,
    delta: *mut f64,
) -> AcsStatus {
    guard(|| {
        let options = FidelityOptions {
            size: size as usize,
            ..FidelityOptions::default()
        };
        let point = PhasePoint::new(q0, p0).status()?;
        let r = fidelity_report(nu, n as usize, point, &[t], &options).status()?;
        let row = &r.rows[0];
        write(out, complex(row.fidelity))?;
        if !delta.is_null() {
            write(delta, row.truncation_delta)?;
        }
        Ok(())
    })
}

/// SU(1,1) image of the affine group element (q, p).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_su11_matrix(q: f64, p: f64, out: *mut AcsSu11) -> AcsStatus {
    guard(|| {
        let m = su11::v_matrix(q, p).status()?;
        write(
            out,
            AcsSu11 {
                alpha: complex(m.alpha),
                beta: complex(m.beta),
            },
        )
    })
}

/// Cartan factors of the image of (q, p): left (`right` = 0) or right (`right` != 0).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_su11_cartan(
    q: f64,
    p: f64,
    right: i32,
    out: *mut AcsCartan,
) -> AcsStatus {
    guard(|| {
        let m = su11::v_matrix(q, p).status()?;
        let side = if right != 0 { Side::Right } else { Side::Left };
        let f = su11::cartan(&m, side);
        write(
            out,
            AcsCartan {
                theta: f.theta,
                zeta: complex(f.zeta),
                delta: f.delta,
                xi_c: complex(f.xi_c),
            },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let s = guard(|| panic!("boom"));
        std::panic::set_hook(prev);
        assert_eq!(s, AcsStatus::Panic);
        assert!(unsafe { acs_last_error_message(ptr_null(), 0) } > 0);
        assert_eq!(guard(|| Ok(())), AcsStatus::Ok);
        assert_eq!(unsafe { acs_last_error_message(ptr_null(), 0) }, 0);
    }

    fn ptr_null() -> *mut c_char {
        std::ptr::null_mut()
    }
}
