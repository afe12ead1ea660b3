//! C interface: build a manufactured case, solve one mesh level with either formulation,
//! evaluate the discrete fields and measure errors.
//!
//! Every function returns an `IsoelastStatus`; on failure the message is available from
//! `isoelast_last_error` on the calling thread. Handles are owned by the caller and must be
//! released with the matching `_free` function.

use isoelast::error::Error;
use isoelast::harness::study::error_quadrature;
use isoelast::harness::{builtin_case, compute_errors, solve_level, Formulation, ManufacturedCase, Solved};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoelastStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownCase = 3,
    Unsupported = 4,
    Singular = 5,
    Geometry = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoelastFormulation {
    /// Use the formulation the case was built for.
    Default = 0,
    Weak = 1,
    Strong = 2,
}

/// Field values at one point; `sigma` is row major.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IsoelastPointValues {
    pub x: [f64; 2],
    pub sigma: [f64; 4],
    pub div_sigma: [f64; 2],
    pub u: [f64; 2],
    /// Multiplier scalar; zero for the strong formulation.
    pub q: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IsoelastErrors {
    pub sigma_l2: f64,
    pub div_sigma_l2: f64,
    pub sigma_hdiv: f64,
    pub u_l2: f64,
    pub p_l2: f64,
    pub max_asymmetry: f64,
}

/// Opaque manufactured case.
pub struct IsoelastCase {
    case: ManufacturedCase,
}

/// Opaque solved mesh level.
pub struct IsoelastSolution {
    sol: Solved,
    formulation: Formulation,
    p: usize,
    dofs: [usize; 3],
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IsoelastStatus {
    match e {
        Error::UnknownCase(_) => IsoelastStatus::UnknownCase,
        Error::Unsupported(_) => IsoelastStatus::Unsupported,
        Error::Singular(_) => IsoelastStatus::Singular,
        Error::DegenerateGeometry { .. } | Error::InversionFailed(..) | Error::Conformity(_) => {
            IsoelastStatus::Geometry
        }
        Error::Io(_) => IsoelastStatus::Io,
        _ => IsoelastStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (IsoelastStatus, String)>) -> IsoelastStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            IsoelastStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            IsoelastStatus::Panic
        }
    }
}

fn lift(e: Error) -> (IsoelastStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (IsoelastStatus, String) {
    (IsoelastStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread; empty after a successful call. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn isoelast_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn isoelast_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a built-in case. Non-positive `lambda` or `mu` select the case defaults
/// (`lambda` = 0 is therefore not expressible here).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn isoelast_case_new(
    name: *const c_char,
    lambda: f64,
    mu: f64,
    out: *mut *mut IsoelastCase,
) -> IsoelastStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| (IsoelastStatus::InvalidArgument, "name is not UTF-8".to_string()))?;
        let pick = |v: f64| (v > 0.0).then_some(v);
        let case = builtin_case(name, pick(lambda), pick(mu)).map_err(lift)?;
        *out = Box::into_raw(Box::new(IsoelastCase { case }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from `isoelast_case_new` and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn isoelast_case_free(handle: *mut IsoelastCase) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of patches of the case geometry.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn isoelast_case_patches(
    handle: *const IsoelastCase,
    out: *mut usize,
) -> IsoelastStatus {
    guard(|| {
        let c = handle.as_ref().ok_or_else(|| null("case"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = c.case.domain.patches.len();
        Ok(())
    })
}

/// Assemble and solve on a uniform `n` x `n` mesh per patch.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn isoelast_solve(
    handle: *const IsoelastCase,
    formulation: IsoelastFormulation,
    degree: usize,
    regularity: i32,
    n: usize,
    out: *mut *mut IsoelastSolution,
) -> IsoelastStatus {
    guard(|| {
        let c = handle.as_ref().ok_or_else(|| null("case"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err((IsoelastStatus::InvalidArgument, "n must be positive".into()));
        }
        let form = match formulation {
            IsoelastFormulation::Default => c.case.default_formulation,
            IsoelastFormulation::Weak => Formulation::Weak,
            IsoelastFormulation::Strong => Formulation::Strong,
        };
        let (sol, dofs) = solve_level(&c.case, form, degree, regularity, n).map_err(lift)?;
        *out = Box::into_raw(Box::new(IsoelastSolution { sol, formulation: form, p: degree, dofs }));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from `isoelast_solve` and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn isoelast_solution_free(sol: *mut IsoelastSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Unknown counts (stress, displacement, multiplier) and the relative residual.
///
/// # Safety
/// `sol` must be a live handle; `dofs` must hold 3 values.
#[no_mangle]
pub unsafe extern "C" fn isoelast_solution_info(
    sol: *const IsoelastSolution,
    dofs: *mut usize,
    residual: *mut f64,
) -> IsoelastStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if dofs.is_null() || residual.is_null() {
            return Err(null("output"));
        }
        for (k, d) in s.dofs.iter().enumerate() {
            *dofs.add(k) = *d;
        }
        *residual = s.sol.residual();
        Ok(())
    })
}

/// Evaluate the discrete fields at parametric point (z1, z2) of a patch.
///
/// # Safety
/// `sol` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn isoelast_solution_eval(
    sol: *const IsoelastSolution,
    patch: usize,
    z1: f64,
    z2: f64,
    out: *mut IsoelastPointValues,
) -> IsoelastStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let np = s.sol.evaluator().domain().patches.len();
        if patch >= np {
            return Err((IsoelastStatus::InvalidArgument, format!("patch {patch} of {np}")));
        }
        if !(0.0..=1.0).contains(&z1) || !(0.0..=1.0).contains(&z2) {
            return Err((IsoelastStatus::InvalidArgument, format!("({z1}, {z2}) outside [0,1]²")));
        }
        let v = s.sol.eval(patch, [z1, z2]).map_err(lift)?;
        *out = IsoelastPointValues {
            x: v.x,
            sigma: [v.sigma[0][0], v.sigma[0][1], v.sigma[1][0], v.sigma[1][1]],
            div_sigma: v.div,
            u: v.u,
            q: v.q,
        };
        Ok(())
    })
}

/// Error norms against the exact solution of the case behind `handle`.
///
/// # Safety
/// Both handles must be live, `sol` solved on that case, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn isoelast_solution_errors(
    sol: *const IsoelastSolution,
    handle: *const IsoelastCase,
    out: *mut IsoelastErrors,
) -> IsoelastStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        let c = handle.as_ref().ok_or_else(|| null("case"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let exact = c.case.exact.as_ref().ok_or_else(|| {
            (IsoelastStatus::Unsupported, format!("case `{}` has no exact solution", c.case.name))
        })?;
        let e =
            compute_errors(s.sol.evaluator(), exact, &c.case.material, error_quadrature(s.formulation, s.p))
                .map_err(lift)?;
        *out = IsoelastErrors {
            sigma_l2: e.sigma_l2,
            div_sigma_l2: e.div_sigma_l2,
            sigma_hdiv: e.sigma_hdiv,
            u_l2: e.u_l2,
            p_l2: e.p_l2,
            max_asymmetry: e.max_asymmetry,
        };
        Ok(())
    })
}
