//! C ABI for the `monogenic` crate.
//!
//! Fields are opaque handles created by `mg_field_*` constructors and
//! released with [`mg_field_free`]. Every fallible call returns an `MG_*`
//! status code; on failure the message is available through
//! [`mg_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use monogenic::area::{self, Cone};
use monogenic::boundary::{self, LimitParams, LimitStatus};
use monogenic::quadrature::QuadratureSpec;
use monogenic::{dirac, herglotz, Error, Field, HarmonicPotential, Octonion, Point8};

pub const MG_OK: i32 = 0;
pub const MG_NULL_POINTER: i32 = 1;
pub const MG_DOMAIN_ERROR: i32 = 2;
pub const MG_REJECTED: i32 = 3;
pub const MG_INVALID_ARGUMENT: i32 = 4;
pub const MG_INTERNAL_ERROR: i32 = 5;

pub const MG_METHOD_MONTE_CARLO: i32 = 0;
pub const MG_METHOD_LAYERED_GRID: i32 = 1;

pub const MG_LIMIT_FINITE: i32 = 0;
pub const MG_LIMIT_INFINITE: i32 = 1;
pub const MG_LIMIT_DIVERGENT: i32 = 2;
pub const MG_LIMIT_INCONCLUSIVE: i32 = 3;

/// Opaque octonion-valued field.
pub struct MgField(Field);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MgAreaResult {
    pub total: f64,
    pub per_component: [f64; 8],
    pub stderr: f64,
    pub budget_used: u64,
    /// Non-zero when the error estimate exceeded the tolerance.
    pub flagged: i32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MgLimitResult {
    /// One of `MG_LIMIT_*`.
    pub status: i32,
    /// Limit values; meaningful only when `status == MG_LIMIT_FINITE`.
    pub value: [f64; 8],
    pub component_status: [i32; 8],
    pub scale: f64,
    pub tail_oscillation: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => MG_DOMAIN_ERROR,
        Error::Rejected(_) => MG_REJECTED,
        Error::Config(_) => MG_INVALID_ARGUMENT,
        Error::Io(_) | Error::Json(_) => MG_INTERNAL_ERROR,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MG_OK,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            MG_NULL_POINTER
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            code(&e)
        }
        Err(_) => {
            set_error("internal error (panic)");
            MG_INTERNAL_ERROR
        }
    }
}

unsafe fn read<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn array<const N: usize>(p: *const f64, what: &'static str) -> Result<[f64; N], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::array::from_fn(|i| *p.add(i)))
}

unsafe fn out_array<'a, const N: usize>(p: *mut f64, what: &'static str) -> Result<&'a mut [f64; N], Fail> {
    p.cast::<[f64; N]>().as_mut().ok_or(Fail::Null(what))
}

unsafe fn new_field(out: *mut *mut MgField, build: impl FnOnce() -> Result<Field, Fail>) -> i32 {
    guard(|| {
        let slot = write(out, "out")?;
        *slot = std::ptr::null_mut();
        *slot = Box::into_raw(Box::new(MgField(build()?)));
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` (always
/// nul-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn mg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Constant field `sum c_j e_j`.
///
/// # Safety
/// `coeffs` must point to 8 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_field_constant(coeffs: *const f64, out: *mut *mut MgField) -> i32 {
    new_field(out, || Ok(Field::constant(Octonion(array::<8>(coeffs, "coeffs")?))))
}

/// `weight` times the lift of the Newton kernel `|x - pole|^-6`; the pole
/// must satisfy `pole[0] <= 0`.
///
/// # Safety
/// `pole` must point to 8 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_field_newton_lift(pole: *const f64, weight: f64, out: *mut *mut MgField) -> i32 {
    new_field(out, || {
        let p = array::<8>(pole, "pole")?;
        Ok(Field::default().with_lift(HarmonicPotential::newton(p), weight)?)
    })
}

/// The non-monogenic test fixture `sum x_j e_j`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_field_identity_fixture(out: *mut *mut MgField) -> i32 {
    new_field(out, || Ok(Field::identity_fixture()))
}

/// Adds `weight` times a Newton-kernel lift to an existing field.
///
/// # Safety
/// `field` must come from an `mg_field_*` constructor; `pole` must point to 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_field_add_newton_lift(field: *mut MgField, pole: *const f64, weight: f64) -> i32 {
    guard(|| {
        let f = write(field, "field")?;
        let p = array::<8>(pole, "pole")?;
        f.0 = f.0.clone().with_lift(HarmonicPotential::newton(p), weight)?;
        Ok(())
    })
}

/// Releases a field. Null is ignored.
///
/// # Safety
/// `field` must be null or come from an `mg_field_*` constructor, and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mg_field_free(field: *mut MgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// `f(x)` at `x = (x0, ..., x7)`.
///
/// # Safety
/// Pointers must be valid for 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_field_eval(field: *const MgField, x: *const f64, out: *mut f64) -> i32 {
    guard(|| {
        let f = read(field, "field")?;
        let p = Point8::from_array(array::<8>(x, "x")?);
        *out_array::<8>(out, "out")? = f.0.eval(&p)?.0;
        Ok(())
    })
}

/// Jacobian in row-major order: `out[8 j + k] = d f_j / d x_k`.
///
/// # Safety
/// `x` must point to 8 doubles and `out` to 64.
#[no_mangle]
pub unsafe extern "C" fn mg_field_jacobian(field: *const MgField, x: *const f64, out: *mut f64) -> i32 {
    guard(|| {
        let f = read(field, "field")?;
        let p = Point8::from_array(array::<8>(x, "x")?);
        let j = f.0.jacobian(&p)?;
        let o = out_array::<64>(out, "out")?;
        for (r, row) in j.iter().enumerate() {
            o[8 * r..8 * r + 8].copy_from_slice(row);
        }
        Ok(())
    })
}

/// `D[f](x)` at an interior point (`x0 > 0`).
///
/// # Safety
/// Pointers must be valid for 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_dirac_residual(field: *const MgField, x: *const f64, out: *mut f64) -> i32 {
    guard(|| {
        let f = read(field, "field")?;
        let p = Point8::from_array(array::<8>(x, "x")?);
        *out_array::<8>(out, "out")? = dirac::dirac_residual(&f.0, &p)?.0;
        Ok(())
    })
}

/// Area integral over the cone `|Y - X| < alpha x0`, `eps0 < x0 < h`.
/// `method` is one of `MG_METHOD_*`; `seed` is ignored by the grid.
///
/// # Safety
/// `vertex` must point to 7 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_area_integral(
    field: *const MgField,
    vertex: *const f64,
    alpha: f64,
    h: f64,
    method: i32,
    budget: u64,
    seed: u64,
    eps0: f64,
    out: *mut MgAreaResult,
) -> i32 {
    guard(|| {
        let f = read(field, "field")?;
        let v = array::<7>(vertex, "vertex")?;
        let o = write(out, "out")?;
        let budget = usize::try_from(budget).map_err(|_| Error::Config("budget too large".into()))?;
        let q = match method {
            MG_METHOD_MONTE_CARLO => QuadratureSpec::monte_carlo(budget, seed),
            MG_METHOD_LAYERED_GRID => QuadratureSpec::layered_grid(budget),
            m => return Err(Error::Config(format!("unknown method {m}")).into()),
        }
        .with_eps0(eps0);
        let r = area::area_integral(&f.0, &Cone::new(v, alpha, h)?, &q)?;
        *o = MgAreaResult {
            total: r.total,
            per_component: r.per_component,
            stderr: r.stderr,
            budget_used: r.budget_used as u64,
            flagged: r.flagged as i32,
        };
        Ok(())
    })
}

fn status_code(s: LimitStatus) -> i32 {
    match s {
        LimitStatus::Finite => MG_LIMIT_FINITE,
        LimitStatus::Infinite => MG_LIMIT_INFINITE,
        LimitStatus::Divergent => MG_LIMIT_DIVERGENT,
        LimitStatus::Inconclusive => MG_LIMIT_INCONCLUSIVE,
    }
}

/// Normal limit of `f` at the boundary point `(0, y)` with default heights
/// and tail criterion.
///
/// # Safety
/// `y` must point to 7 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_normal_limit(field: *const MgField, y: *const f64, out: *mut MgLimitResult) -> i32 {
    guard(|| {
        let f = read(field, "field")?;
        let y = array::<7>(y, "y")?;
        let o = write(out, "out")?;
        let r = boundary::normal_limit(&f.0, &y, &LimitParams::default())?;
        *o = MgLimitResult {
            status: status_code(r.status),
            value: r.value.map_or([f64::NAN; 8], |v| v.0),
            component_status: r.components.map(|c| status_code(c.status)),
            scale: r.scale,
            tail_oscillation: r.tail_oscillation,
        };
        Ok(())
    })
}

/// Half-space Poisson kernel `P(x0, x)` for `x0 > 0`.
///
/// # Safety
/// `x` must point to 7 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_poisson_kernel(x0: f64, x: *const f64, out: *mut f64) -> i32 {
    guard(|| {
        let x = array::<7>(x, "x")?;
        *write(out, "out")? = herglotz::poisson_kernel(x0, &x)?;
        Ok(())
    })
}
