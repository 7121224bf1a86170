//! C ABI over `onofri-lab`.
//!
//! Objects are opaque heap handles created by `onofri_*_new`-style calls and
//! released by the matching `*_free`. Every fallible call returns an
//! [`OnofriStatus`]; on failure a message is available from
//! [`onofri_last_error`] on the same thread. Out-pointers are written only on
//! success. Panics are caught at the boundary and reported as
//! `ONOFRI_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use onofri_lab::constants;
use onofri_lab::euclidean::{lambda_star_weight, Weight, WeightKind};
use onofri_lab::geometry::{first_eigenvalue, Geometry, Normalization, ScalarField};
use onofri_lab::identities::{run_suite, Suite, SuiteOptions};
use onofri_lab::sphere::{self, FlowConfig, FlowTrace, OptimizerConfig};
use onofri_lab::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnofriStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Outside the domain of a closed form, or the wrong geometry kind.
    Domain = 3,
    /// A solver, flow or fixed point failed to converge.
    Numerical = 4,
    /// The caller's buffer is shorter than the data.
    BufferTooSmall = 5,
    Io = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> OnofriStatus {
    match e {
        _ if e.is_numerical() => OnofriStatus::Numerical,
        Error::Domain(_)
        | Error::GeometryMismatch { .. }
        | Error::UnsupportedGeometry(_)
        | Error::MassOutOfRange(_)
        | Error::ConstantField
        | Error::NoSignChange { .. } => OnofriStatus::Domain,
        Error::Io(_) => OnofriStatus::Io,
        _ => OnofriStatus::InvalidArgument,
    }
}

fn fail(status: OnofriStatus, msg: impl Into<String>) -> OnofriStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), OnofriStatus>) -> OnofriStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OnofriStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(OnofriStatus::Panic, msg)
        }
    }
}

trait OrStatus<T> {
    fn st(self) -> Result<T, OnofriStatus>;
}

impl<T> OrStatus<T> for onofri_lab::Result<T> {
    fn st(self) -> Result<T, OnofriStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, OnofriStatus> {
    p.as_ref().ok_or_else(|| fail(OnofriStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, OnofriStatus> {
    p.as_mut().ok_or_else(|| fail(OnofriStatus::NullPointer, format!("{name} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, OnofriStatus> {
    if p.is_null() {
        return Err(fail(OnofriStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(OnofriStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn write_slice(src: &[f64], buf: *mut f64, len: usize, written: *mut usize) -> Result<(), OnofriStatus> {
    if let Some(w) = written.as_mut() {
        *w = src.len();
    }
    if len < src.len() {
        return Err(fail(
            OnofriStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(fail(OnofriStatus::NullPointer, "buffer is null"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Discretized circle, zonal sphere or radial plane.
pub struct OnofriGeometry(Arc<Geometry>);

/// Nodal values of a field on a geometry.
pub struct OnofriField(ScalarField);

/// Radial probability density on a plane geometry.
pub struct OnofriWeight(Weight);

/// Recorded flow diagnostics.
pub struct OnofriFlowTrace(FlowTrace);

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn onofri_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn onofri_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn boxed<T>(v: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(v));
}

// ---------------------------------------------------------------- geometry

/// Circle of period `period` with `n` Fourier nodes.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_circle(n: usize, period: f64, out_geom: *mut *mut OnofriGeometry) -> OnofriStatus {
    guard(|| {
        let dst = out(out_geom, "out_geom")?;
        let g = Geometry::circle(n, period).st()?;
        boxed(OnofriGeometry(Arc::new(g)), dst);
        Ok(())
    })
}

/// Zonal sphere of radius `radius` with `n` Gauss-Legendre nodes.
///
/// # Safety
/// `out_geom` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_sphere(n: usize, radius: f64, out_geom: *mut *mut OnofriGeometry) -> OnofriStatus {
    guard(|| {
        let dst = out(out_geom, "out_geom")?;
        let g = Geometry::sphere_with_radius(n, radius).st()?;
        boxed(OnofriGeometry(Arc::new(g)), dst);
        Ok(())
    })
}

/// Zonal sphere of total area 1.
///
/// # Safety
/// `out_geom` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_sphere_unit_volume(n: usize, out_geom: *mut *mut OnofriGeometry) -> OnofriStatus {
    guard(|| {
        let dst = out(out_geom, "out_geom")?;
        let g = Geometry::sphere(n, Normalization::UnitVolume).st()?;
        boxed(OnofriGeometry(Arc::new(g)), dst);
        Ok(())
    })
}

/// Radial plane truncated at `radius`.
///
/// # Safety
/// `out_geom` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_plane(n: usize, radius: f64, out_geom: *mut *mut OnofriGeometry) -> OnofriStatus {
    guard(|| {
        let dst = out(out_geom, "out_geom")?;
        let g = Geometry::plane(n, radius).st()?;
        boxed(OnofriGeometry(Arc::new(g)), dst);
        Ok(())
    })
}

/// # Safety
/// `geom` must come from an `onofri_geometry_*` constructor (or be null).
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_free(geom: *mut OnofriGeometry) {
    if !geom.is_null() {
        drop(Box::from_raw(geom));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `geom` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_resolution(geom: *const OnofriGeometry) -> usize {
    geom.as_ref().map_or(0, |g| g.0.resolution())
}

/// Copies the node coordinates (x, θ or r) into `buf`.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn onofri_geometry_nodes(
    geom: *const OnofriGeometry,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> OnofriStatus {
    guard(|| write_slice(deref(geom, "geom")?.0.nodes(), buf, len, written))
}

/// Smallest positive eigenvalue of -Δ (circle and sphere).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_first_eigenvalue(geom: *const OnofriGeometry, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let g = deref(geom, "geom")?;
        let dst = out(out_value, "out_value")?;
        *dst = first_eigenvalue(&g.0).st()?;
        Ok(())
    })
}

// ---------------------------------------------------------------- fields

/// Field from `len` nodal values (`len` must equal the node count).
///
/// # Safety
/// `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn onofri_field_from_values(
    geom: *const OnofriGeometry,
    values: *const f64,
    len: usize,
    out_field: *mut *mut OnofriField,
) -> OnofriStatus {
    guard(|| {
        let g = deref(geom, "geom")?;
        let dst = out(out_field, "out_field")?;
        if values.is_null() {
            return Err(fail(OnofriStatus::NullPointer, "values is null"));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let f = ScalarField::from_values(&g.0, v).st()?;
        boxed(OnofriField(f), dst);
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn onofri_field_free(field: *mut OnofriField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Copies the nodal values into `buf`.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn onofri_field_values(
    field: *const OnofriField,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> OnofriStatus {
    guard(|| write_slice(deref(field, "field")?.0.values(), buf, len, written))
}

// ---------------------------------------------------------------- constants

/// θ₀(d) = 16(d-1)²/((6-d)(d+2)), for 1 ≤ d < 6.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_theta0(d: f64, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let dst = out(out_value, "out_value")?;
        *dst = constants::theta0(d).st()?;
        Ok(())
    })
}

/// Coefficients a, b, c of the quadratic form, for d > 1.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_abc(d: f64, theta: f64, a: *mut f64, b: *mut f64, c: *mut f64) -> OnofriStatus {
    guard(|| {
        let (a, b, c) = (out(a, "a")?, out(b, "b")?, out(c, "c")?);
        let r = constants::abc_coefficients(d, theta).st()?;
        (*a, *b, *c) = (r.a, r.b, r.c);
        Ok(())
    })
}

/// b² - 4ac and the sign (-1, 0, 1) of its factored form.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_discriminant(d: f64, theta: f64, delta: *mut f64, sign: *mut i8) -> OnofriStatus {
    guard(|| {
        let (delta, sign) = (out(delta, "delta")?, out(sign, "sign")?);
        let r = constants::discriminant(d, theta).st()?;
        (*delta, *sign) = (r.delta, r.sign);
        Ok(())
    })
}

/// f₂ - f₁ for 1 < d ≤ 2 and 0 ≤ x ≤ 1.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_fontenas_gap(d: f64, x: f64, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let dst = out(out_value, "out_value")?;
        *dst = constants::fontenas_gap(d, x).st()?;
        Ok(())
    })
}

// ---------------------------------------------------------------- sphere

/// Rigidity quotient of a nonconstant zonal field.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_lambda_star_quotient(field: *const OnofriField, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let dst = out(out_value, "out_value")?;
        *dst = sphere::lambda_star_quotient(f.0.geometry(), &f.0).st()?.value;
        Ok(())
    })
}

/// Multistart estimate of λ⋆ on a zonal sphere (`starts` descents over `modes` modes).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_minimize_lambda_star(
    geom: *const OnofriGeometry,
    starts: usize,
    modes: usize,
    seed: u64,
    out_value: *mut f64,
) -> OnofriStatus {
    guard(|| {
        let g = deref(geom, "geom")?;
        let dst = out(out_value, "out_value")?;
        let cfg = OptimizerConfig {
            starts,
            modes,
            refine_modes: 2 * modes,
            seed,
            ..Default::default()
        };
        *dst = sphere::minimize_lambda_star(&g.0, &cfg).st()?.estimate;
        Ok(())
    })
}

/// `F_λ` on a circle or sphere.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_functional_f(field: *const OnofriField, lambda: f64, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let dst = out(out_value, "out_value")?;
        *dst = sphere::functional_f(f.0.geometry(), lambda, &f.0).st()?;
        Ok(())
    })
}

/// `G_λ` on a sphere.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_dissipation_g(field: *const OnofriField, lambda: f64, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let dst = out(out_value, "out_value")?;
        *dst = sphere::dissipation_g(f.0.geometry(), lambda, &f.0).st()?;
        Ok(())
    })
}

/// Solves -½Δu + λ = e^u from `init` (circle or sphere). `is_constant` is
/// set when the solution lies within 1e-6 of its mean.
///
/// # Safety
/// Pointers must be valid; `residual` and `is_constant` may be null.
#[no_mangle]
pub unsafe extern "C" fn onofri_solve_el(
    init: *const OnofriField,
    lambda: f64,
    tol: f64,
    out_solution: *mut *mut OnofriField,
    residual: *mut f64,
    is_constant: *mut bool,
) -> OnofriStatus {
    guard(|| {
        let f = deref(init, "init")?;
        let dst = out(out_solution, "out_solution")?;
        let bp = onofri_lab::branch::solve_el(lambda, &f.0, tol).st()?;
        if let Some(r) = residual.as_mut() {
            *r = bp.newton_residual;
        }
        if let Some(c) = is_constant.as_mut() {
            *c = bp.branch_tag == onofri_lab::branch::BranchTag::Constant;
        }
        boxed(OnofriField(bp.solution), dst);
        Ok(())
    })
}

/// Runs the flow to `t_final` (explicit RK4, `safety` times the stability limit).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_flow_evolve(
    init: *const OnofriField,
    lambda: f64,
    t_final: f64,
    safety: f64,
    out_trace: *mut *mut OnofriFlowTrace,
) -> OnofriStatus {
    guard(|| {
        let f = deref(init, "init")?;
        let dst = out(out_trace, "out_trace")?;
        let cfg = FlowConfig {
            safety,
            record_every: 1,
        };
        let tr = sphere::flow_evolve(lambda, &f.0, t_final, &cfg).st()?;
        boxed(OnofriFlowTrace(tr), dst);
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`onofri_flow_evolve`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn onofri_flow_trace_free(trace: *mut OnofriFlowTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded samples, or 0 for a null handle.
///
/// # Safety
/// `trace` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn onofri_flow_trace_len(trace: *const OnofriFlowTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.times.len())
}

/// Sample `index`: time, F, G and ∫e^f.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_flow_trace_sample(
    trace: *const OnofriFlowTrace,
    index: usize,
    t: *mut f64,
    f: *mut f64,
    g: *mut f64,
    mass: *mut f64,
) -> OnofriStatus {
    guard(|| {
        let tr = &deref(trace, "trace")?.0;
        let (t, f, g, mass) = (out(t, "t")?, out(f, "f")?, out(g, "g")?, out(mass, "mass")?);
        if index >= tr.times.len() {
            return Err(fail(
                OnofriStatus::InvalidArgument,
                format!("index {index} out of range (len {})", tr.times.len()),
            ));
        }
        (*t, *f, *g, *mass) = (tr.times[index], tr.f_values[index], tr.g_values[index], tr.mass_values[index]);
        Ok(())
    })
}

/// `|F(0) - ∫G dt - F(T)|` and the largest relative mass drift.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_flow_trace_diagnostics(
    trace: *const OnofriFlowTrace,
    energy_defect: *mut f64,
    mass_drift: *mut f64,
) -> OnofriStatus {
    guard(|| {
        let tr = &deref(trace, "trace")?.0;
        let (e, m) = (out(energy_defect, "energy_defect")?, out(mass_drift, "mass_drift")?);
        (*e, *m) = (tr.energy_defect(), tr.mass_drift());
        Ok(())
    })
}

// ---------------------------------------------------------------- weights

/// Weight from a spec such as `stereographic`, `gaussian:1`, `keller-segel:4`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_weight_new(
    geom: *const OnofriGeometry,
    spec: *const c_char,
    out_weight: *mut *mut OnofriWeight,
) -> OnofriStatus {
    guard(|| {
        let g = deref(geom, "geom")?;
        let spec = c_str(spec, "spec")?;
        let dst = out(out_weight, "out_weight")?;
        let kind: WeightKind = spec.parse().st()?;
        let w = Weight::new(kind, &g.0).st()?;
        boxed(OnofriWeight(w), dst);
        Ok(())
    })
}

/// # Safety
/// `weight` must come from [`onofri_weight_new`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn onofri_weight_free(weight: *mut OnofriWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

/// Λ⋆ = inf(-Δ log μ)/(8πμ).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_weight_lambda_star(weight: *const OnofriWeight, out_value: *mut f64) -> OnofriStatus {
    guard(|| {
        let w = deref(weight, "weight")?;
        let dst = out(out_value, "out_value")?;
        *dst = lambda_star_weight(&w.0).value;
        Ok(())
    })
}

// ---------------------------------------------------------------- identities

/// Runs an identity suite (`circle`, `sphere`, `plane`, `all`). A
/// nonpositive `tol` selects the per-suite default.
///
/// # Safety
/// `suite` must be NUL-terminated; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn onofri_identity_suite(
    suite: *const c_char,
    trials: usize,
    seed: u64,
    tol: f64,
    passed: *mut usize,
    failed: *mut usize,
) -> OnofriStatus {
    guard(|| {
        let name = c_str(suite, "suite")?;
        let (p, f) = (out(passed, "passed")?, out(failed, "failed")?);
        let suite: Suite = name.parse().st()?;
        let opts = SuiteOptions {
            trials,
            seed,
            tol: (tol > 0.0).then_some(tol),
            ..Default::default()
        };
        let r = run_suite(suite, &opts).st()?;
        (*p, *f) = (r.summary.passed, r.summary.failed);
        Ok(())
    })
}
