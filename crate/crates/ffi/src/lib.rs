//! C interface to the phpnet library.
//!
//! Configurations live behind an opaque [`PhpnetConfig`] handle. Every
//! function returns a [`PhpnetStatus`]; on failure a description is kept per
//! thread and read with [`phpnet_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use phpnet::analysis::{self, AnalysisOptions, Approach};
use phpnet::model::config;
use phpnet::model::{LinkState, NetworkConfig, Tier};
use phpnet::montecarlo::{self, SimulationOptions};
use phpnet::quadrature::QuadratureSpec;
use phpnet::units::db_to_linear;
use phpnet::Error;

/// Opaque network configuration.
pub struct PhpnetConfig {
    inner: NetworkConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhpnetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhpnetApproach {
    BaselinePpp = 0,
    EquivalentDensity = 1,
    ServingHole = 2,
    NearestHoles = 3,
    AllHoles = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhpnetTier {
    Macro = 0,
    Small = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhpnetLinkState {
    Los = 0,
    Nlos = 1,
}

impl From<PhpnetApproach> for Approach {
    fn from(a: PhpnetApproach) -> Self {
        match a {
            PhpnetApproach::BaselinePpp => Approach::BaselinePpp,
            PhpnetApproach::EquivalentDensity => Approach::EquivalentDensity,
            PhpnetApproach::ServingHole => Approach::ServingHole,
            PhpnetApproach::NearestHoles => Approach::NearestNonServingHoles,
            PhpnetApproach::AllHoles => Approach::AllNonServingHoles,
        }
    }
}

impl From<PhpnetTier> for Tier {
    fn from(t: PhpnetTier) -> Self {
        match t {
            PhpnetTier::Macro => Tier::Macro,
            PhpnetTier::Small => Tier::Small,
        }
    }
}

impl From<PhpnetLinkState> for LinkState {
    fn from(s: PhpnetLinkState) -> Self {
        match s {
            PhpnetLinkState::Los => LinkState::Los,
            PhpnetLinkState::Nlos => LinkState::Nlos,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PhpnetStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Quadrature { .. } | Error::NoBaseStation { .. } => PhpnetStatus::Numerical,
            Error::Domain(_) => PhpnetStatus::InvalidArgument,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => PhpnetStatus::Io,
            _ => PhpnetStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PhpnetStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(PhpnetStatus::InvalidArgument, message.into())
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PhpnetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PhpnetStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            PhpnetStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn config_arg<'a>(p: *const PhpnetConfig) -> Result<&'a NetworkConfig, Failure> {
    p.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn store(out: *mut *mut PhpnetConfig, cfg: NetworkConfig) -> Result<(), Failure> {
    let slot = unsafe { out_arg(out, "out")? };
    *slot = Box::into_raw(Box::new(PhpnetConfig { inner: cfg }));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn phpnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn phpnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a built-in preset ("setup1" or "setup2") into a new handle.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_from_preset(name: *const c_char, out: *mut *mut PhpnetConfig) -> PhpnetStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        store(out, config::preset(name)?)
    })
}

/// Parses a TOML configuration into a new handle.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_from_toml(toml: *const c_char, out: *mut *mut PhpnetConfig) -> PhpnetStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        store(out, config::parse(text)?)
    })
}

/// Copies a handle.
///
/// # Safety
/// `cfg` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_clone(cfg: *const PhpnetConfig, out: *mut *mut PhpnetConfig) -> PhpnetStatus {
    guard(|| {
        let c = config_arg(cfg)?.clone();
        store(out, c)
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_free(cfg: *mut PhpnetConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets the SINR threshold of both tiers, in dB.
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_set_threshold_db(cfg: *mut PhpnetConfig, tau_db: f64) -> PhpnetStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("config"))?;
        if !tau_db.is_finite() {
            return Err(invalid("threshold must be finite"));
        }
        c.inner = c.inner.with_threshold(db_to_linear(tau_db));
        Ok(())
    })
}

/// Sets the hole radius (m) and central angle (rad).
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_set_holes(
    cfg: *mut PhpnetConfig,
    radius: f64,
    central_angle: f64,
) -> PhpnetStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        next.hole_radius = radius;
        next.hole_angle = central_angle;
        next.validate()?;
        c.inner = next;
        Ok(())
    })
}

/// Writes the NUL-terminated parameter fingerprint into `buf` of `len` bytes (17 suffice).
///
/// # Safety
/// `cfg` must come from this library and `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn phpnet_config_fingerprint(
    cfg: *const PhpnetConfig,
    buf: *mut c_char,
    len: usize,
) -> PhpnetStatus {
    guard(|| {
        let fp = config_arg(cfg)?.fingerprint();
        let out = slice_out(buf, len, "buf")?;
        if out.len() <= fp.len() {
            return Err(invalid(format!("buffer of {} bytes is too small", out.len())));
        }
        for (o, b) in out.iter_mut().zip(fp.bytes()) {
            *o = b as c_char;
        }
        out[fp.len()] = 0;
        Ok(())
    })
}

/// Density of the PPP with the same mean SBS count as the hole process, per m².
///
/// # Safety
/// `cfg` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phpnet_equivalent_density(cfg: *const PhpnetConfig, out: *mut f64) -> PhpnetStatus {
    guard(|| {
        *out_arg(out, "out")? = analysis::equivalent_density(config_arg(cfg)?);
        Ok(())
    })
}

/// Probability that the UE is served by a BS of `tier` in `state`.
///
/// # Safety
/// `cfg` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phpnet_association_probability(
    cfg: *const PhpnetConfig,
    tier: PhpnetTier,
    state: PhpnetLinkState,
    out: *mut f64,
) -> PhpnetStatus {
    guard(|| {
        *out_arg(out, "out")? = analysis::association_probability(tier.into(), state.into(), config_arg(cfg)?)?;
        Ok(())
    })
}

/// Analytical coverage at each of `len` thresholds in dB; `rel_tol` ≤ 0 selects the default.
///
/// # Safety
/// `cfg` must come from this library; `tau_db` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn phpnet_coverage(
    cfg: *const PhpnetConfig,
    approach: PhpnetApproach,
    tau_db: *const f64,
    len: usize,
    rel_tol: f64,
    out: *mut f64,
) -> PhpnetStatus {
    guard(|| {
        let c = config_arg(cfg)?;
        let taus = slice_arg(tau_db, len, "tau_db")?;
        let probs = slice_out(out, len, "out")?;
        if taus.is_empty() {
            return Ok(());
        }
        let mut opts = AnalysisOptions::default();
        if rel_tol > 0.0 {
            opts.quadrature = QuadratureSpec {
                rel_tol,
                ..opts.quadrature
            };
        }
        let sweep = analysis::Sweep::tau(taus.to_vec())?;
        let curve = analysis::coverage(approach.into(), c, &sweep, &opts)?;
        for (o, p) in probs.iter_mut().zip(curve.points) {
            *o = p.probability;
        }
        Ok(())
    })
}

/// Monte Carlo coverage at each of `len` thresholds in dB, with standard errors.
///
/// # Safety
/// `cfg` must come from this library; `tau_db`, `out` and `stderr_out` must hold `len` values
/// (`stderr_out` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn phpnet_simulate_coverage(
    cfg: *const PhpnetConfig,
    tau_db: *const f64,
    len: usize,
    trials: u64,
    seed: u64,
    out: *mut f64,
    stderr_out: *mut f64,
) -> PhpnetStatus {
    guard(|| {
        let c = config_arg(cfg)?;
        let taus = slice_arg(tau_db, len, "tau_db")?;
        let probs = slice_out(out, len, "out")?;
        if taus.is_empty() {
            return Ok(());
        }
        let trials = usize::try_from(trials).map_err(|_| invalid("trial count too large"))?;
        let curve = montecarlo::estimate_coverage(c, taus, &SimulationOptions::new(trials, seed))?;
        for (o, p) in probs.iter_mut().zip(&curve.points) {
            *o = p.probability;
        }
        if !stderr_out.is_null() {
            let errs = slice_out(stderr_out, len, "stderr_out")?;
            for (o, p) in errs.iter_mut().zip(&curve.points) {
                *o = p.stderr.unwrap_or(0.0);
            }
        }
        Ok(())
    })
}
