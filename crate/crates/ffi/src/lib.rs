//! C ABI over the key rate simulator.
//!
//! Every function returns an [`RcqStatus`]; on anything but `RCQ_STATUS_OK` the
//! message is available from [`rcq_last_error`] on the same thread. Links are
//! opaque handles built from a JSON configuration and released with
//! [`rcq_link_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ris_cvqkd::experiment::ExperimentConfig;
use ris_cvqkd::gaussian::ho_entropy;
use ris_cvqkd::global::subchannel_skr;
use ris_cvqkd::objective::evaluate;
use ris_cvqkd::{
    Error, LinkState, NoiseVariances, OperatingPoint, RisPhaseConfig, Scenario, Segment, SkrBreakdown, SkrObjective,
    SplitterSettings,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Geometry = 4,
    Passivity = 5,
    Unphysical = 6,
    Contract = 7,
    NonBracketing = 8,
    Optimizer = 9,
    Io = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqScenario {
    Direct = 0,
    TxRis = 1,
    RisRx = 2,
    Global = 3,
}

impl From<RcqScenario> for Scenario {
    fn from(s: RcqScenario) -> Self {
        match s {
            RcqScenario::Direct => Scenario::Local(Segment::Direct),
            RcqScenario::TxRis => Scenario::Local(Segment::TxRis),
            RcqScenario::RisRx => Scenario::Local(Segment::RisRx),
            RcqScenario::Global => Scenario::Global,
        }
    }
}

/// Rates in bits per channel use. `skr` is the raw rate and may be negative.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RcqRate {
    pub mutual_information: f64,
    pub holevo: f64,
    pub skr: f64,
}

impl From<&SkrBreakdown> for RcqRate {
    fn from(b: &SkrBreakdown) -> Self {
        RcqRate {
            mutual_information: b.mutual_information,
            holevo: b.holevo,
            skr: b.skr,
        }
    }
}

/// Synthesized link at a fixed distance together with its noise budget.
pub struct RcqLink {
    config: ExperimentConfig,
    state: LinkState,
    noise: NoiseVariances,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RcqStatus {
    match e {
        Error::InvalidGeometry(_) => RcqStatus::Geometry,
        Error::Passivity { .. } => RcqStatus::Passivity,
        Error::UnphysicalEigenvalue(_) => RcqStatus::Unphysical,
        Error::Contract(_) => RcqStatus::Contract,
        Error::Config { .. } => RcqStatus::Config,
        Error::NonBracketing(_) => RcqStatus::NonBracketing,
        Error::Optimizer(_) => RcqStatus::Optimizer,
        Error::Io(_) => RcqStatus::Io,
    }
}

/// Failure inside the shim, before or after the library call.
struct Fault(RcqStatus, String);

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        Fault(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fault>) -> RcqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RcqStatus::Ok
        }
        Ok(Err(Fault(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {message}"));
            RcqStatus::Panic
        }
    }
}

fn null(what: &str) -> Fault {
    Fault(RcqStatus::NullPointer, format!("{what} is null"))
}

fn build_link(config: ExperimentConfig, distance_m: f64) -> Result<Box<RcqLink>, Fault> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(Fault(RcqStatus::InvalidArgument, format!("distance must be positive, got {distance_m}")));
    }
    let params = config.system.params(config.seed);
    let noise = config.noise_variances()?;
    let state = LinkState::new(params.geometry()?.channels_at(distance_m)?)?;
    Ok(Box::new(RcqLink { config, state, noise }))
}

fn store_link(out: *mut *mut RcqLink, link: Box<RcqLink>) {
    // SAFETY: callers checked `out` for null
    unsafe { *out = Box::into_raw(link) };
}

/// Builds a link from a JSON configuration (NUL-terminated UTF-8) at
/// `distance_m` metres. The sweep section of the configuration is ignored.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rcq_link_from_config_json(
    json: *const c_char,
    distance_m: f64,
    out: *mut *mut RcqLink,
) -> RcqStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| Fault(RcqStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let config = ExperimentConfig::from_json(text)?;
        store_link(out, build_link(config, distance_m)?);
        Ok(())
    })
}

/// Builds a link from the default configuration at `distance_m` metres.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rcq_link_default(distance_m: f64, out: *mut *mut RcqLink) -> RcqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        store_link(out, build_link(ExperimentConfig::default(), distance_m)?);
        Ok(())
    })
}

/// Releases a link. Null is accepted.
///
/// # Safety
/// `link` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rcq_link_free(link: *mut RcqLink) {
    if !link.is_null() {
        drop(unsafe { Box::from_raw(link) });
    }
}

/// Number of RIS elements, i.e. the phase count the link expects.
///
/// # Safety
/// `link` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_link_ris_elements(link: *const RcqLink, out: *mut usize) -> RcqStatus {
    guard(|| {
        let link = unsafe { link.as_ref() }.ok_or_else(|| null("link"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = link.state.ris_elements();
        Ok(())
    })
}

/// Rates of `scenario` at the given RIS phases (radians, `phase_count` of
/// them) and splitter transmissivities.
///
/// # Safety
/// `link` must be a live handle, `phases` must point to `phase_count`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_link_evaluate(
    link: *const RcqLink,
    scenario: RcqScenario,
    phases: *const f64,
    phase_count: usize,
    eta_a: f64,
    eta_b: f64,
    out: *mut RcqRate,
) -> RcqStatus {
    guard(|| {
        let link = unsafe { link.as_ref() }.ok_or_else(|| null("link"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        if phases.is_null() && phase_count > 0 {
            return Err(null("phases"));
        }
        let phases = if phase_count == 0 {
            Vec::new()
        } else {
            unsafe { std::slice::from_raw_parts(phases, phase_count) }.to_vec()
        };
        let point = OperatingPoint {
            phases: RisPhaseConfig::new(phases)?,
            splitters: SplitterSettings::new(eta_a, eta_b)?,
        };
        *out = (&evaluate(scenario.into(), &link.state, &point, &link.noise)?).into();
        Ok(())
    })
}

/// Runs the swarm over phases and splitters for `scenario`. Zero `particles`
/// or `iterations` keep the configured values. The best phases are written to
/// `phases_out`, whose length must equal the RIS element count.
///
/// # Safety
/// `link` must be a live handle, `phases_out` must hold `phase_count`
/// doubles and the remaining out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_link_optimize(
    link: *const RcqLink,
    scenario: RcqScenario,
    particles: usize,
    iterations: usize,
    seed: u64,
    phases_out: *mut f64,
    phase_count: usize,
    eta_a_out: *mut f64,
    eta_b_out: *mut f64,
    out: *mut RcqRate,
) -> RcqStatus {
    guard(|| {
        let link = unsafe { link.as_ref() }.ok_or_else(|| null("link"))?;
        if eta_a_out.is_null() || eta_b_out.is_null() {
            return Err(null("eta out"));
        }
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let k = link.state.ris_elements();
        if phase_count != k {
            return Err(Fault(
                RcqStatus::InvalidArgument,
                format!("phase buffer holds {phase_count} values, link has {k} RIS elements"),
            ));
        }
        if phases_out.is_null() {
            return Err(null("phases_out"));
        }
        let mut swarm = link.config.pso.swarm(seed);
        if particles > 0 {
            swarm.particle_count = particles;
        }
        if iterations > 0 {
            swarm.iteration_count = iterations;
        }
        let objective = SkrObjective::from_state(scenario.into(), link.state.clone(), link.noise)?;
        let (_, point, b) = objective.optimize(&swarm)?;
        let phases = unsafe { std::slice::from_raw_parts_mut(phases_out, k) };
        phases.copy_from_slice(&point.phases.phases);
        unsafe {
            *eta_a_out = point.splitters.eta_a;
            *eta_b_out = point.splitters.eta_b;
        }
        *out = (&b).into();
        Ok(())
    })
}

/// Entropy in bits of a thermal mode with symplectic eigenvalue `nu` ≥ 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_ho_entropy(nu: f64, out: *mut f64) -> RcqStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ho_entropy(nu)?;
        Ok(())
    })
}

/// Rates of one parallel subchannel with transmissivity `beta` under the
/// global attack, thermal vacuum at the default carrier and temperature.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_global_subchannel_skr(
    beta: f64,
    signal_variance: f64,
    eve_variance: f64,
    detector_noise: f64,
    out: *mut RcqRate,
) -> RcqStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let mut noise = NoiseVariances::reference();
        noise.signal_variance = signal_variance;
        noise.eve_global_variance = eve_variance;
        noise.detector_noise = detector_noise;
        noise.validate()?;
        let s = subchannel_skr(0, beta, &noise)?;
        *out = RcqRate {
            mutual_information: s.mutual_information,
            holevo: s.holevo,
            skr: s.skr,
        };
        Ok(())
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rcq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn rcq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
