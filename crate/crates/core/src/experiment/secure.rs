//! Largest link length that still meets a key-rate threshold.

use std::time::Instant;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PhaseSource, SecureConfig, SweepVariable};
use super::sweep::{operating_point, with_jobs};
use crate::error::{Error, Result};
use crate::objective::LinkState;
use crate::skr::Scenario;

/// Bisection over `[min_distance_m, max_distance_m]` with a fixed number of
/// halvings, so every call probes the same dyadic grid and the result is the
/// last grid point whose rate is at least `threshold`.
///
/// Before solving, `rate` is sampled on a log-spaced grid and must not
/// increase with distance. Returns 0 when the threshold is missed at the
/// shortest distance.
pub fn max_secure_distance<F>(rate: F, threshold: f64, settings: &SecureConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = (settings.min_distance_m, settings.max_distance_m);
    if !(lo > 0.0 && hi > lo && settings.tolerance_m > 0.0) {
        return Err(Error::NonBracketing(format!(
            "need 0 < min < max and a positive tolerance, got [{lo}, {hi}] ± {}",
            settings.tolerance_m
        )));
    }
    let n = settings.monotonicity_points.max(2);
    let ratio = (hi / lo).ln();
    let mut previous: Option<(f64, f64)> = None;
    let mut at_lo = f64::NAN;
    let mut at_hi = f64::NAN;
    for i in 0..n {
        let d = if i + 1 == n {
            hi
        } else {
            lo * (ratio * i as f64 / (n - 1) as f64).exp()
        };
        let r = rate(d)?;
        if let Some((pd, pr)) = previous {
            if r > pr {
                return Err(Error::NonBracketing(format!(
                    "key rate increases with distance: {pr:.6e} at {pd} m, {r:.6e} at {d} m"
                )));
            }
        } else {
            at_lo = r;
        }
        at_hi = r;
        previous = Some((d, r));
    }
    if at_lo < threshold {
        return Ok(0.0);
    }
    if at_hi >= threshold {
        return Err(Error::NonBracketing(format!(
            "threshold {threshold:.3e} still met at {hi} m (rate {at_hi:.6e}); extend the bracket"
        )));
    }
    let steps = ((hi - lo) / settings.tolerance_m).log2().ceil().max(0.0) as usize;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..steps {
        let mid = 0.5 * (a + b);
        if rate(mid)? >= threshold {
            a = mid;
        } else {
            b = mid;
        }
    }
    debug!("secure distance in [{a}, {b}] after {steps} halvings");
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecureRow {
    pub sweep_var: SweepVariable,
    pub sweep_value: f64,
    pub scenario: Scenario,
    pub phase_source: PhaseSource,
    pub threshold_bits: f64,
    pub secure_distance_m: f64,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Secure distance of `scenario` with the sweep variable set to `value`.
pub fn secure_distance(config: &ExperimentConfig, scenario: Scenario, value: f64) -> Result<f64> {
    let (params, noise, _) = config.point(value)?;
    let geometry = params.geometry()?;
    let rate = |d: f64| -> Result<f64> {
        let state = LinkState::new(geometry.channels_at(d)?)?;
        Ok(operating_point(config, scenario, &state, &noise)?.1.skr)
    };
    max_secure_distance(rate, config.secure.threshold_bits, &config.secure)
}

/// Secure distance for every grid value × scenario. The sweep variable must
/// not be the distance itself.
pub fn run_secure_distance(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<SecureRow>> {
    config.validate()?;
    let var = config.sweep.variable;
    if var == SweepVariable::Distance {
        return Err(Error::config(
            "sweep.variable",
            "secure-distance solves for the distance; sweep antennas, ris_elements or detector_noise instead",
        ));
    }
    let tasks: Vec<(f64, Scenario)> = config
        .sweep
        .values
        .iter()
        .flat_map(|&v| config.scenarios.iter().map(move |&s| (v, s)))
        .collect();
    with_jobs(jobs, || {
        tasks
            .par_iter()
            .map(|&(value, scenario)| {
                let start = Instant::now();
                let result = secure_distance(config, scenario, value);
                SecureRow {
                    sweep_var: var,
                    sweep_value: value,
                    scenario,
                    phase_source: config.phases.source,
                    threshold_bits: config.secure.threshold_bits,
                    secure_distance_m: *result.as_ref().unwrap_or(&f64::NAN),
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    error: result.err().map(|e| e.to_string()),
                }
            })
            .collect()
    })
}
