use std::f64::consts::PI;
use std::time::Instant;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PhaseSource, SweepVariable};
use crate::channel::RisPhaseConfig;
use crate::error::{Error, Result};
use crate::noise::NoiseVariances;
use crate::objective::{evaluate, LinkState, OperatingPoint, SkrObjective};
use crate::pso::OptimizationResult;
use crate::skr::{Scenario, SkrBreakdown};

/// ChaCha stream for random RIS phases; stream 0 of the same seed draws the
/// multipath geometry.
const PHASE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: SweepVariable,
    pub sweep_value: f64,
    pub scenario: Scenario,
    pub phase_source: PhaseSource,
    pub mi_bits: f64,
    pub holevo_bits: f64,
    pub skr_raw: f64,
    pub skr_clamped: f64,
    pub wall_ms: f64,
    /// Set when this point could not be evaluated; the rates are then NaN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(sweep_var: SweepVariable, sweep_value: f64, scenario: Scenario, source: PhaseSource, e: &Error) -> Self {
        SweepRow {
            sweep_var,
            sweep_value,
            scenario,
            phase_source: source,
            mi_bits: f64::NAN,
            holevo_bits: f64::NAN,
            skr_raw: f64::NAN,
            skr_clamped: f64::NAN,
            wall_ms: 0.0,
            error: Some(e.to_string()),
        }
    }
}

/// Seeded uniform phases in [−π, π], prefix-stable in `count`.
pub fn random_phases(seed: u64, count: usize) -> RisPhaseConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PHASE_STREAM);
    let phases = (0..count).map(|_| rng.random_range(-PI..=PI)).collect();
    RisPhaseConfig::new(phases).expect("drawn inside [-π, π]")
}

/// Operating point of a scenario at one link, following the configured
/// phase source. Optimized points also return the swarm trace.
pub fn operating_point(
    config: &ExperimentConfig,
    scenario: Scenario,
    state: &LinkState,
    noise: &NoiseVariances,
) -> Result<(OperatingPoint, SkrBreakdown, Option<OptimizationResult>)> {
    let k = state.ris_elements();
    let fixed = |phases: RisPhaseConfig| -> Result<_> {
        let point = OperatingPoint {
            phases,
            splitters: config.splitters()?,
        };
        let b = evaluate(scenario, state, &point, noise)?;
        Ok((point, b, None))
    };
    match config.phases.source {
        PhaseSource::Zero => fixed(RisPhaseConfig::zeros(k)),
        PhaseSource::Random => fixed(random_phases(config.seed, k)),
        PhaseSource::Optimized => {
            let objective = SkrObjective::from_state(scenario, state.clone(), *noise)?;
            let (trace, point, b) = objective.optimize(&config.swarm())?;
            Ok((point, b, Some(trace)))
        }
    }
}

fn link_at(config: &ExperimentConfig, value: f64) -> Result<(LinkState, NoiseVariances)> {
    let (params, noise, distance) = config.point(value)?;
    let channels = params.geometry()?.channels_at(distance)?;
    Ok((LinkState::new(channels)?, noise))
}

fn sweep_point(config: &ExperimentConfig, value: f64) -> Vec<SweepRow> {
    let var = config.sweep.variable;
    let source = config.phases.source;
    let (state, noise) = match link_at(config, value) {
        Ok(v) => v,
        Err(e) => {
            warn!("{var}={value}: {e}");
            return config
                .scenarios
                .iter()
                .map(|&s| SweepRow::failed(var, value, s, source, &e))
                .collect();
        }
    };
    config
        .scenarios
        .iter()
        .map(|&scenario| {
            let start = Instant::now();
            match operating_point(config, scenario, &state, &noise) {
                Ok((_, b, _)) => SweepRow {
                    sweep_var: var,
                    sweep_value: value,
                    scenario,
                    phase_source: source,
                    mi_bits: b.mutual_information,
                    holevo_bits: b.holevo,
                    skr_raw: b.skr,
                    skr_clamped: b.clamped(),
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    error: None,
                },
                Err(e) => {
                    warn!("{var}={value} scenario {scenario}: {e}");
                    SweepRow::failed(var, value, scenario, source, &e)
                }
            }
        })
        .collect()
}

/// Runs `f` on a pool of `jobs` workers, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::config("--jobs", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Every grid value × scenario, in grid order then scenario order.
/// Points that fail (for example an active channel at a short distance)
/// produce rows carrying the error instead of aborting the sweep.
pub fn run_sweep(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    config.validate()?;
    info!(
        "sweeping {} over {} values, {} scenarios",
        config.sweep.variable,
        config.sweep.values.len(),
        config.scenarios.len()
    );
    with_jobs(jobs, || {
        config
            .sweep
            .values
            .par_iter()
            .map(|&v| sweep_point(config, v))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })
}

/// Swarm result for one grid value and scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRow {
    pub sweep_var: SweepVariable,
    pub sweep_value: f64,
    pub scenario: Scenario,
    pub mi_bits: f64,
    pub holevo_bits: f64,
    pub skr_raw: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub phases_rad: Vec<f64>,
    /// Best raw key rate after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub wall_ms: f64,
}

/// Optimizes phases and splitters at every grid value × scenario,
/// regardless of the configured phase source. Unlike [`run_sweep`], the
/// first failing point aborts the run.
pub fn run_optimize(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<OptimizeRow>> {
    config.validate()?;
    let var = config.sweep.variable;
    let swarm = config.swarm();
    with_jobs(jobs, || {
        config
            .sweep
            .values
            .par_iter()
            .map(|&value| -> Result<Vec<OptimizeRow>> {
                let (state, noise) = link_at(config, value)?;
                config
                    .scenarios
                    .iter()
                    .map(|&scenario| {
                        let start = Instant::now();
                        let objective = SkrObjective::from_state(scenario, state.clone(), noise)?;
                        let (trace, point, b) = objective.optimize(&swarm)?;
                        Ok(OptimizeRow {
                            sweep_var: var,
                            sweep_value: value,
                            scenario,
                            mi_bits: b.mutual_information,
                            holevo_bits: b.holevo,
                            skr_raw: b.skr,
                            eta_a: point.splitters.eta_a,
                            eta_b: point.splitters.eta_b,
                            phases_rad: point.phases.phases,
                            history: trace.history,
                            evaluations: trace.evaluations,
                            wall_ms: start.elapsed().as_secs_f64() * 1e3,
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    })?
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::SweepConfig;

    fn small(values: Vec<f64>) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.system.tx_antennas = 2;
        c.system.rx_antennas = 2;
        c.system.ris_elements_x = 2;
        c.system.ris_elements_y = 2;
        c.sweep = SweepConfig {
            variable: SweepVariable::Distance,
            values,
        };
        c
    }

    #[test]
    fn rows_follow_grid_then_scenario_order() {
        let mut c = small(vec![0.1, 0.2, 0.4, 0.8, 1.6]);
        c.scenarios = vec![Scenario::Local(crate::skr::Segment::Direct), Scenario::Global];
        let rows = run_sweep(&c, Some(3)).unwrap();
        assert_eq!(rows.len(), 10);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.sweep_value, c.sweep.values[i / 2]);
            assert_eq!(r.scenario, c.scenarios[i % 2]);
            assert!(r.error.is_none());
            assert_eq!(r.skr_clamped, r.skr_raw.max(0.0));
        }
    }

    #[test]
    fn active_points_fail_per_row() {
        let c = small(vec![1e-4, 0.5]);
        let rows = run_sweep(&c, Some(1)).unwrap();
        let n = c.scenarios.len();
        assert!(rows[..n].iter().all(|r| r.error.is_some() && r.skr_raw.is_nan()));
        assert!(rows[n..].iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn random_phases_are_prefix_stable() {
        let a = random_phases(3, 4);
        let b = random_phases(3, 9);
        assert_eq!(a.phases[..], b.phases[..4]);
        assert_ne!(random_phases(4, 4), a);
    }

    #[test]
    fn optimize_rows_carry_the_trace() {
        let mut c = small(vec![0.2]);
        c.scenarios = vec![Scenario::Global];
        c.pso.particles = 6;
        c.pso.iterations = 5;
        let rows = run_optimize(&c, None).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!(r.history.len(), 5);
        assert_eq!(r.evaluations, 36);
        assert_eq!(r.phases_rad.len(), 4);
        assert!((r.skr_raw - r.history[4]).abs() < 1e-12);
    }

    #[test]
    fn zero_jobs_is_a_config_error() {
        assert_eq!(with_jobs(Some(0), || ()).unwrap_err().exit_code(), 2);
    }
}
