//! Key rate as a function of the optimization vector
//! `[φ_1 … φ_K, η_a, η_b]`.

use std::f64::consts::PI;

use log::debug;
use rand::Rng;

use crate::channel::{LinkChannels, RisPhaseConfig};
use crate::error::{Error, Result};
use crate::global::{global_effective_channel, skr_global};
use crate::localized::{LinkDilations, LinkNetwork, SplitterSettings};
use crate::noise::NoiseVariances;
use crate::pso::{self, OptimizationResult, SearchSpace, SwarmConfig};
use crate::skr::{Scenario, SkrBreakdown};

/// Segment matrices with their (phase-independent) dilations.
#[derive(Debug, Clone)]
pub struct LinkState {
    pub channels: LinkChannels,
    pub dilations: LinkDilations,
}

impl LinkState {
    pub fn new(channels: LinkChannels) -> Result<Self> {
        let dilations = LinkDilations::new(&channels)?;
        Ok(LinkState { channels, dilations })
    }

    pub fn ris_elements(&self) -> usize {
        self.channels.ris_elements()
    }
}

/// RIS phases plus splitter transmissivities.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub phases: RisPhaseConfig,
    pub splitters: SplitterSettings,
}

impl OperatingPoint {
    pub fn position(&self) -> Vec<f64> {
        let mut p = self.phases.phases.clone();
        p.push(self.splitters.eta_a);
        p.push(self.splitters.eta_b);
        p
    }
}

pub fn evaluate(
    scenario: Scenario,
    state: &LinkState,
    point: &OperatingPoint,
    noise: &NoiseVariances,
) -> Result<SkrBreakdown> {
    match scenario {
        Scenario::Local(segment) => {
            LinkNetwork::new(&state.channels, &state.dilations, &point.phases, point.splitters)?.skr(segment, noise)
        }
        Scenario::Global => skr_global(
            &global_effective_channel(&state.channels, &point.phases, point.splitters)?,
            noise,
        ),
    }
}

/// Fitness wrapper around [`evaluate`] for one scenario and link.
#[derive(Debug, Clone)]
pub struct SkrObjective {
    pub scenario: Scenario,
    pub state: LinkState,
    pub noise: NoiseVariances,
}

impl SkrObjective {
    pub fn new(scenario: Scenario, channels: LinkChannels, noise: NoiseVariances) -> Result<Self> {
        Self::from_state(scenario, LinkState::new(channels)?, noise)
    }

    pub fn from_state(scenario: Scenario, state: LinkState, noise: NoiseVariances) -> Result<Self> {
        noise.validate()?;
        Ok(SkrObjective { scenario, state, noise })
    }

    pub fn dimension(&self) -> usize {
        self.state.ris_elements() + 2
    }

    pub fn search_space(&self) -> SearchSpace {
        let k = self.state.ris_elements();
        let mut lower = vec![-PI; k];
        let mut upper = vec![PI; k];
        lower.extend([0.0, 0.0]);
        upper.extend([1.0, 1.0]);
        SearchSpace::new(lower, upper).expect("static bounds are ordered")
    }

    pub fn decode(&self, position: &[f64]) -> Result<OperatingPoint> {
        let k = self.state.ris_elements();
        if position.len() != k + 2 {
            return Err(Error::Contract(format!(
                "position has length {}, expected {}",
                position.len(),
                k + 2
            )));
        }
        Ok(OperatingPoint {
            phases: RisPhaseConfig::new(position[..k].to_vec())?,
            splitters: SplitterSettings::new(position[k], position[k + 1])?,
        })
    }

    pub fn evaluate(&self, position: &[f64]) -> Result<SkrBreakdown> {
        evaluate(self.scenario, &self.state, &self.decode(position)?, &self.noise)
    }

    /// Raw key rate, or −∞ when the evaluation fails.
    pub fn fitness(&self, position: &[f64]) -> f64 {
        match self.evaluate(position) {
            Ok(b) => b.skr,
            Err(e) => {
                debug!("fitness evaluation failed: {e}");
                f64::NEG_INFINITY
            }
        }
    }

    pub fn random_position<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.search_space().sample(rng)
    }

    /// Runs the swarm and re-evaluates the best position.
    pub fn optimize(&self, config: &SwarmConfig) -> Result<(OptimizationResult, OperatingPoint, SkrBreakdown)> {
        let result = pso::optimize(|x| self.fitness(x), &self.search_space(), config)?;
        if !result.best_value.is_finite() {
            return Err(Error::Optimizer("no feasible position evaluated".into()));
        }
        let point = self.decode(&result.best_position)?;
        let breakdown = evaluate(self.scenario, &self.state, &point, &self.noise)?;
        Ok((result, point, breakdown))
    }
}
