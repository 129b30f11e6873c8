//! Box-constrained particle swarm maximizer.
//!
//! Fitness evaluations within an iteration run on the rayon pool; the
//! velocity update and best tracking are sequential in particle order, so a
//! fixed seed reproduces the run exactly regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub particle_count: usize,
    pub iteration_count: usize,
    pub inertia: f64,
    pub cognitive_weight: f64,
    pub social_weight: f64,
    /// Maximum speed per coordinate as a fraction of that coordinate's range.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particle_count: 40,
            iteration_count: 150,
            inertia: 0.72,
            cognitive_weight: 1.49,
            social_weight: 1.49,
            velocity_clamp: 0.5,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 || self.iteration_count == 0 {
            return Err(Error::Optimizer("particle and iteration counts must be at least 1".into()));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive_weight", self.cognitive_weight),
            ("social_weight", self.social_weight),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Optimizer(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp <= 1.0) {
            return Err(Error::Optimizer(format!(
                "velocity_clamp must lie in (0, 1], got {}",
                self.velocity_clamp
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Optimizer("bounds must be non-empty and of equal length".into()));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i]) || !upper[i].is_finite()) {
            return Err(Error::Optimizer(format!(
                "coordinate {i}: lower {} not below upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(SearchSpace { lower, upper })
    }

    /// Same interval on every coordinate.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension() && x.iter().enumerate().all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    /// Uniform draw inside the box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| rng.random_range(*lo..=*hi))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Global best after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

fn fitness<F>(objective: &F, positions: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    positions
        .par_iter()
        .map(|p| {
            let v = objective(p);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect()
}

/// Maximizes `objective` over `space`.
pub fn optimize<F>(objective: F, space: &SearchSpace, config: &SwarmConfig) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let dim = space.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vmax: Vec<f64> = (0..dim)
        .map(|i| config.velocity_clamp * (space.upper[i] - space.lower[i]))
        .collect();

    let mut positions: Vec<Vec<f64>> = (0..config.particle_count).map(|_| space.sample(&mut rng)).collect();
    let mut velocities: Vec<Vec<f64>> = (0..config.particle_count)
        .map(|_| vmax.iter().map(|v| rng.random_range(-*v..=*v)).collect())
        .collect();

    let values = fitness(&objective, &positions);
    let mut evaluations = positions.len();
    let mut personal = positions.clone();
    let mut personal_value = values.clone();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > personal_value[best] {
            best = i;
        }
    }
    let mut best_position = personal[best].clone();
    let mut best_value = personal_value[best];
    let mut history = Vec::with_capacity(config.iteration_count);

    for _ in 0..config.iteration_count {
        for p in 0..config.particle_count {
            let (x, v) = (&mut positions[p], &mut velocities[p]);
            for i in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let next = config.inertia * v[i]
                    + config.cognitive_weight * r1 * (personal[p][i] - x[i])
                    + config.social_weight * r2 * (best_position[i] - x[i]);
                v[i] = next.clamp(-vmax[i], vmax[i]);
                x[i] += v[i];
                if x[i] < space.lower[i] {
                    x[i] = space.lower[i];
                    v[i] = 0.0;
                } else if x[i] > space.upper[i] {
                    x[i] = space.upper[i];
                    v[i] = 0.0;
                }
            }
        }
        let values = fitness(&objective, &positions);
        evaluations += positions.len();
        for (p, &value) in values.iter().enumerate() {
            if value > personal_value[p] {
                personal_value[p] = value;
                personal[p].clone_from(&positions[p]);
            }
            if value > best_value {
                best_value = value;
                best_position.clone_from(&positions[p]);
            }
        }
        history.push(best_value);
    }

    Ok(OptimizationResult {
        best_position,
        best_value,
        history,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn sphere_converges() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = SwarmConfig {
            particle_count: 30,
            iteration_count: 200,
            seed: 3,
            ..SwarmConfig::default()
        };
        let r = optimize(sphere, &space, &cfg).unwrap();
        assert!(r.best_value >= -1e-4, "{}", r.best_value);
        assert_eq!(r.history.len(), 200);
        assert_eq!(*r.history.last().unwrap(), r.best_value);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(r.evaluations, 30 * 201);
    }

    #[test]
    fn boundary_optimum_reached_by_clipping() {
        let space = SearchSpace::uniform(1, 0.0, 1.0).unwrap();
        let r = optimize(|x: &[f64]| x[0], &space, &SwarmConfig::default()).unwrap();
        assert_eq!(r.best_position[0], 1.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let space = SearchSpace::uniform(3, -2.0, 2.0).unwrap();
        let cfg = SwarmConfig {
            seed: 99,
            iteration_count: 20,
            ..SwarmConfig::default()
        };
        let f = |x: &[f64]| (x[0] * 3.0).sin() - x[1] * x[1] + x[2];
        let a = optimize(f, &space, &cfg).unwrap();
        let b = optimize(f, &space, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_setups() {
        assert!(SearchSpace::new(vec![1.0], vec![0.0]).is_err());
        assert!(SearchSpace::new(vec![], vec![]).is_err());
        let space = SearchSpace::uniform(1, 0.0, 1.0).unwrap();
        let cfg = SwarmConfig {
            particle_count: 0,
            ..SwarmConfig::default()
        };
        assert!(matches!(optimize(|_: &[f64]| 0.0, &space, &cfg), Err(Error::Optimizer(_))));
        let cfg = SwarmConfig {
            velocity_clamp: 1.5,
            ..SwarmConfig::default()
        };
        assert!(optimize(|_: &[f64]| 0.0, &space, &cfg).is_err());
    }

    #[test]
    fn failures_never_become_best() {
        let space = SearchSpace::uniform(1, -1.0, 1.0).unwrap();
        let f = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { x[0] };
        let r = optimize(f, &space, &SwarmConfig::default()).unwrap();
        assert!(r.best_value <= 0.0 && r.best_value > -1e-6);
    }
}
