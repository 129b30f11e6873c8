//! JSON experiment configuration. Keys carry their units; every field has a
//! default so an empty object is a valid configuration.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localized::SplitterSettings;
use crate::noise::{thermal_occupation, NoiseVariances, SegmentVariances};
use crate::pso::SwarmConfig;
use crate::skr::Scenario;
use crate::system::SystemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub ris_elements_x: usize,
    pub ris_elements_y: usize,
    pub carrier_freq_thz: f64,
    pub antenna_spacing_wavelengths: f64,
    pub ris_spacing_wavelengths: f64,
    pub antenna_gain_dbi: f64,
    pub absorption_db_per_km: f64,
    pub temperature_k: f64,
    pub ris_fraction_tx: f64,
    pub ris_fraction_rx: f64,
    pub ris_elevation_rad: f64,
    pub angle_limit_rad: f64,
    pub paths_per_segment: usize,
    pub nlos_fresnel: f64,
    pub roughness: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            tx_antennas: 8,
            rx_antennas: 8,
            ris_elements_x: 8,
            ris_elements_y: 8,
            carrier_freq_thz: 15.0,
            antenna_spacing_wavelengths: 0.5,
            ris_spacing_wavelengths: 0.5,
            antenna_gain_dbi: 30.0,
            absorption_db_per_km: 50.0,
            temperature_k: 296.0,
            ris_fraction_tx: 0.3,
            ris_fraction_rx: 0.8,
            ris_elevation_rad: FRAC_PI_4,
            angle_limit_rad: FRAC_PI_3,
            paths_per_segment: 1,
            nlos_fresnel: 0.5,
            roughness: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn carrier_frequency_hz(&self) -> f64 {
        self.carrier_freq_thz * 1e12
    }

    pub fn antenna_gain_linear(&self) -> f64 {
        10f64.powf(self.antenna_gain_dbi / 10.0)
    }

    pub fn params(&self, seed: u64) -> SystemParams {
        SystemParams {
            tx_antennas: self.tx_antennas,
            rx_antennas: self.rx_antennas,
            ris_elements_x: self.ris_elements_x,
            ris_elements_y: self.ris_elements_y,
            carrier_frequency: self.carrier_frequency_hz(),
            antenna_spacing: self.antenna_spacing_wavelengths,
            ris_spacing: self.ris_spacing_wavelengths,
            antenna_element_gain: self.antenna_gain_linear(),
            absorption: self.absorption_db_per_km,
            ris_fraction_tx: self.ris_fraction_tx,
            ris_fraction_rx: self.ris_fraction_rx,
            ris_elevation: self.ris_elevation_rad,
            angle_limit: self.angle_limit_rad,
            paths_per_segment: self.paths_per_segment,
            nlos_fresnel: self.nlos_fresnel,
            roughness: self.roughness,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EveSegmentConfig {
    pub d: f64,
    pub t: f64,
    pub r: f64,
}

impl Default for EveSegmentConfig {
    fn default() -> Self {
        EveSegmentConfig { d: 1.0, t: 1.0, r: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub signal_variance: f64,
    pub splitter_vacuum_variance: f64,
    pub eve_segment_variance: EveSegmentConfig,
    pub eve_global_variance: f64,
    pub detector_noise: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            signal_variance: 1000.0,
            splitter_vacuum_variance: 1.0,
            eve_segment_variance: EveSegmentConfig::default(),
            eve_global_variance: 1.0,
            detector_noise: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "distance_m")]
    Distance,
    /// N_T = N_R.
    #[serde(rename = "antennas")]
    Antennas,
    /// K, a perfect square laid out as √K × √K.
    #[serde(rename = "ris_elements")]
    RisElements,
    #[serde(rename = "detector_noise")]
    DetectorNoise,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::Distance => "distance_m",
            SweepVariable::Antennas => "antennas",
            SweepVariable::RisElements => "ris_elements",
            SweepVariable::DetectorNoise => "detector_noise",
        }
    }

    fn is_count(&self) -> bool {
        matches!(self, SweepVariable::Antennas | SweepVariable::RisElements)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            variable: SweepVariable::Distance,
            values: vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 2.0, 3.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSource {
    Random,
    Zero,
    Optimized,
}

impl PhaseSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseSource::Random => "random",
            PhaseSource::Zero => "zero",
            PhaseSource::Optimized => "optimized",
        }
    }
}

impl fmt::Display for PhaseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PhaseSource::Random),
            "zero" => Ok(PhaseSource::Zero),
            "optimized" => Ok(PhaseSource::Optimized),
            other => Err(Error::config("phases.source", format!("unknown phase source {other:?}"))),
        }
    }
}

/// RIS phases and splitter settings for non-optimized runs. With
/// `optimized`, both phases and splitters come from the swarm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub source: PhaseSource,
    pub eta_a: f64,
    pub eta_b: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            source: PhaseSource::Random,
            eta_a: 0.5,
            eta_b: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive_weight: f64,
    pub social_weight: f64,
    /// Fraction of each coordinate's range.
    pub velocity_clamp: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        let s = SwarmConfig::default();
        PsoConfig {
            particles: s.particle_count,
            iterations: s.iteration_count,
            inertia: s.inertia,
            cognitive_weight: s.cognitive_weight,
            social_weight: s.social_weight,
            velocity_clamp: s.velocity_clamp,
        }
    }
}

impl PsoConfig {
    pub fn swarm(&self, seed: u64) -> SwarmConfig {
        SwarmConfig {
            particle_count: self.particles,
            iteration_count: self.iterations,
            inertia: self.inertia,
            cognitive_weight: self.cognitive_weight,
            social_weight: self.social_weight,
            velocity_clamp: self.velocity_clamp,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecureConfig {
    pub threshold_bits: f64,
    pub min_distance_m: f64,
    pub max_distance_m: f64,
    pub tolerance_m: f64,
    /// Log-spaced points used to check that the rate falls with distance.
    pub monotonicity_points: usize,
}

impl Default for SecureConfig {
    fn default() -> Self {
        SecureConfig {
            threshold_bits: 1e-3,
            min_distance_m: 0.05,
            max_distance_m: 100.0,
            tolerance_m: 1e-3,
            monotonicity_points: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Drives the multipath draw, random phases and the swarm.
    pub seed: u64,
    /// Link length when distance is not the sweep variable.
    pub distance_m: f64,
    pub system: SystemConfig,
    pub noise: NoiseConfig,
    pub sweep: SweepConfig,
    pub scenarios: Vec<Scenario>,
    pub phases: PhaseConfig,
    pub pso: PsoConfig,
    pub secure: SecureConfig,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            distance_m: 1.0,
            system: SystemConfig::default(),
            noise: NoiseConfig::default(),
            sweep: SweepConfig::default(),
            scenarios: Scenario::ALL.to_vec(),
            phases: PhaseConfig::default(),
            pso: PsoConfig::default(),
            secure: SecureConfig::default(),
            output_path: None,
        }
    }
}

fn check(ok: bool, path: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message()))
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    check(v > 0.0 && v.is_finite(), path, || format!("must be positive and finite, got {v}"))
}

fn unit_interval(path: &str, v: f64) -> Result<()> {
    check((0.0..=1.0).contains(&v), path, || format!("must lie in [0, 1], got {v}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        check(s.tx_antennas >= 1, "system.tx_antennas", || "must be at least 1".into())?;
        check(s.rx_antennas >= 1, "system.rx_antennas", || "must be at least 1".into())?;
        check(s.ris_elements_x >= 1, "system.ris_elements_x", || "must be at least 1".into())?;
        check(s.ris_elements_y >= 1, "system.ris_elements_y", || "must be at least 1".into())?;
        positive("system.carrier_freq_thz", s.carrier_freq_thz)?;
        positive("system.antenna_spacing_wavelengths", s.antenna_spacing_wavelengths)?;
        positive("system.ris_spacing_wavelengths", s.ris_spacing_wavelengths)?;
        check(s.antenna_gain_dbi.is_finite(), "system.antenna_gain_dbi", || "must be finite".into())?;
        check(s.absorption_db_per_km >= 0.0 && s.absorption_db_per_km.is_finite(), "system.absorption_db_per_km", || {
            format!("must be non-negative, got {}", s.absorption_db_per_km)
        })?;
        positive("system.temperature_k", s.temperature_k)?;
        positive("system.ris_fraction_tx", s.ris_fraction_tx)?;
        positive("system.ris_fraction_rx", s.ris_fraction_rx)?;
        check(s.ris_elevation_rad.is_finite(), "system.ris_elevation_rad", || "must be finite".into())?;
        check(
            (0.0..=std::f64::consts::FRAC_PI_2).contains(&s.angle_limit_rad),
            "system.angle_limit_rad",
            || format!("must lie in [0, π/2], got {}", s.angle_limit_rad),
        )?;
        check(s.paths_per_segment >= 1, "system.paths_per_segment", || "must be at least 1".into())?;
        unit_interval("system.nlos_fresnel", s.nlos_fresnel)?;
        unit_interval("system.roughness", s.roughness)?;

        let n = &self.noise;
        check(n.signal_variance >= 0.0 && n.signal_variance.is_finite(), "noise.signal_variance", || {
            format!("must be non-negative, got {}", n.signal_variance)
        })?;
        let at_least_vacuum = |path: &str, v: f64| {
            check(v >= 1.0 && v.is_finite(), path, || format!("must be at least 1 (vacuum), got {v}"))
        };
        at_least_vacuum("noise.splitter_vacuum_variance", n.splitter_vacuum_variance)?;
        at_least_vacuum("noise.eve_segment_variance.d", n.eve_segment_variance.d)?;
        at_least_vacuum("noise.eve_segment_variance.t", n.eve_segment_variance.t)?;
        at_least_vacuum("noise.eve_segment_variance.r", n.eve_segment_variance.r)?;
        at_least_vacuum("noise.eve_global_variance", n.eve_global_variance)?;
        check(n.detector_noise >= 0.0 && n.detector_noise.is_finite(), "noise.detector_noise", || {
            format!("must be non-negative, got {}", n.detector_noise)
        })?;

        positive("distance_m", self.distance_m)?;
        self.validate_sweep()?;

        check(!self.scenarios.is_empty(), "scenarios", || "at least one scenario is required".into())?;
        for (i, a) in self.scenarios.iter().enumerate() {
            check(!self.scenarios[..i].contains(a), &format!("scenarios[{i}]"), || {
                format!("duplicate scenario {a}")
            })?;
        }

        unit_interval("phases.eta_a", self.phases.eta_a)?;
        unit_interval("phases.eta_b", self.phases.eta_b)?;

        let p = &self.pso;
        check(p.particles >= 1, "pso.particles", || "must be at least 1".into())?;
        check(p.iterations >= 1, "pso.iterations", || "must be at least 1".into())?;
        for (path, v) in [
            ("pso.inertia", p.inertia),
            ("pso.cognitive_weight", p.cognitive_weight),
            ("pso.social_weight", p.social_weight),
        ] {
            check(v >= 0.0 && v.is_finite(), path, || format!("must be non-negative, got {v}"))?;
        }
        check(p.velocity_clamp > 0.0 && p.velocity_clamp <= 1.0, "pso.velocity_clamp", || {
            format!("must lie in (0, 1], got {}", p.velocity_clamp)
        })?;

        let c = &self.secure;
        check(c.threshold_bits.is_finite(), "secure.threshold_bits", || "must be finite".into())?;
        positive("secure.min_distance_m", c.min_distance_m)?;
        check(c.max_distance_m > c.min_distance_m && c.max_distance_m.is_finite(), "secure.max_distance_m", || {
            format!("must exceed min_distance_m ({}), got {}", c.min_distance_m, c.max_distance_m)
        })?;
        positive("secure.tolerance_m", c.tolerance_m)?;
        check(c.monotonicity_points >= 2, "secure.monotonicity_points", || "must be at least 2".into())?;
        Ok(())
    }

    fn validate_sweep(&self) -> Result<()> {
        let values = &self.sweep.values;
        check(!values.is_empty(), "sweep.values", || "grid must not be empty".into())?;
        for (i, &v) in values.iter().enumerate() {
            let path = format!("sweep.values[{i}]");
            check(v.is_finite(), &path, || format!("must be finite, got {v}"))?;
            if i > 0 {
                check(v > values[i - 1], &path, || {
                    format!("grid must be strictly increasing, {v} follows {}", values[i - 1])
                })?;
            }
            let var = self.sweep.variable;
            if var.is_count() {
                check(v >= 1.0 && v.fract() == 0.0, &path, || format!("{var} must be a positive integer, got {v}"))?;
            }
            match var {
                SweepVariable::Distance => positive(&path, v)?,
                SweepVariable::DetectorNoise => {
                    check(v >= 0.0, &path, || format!("detector noise must be non-negative, got {v}"))?
                }
                SweepVariable::RisElements => {
                    let side = (v as usize).isqrt();
                    check(side * side == v as usize, &path, || {
                        format!("RIS element count must be a perfect square, got {v}")
                    })?
                }
                SweepVariable::Antennas => {}
            }
        }
        Ok(())
    }

    /// Vacuum variance resolved from carrier and temperature.
    pub fn vacuum_variance(&self) -> f64 {
        2.0 * thermal_occupation(self.system.carrier_frequency_hz(), self.system.temperature_k) + 1.0
    }

    pub fn noise_variances(&self) -> Result<NoiseVariances> {
        let n = &self.noise;
        let v = NoiseVariances {
            signal_variance: n.signal_variance,
            vacuum_variance: self.vacuum_variance(),
            splitter_vacuum: n.splitter_vacuum_variance,
            eve_segment_variance: SegmentVariances {
                direct: n.eve_segment_variance.d,
                tx_ris: n.eve_segment_variance.t,
                ris_rx: n.eve_segment_variance.r,
            },
            eve_global_variance: n.eve_global_variance,
            detector_noise: n.detector_noise,
            temperature: Some(self.system.temperature_k),
        };
        v.validate()?;
        Ok(v)
    }

    pub fn splitters(&self) -> Result<SplitterSettings> {
        SplitterSettings::new(self.phases.eta_a, self.phases.eta_b)
    }

    pub fn swarm(&self) -> SwarmConfig {
        self.pso.swarm(self.seed)
    }

    /// One sweep point applied to the base configuration: system parameters,
    /// noise and link length.
    pub fn point(&self, value: f64) -> Result<(SystemParams, NoiseVariances, f64)> {
        let mut params = self.system.params(self.seed);
        let mut noise = self.noise_variances()?;
        let mut distance = self.distance_m;
        match self.sweep.variable {
            SweepVariable::Distance => distance = value,
            SweepVariable::Antennas => {
                params.tx_antennas = value as usize;
                params.rx_antennas = value as usize;
            }
            SweepVariable::RisElements => {
                let side = (value as usize).isqrt();
                params.ris_elements_x = side;
                params.ris_elements_y = side;
            }
            SweepVariable::DetectorNoise => noise.detector_noise = value,
        }
        Ok((params, noise, distance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert!((c.system.antenna_gain_linear() - 1000.0).abs() < 1e-9);
        let n = c.noise_variances().unwrap();
        assert_eq!(n.signal_variance, 1000.0);
        assert_eq!(n.detector_noise, 0.01);
    }

    #[test]
    fn type_errors_carry_the_field_path() {
        let e = ExperimentConfig::from_json(r#"{"system": {"tx_antennas": "eight"}}"#).unwrap_err();
        match e {
            Error::Config { path, .. } => assert_eq!(path, "system.tx_antennas"),
            other => panic!("{other:?}"),
        }
        let e = ExperimentConfig::from_json(r#"{"noise": {"bogus": 1}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn validation_errors_carry_the_field_path() {
        let cases = [
            (r#"{"sweep": {"variable": "distance_m", "values": []}}"#, "sweep.values"),
            (r#"{"sweep": {"variable": "distance_m", "values": [1, 0.5]}}"#, "sweep.values[1]"),
            (r#"{"sweep": {"variable": "ris_elements", "values": [16, 20]}}"#, "sweep.values[1]"),
            (r#"{"sweep": {"variable": "antennas", "values": [2.5]}}"#, "sweep.values[0]"),
            (r#"{"scenarios": ["d", "d"]}"#, "scenarios[1]"),
            (r#"{"scenarios": []}"#, "scenarios"),
            (r#"{"phases": {"eta_a": 1.5}}"#, "phases.eta_a"),
            (r#"{"noise": {"eve_segment_variance": {"t": 0.5}}}"#, "noise.eve_segment_variance.t"),
            (r#"{"pso": {"velocity_clamp": 0}}"#, "pso.velocity_clamp"),
            (r#"{"secure": {"max_distance_m": 0.01}}"#, "secure.max_distance_m"),
        ];
        for (text, want) in cases {
            match ExperimentConfig::from_json(text) {
                Err(Error::Config { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        let e = ExperimentConfig::from_json(r#"{"scenarios": ["x"]}"#).unwrap_err();
        match e {
            Error::Config { path, .. } => assert_eq!(path, "scenarios[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_points_override_one_field() {
        let c = ExperimentConfig {
            sweep: SweepConfig {
                variable: SweepVariable::RisElements,
                values: vec![16.0],
            },
            ..ExperimentConfig::default()
        };
        let (p, _, d) = c.point(16.0).unwrap();
        assert_eq!((p.ris_elements_x, p.ris_elements_y), (4, 4));
        assert_eq!(d, c.distance_m);
    }

    #[test]
    fn round_trips_through_json() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
