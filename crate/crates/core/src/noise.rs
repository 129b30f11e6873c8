use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mean thermal photon number at `frequency` (Hz) and `temperature` (K).
pub fn thermal_occupation(frequency: f64, temperature: f64) -> f64 {
    1.0 / (PLANCK * frequency / (BOLTZMANN * temperature)).exp_m1()
}

/// Per-segment variances of the environment modes Eve may hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentVariances {
    pub direct: f64,
    pub tx_ris: f64,
    pub ris_rx: f64,
}

impl SegmentVariances {
    pub fn uniform(v: f64) -> Self {
        SegmentVariances {
            direct: v,
            tx_ris: v,
            ris_rx: v,
        }
    }
}

/// Every scalar variance of the protocol, in vacuum units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseVariances {
    pub signal_variance: f64,
    pub vacuum_variance: f64,
    pub splitter_vacuum: f64,
    pub eve_segment_variance: SegmentVariances,
    pub eve_global_variance: f64,
    pub detector_noise: f64,
    /// Temperature (K) the vacuum variance was resolved from, if any.
    pub temperature: Option<f64>,
}

impl NoiseVariances {
    /// Thermal preparation noise `V_0 = 2n̄ + 1` at the given carrier and
    /// temperature; all Eve and splitter variances at vacuum.
    pub fn thermal(signal_variance: f64, detector_noise: f64, frequency: f64, temperature: f64) -> Result<Self> {
        if !(frequency > 0.0 && temperature > 0.0) {
            return Err(Error::Contract(format!(
                "frequency and temperature must be positive, got {frequency} Hz, {temperature} K"
            )));
        }
        let n = NoiseVariances {
            signal_variance,
            vacuum_variance: 2.0 * thermal_occupation(frequency, temperature) + 1.0,
            splitter_vacuum: 1.0,
            eve_segment_variance: SegmentVariances::uniform(1.0),
            eve_global_variance: 1.0,
            detector_noise,
            temperature: Some(temperature),
        };
        n.validate()?;
        Ok(n)
    }

    /// V_s = 1000, σ² = 0.01 at 15 THz and 296 K.
    pub fn reference() -> Self {
        Self::thermal(1000.0, 0.01, 15e12, 296.0).expect("reference noise is valid")
    }

    /// V_a = V_s + V_0.
    pub fn alice_variance(&self) -> f64 {
        self.signal_variance + self.vacuum_variance
    }

    pub fn with_signal_variance(mut self, v: f64) -> Self {
        self.signal_variance = v;
        self
    }

    pub fn with_detector_noise(mut self, v: f64) -> Self {
        self.detector_noise = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Contract(format!("{what} out of range: {v}")));
        if !(self.signal_variance >= 0.0) || !self.signal_variance.is_finite() {
            return bad("signal variance", self.signal_variance);
        }
        if !(self.vacuum_variance >= 1.0) || !self.vacuum_variance.is_finite() {
            return bad("vacuum variance", self.vacuum_variance);
        }
        if !(self.splitter_vacuum >= 1.0) {
            return bad("splitter vacuum variance", self.splitter_vacuum);
        }
        let e = self.eve_segment_variance;
        for v in [e.direct, e.tx_ris, e.ris_rx, self.eve_global_variance] {
            if !(v >= 1.0) || !v.is_finite() {
                return bad("Eve variance", v);
            }
        }
        if !(self.detector_noise >= 0.0) || !self.detector_noise.is_finite() {
            return bad("detector noise", self.detector_noise);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_vacuum_variance() {
        let n = NoiseVariances::reference();
        assert_relative_eq!(thermal_occupation(15e12, 296.0), 0.096_318_897_503_979_54, max_relative = 1e-12);
        assert_relative_eq!(n.vacuum_variance, 1.192_637_795_007_959_1, max_relative = 1e-12);
        assert_relative_eq!(n.alice_variance(), 1_001.192_637_795_008, max_relative = 1e-12);
    }

    #[test]
    fn validation() {
        let n = NoiseVariances::reference();
        assert!(n.with_signal_variance(-1.0).validate().is_err());
        assert!(n.with_detector_noise(-0.1).validate().is_err());
        let mut m = n;
        m.eve_segment_variance.tx_ris = 0.5;
        assert!(m.validate().is_err());
        assert!(NoiseVariances::thermal(1.0, 0.0, 0.0, 296.0).is_err());
    }
}
