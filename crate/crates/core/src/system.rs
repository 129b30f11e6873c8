//! Link geometry: array sizes, link budget, RIS placement and the seeded
//! multipath draw that turns a distance into three segment matrices.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_segment, wavelength, Endpoint, LinkBudget, LinkChannels, PathComponent, RisGeometry, SegmentTag,
    UlaGeometry, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub ris_elements_x: usize,
    pub ris_elements_y: usize,
    /// Hz.
    pub carrier_frequency: f64,
    /// ULA spacing in wavelengths.
    pub antenna_spacing: f64,
    /// RIS spacing in wavelengths, both axes.
    pub ris_spacing: f64,
    /// Linear per-element antenna gain.
    pub antenna_element_gain: f64,
    /// dB/km.
    pub absorption: f64,
    /// Alice–RIS length as a fraction of the Alice–Bob distance.
    pub ris_fraction_tx: f64,
    /// RIS–Bob length as a fraction of the Alice–Bob distance.
    pub ris_fraction_rx: f64,
    /// RIS elevation angle (radians).
    pub ris_elevation: f64,
    /// Departure and arrival angles are drawn uniformly in ±this.
    pub angle_limit: f64,
    pub paths_per_segment: usize,
    pub nlos_fresnel: f64,
    pub roughness: f64,
    pub seed: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            tx_antennas: 8,
            rx_antennas: 8,
            ris_elements_x: 8,
            ris_elements_y: 8,
            carrier_frequency: 15e12,
            antenna_spacing: 0.5,
            ris_spacing: 0.5,
            antenna_element_gain: 1000.0,
            absorption: 50.0,
            ris_fraction_tx: 0.3,
            ris_fraction_rx: 0.8,
            ris_elevation: FRAC_PI_4,
            angle_limit: FRAC_PI_3,
            paths_per_segment: 1,
            nlos_fresnel: 0.5,
            roughness: 1.0,
            seed: 7,
        }
    }
}

/// Angles and excess lengths of one path, independent of array sizes so that
/// configurations differing only in element counts share the same geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PathDraw {
    aod: f64,
    aoa: f64,
    excess: f64,
}

/// A [`SystemParams`] with its multipath realization drawn.
#[derive(Debug, Clone)]
pub struct LinkGeometry {
    params: SystemParams,
    draws: [Vec<PathDraw>; 3],
}

impl SystemParams {
    pub fn ris_elements(&self) -> usize {
        self.ris_elements_x * self.ris_elements_y
    }

    /// Number of combiner outputs Bob keeps.
    pub fn bob_modes(&self) -> usize {
        self.tx_antennas.min(self.rx_antennas).min(self.ris_elements())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_frequency)
    }

    pub fn validate(&self) -> Result<()> {
        let geom = |m: String| Err(Error::InvalidGeometry(m));
        if self.tx_antennas == 0 || self.rx_antennas == 0 || self.ris_elements() == 0 {
            return geom("array sizes must be at least 1".into());
        }
        if !(self.carrier_frequency > 0.0) {
            return geom(format!("carrier frequency {} must be positive", self.carrier_frequency));
        }
        if !(self.antenna_spacing > 0.0 && self.ris_spacing > 0.0) {
            return geom("element spacings must be positive".into());
        }
        if !(self.antenna_element_gain > 0.0) || !(self.absorption >= 0.0) {
            return geom("gain must be positive and absorption non-negative".into());
        }
        if !(self.ris_fraction_tx > 0.0 && self.ris_fraction_rx > 0.0) {
            return geom("RIS placement fractions must be positive".into());
        }
        if !(self.angle_limit >= 0.0 && self.angle_limit <= std::f64::consts::FRAC_PI_2) {
            return geom(format!("angle limit {} outside [0, π/2]", self.angle_limit));
        }
        if self.paths_per_segment == 0 {
            return geom("at least one path per segment".into());
        }
        if !((0.0..=1.0).contains(&self.nlos_fresnel) && (0.0..=1.0).contains(&self.roughness)) {
            return geom("Fresnel coefficient and roughness must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Draws the multipath realization from `seed`.
    pub fn geometry(&self) -> Result<LinkGeometry> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let limit = self.angle_limit;
        let angle = |rng: &mut ChaCha8Rng| {
            if limit > 0.0 {
                rng.random_range(-limit..=limit)
            } else {
                0.0
            }
        };
        let mut draw_segment = || -> Vec<PathDraw> {
            (0..self.paths_per_segment)
                .map(|i| {
                    let aod = angle(&mut rng);
                    let aoa = angle(&mut rng);
                    let excess = if i == 0 { 0.0 } else { rng.random_range(0.05..=0.5) };
                    PathDraw { aod, aoa, excess }
                })
                .collect()
        };
        let draws = [draw_segment(), draw_segment(), draw_segment()];
        Ok(LinkGeometry {
            params: self.clone(),
            draws,
        })
    }
}

impl LinkGeometry {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Segment matrices with Alice and Bob `distance` meters apart.
    pub fn channels_at(&self, distance: f64) -> Result<LinkChannels> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::InvalidGeometry(format!("distance {distance} must be positive")));
        }
        let p = &self.params;
        let lambda = p.wavelength();
        let alice = Endpoint::Ula(UlaGeometry::new(p.tx_antennas, p.antenna_spacing * lambda, p.carrier_frequency)?);
        let bob = Endpoint::Ula(UlaGeometry::new(p.rx_antennas, p.antenna_spacing * lambda, p.carrier_frequency)?);
        let ris = Endpoint::Ris(RisGeometry::new(
            p.ris_elements_x,
            p.ris_elements_y,
            p.ris_spacing * lambda,
            p.ris_spacing * lambda,
            p.ris_elevation,
        )?);
        let segment = |k: usize, length: f64, tx: &Endpoint, rx: &Endpoint, tag: SegmentTag| {
            let paths: Vec<PathComponent> = self.draws[k]
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let len = length * (1.0 + d.excess);
                    PathComponent {
                        path_index: i + 1,
                        delay: len / SPEED_OF_LIGHT,
                        aod: d.aod,
                        aoa: d.aoa,
                        path_length: len,
                        fresnel_coeff: if i == 0 { 1.0 } else { p.nlos_fresnel },
                        roughness: if i == 0 { 1.0 } else { p.roughness },
                        is_los: i == 0,
                    }
                })
                .collect();
            let budget = LinkBudget::for_endpoints(p.absorption, p.antenna_element_gain, tx, rx);
            build_segment(&paths, tx, rx, &budget, p.carrier_frequency, tag)
        };
        LinkChannels::new(
            segment(0, distance, &alice, &bob, SegmentTag::Direct)?,
            segment(1, p.ris_fraction_tx * distance, &alice, &ris, SegmentTag::TxRis)?,
            segment(2, p.ris_fraction_rx * distance, &ris, &bob, SegmentTag::RisRx)?,
        )
    }
}
