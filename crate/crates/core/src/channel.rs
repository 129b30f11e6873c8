//! THz MIMO channel synthesis: array steering vectors, per-path link
//! budget, segment matrices and the RIS-assisted composite channel.
//!
//! Conventions:
//! - Steering vectors are 0-based, so the first element always carries zero
//!   phase and every vector has unit Euclidean norm.
//! - Segment matrices are `rows = receive elements`, `cols = transmit elements`.
//! - A synthesized segment whose largest singular value exceeds one is
//!   rejected; the quantum treatment downstream needs a passive channel.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Passivity slack for the largest singular value of a segment.
pub const PASSIVITY_TOLERANCE: f64 = 1e-12;

pub fn wavelength(carrier_frequency: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_frequency
}

/// Uniform linear array at Alice or Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    pub element_count: usize,
    /// Inter-element spacing in meters.
    pub element_spacing: f64,
    /// Carrier frequency in Hz.
    pub carrier_frequency: f64,
}

impl UlaGeometry {
    pub fn new(element_count: usize, element_spacing: f64, carrier_frequency: f64) -> Result<Self> {
        let g = UlaGeometry {
            element_count,
            element_spacing,
            carrier_frequency,
        };
        g.validate()?;
        Ok(g)
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(element_count: usize, carrier_frequency: f64) -> Result<Self> {
        Self::new(element_count, 0.5 * wavelength(carrier_frequency), carrier_frequency)
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_frequency)
    }

    fn validate(&self) -> Result<()> {
        if self.element_count == 0 {
            return Err(Error::InvalidGeometry("ULA needs at least one element".into()));
        }
        if !(self.element_spacing > 0.0) || !self.element_spacing.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "ULA element spacing must be positive, got {}",
                self.element_spacing
            )));
        }
        if !(self.carrier_frequency > 0.0) || !self.carrier_frequency.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_frequency
            )));
        }
        Ok(())
    }
}

/// Planar RIS with `elements_x × elements_y` passive reflectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisGeometry {
    pub elements_x: usize,
    pub elements_y: usize,
    pub spacing_x: f64,
    pub spacing_y: f64,
    /// Elevation angle in radians.
    pub elevation: f64,
}

impl RisGeometry {
    pub fn new(
        elements_x: usize,
        elements_y: usize,
        spacing_x: f64,
        spacing_y: f64,
        elevation: f64,
    ) -> Result<Self> {
        let g = RisGeometry {
            elements_x,
            elements_y,
            spacing_x,
            spacing_y,
            elevation,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn element_count(&self) -> usize {
        self.elements_x * self.elements_y
    }

    fn validate(&self) -> Result<()> {
        if self.elements_x == 0 || self.elements_y == 0 {
            return Err(Error::InvalidGeometry("RIS needs at least one element per axis".into()));
        }
        if !(self.spacing_x > 0.0 && self.spacing_y > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "RIS spacings must be positive, got ({}, {})",
                self.spacing_x, self.spacing_y
            )));
        }
        Ok(())
    }
}

/// ULA steering vector: entry m has phase (2π/λ)·d·m·sin θ, scaled by 1/√N.
pub fn ula_response(geometry: &UlaGeometry, angle: f64) -> Result<CVector> {
    geometry.validate()?;
    if !(angle.abs() <= FRAC_PI_2 + 1e-12) {
        return Err(Error::InvalidGeometry(format!(
            "ULA angle {angle} outside [-π/2, π/2]"
        )));
    }
    let n = geometry.element_count;
    let k = 2.0 * PI / geometry.wavelength() * geometry.element_spacing * angle.sin();
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CVector::from_fn(n, |m, _| {
        Complex64::from_polar(scale, k * m as f64)
    }))
}

/// RIS response vector for azimuth `azimuthal_angle` at the configured elevation.
///
/// Element (k_x, k_y) sits at index `k_x * K_Y + k_y`.
pub fn ris_response(geometry: &RisGeometry, azimuthal_angle: f64, wavelength: f64) -> Result<CVector> {
    geometry.validate()?;
    if !(wavelength > 0.0) {
        return Err(Error::InvalidGeometry(format!("wavelength must be positive, got {wavelength}")));
    }
    let s = azimuthal_angle.sin();
    let theta_x = geometry.spacing_x * geometry.elevation.cos() * s;
    let theta_y = geometry.spacing_y * geometry.elevation.sin() * s;
    let k = 2.0 * PI / wavelength;
    let count = geometry.element_count();
    let scale = 1.0 / (count as f64).sqrt();
    let mut out = CVector::zeros(count);
    for kx in 0..geometry.elements_x {
        for ky in 0..geometry.elements_y {
            let phase = k * (kx as f64 * theta_x + ky as f64 * theta_y);
            out[kx * geometry.elements_y + ky] = Complex64::from_polar(scale, phase);
        }
    }
    Ok(out)
}

/// One propagation path of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub path_index: usize,
    /// Propagation delay in seconds.
    pub delay: f64,
    /// Angle of departure (radians).
    pub aod: f64,
    /// Angle of arrival (radians).
    pub aoa: f64,
    /// Path length in meters.
    pub path_length: f64,
    pub fresnel_coeff: f64,
    pub roughness: f64,
    pub is_los: bool,
}

impl PathComponent {
    /// Line-of-sight path with delay `length / c`.
    pub fn line_of_sight(path_length: f64, aod: f64, aoa: f64) -> Self {
        PathComponent {
            path_index: 1,
            delay: path_length / SPEED_OF_LIGHT,
            aod,
            aoa,
            path_length,
            fresnel_coeff: 1.0,
            roughness: 1.0,
            is_los: true,
        }
    }
}

/// Link budget of one segment. Gains are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Atmospheric absorption in dB/km.
    pub absorption: f64,
    pub antenna_element_gain: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
}

impl LinkBudget {
    /// Endpoint gains: N·G_a for an antenna array, K for the RIS.
    pub fn for_endpoints(absorption: f64, antenna_element_gain: f64, tx: &Endpoint, rx: &Endpoint) -> Self {
        let gain = |e: &Endpoint| match e {
            Endpoint::Ula(g) => g.element_count as f64 * antenna_element_gain,
            Endpoint::Ris(g) => g.element_count() as f64,
        };
        LinkBudget {
            absorption,
            antenna_element_gain,
            tx_gain: gain(tx),
            rx_gain: gain(rx),
        }
    }
}

/// Power gain δ of a single path (free-space spreading, endpoint gains,
/// absorption with ρ in dB/km over the path length in km). NLoS paths are
/// further scaled by roughness × Fresnel coefficient.
pub fn path_gain(path: &PathComponent, budget: &LinkBudget, wavelength: f64) -> f64 {
    let spreading = (wavelength / (4.0 * PI * path.path_length)).powi(2);
    let absorption = 10f64.powf(-0.1 * budget.absorption * path.path_length / 1000.0);
    let los = spreading * budget.tx_gain * budget.rx_gain * absorption;
    if path.is_los {
        los
    } else {
        path.roughness * path.fresnel_coeff * los
    }
}

/// Which propagation segment a matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentTag {
    Direct,
    TxRis,
    RisRx,
    Composite,
}

impl fmt::Display for SegmentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SegmentTag::Direct => "direct",
            SegmentTag::TxRis => "tx-ris",
            SegmentTag::RisRx => "ris-rx",
            SegmentTag::Composite => "composite",
        };
        f.write_str(s)
    }
}

/// Array at one end of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Ula(UlaGeometry),
    Ris(RisGeometry),
}

impl Endpoint {
    pub fn element_count(&self) -> usize {
        match self {
            Endpoint::Ula(g) => g.element_count,
            Endpoint::Ris(g) => g.element_count(),
        }
    }

    pub fn response(&self, angle: f64, wavelength: f64) -> Result<CVector> {
        match self {
            Endpoint::Ula(g) => ula_response(g, angle),
            Endpoint::Ris(g) => ris_response(g, angle, wavelength),
        }
    }

    fn is_ris(&self) -> bool {
        matches!(self, Endpoint::Ris(_))
    }
}

/// Complex gain matrix of a segment or of the composite link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
    pub segment_tag: SegmentTag,
}

impl ChannelMatrix {
    pub fn new(entries: CMatrix, segment_tag: SegmentTag) -> Self {
        ChannelMatrix { entries, segment_tag }
    }

    pub fn zeros(rows: usize, cols: usize, segment_tag: SegmentTag) -> Self {
        ChannelMatrix::new(CMatrix::zeros(rows, cols), segment_tag)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        linalg::singular_values(&self.entries)
    }

    pub fn largest_singular_value(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    pub fn check_passive(&self) -> Result<()> {
        let s = self.largest_singular_value()?;
        if s > 1.0 + PASSIVITY_TOLERANCE || !s.is_finite() {
            return Err(Error::Passivity {
                segment: self.segment_tag.to_string(),
                singular_value: s,
            });
        }
        Ok(())
    }
}

/// RIS phase shifts, one per element, each in [−π, π].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisPhaseConfig {
    pub phases: Vec<f64>,
}

impl RisPhaseConfig {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(p) = phases.iter().find(|p| !(p.abs() <= PI)) {
            return Err(Error::Contract(format!("RIS phase {p} outside [-π, π]")));
        }
        Ok(RisPhaseConfig { phases })
    }

    pub fn zeros(k: usize) -> Self {
        RisPhaseConfig { phases: vec![0.0; k] }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn diagonal(&self) -> CMatrix {
        linalg::diag_phases(&self.phases)
    }
}

/// Sum over paths of √δ·e^{j2πf_cτ}·a_rx(θ_A)·a_tx(θ_D)†.
pub fn build_segment(
    paths: &[PathComponent],
    tx: &Endpoint,
    rx: &Endpoint,
    budget: &LinkBudget,
    carrier_frequency: f64,
    segment_tag: SegmentTag,
) -> Result<ChannelMatrix> {
    if paths.is_empty() {
        return Err(Error::InvalidGeometry(format!("{segment_tag} segment has no paths")));
    }
    let expected = match segment_tag {
        SegmentTag::Direct => Some((false, false)),
        SegmentTag::TxRis => Some((false, true)),
        SegmentTag::RisRx => Some((true, false)),
        SegmentTag::Composite => None,
    };
    if let Some((tx_ris, rx_ris)) = expected {
        if tx.is_ris() != tx_ris || rx.is_ris() != rx_ris {
            return Err(Error::InvalidGeometry(format!(
                "{segment_tag} segment has the wrong endpoint kinds"
            )));
        }
    }
    let lambda = wavelength(carrier_frequency);
    let mut h = CMatrix::zeros(rx.element_count(), tx.element_count());
    for path in paths {
        if !(path.path_length > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "path length must be positive, got {}",
                path.path_length
            )));
        }
        let delta = path_gain(path, budget, lambda);
        let coeff = Complex64::from_polar(delta.sqrt(), 2.0 * PI * carrier_frequency * path.delay);
        let a_rx = rx.response(path.aoa, lambda)?;
        let a_tx = tx.response(path.aod, lambda)?;
        h += (a_rx * a_tx.adjoint()) * coeff;
    }
    let out = ChannelMatrix::new(h, segment_tag);
    out.check_passive()?;
    Ok(out)
}

/// H = H_d + H_r·diag(e^{jφ})·H_t.
pub fn compose_effective(
    direct: &ChannelMatrix,
    tx_ris: &ChannelMatrix,
    ris_rx: &ChannelMatrix,
    phases: &RisPhaseConfig,
) -> Result<ChannelMatrix> {
    check_chain(direct, tx_ris, ris_rx, phases)?;
    let cascade = scaled_cascade(tx_ris, ris_rx, phases);
    Ok(ChannelMatrix::new(&direct.entries + cascade, SegmentTag::Composite))
}

/// H_r·Φ·H_t, using the diagonal structure of Φ.
pub fn scaled_cascade(tx_ris: &ChannelMatrix, ris_rx: &ChannelMatrix, phases: &RisPhaseConfig) -> CMatrix {
    let mut rotated = tx_ris.entries.clone();
    for (k, &phi) in phases.phases.iter().enumerate() {
        let w = Complex64::from_polar(1.0, phi);
        for z in rotated.row_mut(k).iter_mut() {
            *z *= w;
        }
    }
    &ris_rx.entries * rotated
}

/// The three segments of one RIS-assisted link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannels {
    pub direct: ChannelMatrix,
    pub tx_ris: ChannelMatrix,
    pub ris_rx: ChannelMatrix,
}

impl LinkChannels {
    pub fn new(direct: ChannelMatrix, tx_ris: ChannelMatrix, ris_rx: ChannelMatrix) -> Result<Self> {
        let link = LinkChannels { direct, tx_ris, ris_rx };
        check_chain(
            &link.direct,
            &link.tx_ris,
            &link.ris_rx,
            &RisPhaseConfig::zeros(link.ris_elements()),
        )?;
        Ok(link)
    }

    pub fn tx_antennas(&self) -> usize {
        self.direct.cols()
    }

    pub fn rx_antennas(&self) -> usize {
        self.direct.rows()
    }

    pub fn ris_elements(&self) -> usize {
        self.tx_ris.rows()
    }

    pub fn compose(&self, phases: &RisPhaseConfig) -> Result<ChannelMatrix> {
        compose_effective(&self.direct, &self.tx_ris, &self.ris_rx, phases)
    }
}

pub(crate) fn check_chain(
    direct: &ChannelMatrix,
    tx_ris: &ChannelMatrix,
    ris_rx: &ChannelMatrix,
    phases: &RisPhaseConfig,
) -> Result<()> {
    let (nr, nt) = direct.entries.shape();
    let k = phases.len();
    if tx_ris.entries.shape() != (k, nt) || ris_rx.entries.shape() != (nr, k) {
        return Err(Error::InvalidGeometry(format!(
            "dimension chain mismatch: H_d {}x{}, H_t {}x{}, H_r {}x{}, K = {}",
            nr,
            nt,
            tx_ris.rows(),
            tx_ris.cols(),
            ris_rx.rows(),
            ris_rx.cols(),
            k
        )));
    }
    Ok(())
}
