//! Key rate when Eve purifies the whole composite channel.
//!
//! The channel is split into parallel single-mode subchannels with
//! transmissivities β_i. On each, Eve runs an entangling cloner: her
//! environment output `e_o` and idler `q` have a two-mode covariance with
//! closed-form symplectic spectra, before and after Bob's x-homodyne.

use serde::{Deserialize, Serialize};

use crate::channel::{scaled_cascade, ChannelMatrix, LinkChannels, RisPhaseConfig, SegmentTag};
use crate::error::{Error, Result};
use crate::gaussian::{ho_entropy, QuadratureCovariance, EIGENVALUE_TOLERANCE};
use crate::linalg::RMatrix;
use crate::localized::SplitterSettings;
use crate::noise::NoiseVariances;
use crate::skr::{Scenario, SkrBreakdown, SubchannelSkr};

/// Subchannels with smaller transmissivity carry nothing and are dropped.
pub const MIN_TRANSMISSIVITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelChannel {
    pub index: usize,
    pub transmissivity: f64,
    /// Number of retained subchannels.
    pub count: usize,
}

/// Squared singular values of a passive channel, descending.
pub fn parallelize(channel: &ChannelMatrix) -> Result<Vec<ParallelChannel>> {
    channel.check_passive()?;
    let betas: Vec<f64> = channel
        .singular_values()?
        .into_iter()
        .map(|s| (s * s).min(1.0))
        .filter(|b| *b >= MIN_TRANSMISSIVITY)
        .collect();
    let count = betas.len();
    Ok(betas
        .into_iter()
        .enumerate()
        .map(|(index, transmissivity)| ParallelChannel {
            index,
            transmissivity,
            count,
        })
        .collect())
}

/// Signal transfer from Alice's modulation to Bob's combiner input once the
/// splitters are folded in: `√(η_aη_b) H_d − √((1−η_a)(1−η_b)) H_r Φ H_t`.
pub fn global_effective_channel(
    channels: &LinkChannels,
    phases: &RisPhaseConfig,
    splitters: SplitterSettings,
) -> Result<ChannelMatrix> {
    crate::channel::check_chain(&channels.direct, &channels.tx_ris, &channels.ris_rx, phases)?;
    let direct = (splitters.eta_a * splitters.eta_b).sqrt();
    let cascade = ((1.0 - splitters.eta_a) * (1.0 - splitters.eta_b)).sqrt();
    let mut h = &channels.direct.entries * num_complex::Complex64::new(direct, 0.0);
    if cascade > 0.0 {
        h -= scaled_cascade(&channels.tx_ris, &channels.ris_rx, phases) * num_complex::Complex64::new(cascade, 0.0);
    }
    Ok(ChannelMatrix::new(h, SegmentTag::Composite))
}

/// ½·log2(1 + βV_s / (βV_0 + (1−β)V_e + σ²)).
pub fn mutual_information_i(beta: f64, noise: &NoiseVariances) -> f64 {
    let v_e = noise.eve_global_variance;
    let denom = beta * noise.vacuum_variance + (1.0 - beta) * v_e + noise.detector_noise;
    0.5 * (beta * noise.signal_variance / denom).ln_1p() / std::f64::consts::LN_2
}

/// Intermediate scalars of Eve's two-mode state on one subchannel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveTwoModeDiagnostics {
    pub v_eo: f64,
    pub cross: f64,
    pub delta: f64,
    pub det_e: f64,
    pub bob_variance: f64,
    pub delta_cond: f64,
    pub det_cond: f64,
    pub lambda_aux: f64,
    pub xi: f64,
}

impl EveTwoModeDiagnostics {
    pub fn new(beta: f64, noise: &NoiseVariances) -> Self {
        let v_a = noise.alice_variance();
        let v_e = noise.eve_global_variance;
        let s2 = noise.detector_noise;
        let g = v_e * v_e - 1.0;
        let v_eo = (1.0 - beta) * v_a + beta * v_e;
        let delta = v_eo * v_eo + v_e * v_e - 2.0 * beta * g;
        let det_e = (v_eo * v_e - beta * g).powi(2);
        let v_b = beta * v_a + (1.0 - beta) * v_e + s2;
        let lambda_aux = (1.0 - beta) * v_a * v_e + beta;
        let xi = ((1.0 - beta) + beta * v_a * v_e) * v_eo + v_a * v_e * v_e - 2.0 * v_a * beta * g;
        let delta_cond = ((1.0 - beta) * v_e * (v_a * v_a + 1.0) + 2.0 * beta * v_a + s2 * delta) / v_b;
        let det_cond = lambda_aux * (v_a * (beta * v_a + (1.0 - beta) * v_e) + s2 * xi + s2 * s2 * lambda_aux)
            / (v_b * v_b);
        EveTwoModeDiagnostics {
            v_eo,
            cross: (beta * g.max(0.0)).sqrt(),
            delta,
            det_e,
            bob_variance: v_b,
            delta_cond,
            det_cond,
            lambda_aux,
            xi,
        }
    }
}

/// Symplectic eigenvalues of a two-mode state from its invariants ∇ and det.
fn two_mode_spectrum(delta: f64, det: f64) -> Result<(f64, f64)> {
    let disc = delta * delta - 4.0 * det;
    if disc < -EIGENVALUE_TOLERANCE * delta * delta.max(1.0) || !disc.is_finite() {
        return Err(Error::Contract(format!(
            "negative discriminant {disc:.3e} in two-mode spectrum"
        )));
    }
    let large = (0.5 * (delta + disc.max(0.0).sqrt())).sqrt();
    let small = det.max(0.0).sqrt() / large;
    for v in [large, small] {
        if v < 1.0 - EIGENVALUE_TOLERANCE {
            return Err(Error::UnphysicalEigenvalue(v));
        }
    }
    Ok((large, small))
}

/// Spectrum of Eve's (e_o, q) state.
pub fn eve_spectrum_unconditional(beta: f64, noise: &NoiseVariances) -> Result<(f64, f64)> {
    let d = EveTwoModeDiagnostics::new(beta, noise);
    two_mode_spectrum(d.delta, d.det_e)
}

/// Spectrum of Eve's state conditioned on Bob's x-homodyne outcome.
pub fn eve_spectrum_conditional(beta: f64, noise: &NoiseVariances) -> Result<(f64, f64)> {
    let d = EveTwoModeDiagnostics::new(beta, noise);
    two_mode_spectrum(d.delta_cond, d.det_cond)
}

/// Explicit covariance of `(e_o, q, b)` on one subchannel.
pub fn subchannel_joint_covariance(beta: f64, noise: &NoiseVariances) -> QuadratureCovariance {
    let v_a = noise.alice_variance();
    let v_e = noise.eve_global_variance;
    let c = (v_e * v_e - 1.0).max(0.0).sqrt();
    let t = beta.sqrt();
    let r = (1.0 - beta).sqrt();
    let d = EveTwoModeDiagnostics::new(beta, noise);
    let eo_b = t * r * (v_e - v_a);
    let blocks = [
        [d.v_eo, t * c, eo_b],
        [t * c, v_e, r * c],
        [eo_b, r * c, d.bob_variance],
    ];
    let mut m = RMatrix::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            let v = blocks[i][j];
            // e_o–q and q–b carry the idler's Z pattern
            let flip = (i == 1) != (j == 1);
            m[(2 * i, 2 * j)] = v;
            m[(2 * i + 1, 2 * j + 1)] = if flip { -v } else { v };
        }
    }
    QuadratureCovariance::symmetrized(m)
}

pub fn subchannel_skr(index: usize, beta: f64, noise: &NoiseVariances) -> Result<SubchannelSkr> {
    let mi = mutual_information_i(beta, noise);
    let (l1, l2) = eve_spectrum_unconditional(beta, noise)?;
    let (l3, l4) = eve_spectrum_conditional(beta, noise)?;
    let raw = ho_entropy(l1)? + ho_entropy(l2)? - ho_entropy(l3)? - ho_entropy(l4)?;
    if raw < -crate::localized::HOLEVO_TOLERANCE {
        return Err(Error::Contract(format!("negative subchannel Holevo information {raw:.3e}")));
    }
    let holevo = raw.max(0.0);
    Ok(SubchannelSkr {
        index,
        transmissivity: beta,
        mutual_information: mi,
        holevo,
        skr: mi - holevo,
    })
}

/// Sum of per-subchannel rates over the parallel decomposition of `channel`.
pub fn skr_global(channel: &ChannelMatrix, noise: &NoiseVariances) -> Result<SkrBreakdown> {
    let subs = parallelize(channel)?
        .into_iter()
        .map(|p| subchannel_skr(p.index, p.transmissivity, noise))
        .collect::<Result<Vec<_>>>()?;
    let mi: f64 = subs.iter().map(|s| s.mutual_information).sum();
    let chi: f64 = subs.iter().map(|s| s.holevo).sum();
    let mut out = SkrBreakdown::new(Scenario::Global, mi, chi);
    out.skr = subs.iter().map(|s| s.skr).sum();
    out.subchannels = subs;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{homodyne_condition, symplectic_eigenvalues};
    use crate::linalg::CMatrix;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn noise(v_e: f64, s2: f64) -> NoiseVariances {
        let mut n = NoiseVariances::reference().with_detector_noise(s2);
        n.eve_global_variance = v_e;
        n
    }

    #[test]
    fn parallelize_examples() {
        let id = ChannelMatrix::new(CMatrix::identity(2, 2), SegmentTag::Composite);
        let p = parallelize(&id).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|c| (c.transmissivity - 1.0).abs() < 1e-15 && c.count == 2));
        let u = CMatrix::from_fn(3, 1, |i, _| Complex64::new(0.1 * (i + 1) as f64, 0.0));
        let v = CMatrix::from_fn(2, 1, |i, _| Complex64::new(0.0, 0.2 * (i + 1) as f64));
        let rank1 = ChannelMatrix::new(&u * v.adjoint(), SegmentTag::Composite);
        assert_eq!(parallelize(&rank1).unwrap().len(), 1);
    }

    #[test]
    fn mutual_information_limits() {
        let n = NoiseVariances::reference();
        assert_eq!(mutual_information_i(0.0, &n), 0.0);
        let clean = n.with_detector_noise(0.0);
        let expect = 0.5 * (1.0 + n.signal_variance / n.vacuum_variance).log2();
        assert_relative_eq!(mutual_information_i(1.0, &clean), expect, epsilon = 1e-12);
        assert_relative_eq!(mutual_information_i(0.5, &n), 4.411_602_808_056_073, epsilon = 1e-12);
    }

    #[test]
    fn unconditional_spectrum_limits() {
        let n = noise(3.0, 0.01);
        let (a, b) = eve_spectrum_unconditional(1.0, &n).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-9);
        assert_relative_eq!(b, 1.0, epsilon = 1e-9);
        let (a, b) = eve_spectrum_unconditional(0.0, &n).unwrap();
        assert_relative_eq!(a, n.alice_variance(), max_relative = 1e-12);
        assert_relative_eq!(b, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn conditional_spectrum_limits() {
        let n = noise(1.0, 0.0);
        let (a, b) = eve_spectrum_conditional(0.0, &n).unwrap();
        assert_relative_eq!(a, n.alice_variance(), max_relative = 1e-12);
        assert_relative_eq!(b, 1.0, max_relative = 1e-12);
        let (a, b) = eve_spectrum_conditional(1.0, &n).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-9);
        assert_relative_eq!(b, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn closed_forms_match_explicit_state() {
        for &(beta, v_e, s2) in &[(0.3, 1.0, 0.01), (0.7, 4.0, 0.5), (0.05, 20.0, 2.0)] {
            let n = noise(v_e, s2);
            let joint = subchannel_joint_covariance(beta, &n);
            let e = joint.marginal(&[0, 1]).unwrap();
            let s = symplectic_eigenvalues(&e).unwrap().eigenvalues;
            let (l1, l2) = eve_spectrum_unconditional(beta, &n).unwrap();
            assert_relative_eq!(s[0], l1, max_relative = 1e-9);
            assert_relative_eq!(s[1], l2, max_relative = 1e-9);
            let c = homodyne_condition(&joint, &[0, 1], &[2]).unwrap();
            let s = symplectic_eigenvalues(&c).unwrap().eigenvalues;
            let (l3, l4) = eve_spectrum_conditional(beta, &n).unwrap();
            assert_relative_eq!(s[0], l3, max_relative = 1e-9);
            assert_relative_eq!(s[1], l4, max_relative = 1e-9);
        }
    }

    #[test]
    fn perfect_channels_have_no_holevo() {
        let n = noise(1.0, 0.0);
        let h = ChannelMatrix::new(CMatrix::identity(3, 3), SegmentTag::Composite);
        let b = skr_global(&h, &n).unwrap();
        let expect = 1.5 * (1.0 + n.signal_variance / n.vacuum_variance).log2();
        assert_relative_eq!(b.skr, expect, epsilon = 1e-9);
        assert!(b.holevo.abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_channel_drops_subchannels() {
        let mut h = CMatrix::zeros(3, 3);
        h[(0, 0)] = Complex64::new(0.5, 0.0);
        let b = skr_global(&ChannelMatrix::new(h, SegmentTag::Composite), &NoiseVariances::reference()).unwrap();
        assert_eq!(b.subchannels.len(), 1);
        let single = subchannel_skr(0, 0.25, &NoiseVariances::reference()).unwrap();
        assert_relative_eq!(b.skr, single.skr, epsilon = 1e-15);
    }
}
