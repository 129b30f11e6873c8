//! Key rate when Eve taps a single propagation segment.
//!
//! Every covariance block comes from one explicit passive network acting on
//! the input modes `[a (N_T), v0 (N_T), e_d (N_R), e_t (K), e_r (N_R)]`:
//!
//! ```text
//! x_d = √η_a V a + √(1−η_a) v0        x_r = −√(1−η_a) V a + √η_a v0
//! y_d = H_d x_d + N_d e_d              f_d = −S̃_d V_d† x_d + D̃_d e_d
//! y_t = H_t x_r + N_t e_t              f_t = −S̃_t V_t† x_r + D̃_t e_t
//! y_r = H_r Φ y_t + N_r e_r            f_r = −S̃_r V_r† Φ y_t + D̃_r e_r
//! b   = U† (√η_b y_d + √(1−η_b) y_r)   (leading N = min(N_T, N_R, K) rows)
//! ```
//!
//! `U`, `V` are the singular vectors of the composite channel at the current
//! phases. Eve holds `f_j` plus the idlers `q_j` of the two-mode squeezed
//! states whose other halves are injected as `e_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkChannels, RisPhaseConfig};
use crate::error::{Error, Result};
use crate::gaussian::{
    self, dilate, embed_complex, embed_hermitian, ChannelDilation, QuadratureCovariance,
};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::noise::NoiseVariances;
use crate::skr::{Scenario, Segment, SkrBreakdown};

/// Holevo values this far below zero are rounding, not physics.
pub const HOLEVO_TOLERANCE: f64 = 1e-9;

/// Transmissivities of Alice's and Bob's beam splitters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitterSettings {
    pub eta_a: f64,
    pub eta_b: f64,
}

impl SplitterSettings {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for (name, v) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Contract(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(SplitterSettings { eta_a, eta_b })
    }

    pub fn balanced() -> Self {
        SplitterSettings { eta_a: 0.5, eta_b: 0.5 }
    }

    /// Everything on the direct path.
    pub fn direct_only() -> Self {
        SplitterSettings { eta_a: 1.0, eta_b: 1.0 }
    }
}

/// Dilations of the three segments; independent of the RIS phases.
#[derive(Debug, Clone)]
pub struct LinkDilations {
    pub direct: ChannelDilation,
    pub tx_ris: ChannelDilation,
    pub ris_rx: ChannelDilation,
}

impl LinkDilations {
    pub fn new(channels: &LinkChannels) -> Result<Self> {
        Ok(LinkDilations {
            direct: dilate(&channels.direct)?,
            tx_ris: dilate(&channels.tx_ris)?,
            ris_rx: dilate(&channels.ris_rx)?,
        })
    }

    pub fn get(&self, segment: Segment) -> &ChannelDilation {
        match segment {
            Segment::Direct => &self.direct,
            Segment::TxRis => &self.tx_ris,
            Segment::RisRx => &self.ris_rx,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    nt: usize,
    nr: usize,
    k: usize,
}

impl Layout {
    fn total(&self) -> usize {
        2 * self.nt + 2 * self.nr + self.k
    }

    /// (offset, width) of the environment modes injected into `segment`.
    fn env(&self, segment: Segment) -> (usize, usize) {
        match segment {
            Segment::Direct => (2 * self.nt, self.nr),
            Segment::TxRis => (2 * self.nt + self.nr, self.k),
            Segment::RisRx => (2 * self.nt + self.nr + self.k, self.nr),
        }
    }
}

/// Linear maps from the input modes to Bob's combiner outputs and to each
/// segment's environment output.
#[derive(Debug, Clone)]
pub struct LinkNetwork {
    layout: Layout,
    bob: CMatrix,
    eve: [CMatrix; 3],
}

fn seg_index(segment: Segment) -> usize {
    match segment {
        Segment::Direct => 0,
        Segment::TxRis => 1,
        Segment::RisRx => 2,
    }
}

fn scale(m: &CMatrix, s: f64) -> CMatrix {
    m * Complex64::new(s, 0.0)
}

impl LinkNetwork {
    pub fn new(
        channels: &LinkChannels,
        dilations: &LinkDilations,
        phases: &RisPhaseConfig,
        splitters: SplitterSettings,
    ) -> Result<Self> {
        let composite = channels.compose(phases)?;
        let svd = linalg::full_svd(&composite.entries)?;
        let layout = Layout {
            nt: channels.tx_antennas(),
            nr: channels.rx_antennas(),
            k: channels.ris_elements(),
        };
        let Layout { nt, nr, k } = layout;
        let total = layout.total();
        let (ea, eb) = (splitters.eta_a, splitters.eta_b);
        let select = |offset: usize, width: usize| {
            let mut m = CMatrix::zeros(width, total);
            for i in 0..width {
                m[(i, offset + i)] = Complex64::new(1.0, 0.0);
            }
            m
        };

        let mut x_d = CMatrix::zeros(nt, total);
        x_d.columns_mut(0, nt).copy_from(&scale(&svd.right, ea.sqrt()));
        x_d.columns_mut(nt, nt).copy_from(&scale(&CMatrix::identity(nt, nt), (1.0 - ea).sqrt()));
        let mut x_r = CMatrix::zeros(nt, total);
        x_r.columns_mut(0, nt).copy_from(&scale(&svd.right, -(1.0 - ea).sqrt()));
        x_r.columns_mut(nt, nt).copy_from(&scale(&CMatrix::identity(nt, nt), ea.sqrt()));

        let (off_d, w_d) = layout.env(Segment::Direct);
        let (off_t, w_t) = layout.env(Segment::TxRis);
        let (off_r, w_r) = layout.env(Segment::RisRx);
        let e_d = select(off_d, w_d);
        let e_t = select(off_t, w_t);
        let e_r = select(off_r, w_r);

        let (dd, dt, dr) = (&dilations.direct, &dilations.tx_ris, &dilations.ris_rx);
        let y_d = &channels.direct.entries * &x_d + &dd.coupling * &e_d;
        let f_d = dd.leak_map() * &x_d + dd.pass_map() * &e_d;
        let y_t = &channels.tx_ris.entries * &x_r + &dt.coupling * &e_t;
        let f_t = dt.leak_map() * &x_r + dt.pass_map() * &e_t;
        let mut z = y_t;
        for (row, &phi) in phases.phases.iter().enumerate() {
            let w = Complex64::from_polar(1.0, phi);
            for v in z.row_mut(row).iter_mut() {
                *v *= w;
            }
        }
        let y_r = &channels.ris_rx.entries * &z + &dr.coupling * &e_r;
        let f_r = dr.leak_map() * &z + dr.pass_map() * &e_r;

        let n = nt.min(nr).min(k);
        let combined = scale(&y_d, eb.sqrt()) + scale(&y_r, (1.0 - eb).sqrt());
        let u_dag = svd.left.adjoint();
        let bob = u_dag.rows(0, n) * combined;
        Ok(LinkNetwork {
            layout,
            bob,
            eve: [f_d, f_t, f_r],
        })
    }

    /// Number of combiner outputs Bob measures.
    pub fn bob_modes(&self) -> usize {
        self.bob.nrows()
    }

    /// Map from input modes to Bob's outputs.
    pub fn bob_map(&self) -> &CMatrix {
        &self.bob
    }

    /// Map from input modes to the environment output of `segment`.
    pub fn eve_map(&self, segment: Segment) -> &CMatrix {
        &self.eve[seg_index(segment)]
    }

    /// (environment output modes, idler modes) Eve holds on `segment`.
    pub fn eve_modes(&self, segment: Segment) -> (usize, usize) {
        (self.eve_map(segment).nrows(), self.layout.env(segment).1)
    }

    fn weights(&self, noise: &NoiseVariances, input_variance: f64) -> Vec<f64> {
        let Layout { nt, nr, k } = self.layout;
        let e = noise.eve_segment_variance;
        let mut w = Vec::with_capacity(self.layout.total());
        w.extend(std::iter::repeat_n(input_variance, nt));
        w.extend(std::iter::repeat_n(noise.splitter_vacuum, nt));
        w.extend(std::iter::repeat_n(e.direct, nr));
        w.extend(std::iter::repeat_n(e.tx_ris, k));
        w.extend(std::iter::repeat_n(e.ris_rx, nr));
        w
    }

    /// Σ_b and Σ_{b|a} (the latter with Alice's input at V_0).
    pub fn bob_covariances(&self, noise: &NoiseVariances) -> (QuadratureCovariance, QuadratureCovariance) {
        let n = self.bob_modes();
        let cov = |v: f64| {
            let w = self.weights(noise, v);
            let m = embed_hermitian(&weighted_gram(&self.bob, &w, &self.bob))
                + RMatrix::identity(2 * n, 2 * n) * noise.detector_noise;
            QuadratureCovariance::symmetrized(m)
        };
        (cov(noise.alice_variance()), cov(noise.vacuum_variance))
    }

    /// Joint covariance of `[f_j, q_j, b]`.
    pub fn eve_bob_joint(&self, segment: Segment, noise: &NoiseVariances) -> QuadratureCovariance {
        let f = self.eve_map(segment);
        let (nf, nq) = self.eve_modes(segment);
        let nb = self.bob_modes();
        let v_e = segment_variance(noise, segment);
        let c = (v_e * v_e - 1.0).max(0.0).sqrt();
        let (off, _) = self.layout.env(segment);

        let mut out = CMatrix::zeros(nf + nb, self.layout.total());
        out.rows_mut(0, nf).copy_from(f);
        out.rows_mut(nf, nb).copy_from(&self.bob);
        let w = self.weights(noise, noise.alice_variance());
        let outer = embed_hermitian(&weighted_gram(&out, &w, &out));

        let dim = 2 * (nf + nq + nb);
        let mut m = RMatrix::zeros(dim, dim);
        let (pf, pq, pb) = (0, 2 * nf, 2 * (nf + nq));
        m.view_mut((pf, pf), (2 * nf, 2 * nf)).copy_from(&outer.view((0, 0), (2 * nf, 2 * nf)));
        m.view_mut((pf, pb), (2 * nf, 2 * nb)).copy_from(&outer.view((0, 2 * nf), (2 * nf, 2 * nb)));
        m.view_mut((pb, pf), (2 * nb, 2 * nf)).copy_from(&outer.view((2 * nf, 0), (2 * nb, 2 * nf)));
        m.view_mut((pb, pb), (2 * nb, 2 * nb)).copy_from(&outer.view((2 * nf, 2 * nf), (2 * nb, 2 * nb)));
        for i in 0..2 * nb {
            m[(pb + i, pb + i)] += noise.detector_noise;
        }
        for i in 0..2 * nq {
            m[(pq + i, pq + i)] = v_e;
        }
        if c > 0.0 {
            // idler correlations: c · embed(out[:, e_j]) · (I ⊗ Z)
            let mut corr = embed_complex(&out.columns(off, nq).into_owned());
            for j in 0..nq {
                for v in corr.column_mut(2 * j + 1).iter_mut() {
                    *v = -*v;
                }
            }
            corr *= c;
            m.view_mut((pf, pq), (2 * nf, 2 * nq)).copy_from(&corr.rows(0, 2 * nf));
            m.view_mut((pb, pq), (2 * nb, 2 * nq)).copy_from(&corr.rows(2 * nf, 2 * nb));
            let t = corr.transpose();
            m.view_mut((pq, pf), (2 * nq, 2 * nf)).copy_from(&t.columns(0, 2 * nf));
            m.view_mut((pq, pb), (2 * nq, 2 * nb)).copy_from(&t.columns(2 * nf, 2 * nb));
        }
        QuadratureCovariance::symmetrized(m)
    }

    pub fn holevo_terms(&self, segment: Segment, noise: &NoiseVariances) -> Result<HolevoTerms> {
        let joint = self.eve_bob_joint(segment, noise);
        let (nf, nq) = self.eve_modes(segment);
        let eve: Vec<usize> = (0..nf + nq).collect();
        let bob: Vec<usize> = (nf + nq..nf + nq + self.bob_modes()).collect();
        let marginal = joint.marginal(&eve)?;
        let conditional = gaussian::homodyne_condition(&joint, &eve, &bob)?;
        Ok(HolevoTerms {
            entropy: gaussian::von_neumann_entropy(&marginal)?,
            conditional_entropy: gaussian::von_neumann_entropy(&conditional)?,
        })
    }

    pub fn mutual_information(&self, noise: &NoiseVariances) -> Result<f64> {
        let (sigma_b, sigma_ba) = self.bob_covariances(noise);
        mutual_information_ab(&sigma_b, &sigma_ba)
    }

    pub fn skr(&self, segment: Segment, noise: &NoiseVariances) -> Result<SkrBreakdown> {
        let mi = self.mutual_information(noise)?;
        let chi = self.holevo_terms(segment, noise)?.holevo()?;
        Ok(SkrBreakdown::new(Scenario::Local(segment), mi, chi))
    }
}

fn segment_variance(noise: &NoiseVariances, segment: Segment) -> f64 {
    let e = noise.eve_segment_variance;
    match segment {
        Segment::Direct => e.direct,
        Segment::TxRis => e.tx_ris,
        Segment::RisRx => e.ris_rx,
    }
}

/// A · diag(w) · B†.
fn weighted_gram(a: &CMatrix, w: &[f64], b: &CMatrix) -> CMatrix {
    let mut aw = a.clone();
    for (j, &wj) in w.iter().enumerate() {
        for z in aw.column_mut(j).iter_mut() {
            *z *= wj;
        }
    }
    aw * b.adjoint()
}

/// Eve's entropy before and after Bob's homodyne outcomes are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoTerms {
    pub entropy: f64,
    pub conditional_entropy: f64,
}

impl HolevoTerms {
    pub fn raw(&self) -> f64 {
        self.entropy - self.conditional_entropy
    }

    /// χ with rounding-level negatives mapped to zero.
    pub fn holevo(&self) -> Result<f64> {
        let chi = self.raw();
        if chi < -HOLEVO_TOLERANCE {
            return Err(Error::Contract(format!("negative Holevo information {chi:.3e}")));
        }
        Ok(chi.max(0.0))
    }
}

pub fn bob_covariances(
    channels: &LinkChannels,
    dilations: &LinkDilations,
    phases: &RisPhaseConfig,
    splitters: SplitterSettings,
    noise: &NoiseVariances,
) -> Result<(QuadratureCovariance, QuadratureCovariance)> {
    Ok(LinkNetwork::new(channels, dilations, phases, splitters)?.bob_covariances(noise))
}

/// Mutual information of Bob's x-homodyne outcomes with Alice's data:
/// ½·log2(det Σ_b^x / det Σ_{b|a}^x).
pub fn mutual_information_ab(sigma_b: &QuadratureCovariance, sigma_b_given_a: &QuadratureCovariance) -> Result<f64> {
    if sigma_b.mode_count() != sigma_b_given_a.mode_count() {
        return Err(Error::Contract("Bob covariances differ in mode count".into()));
    }
    let singular = || Error::Contract("singular Bob covariance".into());
    let num = linalg::log_det_spd(&sigma_b.x_block()).ok_or_else(singular)?;
    let den = linalg::log_det_spd(&sigma_b_given_a.x_block()).ok_or_else(singular)?;
    Ok(0.5 * (num - den) / std::f64::consts::LN_2)
}

/// Σ_{E_j}: covariance of the environment output and idlers of `segment`.
pub fn eve_output_covariance(
    segment: Segment,
    channels: &LinkChannels,
    dilations: &LinkDilations,
    phases: &RisPhaseConfig,
    splitters: SplitterSettings,
    noise: &NoiseVariances,
) -> Result<QuadratureCovariance> {
    let net = LinkNetwork::new(channels, dilations, phases, splitters)?;
    let (nf, nq) = net.eve_modes(segment);
    net.eve_bob_joint(segment, noise).marginal(&(0..nf + nq).collect::<Vec<_>>())
}

/// Σ_{E_j B}: rows are Eve's quadratures, columns Bob's.
pub fn eve_bob_cross(
    segment: Segment,
    channels: &LinkChannels,
    dilations: &LinkDilations,
    phases: &RisPhaseConfig,
    splitters: SplitterSettings,
    noise: &NoiseVariances,
) -> Result<RMatrix> {
    let net = LinkNetwork::new(channels, dilations, phases, splitters)?;
    let (nf, nq) = net.eve_modes(segment);
    let e = 2 * (nf + nq);
    let b = 2 * net.bob_modes();
    Ok(net.eve_bob_joint(segment, noise).matrix().view((0, e), (e, b)).into_owned())
}

pub fn holevo_localized(
    segment: Segment,
    channels: &LinkChannels,
    dilations: &LinkDilations,
    phases: &RisPhaseConfig,
    splitters: SplitterSettings,
    noise: &NoiseVariances,
) -> Result<f64> {
    LinkNetwork::new(channels, dilations, phases, splitters)?
        .holevo_terms(segment, noise)?
        .holevo()
}

pub fn skr_localized(
    segment: Segment,
    channels: &LinkChannels,
    dilations: &LinkDilations,
    phases: &RisPhaseConfig,
    splitters: SplitterSettings,
    noise: &NoiseVariances,
) -> Result<SkrBreakdown> {
    LinkNetwork::new(channels, dilations, phases, splitters)?.skr(segment, noise)
}
