//! Independent oracles: closed constants, a hand-built scalar beam-splitter
//! network and an exhaustive grid over a one-element RIS.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ris_cvqkd::channel::{path_gain, LinkBudget, PathComponent};
use ris_cvqkd::gaussian::ho_entropy;
use ris_cvqkd::global::mutual_information_i;
use ris_cvqkd::noise::{thermal_occupation, SegmentVariances};
use ris_cvqkd::objective::evaluate;
use ris_cvqkd::{
    ChannelMatrix, LinkChannels, LinkState, NoiseVariances, OperatingPoint, RisPhaseConfig, Scenario, Segment,
    SegmentTag, SkrObjective, SplitterSettings, SwarmConfig,
};

#[test]
fn thermal_vacuum_at_fifteen_terahertz() {
    let n = thermal_occupation(15e12, 296.0);
    assert!((n - 0.096_318_897_503_979_54).abs() < 1e-15);
    let v0 = NoiseVariances::reference().vacuum_variance;
    assert!((v0 - 1.192_637_795_007_959_1).abs() < 1e-14);
}

#[test]
fn entropy_of_nu_two() {
    assert!((ho_entropy(2.0).unwrap() - 1.377_443_751_081_734_3).abs() < 1e-14);
}

#[test]
fn global_mutual_information_at_half_transmissivity() {
    let mi = mutual_information_i(0.5, &NoiseVariances::reference());
    assert!((mi - 4.411_602_808_056_073).abs() < 1e-12);
}

#[test]
fn ten_metre_path_gain() {
    let budget = LinkBudget {
        absorption: 50.0,
        antenna_element_gain: 1000.0,
        tx_gain: 1000.0,
        rx_gain: 1000.0,
    };
    let path = PathComponent::line_of_sight(10.0, 0.0, 0.0);
    let g = path_gain(&path, &budget, 299_792_458.0 / 15e12);
    assert!((g / 2.254_442_482_780_033e-8 - 1.0).abs() < 1e-12);
}

/// Real 1×1×1 link: everything is a beam splitter and x, p decouple.
#[derive(Debug, Clone, Copy)]
struct ScalarLink {
    direct: f64,
    tx_ris: f64,
    ris_rx: f64,
    /// e^{jφ} with φ ∈ {0, π}.
    ris_sign: f64,
    eta_a: f64,
    eta_b: f64,
}

type Row = [f64; 5];

fn add(a: Row, b: Row) -> Row {
    std::array::from_fn(|i| a[i] + b[i])
}

fn mul(s: f64, a: Row) -> Row {
    a.map(|v| s * v)
}

fn unit(i: usize) -> Row {
    std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 })
}

fn dot(a: Row, b: Row, w: Row) -> f64 {
    (0..5).map(|i| a[i] * b[i] * w[i]).sum()
}

/// Eigenvalue-based symplectic spectrum of X ⊕ P for two modes.
fn two_mode_nus(x: [[f64; 2]; 2], p: [[f64; 2]; 2]) -> [f64; 2] {
    let m = [
        [x[0][0] * p[0][0] + x[0][1] * p[1][0], x[0][0] * p[0][1] + x[0][1] * p[1][1]],
        [x[1][0] * p[0][0] + x[1][1] * p[1][0], x[1][0] * p[0][1] + x[1][1] * p[1][1]],
    ];
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    [((tr + disc) / 2.0).sqrt(), ((tr - disc) / 2.0).max(0.0).sqrt()]
}

fn g(nu: f64) -> f64 {
    let a = (nu + 1.0) / 2.0;
    let b = (nu - 1.0) / 2.0;
    let lg = |v: f64| if v <= 0.0 { 0.0 } else { v * v.log2() };
    lg(a) - lg(b)
}

/// Mutual information and Holevo bound of the scalar link with Eve on `segment`.
fn scalar_oracle(link: ScalarLink, noise: &NoiseVariances, segment: Segment) -> (f64, f64) {
    let (ea, eb) = (link.eta_a, link.eta_b);
    let leak = |h: f64| (1.0 - h * h).sqrt();
    // inputs: a, v0, e_d, e_t, e_r
    let x_d = add(mul(ea.sqrt(), unit(0)), mul((1.0 - ea).sqrt(), unit(1)));
    let x_r = add(mul(-(1.0 - ea).sqrt(), unit(0)), mul(ea.sqrt(), unit(1)));
    let y_d = add(mul(link.direct, x_d), mul(leak(link.direct), unit(2)));
    let f_d = add(mul(-leak(link.direct), x_d), mul(link.direct, unit(2)));
    let y_t = add(mul(link.tx_ris, x_r), mul(leak(link.tx_ris), unit(3)));
    let f_t = add(mul(-leak(link.tx_ris), x_r), mul(link.tx_ris, unit(3)));
    let z = mul(link.ris_sign, y_t);
    let y_r = add(mul(link.ris_rx, z), mul(leak(link.ris_rx), unit(4)));
    let f_r = add(mul(-leak(link.ris_rx), z), mul(link.ris_rx, unit(4)));
    let composite = link.direct + link.ris_sign * link.ris_rx * link.tx_ris;
    let u = if composite < 0.0 { -1.0 } else { 1.0 };
    let b = mul(u, add(mul(eb.sqrt(), y_d), mul((1.0 - eb).sqrt(), y_r)));

    let e = noise.eve_segment_variance;
    let weights = |va: f64| [va, noise.splitter_vacuum, e.direct, e.tx_ris, e.ris_rx];
    let w = weights(noise.alice_variance());
    let s2 = noise.detector_noise;
    let var_b = dot(b, b, w) + s2;
    let var_b_given_a = dot(b, b, weights(noise.vacuum_variance)) + s2;
    let mi = 0.5 * (var_b / var_b_given_a).log2();

    let (f, slot, v_e) = match segment {
        Segment::Direct => (f_d, 2, e.direct),
        Segment::TxRis => (f_t, 3, e.tx_ris),
        Segment::RisRx => (f_r, 4, e.ris_rx),
    };
    let c = (v_e * v_e - 1.0).sqrt();
    let ff = dot(f, f, w);
    let fq = c * f[slot];
    let fb = dot(f, b, w);
    let qb = c * b[slot];
    let x = [[ff, fq], [fq, v_e]];
    let p = [[ff, -fq], [-fq, v_e]];
    let x_cond = [
        [ff - fb * fb / var_b, fq - fb * qb / var_b],
        [fq - fb * qb / var_b, v_e - qb * qb / var_b],
    ];
    let s = two_mode_nus(x, p).iter().map(|&n| g(n)).sum::<f64>();
    let s_cond = two_mode_nus(x_cond, p).iter().map(|&n| g(n)).sum::<f64>();
    (mi, s - s_cond)
}

fn scalar(h: f64, tag: SegmentTag) -> ChannelMatrix {
    ChannelMatrix::new(DMatrix::from_element(1, 1, Complex64::new(h, 0.0)), tag)
}

fn link_state(link: &ScalarLink) -> LinkState {
    LinkState::new(
        LinkChannels::new(
            scalar(link.direct, SegmentTag::Direct),
            scalar(link.tx_ris, SegmentTag::TxRis),
            scalar(link.ris_rx, SegmentTag::RisRx),
        )
        .unwrap(),
    )
    .unwrap()
}

fn random_noise(rng: &mut ChaCha8Rng) -> NoiseVariances {
    let mut n = NoiseVariances::reference();
    n.signal_variance = rng.random_range(1.0..1000.0);
    n.splitter_vacuum = rng.random_range(1.0..2.0);
    n.eve_segment_variance = SegmentVariances {
        direct: rng.random_range(1.0..3.0),
        tx_ris: rng.random_range(1.0..3.0),
        ris_rx: rng.random_range(1.0..3.0),
    };
    n.detector_noise = rng.random_range(0.0..0.2);
    n
}

#[test]
fn localized_rates_match_scalar_network() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let link = ScalarLink {
            direct: rng.random_range(0.05..0.95),
            tx_ris: rng.random_range(0.05..0.95),
            ris_rx: rng.random_range(0.05..0.95),
            ris_sign: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            eta_a: rng.random_range(0.0..=1.0),
            eta_b: rng.random_range(0.0..=1.0),
        };
        let noise = random_noise(&mut rng);
        let state = link_state(&link);
        let point = OperatingPoint {
            phases: RisPhaseConfig::new(vec![if link.ris_sign < 0.0 { PI } else { 0.0 }]).unwrap(),
            splitters: SplitterSettings::new(link.eta_a, link.eta_b).unwrap(),
        };
        for segment in Segment::ALL {
            let (mi, chi) = scalar_oracle(link, &noise, segment);
            let got = evaluate(Scenario::Local(segment), &state, &point, &noise).unwrap();
            assert!(chi > -1e-12, "case {case}: oracle χ {chi}");
            assert!(
                (got.mutual_information - mi).abs() < 1e-9,
                "case {case} {segment:?}: MI {} vs {mi}",
                got.mutual_information
            );
            assert!(
                (got.holevo - chi.max(0.0)).abs() < 1e-9,
                "case {case} {segment:?}: χ {} vs {chi}",
                got.holevo
            );
        }
    }
}

#[test]
fn swarm_matches_grid_scan_on_single_element_ris() {
    let link = ScalarLink {
        direct: 0.3,
        tx_ris: 0.6,
        ris_rx: 0.5,
        ris_sign: 1.0,
        eta_a: 0.5,
        eta_b: 0.5,
    };
    let state = link_state(&link);
    let noise = NoiseVariances::reference();
    for scenario in [Scenario::Local(Segment::Direct), Scenario::Global] {
        let objective = SkrObjective::from_state(scenario, state.clone(), noise).unwrap();
        let mut grid_best = f64::NEG_INFINITY;
        for i in 0..=72 {
            let phi = -PI + 2.0 * PI * i as f64 / 72.0;
            for j in 0..=20 {
                for k in 0..=20 {
                    let x = [phi, j as f64 / 20.0, k as f64 / 20.0];
                    grid_best = grid_best.max(objective.fitness(&x));
                }
            }
        }
        let (result, _, breakdown) = objective.optimize(&SwarmConfig::default()).unwrap();
        assert!(
            result.best_value >= grid_best - 1e-3,
            "{scenario}: swarm {} vs grid {grid_best}",
            result.best_value
        );
        assert!((breakdown.skr - result.best_value).abs() < 1e-12);
    }
}
