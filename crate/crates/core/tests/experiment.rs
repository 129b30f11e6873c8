use ris_cvqkd::experiment::config::SweepConfig;
use ris_cvqkd::experiment::output::{emit_sweep, read_sweep_csv, write_sweep_csv, Report};
use ris_cvqkd::experiment::secure::secure_distance;
use ris_cvqkd::experiment::sweep::operating_point;
use ris_cvqkd::experiment::{run_sweep, ExperimentConfig, OutputFormat, PhaseSource, SweepRow, SweepVariable};
use ris_cvqkd::{LinkState, Scenario, Segment};

fn small() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.system.tx_antennas = 4;
    c.system.rx_antennas = 4;
    c.system.ris_elements_x = 4;
    c.system.ris_elements_y = 4;
    c
}

fn without_wall_time(rows: &[SweepRow]) -> Vec<SweepRow> {
    rows.iter()
        .cloned()
        .map(|mut r| {
            r.wall_ms = 0.0;
            r
        })
        .collect()
}

#[test]
fn five_distances_two_scenarios_give_ten_rows() {
    let mut c = small();
    c.sweep = SweepConfig {
        variable: SweepVariable::Distance,
        values: vec![0.1, 0.2, 0.3, 0.4, 0.5],
    };
    c.scenarios = vec![Scenario::Local(Segment::Direct), Scenario::Global];
    let rows = run_sweep(&c, None).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.phase_source == PhaseSource::Random && r.skr_clamped >= 0.0));
}

#[test]
fn rates_fall_with_distance() {
    let c = ExperimentConfig::default();
    let rows = run_sweep(&c, None).unwrap();
    for s in &c.scenarios {
        let skr: Vec<f64> = rows.iter().filter(|r| r.scenario == *s).map(|r| r.skr_raw).collect();
        assert_eq!(skr.len(), c.sweep.values.len());
        assert!(skr.windows(2).all(|w| w[1] < w[0]), "{s}: {skr:?}");
    }
}

#[test]
fn optimized_phases_beat_random_ones_for_the_direct_tap() {
    let mut c = small();
    c.scenarios = vec![Scenario::Local(Segment::Direct)];
    c.sweep.values = vec![0.1, 0.3, 1.0];
    let random = run_sweep(&c, None).unwrap();
    c.phases.source = PhaseSource::Optimized;
    let optimized = run_sweep(&c, None).unwrap();
    for (r, o) in random.iter().zip(&optimized) {
        assert_eq!(o.phase_source, PhaseSource::Optimized);
        assert!(o.skr_raw >= r.skr_raw, "{} m: {} < {}", r.sweep_value, o.skr_raw, r.skr_raw);
    }
}

#[test]
fn sweeps_are_deterministic_across_pool_sizes() {
    let mut c = small();
    c.sweep.values = vec![0.1, 0.2, 0.5, 1.0];
    let a = without_wall_time(&run_sweep(&c, Some(1)).unwrap());
    let b = without_wall_time(&run_sweep(&c, Some(4)).unwrap());
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_sweep_csv(&a, &mut ca).unwrap();
    write_sweep_csv(&b, &mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(read_sweep_csv(ca.as_slice()).unwrap(), a);

    c.seed += 1;
    let other = without_wall_time(&run_sweep(&c, Some(4)).unwrap());
    assert_ne!(other, a);
}

#[test]
fn json_report_resolves_the_vacuum_variance() {
    let c = ExperimentConfig::default();
    let rows = run_sweep(
        &ExperimentConfig {
            sweep: SweepConfig {
                variable: SweepVariable::Distance,
                values: vec![0.5],
            },
            ..c.clone()
        },
        None,
    )
    .unwrap();
    let mut buf = Vec::new();
    emit_sweep(&rows, &c, OutputFormat::Json, &mut buf).unwrap();
    let report: Report<SweepRow> = serde_json::from_slice(&buf).unwrap();
    // 2/(exp(hf/kT) − 1) + 1 at 15 THz, 296 K
    let x: f64 = 6.626_070_15e-34 * 15e12 / (1.380_649e-23 * 296.0);
    let v0 = 2.0 / (x.exp() - 1.0) + 1.0;
    assert!((report.resolved.vacuum_variance / v0 - 1.0).abs() < 1e-9);
    assert!((report.resolved.thermal_occupation - 0.0964).abs() < 1e-4);
    assert_eq!(report.rows.len(), 4);
}

#[test]
fn secure_distance_matches_a_fine_grid_scan() {
    let c = ExperimentConfig::default();
    let scenario = Scenario::Local(Segment::Direct);
    let (params, noise, _) = c.point(c.distance_m).unwrap();
    let geometry = params.geometry().unwrap();
    let rate = |d: f64| {
        let state = LinkState::new(geometry.channels_at(d).unwrap()).unwrap();
        operating_point(&c, scenario, &state, &noise).unwrap().1.skr
    };
    // last point of a 1 cm grid still meeting the threshold
    let mut crossing = 0.0;
    let mut d = c.secure.min_distance_m;
    while d <= 2.0 {
        if rate(d) >= c.secure.threshold_bits {
            crossing = d;
        }
        d += 0.01;
    }
    assert!(crossing > c.secure.min_distance_m);
    let solved = secure_distance(&c, scenario, c.distance_m).unwrap();
    assert!((solved - crossing).abs() <= 0.1, "bisection {solved} vs grid {crossing}");
}

#[test]
fn unmet_threshold_gives_zero_distance() {
    let mut c = small();
    c.secure.threshold_bits = 100.0;
    assert_eq!(secure_distance(&c, Scenario::Global, c.distance_m).unwrap(), 0.0);
}
