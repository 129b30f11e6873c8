//! CSV and JSON emission. CSV columns are fixed; JSON mirrors the rows and
//! adds the resolved configuration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::secure::SecureRow;
use super::sweep::{OptimizeRow, SweepRow};
use crate::error::{Error, Result};
use crate::noise::thermal_occupation;

pub const SWEEP_HEADER: [&str; 9] = [
    "sweep_var",
    "sweep_value",
    "scenario",
    "phase_source",
    "mi_bits",
    "holevo_bits",
    "skr_raw",
    "skr_clamped",
    "wall_ms",
];

pub const SECURE_HEADER: [&str; 7] = [
    "sweep_var",
    "sweep_value",
    "scenario",
    "phase_source",
    "threshold_bits",
    "secure_distance_m",
    "wall_ms",
];

/// Optimization traces flatten to one line per iteration.
pub const TRACE_HEADER: [&str; 5] = ["sweep_var", "sweep_value", "scenario", "iteration", "best_skr"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Values derived from the configuration rather than read from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedValues {
    pub carrier_frequency_hz: f64,
    pub thermal_occupation: f64,
    pub vacuum_variance: f64,
    pub alice_variance: f64,
    pub antenna_gain_linear: f64,
    pub ris_elements: usize,
}

impl ResolvedValues {
    pub fn of(config: &ExperimentConfig) -> Self {
        let f = config.system.carrier_frequency_hz();
        let v0 = config.vacuum_variance();
        ResolvedValues {
            carrier_frequency_hz: f,
            thermal_occupation: thermal_occupation(f, config.system.temperature_k),
            vacuum_variance: v0,
            alice_variance: config.noise.signal_variance + v0,
            antenna_gain_linear: config.system.antenna_gain_linear(),
            ris_elements: config.system.ris_elements_x * config.system.ris_elements_y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub config: ExperimentConfig,
    pub resolved: ResolvedValues,
    pub rows: Vec<R>,
}

impl<R> Report<R> {
    pub fn new(config: &ExperimentConfig, rows: Vec<R>) -> Self {
        Report {
            config: config.clone(),
            resolved: ResolvedValues::of(config),
            rows,
        }
    }
}

/// Flat CSV view of a sweep row (no error column).
#[derive(Debug, Serialize, Deserialize)]
struct SweepRecord {
    sweep_var: super::config::SweepVariable,
    sweep_value: f64,
    scenario: crate::skr::Scenario,
    phase_source: super::config::PhaseSource,
    mi_bits: f64,
    holevo_bits: f64,
    skr_raw: f64,
    skr_clamped: f64,
    wall_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SecureRecord {
    sweep_var: super::config::SweepVariable,
    sweep_value: f64,
    scenario: crate::skr::Scenario,
    phase_source: super::config::PhaseSource,
    threshold_bits: f64,
    secure_distance_m: f64,
    wall_ms: f64,
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => Error::Contract(format!("CSV: {other:?}")),
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for r in rows {
        w.serialize(SweepRecord {
            sweep_var: r.sweep_var,
            sweep_value: r.sweep_value,
            scenario: r.scenario,
            phase_source: r.phase_source,
            mi_bits: r.mi_bits,
            holevo_bits: r.holevo_bits,
            skr_raw: r.skr_raw,
            skr_clamped: r.skr_clamped,
            wall_ms: r.wall_ms,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a sweep CSV back into rows. Error messages are not stored in
/// CSV, so `error` is `None` for every row.
pub fn read_sweep_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(Error::Contract(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize::<SweepRecord>()
        .map(|rec| {
            let s = rec.map_err(csv_error)?;
            Ok(SweepRow {
                sweep_var: s.sweep_var,
                sweep_value: s.sweep_value,
                scenario: s.scenario,
                phase_source: s.phase_source,
                mi_bits: s.mi_bits,
                holevo_bits: s.holevo_bits,
                skr_raw: s.skr_raw,
                skr_clamped: s.skr_clamped,
                wall_ms: s.wall_ms,
                error: None,
            })
        })
        .collect()
}

pub fn write_secure_csv<W: Write>(rows: &[SecureRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SECURE_HEADER).map_err(csv_error)?;
    for r in rows {
        w.serialize(SecureRecord {
            sweep_var: r.sweep_var,
            sweep_value: r.sweep_value,
            scenario: r.scenario,
            phase_source: r.phase_source,
            threshold_bits: r.threshold_bits,
            secure_distance_m: r.secure_distance_m,
            wall_ms: r.wall_ms,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(rows: &[OptimizeRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_error)?;
    for r in rows {
        for (i, v) in r.history.iter().enumerate() {
            w.serialize((r.sweep_var, r.sweep_value, r.scenario, i + 1, v))
                .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Opens `path` for writing, or stdout when `None`.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn emit_sweep(rows: &[SweepRow], config: &ExperimentConfig, format: OutputFormat, out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => write_sweep_csv(rows, out),
        OutputFormat::Json => write_json(&Report::new(config, rows.to_vec()), out),
    }
}

pub fn emit_secure(rows: &[SecureRow], config: &ExperimentConfig, format: OutputFormat, out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => write_secure_csv(rows, out),
        OutputFormat::Json => write_json(&Report::new(config, rows.to_vec()), out),
    }
}

pub fn emit_optimize(rows: &[OptimizeRow], config: &ExperimentConfig, format: OutputFormat, out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => write_trace_csv(rows, out),
        OutputFormat::Json => write_json(&Report::new(config, rows.to_vec()), out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{PhaseSource, SweepVariable};
    use crate::skr::{Scenario, Segment};

    fn row(v: f64) -> SweepRow {
        SweepRow {
            sweep_var: SweepVariable::Distance,
            sweep_value: v,
            scenario: Scenario::Local(Segment::RisRx),
            phase_source: PhaseSource::Random,
            mi_bits: 0.1 + v / 3.0,
            holevo_bits: 1.0 / 7.0,
            skr_raw: -2.5e-17,
            skr_clamped: 0.0,
            wall_ms: 12.345,
            error: None,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_sweep_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "sweep_var,sweep_value,scenario,phase_source,mi_bits,holevo_bits,skr_raw,skr_clamped,wall_ms\n"
        );
        let mut buf = Vec::new();
        write_secure_csv(&[], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("sweep_var,sweep_value,scenario"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![row(0.05), row(1.0 / 3.0)];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn failed_rows_write_nan() {
        let mut r = row(1.0);
        r.skr_raw = f64::NAN;
        let mut buf = Vec::new();
        write_sweep_csv(&[r], &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains("NaN"));
        assert!(read_sweep_csv(buf.as_slice()).unwrap()[0].skr_raw.is_nan());
    }

    #[test]
    fn json_carries_resolved_values() {
        let config = ExperimentConfig::default();
        let mut buf = Vec::new();
        emit_sweep(&[row(0.5)], &config, OutputFormat::Json, &mut buf).unwrap();
        let back: Report<SweepRow> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back.config, config);
        assert_eq!(back.rows, vec![row(0.5)]);
        assert!((back.resolved.antenna_gain_linear - 1000.0).abs() < 1e-9);
    }
}
