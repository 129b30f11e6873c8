use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use ris_cvqkd::experiment::output::{emit_optimize, emit_secure, emit_sweep, open_output, write_json, Report};
use ris_cvqkd::experiment::{run_optimize, run_secure_distance, run_sweep, ExperimentConfig, OutputFormat};
use ris_cvqkd::Error;

#[derive(Parser, Debug)]
#[command(name = "ris-cvqkd", version, about = "Key-rate sweeps for RIS-assisted THz MIMO CV-QKD links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every scenario over the sweep grid.
    Sweep(Common),
    /// Longest link meeting the key-rate threshold, per grid value and scenario.
    SecureDistance(Common),
    /// Optimize RIS phases and splitters at every grid value.
    Optimize(Common),
    /// Parse and check a configuration, printing it with defaults filled in.
    ValidateConfig(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; falls back to `output_path` in the config, then stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Defaults to json for `.json` outputs, csv otherwise.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.output {
            config.output_path = Some(out.clone());
        }
        Ok(config)
    }

    fn format(&self, path: Option<&Path>) -> OutputFormat {
        self.format.unwrap_or_else(|| match path.and_then(|p| p.extension()) {
            Some(ext) if ext == "json" => OutputFormat::Json,
            _ => OutputFormat::Csv,
        })
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Sweep(args) => {
            let config = args.load()?;
            let rows = run_sweep(&config, args.jobs)?;
            let path = config.output_path.as_deref();
            emit_sweep(&rows, &config, args.format(path), open_output(path)?)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                error!("{failed} of {} rows could not be evaluated", rows.len());
                return Ok(ExitCode::from(3));
            }
            info!("wrote {} rows", rows.len());
        }
        Command::SecureDistance(args) => {
            let config = args.load()?;
            let rows = run_secure_distance(&config, args.jobs)?;
            let path = config.output_path.as_deref();
            emit_secure(&rows, &config, args.format(path), open_output(path)?)?;
            let failed: Vec<_> = rows.iter().filter_map(|r| r.error.as_ref()).collect();
            if !failed.is_empty() {
                for e in &failed {
                    error!("{e}");
                }
                return Ok(ExitCode::from(3));
            }
        }
        Command::Optimize(args) => {
            let config = args.load()?;
            let rows = run_optimize(&config, args.jobs)?;
            let path = config.output_path.as_deref();
            emit_optimize(&rows, &config, args.format(path), open_output(path)?)?;
        }
        Command::ValidateConfig(args) => {
            let config = args.load()?;
            config.noise_variances()?;
            let empty: Vec<()> = Vec::new();
            write_json(&Report::new(&config, empty), open_output(args.output.as_deref())?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
