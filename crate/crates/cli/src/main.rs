use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcvv_cli::config::{DesignKind, GstBlock};
use qcvv_cli::json::read_json;
use qcvv_cli::run::{analyze_dataset, build_design};
use qcvv_cli::{report, run, CliError, CliResult, ExperimentConfig, Protocol, MANIFEST_FILE};
use qcvv_core::gst::{ErrorKind, ErrorModel, GaugeSchedule, GstDataset, DEFAULT_SPAM_WEIGHT};
use qcvv_core::rb::Shots;

/// Correlated-noise randomized benchmarking and gate-set tomography.
///
/// Exit status: 0 on success, 1 when the configuration or arguments are
/// invalid, 2 when a run fails.
#[derive(Parser)]
#[command(name = "qcvv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Standard RB with per-length gamma fits.
    RbRun(RunArgs),
    /// Random versus preselected long-walk RB.
    RbLongwalk(RunArgs),
    /// Regression of sequence infidelity on ‖V₂D‖² under each noise kind.
    WalkScan(RunArgs),
    /// Writes a GST experiment design.
    GstBuild {
        #[arg(long, default_value = "standard")]
        design: DesignKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulates GST data for an error model and estimates the gate set.
    GstRun {
        /// Full configuration; the remaining options build one when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// none, overrot or detune.
        #[arg(long)]
        model: Option<ErrorKind>,
        /// Repeatable; omitted with `detune` runs the standard sweep.
        #[arg(long)]
        magnitude: Vec<f64>,
        /// Shots per circuit; omitted for exact probabilities.
        #[arg(long)]
        shots: Option<u32>,
        #[arg(long, default_value = "standard")]
        design: DesignKind,
        #[arg(long, default_value_t = GaugeSchedule::TpThenUnitary)]
        gauge: GaugeSchedule,
        #[arg(long, default_value_t = DEFAULT_SPAM_WEIGHT)]
        spam_weight: f64,
    },
    /// Estimates a gate set from an existing dataset.
    GstAnalyze {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "standard")]
        design: DesignKind,
        #[arg(long, default_value_t = GaugeSchedule::TpThenUnitary)]
        gauge: GaugeSchedule,
        #[arg(long, default_value_t = DEFAULT_SPAM_WEIGHT)]
        spam_weight: f64,
        /// Error model the data came from, to add the calculated distances.
        #[arg(long, requires = "magnitude")]
        model: Option<ErrorKind>,
        #[arg(long)]
        magnitude: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Markdown summary of a completed run.
    Report {
        /// Manifest file, or the run directory holding it.
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn load_run_config(args: &RunArgs, expected: Protocol) -> CliResult<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.protocol != expected {
        return Err(CliError::Validation(vec![format!(
            "protocol: this verb runs {expected}, the configuration names {}",
            config.protocol
        )]));
    }
    apply_overrides(&mut config, args.seed, args.out.clone());
    Ok(config)
}

fn apply_overrides(config: &mut ExperimentConfig, seed: Option<u64>, out: Option<PathBuf>) {
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = out {
        config.output_dir = o;
    }
}

fn finish_run(config: &ExperimentConfig) -> CliResult<()> {
    let m = run(config)?;
    println!(
        "{} run complete: {} outputs in {} (config {})",
        m.protocol,
        m.outputs.len(),
        config.output_dir.display(),
        &m.config_hash[..12]
    );
    Ok(())
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::RbRun(a) => finish_run(&load_run_config(&a, Protocol::Rb)?),
        Command::RbLongwalk(a) => finish_run(&load_run_config(&a, Protocol::RbLongwalk)?),
        Command::WalkScan(a) => finish_run(&load_run_config(&a, Protocol::WalkScan)?),
        Command::GstBuild { design, out } => {
            let (d, files) = build_design(design, &out)?;
            println!(
                "{} circuits; wrote {}",
                d.len(),
                files
                    .iter()
                    .map(|f| f.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
        Command::GstRun {
            config,
            seed,
            out,
            model,
            magnitude,
            shots,
            design,
            gauge,
            spam_weight,
        } => {
            let mut cfg = match (config, model) {
                (Some(path), _) => {
                    let c = ExperimentConfig::load(&path)?;
                    if c.protocol != Protocol::Gst {
                        return Err(CliError::Validation(vec![format!(
                            "protocol: gst-run needs gst, the configuration names {}",
                            c.protocol
                        )]));
                    }
                    c
                }
                (None, Some(kind)) => ExperimentConfig {
                    protocol: Protocol::Gst,
                    seed: 0,
                    output_dir: PathBuf::new(),
                    rb: None,
                    longwalk: None,
                    walk_scan: None,
                    gst: Some(GstBlock {
                        design,
                        model: kind,
                        magnitudes: magnitude,
                        shots: shots.map_or(Shots::Infinite, Shots::Finite),
                        gauge,
                        spam_weight,
                    }),
                    acceptance: Default::default(),
                },
                (None, None) => {
                    return Err(CliError::Validation(vec!["gst-run: give --config or --model".into()]));
                }
            };
            apply_overrides(&mut cfg, seed, out);
            let bad = cfg.validate();
            if !bad.is_empty() {
                return Err(CliError::Validation(bad));
            }
            finish_run(&cfg)
        }
        Command::GstAnalyze {
            dataset,
            design,
            gauge,
            spam_weight,
            model,
            magnitude,
            out,
        } => {
            let data: GstDataset = read_json(&dataset)?;
            let model = match (model, magnitude) {
                (Some(k), Some(m)) => {
                    Some(ErrorModel::new(k, m).map_err(|e| CliError::Validation(vec![format!("magnitude: {e}")]))?)
                }
                _ => None,
            };
            let files = analyze_dataset(&data, &design.build(), gauge, spam_weight, model, &out)?;
            println!(
                "wrote {}",
                files
                    .iter()
                    .map(|f| f.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
        Command::Report { manifest } => {
            let path = if manifest.is_dir() {
                manifest.join(MANIFEST_FILE)
            } else {
                manifest
            };
            print!("{}", report(Path::new(&path))?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
