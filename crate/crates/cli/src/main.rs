//! `stormwarn` command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stormwarn_core::config::PipelineConfig;
use stormwarn_core::eval::Scope;
use stormwarn_core::pipeline::{self, Artifacts, CONFIG_FILE};
use stormwarn_core::Error;

#[derive(Parser, Debug)]
#[command(name = "stormwarn", version, about = "Storm outage early warning at a 48 h lead")]
struct Cli {
    /// Pipeline config (TOML). Defaults to `<out>/stormwarn.toml`, or built-in defaults for `synth`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the model seed (and the synthetic seed for `synth`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Evaluate every test hour or only hours with a prediction.
    #[arg(long, global = true, value_enum, default_value_t = ScopeArg::All)]
    scope: ScopeArg,
    /// Peak threshold for cMASE and event detection (customers out).
    #[arg(long, global = true, value_name = "N")]
    threshold: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    All,
    Available,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => Scope::All,
            ScopeArg::Available => Scope::Available,
        }
    }
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Generate a synthetic season and a matching config.
    Synth,
    /// Hourly outage grid and station series.
    Ingest,
    /// Interpolate station weather to county centroids.
    Interp,
    /// Build the feature matrix and targets.
    Features,
    /// Fit the gate, regressor and baseline; write the model bundle.
    Train,
    /// Forecast the test span.
    Predict,
    /// Metrics on the test span.
    Eval,
    /// Moving-block bootstrap intervals.
    Bootstrap,
    /// Full report with figure and diagnostics.
    Report,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(p), _) => PipelineConfig::load(p)?,
        (None, Command::Synth) => PipelineConfig::default(),
        (None, _) => PipelineConfig::load(&cli.out.join(CONFIG_FILE))?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        if cli.command == Command::Synth {
            cfg.synthetic.seed = seed;
        }
    }
    if let Some(t) = cli.threshold {
        cfg.eval.threshold = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    let cfg = load_config(cli)?;
    let out: &Path = &cli.out;
    let art = Artifacts::new(out);
    let scope = Scope::from(cli.scope);
    std::fs::create_dir_all(out)?;
    Ok(match cli.command {
        Command::Synth => vec![pipeline::synth(&cfg, out)?],
        Command::Ingest => {
            pipeline::ingest(&cfg, out)?;
            vec![art.outage_hourly(), art.station_hourly()]
        }
        Command::Interp => {
            pipeline::interp(&cfg, out)?;
            vec![art.kriged(), art.interp_diagnostics()]
        }
        Command::Features => {
            pipeline::features(&cfg, out)?;
            vec![art.features()]
        }
        Command::Train => {
            pipeline::train(&cfg, out)?;
            vec![art.model(), art.train_summary()]
        }
        Command::Predict => {
            pipeline::predict(&cfg, out)?;
            vec![art.predictions(), art.state_series()]
        }
        Command::Eval => {
            pipeline::eval(&cfg, out, scope)?;
            vec![art.eval()]
        }
        Command::Bootstrap => {
            pipeline::bootstrap(&cfg, out, scope)?;
            vec![art.bootstrap()]
        }
        Command::Report => {
            pipeline::report(&cfg, out, scope)?;
            vec![art.report(), art.figure_svg(), art.figure_csv()]
        }
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::MissingArtifact(_) => 3,
        e if e.is_numeric() => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
