use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gpim_cli::compare::{compare, pair_from, report};
use gpim_cli::export::{export_arc, summary_text};
use gpim_cli::{run_experiment, ExperimentConfig, Preset, RunError};

#[derive(Parser)]
#[command(name = "gpim", version, about = "GP internal-model regulator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Against {
    Baseline,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write trace, jump log and summary.
    Run {
        config: PathBuf,
        /// Overrides `experiment.output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the GP loop and the baseline on the same configuration.
    Compare {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "baseline")]
        against: Against,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a configuration without simulating.
    Validate { config: PathBuf },
    /// Print every preset as a complete configuration.
    Presets,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| {
        RunError::Config(gpim_cli::ConfigError::Invalid {
            key: "file".into(),
            msg: format!("cannot read {}: {e}", path.display()),
        })
    })?;
    let cfg = ExperimentConfig::parse(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let r = run_experiment(&cfg)?;
            export_arc(&r.arc, r.layout, &r.summary, &dir)?;
            fs::write(dir.join("config.cfg"), cfg.to_text())?;
            print!("{}", summary_text(&r.summary));
        }
        Command::Compare { config, against: Against::Baseline, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let (gp, base) = pair_from(&cfg);
            fs::create_dir_all(&dir)?;
            let c = compare(&gp, &base, Some(&dir))?;
            fs::write(dir.join("config.cfg"), cfg.to_text())?;
            print!("{}", report(&c));
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("ok: preset {}, exosystem {}", cfg.preset.name(), cfg.exosystem);
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("# ---- preset {} ----", p.name());
                println!("{}", ExperimentConfig::from_preset(p).to_text());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
