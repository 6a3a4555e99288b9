use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use epinetctl::commands::{self, SimulateMode, SweepParam};
use epinetctl::scenario::Scenario;
use epinetctl::{output, CliError};

#[derive(Parser)]
#[command(
    name = "epinetctl",
    version,
    about = "Networked SIS epidemics under an infection-cap state feedback controller: \
             analyze regimes, simulate, reproduce the built-in experiments, sweep parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the regime of a scenario from s(BA - Gamma) and report the
    /// endemic point when it exists.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's generator seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write analyze.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Integrate the scenario and write trajectory CSVs plus verification
    /// and summary JSON.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Run only the controlled loop.
        #[arg(long, group = "mode")]
        controlled: bool,
        /// Run only the uncontrolled loop.
        #[arg(long, group = "mode")]
        uncontrolled: bool,
        /// Run both loops (the default).
        #[arg(long, group = "mode")]
        both: bool,
        /// Record control inputs alongside controlled states.
        #[arg(long)]
        record_controls: bool,
    },
    /// Solve and report the equilibrium of the controlled system.
    Equilibrium {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run one of the five built-in scale experiments end to end.
    Reproduce {
        /// Experiment id in 1..=5.
        experiment: u8,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        record_controls: bool,
    },
    /// Re-run classification and a controlled simulation across a list of
    /// parameter values.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write sweep.csv / sweep.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    Beta,
    Gamma,
    Radius,
    Cap,
}

impl From<ParamArg> for SweepParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Beta => SweepParam::Beta,
            ParamArg::Gamma => SweepParam::Gamma,
            ParamArg::Radius => SweepParam::Radius,
            ParamArg::Cap => SweepParam::Cap,
        }
    }
}

fn main() -> ExitCode {
    commands::install_thread_cap();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("epinetctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze {
            scenario,
            seed,
            out,
            format,
        } => {
            let sc = Scenario::load(&scenario)?;
            let summary = commands::cmd_analyze(&sc, seed)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&summary).unwrap()),
                Format::Csv => {
                    println!("spectral_abscissa,regime,marginal");
                    println!(
                        "{:.16e},{},{}",
                        summary.spectral_abscissa,
                        regime_name(summary.regime),
                        summary.marginal
                    );
                }
            }
            if let Some(dir) = out {
                output::ensure_dir(&dir)?;
                output::write_json(&dir, "analyze.json", &summary)?;
            }
            Ok(())
        }
        Command::Simulate {
            scenario,
            seed,
            out,
            controlled,
            uncontrolled,
            both,
            record_controls,
        } => {
            let mode = match (controlled, uncontrolled, both) {
                (true, false, false) => SimulateMode::Controlled,
                (false, true, false) => SimulateMode::Uncontrolled,
                _ => SimulateMode::Both,
            };
            let sc = Scenario::load(&scenario)?;
            let outcome = commands::cmd_simulate(&sc, mode, &out, record_controls, seed)?;
            for path in &outcome.files {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Equilibrium {
            scenario,
            seed,
            out,
            format,
        } => {
            let sc = Scenario::load(&scenario)?;
            let report = commands::cmd_equilibrium(&sc, seed)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                Format::Csv => {
                    println!("regime,residual,iterations,marginal");
                    println!(
                        "{},{:.16e},{},{}",
                        regime_name(report.regime),
                        report.residual,
                        report.iterations,
                        report.marginal
                    );
                }
            }
            if let Some(dir) = out {
                output::ensure_dir(&dir)?;
                output::write_json(&dir, "equilibrium.json", &report)?;
            }
            Ok(())
        }
        Command::Reproduce {
            experiment,
            seed,
            out,
            record_controls,
        } => {
            let outcome = commands::cmd_reproduce(experiment, seed, &out, record_controls)?;
            for path in &outcome.files {
                println!("{}", path.display());
            }
            let comparison = outcome.summary.comparison.as_ref().expect("reproduce sets it");
            println!(
                "experiment {experiment}: s = {:.6}, regime = {}, cap compliance = {}",
                comparison.spectral_abscissa,
                regime_name(comparison.regime),
                comparison.cap_compliance
            );
            Ok(())
        }
        Command::Sweep {
            scenario,
            param,
            values,
            seed,
            out,
            format,
        } => {
            let sc = Scenario::load(&scenario)?;
            let table = commands::cmd_sweep(&sc, param.into(), &values, seed)?;
            match format {
                Format::Csv => print!("{}", table.to_csv()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&table).unwrap()),
            }
            if let Some(dir) = out {
                output::ensure_dir(&dir)?;
                match format {
                    Format::Csv => {
                        output::write_atomic(&dir, "sweep.csv", table.to_csv().as_bytes())?;
                    }
                    Format::Json => {
                        output::write_json(&dir, "sweep.json", &table)?;
                    }
                }
            }
            Ok(())
        }
    }
}

fn regime_name(regime: epinet::equilibrium::Regime) -> &'static str {
    match regime {
        epinet::equilibrium::Regime::DfeOnly => "DFE",
        epinet::equilibrium::Regime::Endemic => "endemic",
    }
}
