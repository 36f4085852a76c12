use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uwoc_cli::{
    parse_config, preset, run, to_toml, validate_all_with, Hooks, Overrides, RunConfig, ToleranceProfile, EXIT_ACCEPTANCE,
    EXIT_CONFIG, EXIT_OK, PRESET_NAMES,
};
use uwoc_core::montecarlo::WORKERS_ENV;

/// Outage, BER and capacity of multi-layer underwater optical links and of
/// mixed terrestrial/underwater relayed links.
///
/// SNR sweeps are in dB (10 log10 of the linear average SNR). Power sweeps are
/// in dBm and map to an average SNR of P_t^2 exp(-2 a_ext l_U) / noise_variance
/// with unit responsivity.
#[derive(Parser)]
#[command(name = "uwoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Source {
    /// TOML run configuration
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in figure preset
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig, i32> {
        match (&self.config, &self.preset) {
            (Some(p), _) => parse_config(p).map_err(|e| {
                eprintln!("{e}");
                EXIT_CONFIG
            }),
            (None, Some(n)) => Ok(preset(n).expect("preset names are validated by clap")),
            (None, None) => unreachable!("clap requires a source"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sweep and write one CSV per metric
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte-Carlo trials; 0 disables simulation
        #[arg(long)]
        mc_trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulation threads
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "strict")]
        tolerance_profile: ToleranceProfile,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run every registered invariant and oracle check
    Validate {
        /// Relative perturbation injected into Fox-H values (fault injection)
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_foxh_perturbation: f64,
    },
    /// Print a preset as TOML
    Preset { name: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match Cli::parse().command {
        Command::Run {
            source,
            out,
            mc_trials,
            seed,
            workers,
            tolerance_profile,
            format: Format::Csv,
        } => match source.load() {
            Err(c) => c,
            Ok(mut cfg) => {
                let ov = Overrides {
                    out,
                    mc_trials,
                    seed,
                    workers,
                };
                match ov.apply(&mut cfg) {
                    Err(e) => {
                        eprintln!("{e}");
                        EXIT_CONFIG
                    }
                    Ok(()) => match run(&cfg, tolerance_profile) {
                        Ok(s) => {
                            print!("{}", s.render());
                            s.exit_code()
                        }
                        Err(e) => {
                            eprintln!("{e}");
                            e.exit_code()
                        }
                    },
                }
            }
        },
        Command::Validate {
            inject_foxh_perturbation,
        } => {
            let r = validate_all_with(&Hooks {
                foxh_perturbation: inject_foxh_perturbation,
            });
            print!("{}", r.render());
            if r.all_pass() {
                EXIT_OK
            } else {
                EXIT_ACCEPTANCE
            }
        }
        Command::Preset { name } => match preset(&name) {
            Some(c) => {
                print!("{}", to_toml(&c));
                EXIT_OK
            }
            None => {
                eprintln!("unknown preset {name}; known: {}", PRESET_NAMES.join(", "));
                EXIT_CONFIG
            }
        },
    };
    ExitCode::from(code as u8)
}
