use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use trustgate::admin::{self, SimulationSpec, EXIT_IO};
use trustgate::gateway::{load_config, resolve_config_path, Config, Gateway, CONFIG_ENV};
use trustgate::policy::AttributeSchema;
use trustgate::sensitivity::{SensitivityEngine, SensitivityLevel};

#[derive(Parser)]
#[command(
    name = "trustgate",
    version,
    about = "Trust-aware LLM gateway and operator tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Scan files for sensitive content (exit 0 clean, 2 findings, 1 I/O error)
    Scan {
        #[arg(long = "path", required = true, num_args = 1..)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value = "confidential")]
        min_level: SensitivityLevel,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Use the recognizers from this gateway config instead of the shipped set
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Policy tools
    Policy {
        #[command(subcommand)]
        command: PolicyCommand,
    },
    /// Summarize an audit log
    Replay {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Run seeded synthetic sessions through the in-process pipeline
    Simulate {
        #[arg(long, default_value_t = 20)]
        sessions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        requests_per_session: usize,
        /// Tier proportions, e.g. 0.25,0.25,0.25,0.25
        #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [0.25, 0.25, 0.25, 0.25])]
        mix: Vec<f64>,
        /// Evaluate the configured policy instead of permitting all requests
        #[arg(long)]
        enforce_policy: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Start the HTTP gateway
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PolicyCommand {
    /// Parse and lint a policy (exit 0 clean, 2 diagnostics, 1 parse error)
    Check {
        file: PathBuf,
        /// Take known user attributes from this gateway config's principals
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn config_or_exit(path: PathBuf) -> Result<Config, ExitCode> {
    load_config(&path).map_err(|e| {
        eprintln!("trustgate: {e}");
        ExitCode::from(EXIT_IO as u8)
    })
}

fn run(cli: Cli) -> Result<i32, ExitCode> {
    match cli.command {
        Command::Scan {
            paths,
            min_level,
            format,
            config,
        } => {
            let engine = match config {
                Some(p) => config_or_exit(p)?.sensitivity,
                None => SensitivityEngine::with_defaults(),
            };
            let report = admin::cmd_scan(&paths, &engine, min_level);
            match format {
                Format::Table => print!("{}", report.to_table()),
                Format::Json => println!("{}", report.to_json()),
            }
            Ok(report.exit_code)
        }
        Command::Policy {
            command: PolicyCommand::Check { file, config },
        } => {
            let schema = match config {
                Some(p) => AttributeSchema::with_user_attributes(
                    config_or_exit(p)?
                        .principals
                        .iter()
                        .flat_map(|p| p.attributes.keys().cloned()),
                ),
                None => AttributeSchema::default(),
            };
            let check = admin::cmd_policy_check(&file, &schema);
            print!("{}", check.render(&file));
            Ok(check.exit_code)
        }
        Command::Replay { file, format } => match admin::cmd_replay(&file) {
            Ok(summary) => {
                match format {
                    Format::Table => print!("{}", summary.to_table()),
                    Format::Json => println!("{}", summary.to_json()),
                }
                if summary.malformed > 0 {
                    eprintln!("{} malformed lines skipped", summary.malformed);
                }
                Ok(0)
            }
            Err(e) => {
                eprintln!("trustgate: {}: {e}", file.display());
                Ok(EXIT_IO)
            }
        },
        Command::Simulate {
            sessions,
            seed,
            config,
            requests_per_session,
            mix,
            enforce_policy,
            format,
        } => {
            let config = config_or_exit(config)?;
            let spec = SimulationSpec {
                sessions,
                requests_per_session,
                seed,
                tier_mix: [mix[0], mix[1], mix[2], mix[3]],
                enforce_policy,
                ..SimulationSpec::default()
            };
            match admin::cmd_simulate(&spec, &config) {
                Ok(m) => {
                    match format {
                        Format::Table => print!("{}", m.to_table()),
                        Format::Json => println!("{}", m.to_json()),
                    }
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("trustgate: {e}");
                    Ok(EXIT_IO)
                }
            }
        }
        Command::Serve { config } => {
            let path = resolve_config_path(config).map_err(|e| {
                eprintln!("trustgate: {e}");
                ExitCode::from(EXIT_IO as u8)
            })?;
            let config = config_or_exit(path)?;
            let gateway = Gateway::new(config).map_err(|e| {
                eprintln!("trustgate: {e}");
                ExitCode::from(EXIT_IO as u8)
            })?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| {
                eprintln!("trustgate: {e}");
                ExitCode::from(EXIT_IO as u8)
            })?;
            match runtime.block_on(trustgate::gateway::serve(Arc::new(gateway))) {
                Ok(()) => Ok(0),
                Err(e) => {
                    eprintln!("trustgate: {e}");
                    Ok(EXIT_IO)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(code) => code,
    }
}
