use std::path::PathBuf;
use std::process::ExitCode;

use aoi_cli::{run_command, ExperimentSpec, Figure, SpecError, SweepAxis};
use aoi_core::{PolicyKind, ScenarioConfig};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

/// AoI-aware resource allocation for mobile in-factory subnetworks.
#[derive(Parser)]
#[command(name = "aoisim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, optionally sweeping a parameter.
    Run {
        #[command(flatten)]
        common: Common,
        /// Policy to run (repeat or comma-separate for several).
        #[arg(long = "policy", alias = "policies", value_delimiter = ',')]
        policies: Vec<PolicyKind>,
        /// AXIS=v1,v2,... with AXIS one of M, alpha_i, sampling_rate, policy.
        #[arg(long)]
        sweep: Option<SweepAxis>,
    },
    /// Regenerate the data behind one of the figures (2: CCDF, 3: window size, 4: exploration weight).
    Reproduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        figure: Figure,
    },
    /// Check a config file and list every problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the effective config (defaults merged with the file, if any).
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for summary.csv, ccdf.csv and trace.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write every slot record to trace.csv.
    #[arg(long)]
    trace: bool,
}

fn load(path: Option<&PathBuf>) -> anyhow::Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::from_file(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ScenarioConfig::default()),
    }
}

fn spec_from(common: &Common, base: ScenarioConfig) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(base, &common.out);
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    spec.trace = common.trace;
    spec
}

fn execute(spec: &ExperimentSpec) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout();
    run_command(spec, &mut stdout)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, policies, sweep } => load(common.config.as_ref()).and_then(|base| {
            let mut spec = spec_from(&common, base);
            if !policies.is_empty() {
                spec.policies = policies;
            }
            if let Some(s) = sweep {
                spec.sweep = s;
            }
            execute(&spec)
        }),
        Command::Reproduce { common, figure } => load(common.config.as_ref()).and_then(|base| {
            let mut spec = figure.spec(base, &common.out);
            if let Some(seed) = common.seed {
                spec.seed = seed;
            }
            spec.trace = common.trace;
            execute(&spec)
        }),
        Command::Validate { config } => load(Some(&config)).and_then(|cfg| {
            cfg.validate().map_err(SpecError::from)?;
            println!("{}: ok", config.display());
            Ok(())
        }),
        Command::PrintConfig { config } => load(config.as_ref()).map(|cfg| print!("{}", cfg.to_toml_string())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
