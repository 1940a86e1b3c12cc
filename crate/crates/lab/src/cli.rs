//! Argument parsing and exit codes: 0 when every contract check passed, 2
//! when one failed (named on stderr), 1 for configuration and other errors.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Context};
use crate::{ExperimentConfig, LabError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "harmext", version, about = "Numerical experiments on good extensions of boundary maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate the good extension, its energy, distortion and tension on a grid.
    Extend(Common),
    /// Run the harmonic map heat flow from the good extension.
    Flow(Common),
    /// Heat-kernel mass profile and main-annulus tail table.
    Kernel(Common),
    /// Cover the main annulus with stacks of good sectors.
    Cover(Common),
    /// Good-set fraction at decreasing heights.
    Goodset(Common),
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Gauss–Hermite nodes per axis.
    #[arg(long, value_name = "N")]
    pub quad_order: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extend(_) => "extend",
            Command::Flow(_) => "flow",
            Command::Kernel(_) => "kernel",
            Command::Cover(_) => "cover",
            Command::Goodset(_) => "goodset",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Extend(c)
            | Command::Flow(c)
            | Command::Kernel(c)
            | Command::Cover(c)
            | Command::Goodset(c) => c,
        }
    }

    /// Loads the configuration file and applies the flag overrides.
    pub fn context(&self) -> Result<Context, LabError> {
        let common = self.common();
        let mut config = match &common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = common.seed {
            config.seed = Some(seed);
        }
        if let Some(order) = common.quad_order {
            config.quad_order = Some(order);
        }
        Ok(Context::new(config, common.out.clone()))
    }

    pub fn execute(&self) -> Result<Outcome, LabError> {
        let ctx = self.context()?;
        match self {
            Command::Extend(_) => commands::extend(&ctx),
            Command::Flow(_) => commands::flow(&ctx),
            Command::Kernel(_) => commands::kernel(&ctx),
            Command::Cover(_) => commands::cover(&ctx),
            Command::Goodset(_) => commands::goodset(&ctx),
        }
    }
}

pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let name = cli.command.name();
    match cli.command.execute() {
        Ok(outcome) => {
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            for check in &outcome.checks {
                let status = if check.passed { "ok" } else { "FAILED" };
                println!("check {}: {status} ({})", check.name, check.detail);
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                for check in outcome.failures() {
                    eprintln!("harmext {name}: contract violation: {} ({})", check.name, check.detail);
                }
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("harmext {name}: {e}");
            ExitCode::from(1)
        }
    }
}
