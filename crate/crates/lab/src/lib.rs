//! Command-line laboratory for `harmext-core`: configuration files, CSV and
//! SVG artifacts, and the contract checks that decide the exit code.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

macro_rules! compute_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for LabError {
            fn from(e: $t) -> Self {
                LabError::Compute(e.to_string())
            }
        }
    )*};
}

compute_errors!(
    harmext_core::MapError,
    harmext_core::ExtensionError,
    harmext_core::heatflow::FlowError,
    harmext_core::covering::CoveringError,
    harmext_core::geometry::GeometryError
);

/// Invalid parameters rejected by the core library are configuration errors.
impl From<harmext_core::BoundaryError> for LabError {
    fn from(e: harmext_core::BoundaryError) -> Self {
        LabError::Config(e.to_string())
    }
}

impl From<harmext_core::heatkernel::HeatKernelError> for LabError {
    fn from(e: harmext_core::heatkernel::HeatKernelError) -> Self {
        LabError::Config(e.to_string())
    }
}

/// One internal contract check of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name, passed, detail: detail.into() }
    }
}

/// Files written and checks evaluated by a subcommand.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
