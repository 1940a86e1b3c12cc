//! The five subcommands. Each writes its artifacts into the output
//! directory and returns the contract checks it evaluated.

mod cover;
mod extend;
mod flow;
mod goodset;
mod kernel;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use harmext_core::{BoundaryMap, CatalogMap, GoodExtension, QuadratureRule};

pub use cover::cover;
pub use extend::extend;
pub use flow::flow;
pub use goodset::goodset;
pub use kernel::kernel;

use crate::{ExperimentConfig, LabError};

/// A configuration with the command-line overrides applied.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(config: ExperimentConfig, out: impl Into<PathBuf>) -> Self {
        Context { config, out: out.into() }
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(0)
    }

    pub fn quad_order(&self) -> Result<usize, LabError> {
        match self.config.quad_order.unwrap_or(QuadratureRule::DEFAULT_ORDER) {
            0 => Err(LabError::Config("quad_order must be at least 1".into())),
            n if n > 200 => Err(LabError::Config(format!("quad_order {n} is too large"))),
            n => Ok(n),
        }
    }

    pub fn map_name(&self, default: &str) -> String {
        self.config.map.clone().unwrap_or_else(|| default.to_string())
    }

    pub fn boundary_map(&self, default: &str) -> Result<CatalogMap, LabError> {
        let name = self.map_name(default);
        let k = self.config.k.unwrap_or(1.5);
        let c = self.config.c.unwrap_or(0.8);
        Ok(CatalogMap::by_name(&name, 2, k, c)?)
    }

    pub fn extension(&self, map: CatalogMap) -> Result<GoodExtension, LabError> {
        let rule = Arc::new(QuadratureRule::gaussian(2, self.quad_order()?));
        let anchor = map.fixed_point();
        Ok(GoodExtension::new(Arc::new(map), anchor, rule)?)
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }
}

/// Maps whose extension is harmonic.
pub(crate) fn is_harmonic(name: &str) -> bool {
    matches!(name, "identity" | "linear_diag")
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), LabError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
