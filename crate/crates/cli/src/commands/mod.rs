//! One module per experiment.

pub mod attractor;
pub mod cantor;
pub mod renorm;
pub mod tangency;
pub mod verify;

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{overlay, Layers, Run};
use crate::CliError;

pub struct Invocation {
    pub seed: Option<u64>,
    pub layers: Layers,
    pub dir: PathBuf,
}

pub struct Outcome {
    pub passed: bool,
    pub message: String,
}

impl Invocation {
    /// Resolves the three config sections, with command-line flags applied
    /// last. The run is opened separately, after validation.
    pub fn resolve<P, T, G>(
        mut self,
        experiment: &'static str,
        flags: toml::Table,
        defaults: (P, T, G),
        seed: Option<u64>,
    ) -> Result<(P, T, G, Pending), CliError>
    where
        P: Serialize + DeserializeOwned,
        T: Serialize + DeserializeOwned,
        G: Serialize + DeserializeOwned,
    {
        self.layers.params.push(flags);
        let p = overlay("params", &defaults.0, &self.layers.params)?;
        let t = overlay("tolerances", &defaults.1, &self.layers.tolerances)?;
        let g = overlay("grids", &defaults.2, &self.layers.grids)?;
        let seed = match (seed, self.seed) {
            (Some(_), Some(s)) => Some(s),
            (Some(d), None) => Some(d),
            (None, Some(_)) => return Err(CliError::Usage(format!("`{experiment}` takes no seed"))),
            (None, None) => None,
        };
        Ok((p, t, g, Pending { experiment, dir: self.dir, seed }))
    }
}

pub struct Pending {
    experiment: &'static str,
    dir: PathBuf,
    seed: Option<u64>,
}

impl Pending {
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn open(self, p: &impl Serialize, t: &impl Serialize, g: &impl Serialize) -> Result<Run, CliError> {
        Run::new(self.experiment, self.dir, p, t, g, self.seed)
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
