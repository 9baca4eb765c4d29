//! Final-state snapshots.
//!
//! A snapshot is a JSON document:
//!
//! ```json
//! {
//!   "config_hash": "<sha-256 of the society config as JSON>",
//!   "clock": 20000.0,
//!   "steps": 100000,
//!   "society": { "N": 5, "M": 14, "S": 12, "alpha": 0.01, ... },
//!   "counts": [ [ [n(s|m) for s in 0..S] for m in 0..M ] for each agent ]
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::memory::AssociationMemory;
use crate::society::{SocietyConfig, SocietyState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub config_hash: String,
    pub clock: f64,
    pub steps: u64,
    pub society: SocietyConfig,
    /// Per agent, an `M × S` table of decayed counts.
    pub counts: Vec<Vec<Vec<f64>>>,
}

/// Hex SHA-256 of the config's JSON form.
pub fn config_hash(config: &SocietyConfig) -> String {
    let json = serde_json::to_vec(config).expect("society config serialises");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

impl Snapshot {
    pub fn capture(state: &SocietyState) -> Self {
        Self {
            config_hash: config_hash(state.config()),
            clock: state.clock(),
            steps: state.steps(),
            society: state.config().clone(),
            counts: state.memories().iter().map(AssociationMemory::count_table).collect(),
        }
    }

    /// Rebuilds a society with these memories; see [`SocietyState::resume`].
    pub fn restore(&self) -> Result<SocietyState> {
        if config_hash(&self.society) != self.config_hash {
            return Err(Error::InvalidConfig(vec!["snapshot config hash does not match its config".into()]));
        }
        let c = &self.society;
        let memories = self
            .counts
            .iter()
            .map(|table| AssociationMemory::from_counts(table.clone(), c.signals, c.alpha, c.lambda))
            .collect::<Result<Vec<_>>>()?;
        SocietyState::resume(c.clone(), memories, self.steps)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
