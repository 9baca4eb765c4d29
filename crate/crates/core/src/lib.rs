//! Bootstrapping a shared signalling system in a society of statistical learners.
//!
//! Agents interact in pairs. The signaller picks a topic from its momentary
//! attention over `M` meanings and produces one of `S` signals from a decaying
//! count memory; the receiver infers a meaning by combining its own attention
//! with its memory, and then writes what it inferred back to memory. Whether a
//! society-wide code emerges depends on how concentrated attention is
//! ([`attention`] certainty `C`), how well the two parties' attention lines up
//! (alignment `A`), and whether success feedback gates learning.
//!
//! The crate is split into:
//!
//! * [`attention`]: Dirichlet attention pairs with prescribed certainty and alignment.
//! * [`memory`]: per-agent association memory (production, interpretation, update).
//! * [`society`]: the interaction engine.
//! * [`metrics`]: blind success, communicative gain, variability and dominance.
//! * [`theory`]: closed-form predictions for the three regimes.
//! * [`experiment`]: configuration files, figure presets, sweeps and CSV output.

pub mod attention;
pub mod error;
pub mod experiment;
pub mod memory;
pub mod metrics;
pub mod rng;
pub mod society;
pub mod theory;

pub use attention::{AttentionDraw, AttentionParams, AttentionSampler};
pub use error::{Error, Result};
pub use memory::{AssociationMemory, InteractionHistoryEntry};
pub use metrics::{DominanceProfile, MetricsRecord};
pub use society::{InteractionRecord, Network, SocietyConfig, SocietyState};
pub use theory::{RegimeReport, ThresholdMode};
