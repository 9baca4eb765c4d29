//! Association memory of a single agent.
//!
//! Each meaning owns a row of exponentially decayed signal counts `n(s|m)`.
//! Production frequencies come from the Dirichlet–categorical posterior
//! predictive
//!
//! ```text
//! φ(s|m) = (n(s|m) + α/S) / (Σ_σ n(σ|m) + α)
//! ```
//!
//! The prior mass `α/S` is added at read time and never decays, so a row that
//! stops being reinforced drifts back to the uniform distribution.
//!
//! Decay runs on a per-meaning clock: a row is scaled by `1 - λ` only when its
//! meaning is the receiver's interpretation, whether or not the interaction is
//! then stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts below this are flushed to zero.
const COUNT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMemory {
    meanings: usize,
    signals: usize,
    alpha: f64,
    lambda: f64,
    /// Row-major `meanings × signals`.
    counts: Vec<f64>,
    /// Cached row sums of `counts`.
    totals: Vec<f64>,
    /// Cached `1 / (total + α)` per row.
    inv_mass: Vec<f64>,
}

impl AssociationMemory {
    /// An empty memory: every production row is uniform.
    pub fn new(meanings: usize, signals: usize, alpha: f64, lambda: f64) -> Result<Self> {
        validate_learning(meanings, signals, alpha, lambda)?;
        Ok(Self {
            meanings,
            signals,
            alpha,
            lambda,
            counts: vec![0.0; meanings * signals],
            totals: vec![0.0; meanings],
            inv_mass: vec![1.0 / alpha; meanings],
        })
    }

    /// Rebuilds a memory from a stored count table (`meanings` rows of `signals`).
    pub fn from_counts(counts: Vec<Vec<f64>>, signals: usize, alpha: f64, lambda: f64) -> Result<Self> {
        let meanings = counts.len();
        validate_learning(meanings, signals, alpha, lambda)?;
        if counts.iter().any(|row| row.len() != signals) {
            return Err(Error::InvalidConfig(vec![format!(
                "every count row must have {signals} entries"
            )]));
        }
        if counts.iter().flatten().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidConfig(vec!["counts must be finite and non-negative".into()]));
        }
        let flat: Vec<f64> = counts.into_iter().flatten().collect();
        let mut mem = Self {
            meanings,
            signals,
            alpha,
            lambda,
            counts: flat,
            totals: Vec::new(),
            inv_mass: Vec::new(),
        };
        mem.rebuild_totals();
        Ok(mem)
    }

    fn rebuild_totals(&mut self) {
        self.totals = self.counts.chunks(self.signals).map(|r| r.iter().sum()).collect();
        self.inv_mass = self.totals.iter().map(|t| 1.0 / (t + self.alpha)).collect();
    }

    pub fn meanings(&self) -> usize {
        self.meanings
    }

    pub fn signals(&self) -> usize {
        self.signals
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Decayed counts `n(·|m)`.
    pub fn counts_row(&self, meaning: usize) -> &[f64] {
        &self.counts[meaning * self.signals..(meaning + 1) * self.signals]
    }

    /// `Σ_s n(s|m)`.
    pub fn row_total(&self, meaning: usize) -> f64 {
        self.totals[meaning]
    }

    pub fn count_table(&self) -> Vec<Vec<f64>> {
        self.counts.chunks(self.signals).map(<[f64]>::to_vec).collect()
    }

    /// `φ(s|m)` for one cell.
    #[inline]
    pub fn production_prob(&self, meaning: usize, signal: usize) -> f64 {
        let prior = self.alpha / self.signals as f64;
        (self.counts[meaning * self.signals + signal] + prior) * self.inv_mass[meaning]
    }

    /// Writes `φ(·|m)` into `out`.
    pub fn production_into(&self, meaning: usize, out: &mut [f64]) {
        assert!(meaning < self.meanings, "meaning {meaning} out of range");
        let prior = self.alpha / self.signals as f64;
        let inv = self.inv_mass[meaning];
        for (o, &n) in out.iter_mut().zip(self.counts_row(meaning)) {
            *o = (n + prior) * inv;
        }
    }

    /// Posterior predictive production distribution `φ(·|m)`.
    pub fn production_distribution(&self, meaning: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.signals];
        self.production_into(meaning, &mut out);
        out
    }

    /// Full `M × S` table of production frequencies.
    pub fn production_table(&self) -> Vec<Vec<f64>> {
        (0..self.meanings).map(|m| self.production_distribution(m)).collect()
    }

    /// Writes the interpretation posterior `ψ(·|s) ∝ φ(s|·) ρ(·)` into `out`.
    pub fn interpretation_into(&self, receiver_weights: &[f64], signal: usize, out: &mut [f64]) {
        assert!(signal < self.signals, "signal {signal} out of range");
        assert_eq!(receiver_weights.len(), self.meanings);
        let mut total = 0.0;
        for (m, (o, &w)) in out.iter_mut().zip(receiver_weights).enumerate() {
            let v = self.production_prob(m, signal) * w;
            *o = v;
            total += v;
        }
        // φ > 0 everywhere while α > 0, and the weights sum to one.
        assert!(total > 0.0, "interpretation normaliser vanished");
        let inv = 1.0 / total;
        for o in out.iter_mut() {
            *o *= inv;
        }
    }

    /// Interpretation posterior `ψ(m|s)` given the receiver's attention.
    pub fn interpretation_distribution(&self, receiver_weights: &[f64], signal: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.meanings];
        self.interpretation_into(receiver_weights, signal, &mut out);
        out
    }

    /// Decays row `meaning` by `1 - λ` and, if `store`, adds one count for `signal`.
    pub fn record_interaction(&mut self, meaning: usize, signal: usize, store: bool) {
        assert!(meaning < self.meanings, "meaning {meaning} out of range");
        assert!(signal < self.signals, "signal {signal} out of range");
        let keep = 1.0 - self.lambda;
        let start = meaning * self.signals;
        let row = &mut self.counts[start..start + self.signals];
        let mut total = 0.0;
        for n in row.iter_mut() {
            let v = *n * keep;
            *n = if v < COUNT_FLOOR { 0.0 } else { v };
            total += *n;
        }
        if store {
            row[signal] += 1.0;
            total += 1.0;
        }
        self.totals[meaning] = total;
        self.inv_mass[meaning] = 1.0 / (total + self.alpha);
    }
}

fn validate_learning(meanings: usize, signals: usize, alpha: f64, lambda: f64) -> Result<()> {
    let mut problems = Vec::new();
    if meanings < 1 {
        problems.push("M must be at least 1".to_string());
    }
    if signals < 1 {
        problems.push("S must be at least 1".to_string());
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        problems.push(format!("alpha must be positive (got {alpha})"));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        problems.push(format!("lambda must lie in (0,1) (got {lambda})"));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(problems))
    }
}

/// One receiver-side event in an agent's learning history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionHistoryEntry {
    /// Interpreted meaning.
    pub meaning: usize,
    pub signal: usize,
    /// Whether the event was written to memory.
    pub stored: bool,
}

/// Production table computed directly from a history as a closed-form sum.
///
/// For meaning `m`, let `t = 1..T_m` enumerate the history entries interpreted
/// as `m`. Then
///
/// ```text
/// φ(s|m) = (Σ_t ω_t δ(s, σ_t) (1-λ)^(T_m - t) + α/S) / (Σ_t ω_t (1-λ)^(T_m - t) + α)
/// ```
///
/// This is the reference against which [`AssociationMemory::record_interaction`]
/// is checked.
pub fn batch_posterior_predictive(
    history: &[InteractionHistoryEntry],
    alpha: f64,
    lambda: f64,
    signals: usize,
    meanings: usize,
) -> Vec<Vec<f64>> {
    let mut by_meaning: Vec<Vec<&InteractionHistoryEntry>> = vec![Vec::new(); meanings];
    for e in history {
        assert!(e.meaning < meanings && e.signal < signals, "history entry out of range");
        by_meaning[e.meaning].push(e);
    }
    let prior = alpha / signals as f64;
    by_meaning
        .iter()
        .map(|entries| {
            let horizon = entries.len();
            let mut numer = vec![0.0; signals];
            let mut denom = 0.0;
            for (idx, e) in entries.iter().enumerate() {
                if !e.stored {
                    continue;
                }
                let age = (horizon - (idx + 1)) as i32;
                let w = (1.0 - lambda).powi(age);
                numer[e.signal] += w;
                denom += w;
            }
            numer.iter().map(|n| (n + prior) / (denom + alpha)).collect()
        })
        .collect()
}
