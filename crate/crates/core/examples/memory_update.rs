// Incremental memory updates against the closed-form decayed-count sum.
//
// cargo run --release --example memory_update

use emergent_comm::memory::{batch_posterior_predictive, AssociationMemory, InteractionHistoryEntry};
use emergent_comm::rng::stream;
use emergent_comm::Result;
use rand::Rng;

/// Largest absolute difference between the two evaluations over `histories`.
pub fn max_discrepancy(histories: usize, length: usize, seed: u64) -> Result<f64> {
    let (meanings, signals, alpha, lambda) = (4, 3, 0.3, 0.05);
    let mut rng = stream(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..histories {
        let history: Vec<InteractionHistoryEntry> = (0..length)
            .map(|_| InteractionHistoryEntry {
                meaning: rng.gen_range(0..meanings),
                signal: rng.gen_range(0..signals),
                stored: rng.gen_bool(0.7),
            })
            .collect();
        let mut mem = AssociationMemory::new(meanings, signals, alpha, lambda)?;
        for e in &history {
            mem.record_interaction(e.meaning, e.signal, e.stored);
        }
        let batch = batch_posterior_predictive(&history, alpha, lambda, signals, meanings);
        for (m, row) in batch.iter().enumerate() {
            for (s, &p) in row.iter().enumerate() {
                worst = worst.max((p - mem.production_prob(m, s)).abs());
            }
        }
    }
    Ok(worst)
}

pub fn run_example() -> Result<f64> {
    max_discrepancy(200, 100, 3)
}

fn main() -> Result<()> {
    let mut mem = AssociationMemory::new(2, 3, 0.1, 0.01)?;
    mem.record_interaction(0, 1, true);
    println!("after one stored signal: {:?}", mem.production_distribution(0));
    println!("interpretation of signal 1 under uniform attention: {:?}", mem.interpretation_distribution(&[0.5, 0.5], 1));
    println!("max |incremental - batch| over 200 histories: {:.2e}", run_example()?);
    Ok(())
}
