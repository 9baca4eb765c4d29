// Save a society's counts to JSON and continue from them later.
//
// cargo run --release --example snapshot_resume

use emergent_comm::experiment::Snapshot;
use emergent_comm::metrics::blind_success;
use emergent_comm::{Result, SocietyConfig, SocietyState};

/// Blind success before saving and after restoring.
pub fn round_trip(path: &std::path::Path) -> Result<(f64, f64)> {
    let mut state = SocietyState::new(SocietyConfig::new(5, 6, 6, 0.05, 0.02, 1.0, 1.0).with_seed(4))?;
    state.run(300.0, 100.0);
    Snapshot::capture(&state).save(path)?;
    let restored = Snapshot::load(path)?.restore()?;
    Ok((blind_success(state.memories()), blind_success(restored.memories())))
}

pub fn run_example() -> Result<(f64, f64)> {
    let path = std::env::temp_dir().join(format!("emergent-comm-snapshot-{}.json", std::process::id()));
    let out = round_trip(&path);
    let _ = std::fs::remove_file(&path);
    out
}

fn main() -> Result<()> {
    let (before, after) = run_example()?;
    println!("blind success before save {before:.6}, after restore {after:.6}");
    Ok(())
}
