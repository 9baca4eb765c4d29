// Without feedback, communication can only be bootstrapped when the receiver's
// attention follows the signaller's. Compares aligned and unaligned societies.
//
// cargo run --release --example shared_intentionality

use emergent_comm::theory::regime_for;
use emergent_comm::{Result, SocietyConfig, SocietyState};

pub struct AlignmentRun {
    pub alignment: f64,
    pub gamma: f64,
    pub gain: f64,
    pub variability: Option<f64>,
}

pub fn alignment_run(alignment: f64, duration: f64, seed: u64) -> Result<AlignmentRun> {
    let cfg = SocietyConfig::new(10, 20, 5, 0.05, 0.01, 0.5, alignment).with_seed(seed);
    let gamma = regime_for(&cfg).gamma;
    let mut state = SocietyState::new(cfg)?;
    let last = state.run(duration, duration / 20.0).pop().expect("non-empty run");
    Ok(AlignmentRun { alignment, gamma, gain: last.gain_window, variability: last.variability })
}

pub fn run_example() -> Result<Vec<AlignmentRun>> {
    [0.0, 1.0].into_iter().map(|a| alignment_run(a, 3000.0, 8)).collect()
}

fn main() -> Result<()> {
    println!("   A    Gamma      gain    V");
    for a in [0.0, 0.5, 0.9, 1.0] {
        let r = alignment_run(a, 1e5, 8)?;
        println!("{:.2}  {:+.5}  {:.3}  {:?}", r.alignment, r.gamma, r.gain, r.variability);
    }
    Ok(())
}
