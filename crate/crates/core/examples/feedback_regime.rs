// With success feedback and fixed attention (C = 0), a code emerges when
// λα < 1/M and reaches the predicted communicative gain.
//
// cargo run --release --example feedback_regime

use emergent_comm::theory::regime_for;
use emergent_comm::{Result, SocietyConfig, SocietyState};

pub struct FeedbackRun {
    pub alpha: f64,
    pub regime: &'static str,
    pub predicted_gain: Option<f64>,
    pub gain_window: f64,
}

pub fn feedback_run(meanings: usize, alpha: f64, duration: f64, seed: u64) -> Result<FeedbackRun> {
    let cfg = SocietyConfig::new(20, meanings, 12, alpha, 0.01, 0.0, 1.0).with_feedback(true).with_seed(seed);
    let report = regime_for(&cfg);
    let mut state = SocietyState::new(cfg)?;
    let records = state.run(duration, duration / 50.0);
    Ok(FeedbackRun {
        alpha,
        regime: report.label(),
        predicted_gain: report.predicted_gain,
        gain_window: records.last().map_or(0.0, |r| r.gain_window),
    })
}

pub fn run_example() -> Result<Vec<FeedbackRun>> {
    [0.5, 30.0].into_iter().map(|a| feedback_run(12, a, 1500.0, 2)).collect()
}

fn main() -> Result<()> {
    println!("alpha   regime             predicted  measured");
    for a in [0.5, 1.0, 2.0, 8.0, 20.0] {
        let r = feedback_run(24, a, 2e4, 2)?;
        let p = r.predicted_gain.map_or("-".to_string(), |g| format!("{g:.3}"));
        println!("{:5.1}   {:17}  {:>9}  {:.3}", r.alpha, r.regime, p, r.gain_window);
    }
    Ok(())
}
