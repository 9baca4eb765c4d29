// Closed-form predictions: regime against α with feedback, and the
// dominant-signal distribution under tight constraints.
//
// cargo run --release --example theory_table

use emergent_comm::theory::{dominant_count_pmf, regime_for, RegimeReport};
use emergent_comm::SocietyConfig;

pub fn feedback_table(meanings: usize, alphas: &[f64]) -> Vec<(f64, RegimeReport)> {
    alphas
        .iter()
        .map(|&a| (a, regime_for(&SocietyConfig::new(20, meanings, 12, a, 0.01, 0.0, 1.0).with_feedback(true))))
        .collect()
}

pub fn run_example() -> (Vec<(f64, RegimeReport)>, Vec<f64>) {
    (feedback_table(24, &[1.0, 4.0, 8.0, 14.0]), dominant_count_pmf(12, 36))
}

fn main() {
    let (table, pmf) = run_example();
    println!("alpha  regime             x_c     G");
    for (a, r) in &table {
        println!(
            "{a:5.1}  {:17}  {:6}  {}",
            r.label(),
            r.x_c.map_or("-".into(), |x| format!("{x:.4}")),
            r.predicted_gain.map_or("-".into(), |g| format!("{g:.4}"))
        );
    }
    println!("\nP(D) for S = 12, M = 36");
    for (d, p) in pmf.iter().enumerate().filter(|(_, p)| **p > 1e-6) {
        println!("{d:2}  {p:.6}");
    }
}
