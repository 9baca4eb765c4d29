// Tight constraints (C = A = 1): every interaction succeeds, conventions form
// by drift, and the number of distinct dominant signals follows the
// random-assignment distribution.
//
// cargo run --release --example tight_constraints -- 14 40 1e6

use emergent_comm::experiment::output::dominant_histogram;
use emergent_comm::experiment::{run_in_memory, ExperimentConfig};
use emergent_comm::theory::dominant_count_pmf;
use emergent_comm::{Result, SocietyConfig};

pub struct DominanceFit {
    pub meanings: usize,
    pub empirical: Vec<f64>,
    pub predicted: Vec<f64>,
    pub total_variation: f64,
}

pub fn dominance_fit(meanings: usize, replicates: usize, duration: f64, seed: u64) -> Result<DominanceFit> {
    let society = SocietyConfig::new(5, meanings, 12, 0.01, 0.01, 1.0, 1.0).with_seed(seed);
    let cfg = ExperimentConfig::new(society, duration)
        .with_replicates(replicates)
        .with_cadence(duration / 4.0);
    let result = run_in_memory(&cfg, 1)?;
    let counts = dominant_histogram(&result.outcomes[0], 12);
    let n: usize = counts.iter().sum();
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let predicted = dominant_count_pmf(12, meanings);
    let total_variation = 0.5 * empirical.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(DominanceFit { meanings, empirical, predicted, total_variation })
}

pub fn run_example() -> Result<DominanceFit> {
    dominance_fit(14, 6, 4000.0, 5)
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let fit = match args.as_slice() {
        [m, r, rest @ ..] => {
            let duration = rest.first().and_then(|t| t.parse().ok()).unwrap_or(1e6);
            dominance_fit(m.parse().unwrap_or(14), r.parse().unwrap_or(40), duration, 5)?
        }
        _ => run_example()?,
    };
    println!("M = {}, total variation = {:.3}", fit.meanings, fit.total_variation);
    println!(" D  empirical  predicted");
    for (d, (e, p)) in fit.empirical.iter().zip(&fit.predicted).enumerate() {
        if *e > 0.0 || *p > 1e-3 {
            println!("{d:2}  {e:9.3}  {p:9.3}");
        }
    }
    Ok(())
}
