// Draw attention pairs at prescribed certainty and alignment and recover both
// from the samples.
//
// cargo run --release --example attention_roundtrip

use emergent_comm::attention::{AlignmentEstimator, AttentionParams, AttentionSampler, CertaintyEstimator};
use emergent_comm::rng::stream;
use emergent_comm::{AttentionDraw, Result};

pub struct Recovered {
    pub certainty: f64,
    pub alignment: f64,
    pub certainty_hat: f64,
    pub alignment_hat: f64,
}

pub fn recover(meanings: usize, certainty: f64, alignment: f64, draws: usize, seed: u64) -> Result<Recovered> {
    let mut sampler = AttentionSampler::new(AttentionParams::new(meanings, certainty, alignment)?);
    let mut rng = stream(seed);
    let mut draw = AttentionDraw::zeros(meanings);
    let mut c_est = CertaintyEstimator::new(meanings);
    let mut a_est = AlignmentEstimator::new(meanings);
    for _ in 0..draws {
        sampler.sample_into(&mut rng, &mut draw);
        c_est.push(&draw.signaller);
        a_est.push(&draw.signaller, &draw.receiver);
    }
    Ok(Recovered {
        certainty,
        alignment,
        certainty_hat: c_est.estimate()?,
        alignment_hat: a_est.estimate()?,
    })
}

pub fn run_example() -> Result<Vec<Recovered>> {
    let mut out = Vec::new();
    for c in [0.1, 0.5, 0.9] {
        for a in [0.0, 0.5, 1.0] {
            out.push(recover(10, c, a, 20_000, 11)?);
        }
    }
    Ok(out)
}

fn main() -> Result<()> {
    println!("   C     A     C_hat   A_hat");
    for r in run_example()? {
        println!("{:.2}  {:.2}  {:.4}  {:.4}", r.certainty, r.alignment, r.certainty_hat, r.alignment_hat);
    }
    Ok(())
}
