// Two fully aligned agents with two signals: a small disagreement grows the
// shared preference when 8Cε² exceeds λα.
//
// cargo run --release --example two_agents

use emergent_comm::theory::{integrate_two_agent, two_agent_dynamics};

pub struct TwoAgentCase {
    pub epsilon: f64,
    pub lambda_alpha: f64,
    pub grows: bool,
    pub predicted: bool,
}

pub fn case(epsilon: f64, lambda_alpha: f64, certainty: f64) -> TwoAgentCase {
    let (lambda, meanings, offset) = (0.01, 10, 1e-3);
    let alpha = lambda_alpha / lambda;
    let start = (0.5 + offset + epsilon, 0.5 + offset - epsilon);
    let (p, q) = integrate_two_agent(start, certainty, lambda, alpha, meanings, 1.0, 100);
    let threshold = two_agent_dynamics(start.0, start.1, certainty, lambda, alpha, meanings)
        .growth_threshold
        .expect("positive certainty");
    TwoAgentCase {
        epsilon,
        lambda_alpha,
        grows: 0.5 * (p + q) > 0.5 * (start.0 + start.1),
        predicted: epsilon * epsilon > threshold,
    }
}

pub fn run_example() -> Vec<TwoAgentCase> {
    let mut out = Vec::new();
    for eps in [0.02, 0.05, 0.1, 0.2, 0.3] {
        for la in [1e-4, 5e-4, 3e-3, 0.02, 0.1] {
            out.push(case(eps, la, 0.5));
        }
    }
    out
}

fn main() {
    println!("eps    lambda*alpha  grows  8C eps^2 > lambda*alpha");
    for c in run_example() {
        println!("{:.2}   {:<12}  {:<5}  {}", c.epsilon, c.lambda_alpha, c.grows, c.predicted);
    }
}
