// Predicted regime over the (C, A) plane for no-feedback learning.
//
// cargo run --release --example phase_diagram -- 0.01

use emergent_comm::theory::regime_for;
use emergent_comm::SocietyConfig;

/// Rows are `C` (increasing), columns are `A` (increasing).
pub fn regime_map(alpha: f64, lattice: &[f64]) -> Vec<Vec<&'static str>> {
    lattice
        .iter()
        .map(|&c| {
            lattice
                .iter()
                .map(|&a| regime_for(&SocietyConfig::new(20, 55, 11, alpha, 0.01, c, a)).label())
                .collect()
        })
        .collect()
}

pub fn run_example() -> Vec<Vec<&'static str>> {
    regime_map(0.01, &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
}

fn main() {
    let alpha = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.01);
    let lattice: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    println!("alpha = {alpha}; E emergent, B bistable, . none");
    println!("C\\A  {}", lattice.iter().map(|a| format!("{a:.1}")).collect::<Vec<_>>().join(" "));
    for (c, row) in lattice.iter().zip(regime_map(alpha, &lattice)) {
        let cells: String = row
            .iter()
            .map(|l| match *l {
                "emergent" => "  E ",
                "bistable" => "  B ",
                _ => "  . ",
            })
            .collect();
        println!("{c:.1} {cells}");
    }
}
