//! Parameter sets for the standard figures.
//!
//! | preset  | regime                     | fixed                                   | varied                          | duration |
//! |---------|----------------------------|-----------------------------------------|---------------------------------|----------|
//! | `fig5`  | tight constraints          | N=5, λ=0.01, C=A=1, S=12                | M ∈ {14,17,36}, α ∈ {0.05,0.01} | 2·10⁴    |
//! | `fig6`  | tight constraints          | N=5, λ=0.01, C=A=1, S=12, α=0.01        | M ∈ {14,17,36}                  | 2·10⁴    |
//! | `fig8`  | feedback                   | C=0, A=1, λ=0.01, S=12                  | M ∈ {24,36,48}, N ∈ {20,40}, α  | 5·10⁴    |
//! | `fig9`  | no feedback                | N=20, M=55, λ=0.01                      | S ∈ {5,11}, (C,A), λα/Γ         | 10⁵      |
//! | `fig10` | no feedback, phase diagram | N=20, M=55, λ=0.01, S=11, α=0.01        | C × A on a 6×6 lattice          | 10⁵      |
//!
//! Every preset runs 10 replicates per point.

use std::fmt;
use std::str::FromStr;

use super::config::{ExperimentConfig, GridSpec};
use crate::error::{Error, Result};
use crate::society::SocietyConfig;
use crate::theory::{threshold_gamma, ThresholdMode};

pub const PRESET_REPLICATES: usize = 10;
pub const PRESET_LAMBDA: f64 = 0.01;

/// α values swept by `fig8`.
pub const FIG8_ALPHAS: [f64; 15] = [0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 14.0, 17.0, 20.0, 25.0];
/// `(C, A)` combinations used by `fig9`.
pub const FIG9_ATTENTION: [(f64, f64); 3] = [(0.7, 1.0), (0.5, 1.0), (0.3, 1.0)];
/// Target values of `λα / Γ` for `fig9`.
pub const FIG9_RATIOS: [f64; 6] = [0.1, 0.3, 0.5, 0.8, 1.2, 2.0];
/// Lattice values of both `C` and `A` for `fig10`.
pub const FIG10_LATTICE: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const FIG10_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig5,
    Fig6,
    Fig8,
    Fig9,
    Fig10,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig5, Preset::Fig6, Preset::Fig8, Preset::Fig9, Preset::Fig10];

    pub fn parse(name: &str) -> Result<Self> {
        name.parse()
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig10 => "fig10",
        }
    }

    pub fn duration(self) -> f64 {
        match self {
            // 1.5 N M / λ² at the largest M: long enough for drift to settle each meaning.
            Preset::Fig5 | Preset::Fig6 => 2.7e6,
            Preset::Fig8 => 5e4,
            Preset::Fig9 | Preset::Fig10 => 1e5,
        }
    }

    /// Whether the output should carry the dominant-count histogram.
    pub fn wants_histogram(self) -> bool {
        matches!(self, Preset::Fig5 | Preset::Fig6)
    }

    /// Every parameter point, fully specified.
    pub fn points(self) -> Vec<SocietyConfig> {
        let tight = |m: usize, alpha: f64| SocietyConfig::new(5, m, 12, alpha, PRESET_LAMBDA, 1.0, 1.0);
        match self {
            Preset::Fig5 => {
                let mut out = Vec::new();
                for alpha in [0.05, 0.01] {
                    for m in [14, 17, 36] {
                        out.push(tight(m, alpha));
                    }
                }
                out
            }
            Preset::Fig6 => [14, 17, 36].into_iter().map(|m| tight(m, 0.01)).collect(),
            Preset::Fig8 => {
                let base = SocietyConfig::new(20, 24, 12, 1.0, PRESET_LAMBDA, 0.0, 1.0).with_feedback(true);
                let grid = GridSpec {
                    alpha: FIG8_ALPHAS.to_vec(),
                    meanings: vec![24, 36, 48],
                    agents: vec![20, 40],
                    ..GridSpec::default()
                };
                grid.expand(&base)
            }
            Preset::Fig9 => {
                let mut out = Vec::new();
                for s in [5, 11] {
                    for &(c, a) in &FIG9_ATTENTION {
                        for &ratio in &FIG9_RATIOS {
                            let alpha = alpha_for_ratio(ratio, PRESET_LAMBDA, c, a, 55)
                                .expect("fig9 attention combinations have positive threshold");
                            out.push(SocietyConfig::new(20, 55, s, alpha, PRESET_LAMBDA, c, a));
                        }
                    }
                }
                out
            }
            Preset::Fig10 => {
                let base = SocietyConfig::new(20, 55, 11, FIG10_ALPHA, PRESET_LAMBDA, 0.0, 0.0);
                let grid = GridSpec {
                    certainty: FIG10_LATTICE.to_vec(),
                    alignment: FIG10_LATTICE.to_vec(),
                    ..GridSpec::default()
                };
                grid.expand(&base)
            }
        }
    }

    /// The resolved experiment for this preset.
    pub fn experiment(self) -> ExperimentConfig {
        let points = self.points();
        let mut cfg = ExperimentConfig::new(points[0].clone(), self.duration())
            .with_replicates(PRESET_REPLICATES)
            .with_output_dir(format!("out/{}", self.name()));
        cfg.points = points;
        cfg.expanded_from = Some(self.name().to_string());
        cfg
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Finds `α` with `λα / Γ(α) = ratio` in the no-feedback regime, where `Γ`
/// uses the estimated variability (which itself depends weakly on `α`).
///
/// Returns `None` when `Γ` is not positive.
pub fn alpha_for_ratio(ratio: f64, lambda: f64, certainty: f64, alignment: f64, meanings: usize) -> Option<f64> {
    let gamma_at = |alpha: f64| {
        threshold_gamma(ThresholdMode::no_feedback_estimated(lambda, alpha, certainty, alignment, meanings))
    };
    let mut alpha = ratio * gamma_at(0.0) / lambda;
    if !(alpha > 0.0) {
        return None;
    }
    for _ in 0..100 {
        let next = ratio * gamma_at(alpha) / lambda;
        if !(next > 0.0) {
            return None;
        }
        if (next - alpha).abs() <= 1e-15 * alpha {
            return Some(next);
        }
        alpha = next;
    }
    Some(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
        }
        assert!(matches!(Preset::parse("fig7"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn tight_presets_match_their_table() {
        for p in [Preset::Fig5, Preset::Fig6] {
            for cfg in p.points() {
                assert_eq!((cfg.agents, cfg.signals), (5, 12));
                assert_eq!((cfg.lambda, cfg.certainty, cfg.alignment), (0.01, 1.0, 1.0));
                assert!([14, 17, 36].contains(&cfg.meanings));
                assert!(!cfg.feedback);
            }
        }
        let alphas: Vec<f64> = Preset::Fig5.points().iter().map(|c| c.alpha).collect();
        assert_eq!(alphas, vec![0.05, 0.05, 0.05, 0.01, 0.01, 0.01]);
        assert!(Preset::Fig6.points().iter().all(|c| c.alpha == 0.01));
        assert_eq!(Preset::Fig5.duration(), 2.7e6);
    }

    #[test]
    fn feedback_preset_matches_its_table() {
        let points = Preset::Fig8.points();
        assert_eq!(points.len(), FIG8_ALPHAS.len() * 6);
        for cfg in &points {
            assert!(cfg.feedback);
            assert_eq!((cfg.certainty, cfg.alignment, cfg.lambda, cfg.signals), (0.0, 1.0, 0.01, 12));
            assert!([24, 36, 48].contains(&cfg.meanings));
            assert!([20, 40].contains(&cfg.agents));
        }
        assert_eq!(Preset::Fig8.duration(), 5e4);
    }

    #[test]
    fn no_feedback_presets_match_their_table() {
        for cfg in Preset::Fig9.points().iter().chain(Preset::Fig10.points().iter()) {
            assert_eq!((cfg.meanings, cfg.lambda, cfg.agents), (55, 0.01, 20));
            assert!(!cfg.feedback);
        }
        assert!(Preset::Fig10.points().iter().all(|c| c.signals == 11 && c.alpha == FIG10_ALPHA));
        assert_eq!(Preset::Fig10.points().len(), 36);
        assert_eq!(Preset::Fig9.duration(), 1e5);
        assert_eq!(Preset::Fig10.experiment().replicates, 10);
    }

    #[test]
    fn solved_alpha_hits_the_ratio() {
        for cfg in Preset::Fig9.points() {
            let gamma = threshold_gamma(ThresholdMode::no_feedback_estimated(
                cfg.lambda,
                cfg.alpha,
                cfg.certainty,
                cfg.alignment,
                cfg.meanings,
            ));
            let ratio = cfg.lambda * cfg.alpha / gamma;
            assert!(FIG9_RATIOS.iter().any(|r| (r - ratio).abs() < 1e-12), "ratio {ratio}");
        }
        assert_eq!(alpha_for_ratio(0.5, 0.01, 0.5, 0.0, 55), None);
    }
}
