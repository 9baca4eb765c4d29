//! Experiment files.
//!
//! An experiment is a TOML document. Either a `[society]` table or a `preset`
//! name is required; a `[grid]` table turns a single run into a sweep.
//!
//! ```toml
//! duration = 20000.0
//! cadence = 200.0        # default: duration / 100
//! replicates = 4         # default: 1
//! output_dir = "out/tight"
//!
//! [society]
//! N = 5
//! M = 14
//! S = 12
//! alpha = 0.01
//! lambda = 0.01
//! C = 1.0
//! A = 1.0
//!
//! [grid]
//! alpha = [0.01, 0.05]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::Preset;
use crate::error::{Error, Result};
use crate::metrics::SuccessEstimator;
use crate::society::SocietyConfig;

/// Cartesian axes over society parameters. Empty axes keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    #[serde(rename = "C", default, skip_serializing_if = "Vec::is_empty")]
    pub certainty: Vec<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Vec::is_empty")]
    pub alignment: Vec<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Vec::is_empty")]
    pub meanings: Vec<usize>,
    #[serde(rename = "S", default, skip_serializing_if = "Vec::is_empty")]
    pub signals: Vec<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<usize>,
}

impl GridSpec {
    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
            && self.certainty.is_empty()
            && self.alignment.is_empty()
            && self.meanings.is_empty()
            && self.signals.is_empty()
            && self.agents.is_empty()
    }

    /// Expands the axes over `base`, varying `alpha` fastest.
    pub fn expand(&self, base: &SocietyConfig) -> Vec<SocietyConfig> {
        fn axis<T: Copy>(values: &[T], fallback: T) -> Vec<T> {
            if values.is_empty() {
                vec![fallback]
            } else {
                values.to_vec()
            }
        }
        let mut out = Vec::new();
        for &n in &axis(&self.agents, base.agents) {
            for &s in &axis(&self.signals, base.signals) {
                for &m in &axis(&self.meanings, base.meanings) {
                    for &a in &axis(&self.alignment, base.alignment) {
                        for &c in &axis(&self.certainty, base.certainty) {
                            for &alpha in &axis(&self.alpha, base.alpha) {
                                let mut cfg = base.clone();
                                cfg.agents = n;
                                cfg.signals = s;
                                cfg.meanings = m;
                                cfg.alignment = a;
                                cfg.certainty = c;
                                cfg.alpha = alpha;
                                if cfg.meanings != base.meanings {
                                    cfg.mean_weights = None;
                                }
                                out.push(cfg);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// The file layout, before defaults and presets are applied.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    society: Option<SocietyConfig>,
    duration: Option<f64>,
    cadence: Option<f64>,
    replicates: Option<usize>,
    output_dir: Option<PathBuf>,
    preset: Option<String>,
    grid: Option<GridSpec>,
    #[serde(default)]
    estimator: SuccessEstimator,
    step_budget: Option<u64>,
    #[serde(default)]
    snapshot: bool,
    #[serde(default)]
    log_interactions: bool,
    expanded_from: Option<String>,
    points: Option<Vec<SocietyConfig>>,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub duration: f64,
    pub cadence: f64,
    pub replicates: usize,
    pub output_dir: PathBuf,
    /// Preset this experiment was expanded from, kept as a label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expanded_from: Option<String>,
    #[serde(default)]
    pub estimator: SuccessEstimator,
    /// Refuse to start when the total step count would exceed this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_budget: Option<u64>,
    /// Write final count tables for every replicate.
    #[serde(default)]
    pub snapshot: bool,
    /// Write every interaction of every replicate (large).
    #[serde(default)]
    pub log_interactions: bool,
    pub society: SocietyConfig,
    /// Explicit parameter points; empty means a single run of `society`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<SocietyConfig>,
}

impl ExperimentConfig {
    /// A single-point experiment with default cadence and one replicate.
    pub fn new(society: SocietyConfig, duration: f64) -> Self {
        Self {
            duration,
            cadence: duration / 100.0,
            replicates: 1,
            output_dir: PathBuf::from("out"),
            expanded_from: None,
            estimator: SuccessEstimator::Exact,
            step_budget: None,
            snapshot: false,
            log_interactions: false,
            society,
            points: Vec::new(),
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_cadence(mut self, cadence: f64) -> Self {
        self.cadence = cadence;
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = dir.into();
        self
    }

    pub fn with_grid(mut self, grid: &GridSpec) -> Self {
        self.points = grid.expand(&self.society);
        self
    }

    /// Parameter points to run, in output order.
    pub fn resolved_points(&self) -> Vec<SocietyConfig> {
        if self.points.is_empty() {
            vec![self.society.clone()]
        } else {
            self.points.clone()
        }
    }

    /// Overrides the master seed of the base and of every point.
    pub fn set_seed(&mut self, seed: u64) {
        self.society.seed = seed;
        for p in &mut self.points {
            p.seed = seed;
        }
    }

    /// Total interaction steps over all points and replicates.
    pub fn total_steps(&self) -> u64 {
        self.resolved_points()
            .iter()
            .map(|p| p.steps_for(self.duration))
            .sum::<u64>()
            .saturating_mul(self.replicates as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            problems.push(format!("duration must be positive (got {})", self.duration));
        }
        if !(self.cadence > 0.0 && self.cadence.is_finite()) {
            problems.push(format!("cadence must be positive (got {})", self.cadence));
        }
        if self.replicates < 1 {
            problems.push("replicates must be at least 1".to_string());
        }
        if let SuccessEstimator::Sampled { pairs } = self.estimator {
            if pairs == 0 {
                problems.push("estimator pairs must be at least 1".to_string());
            }
        }
        let mut check = |cfg: &SocietyConfig, label: String| {
            if let Err(Error::InvalidConfig(list)) = cfg.validate() {
                problems.extend(list.into_iter().map(|p| format!("{label}{p}")));
            }
        };
        check(&self.society, String::new());
        for (i, p) in self.points.iter().enumerate() {
            check(p, format!("point {i}: "));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// Fails with the required step count when it exceeds the configured budget.
    pub fn check_budget(&self) -> Result<()> {
        match self.step_budget {
            Some(budget) if self.total_steps() > budget => {
                Err(Error::BudgetExceeded { required: self.total_steps(), budget })
            }
            _ => Ok(()),
        }
    }

    /// Serialises the resolved form; `parse_config` reads it back unchanged.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config is always representable as TOML")
    }
}

/// Reads and resolves an experiment file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// Parses experiment text; `origin` only labels errors.
pub fn parse_config(text: &str, origin: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let origin = origin.as_ref();
    let parse_error = |e: toml::de::Error| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((0, 0));
        Error::Parse { path: origin.to_path_buf(), line, column, message: e.message().to_string() }
    };
    let raw: RawConfig = toml::from_str(text).map_err(parse_error)?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let mut cfg = match (&raw.preset, raw.society) {
        (Some(name), None) => Preset::parse(name)?.experiment(),
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig(vec!["give either preset or [society], not both".into()]));
        }
        (None, Some(society)) => {
            let duration = raw.duration.ok_or_else(|| Error::InvalidConfig(vec!["duration is required".into()]))?;
            ExperimentConfig::new(society, duration)
        }
        (None, None) => {
            return Err(Error::InvalidConfig(vec!["a [society] table or a preset is required".into()]));
        }
    };
    if let Some(d) = raw.duration {
        if raw.cadence.is_none() {
            cfg.cadence = d / 100.0;
        }
        cfg.duration = d;
    }
    if let Some(c) = raw.cadence {
        cfg.cadence = c;
    }
    if let Some(r) = raw.replicates {
        cfg.replicates = r;
    }
    if let Some(dir) = raw.output_dir {
        cfg.output_dir = dir;
    }
    match (raw.points, raw.grid) {
        (Some(_), Some(g)) if !g.is_empty() => {
            return Err(Error::InvalidConfig(vec!["give either points or [grid], not both".into()]));
        }
        (Some(points), _) => cfg.points = points,
        (None, Some(grid)) if !grid.is_empty() => cfg = cfg.with_grid(&grid),
        _ => {}
    }
    if raw.expanded_from.is_some() {
        cfg.expanded_from = raw.expanded_from;
    }
    cfg.estimator = raw.estimator;
    cfg.step_budget = raw.step_budget.or(cfg.step_budget);
    cfg.snapshot |= raw.snapshot;
    cfg.log_interactions |= raw.log_interactions;
    cfg.validate()?;
    Ok(cfg)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "duration = 50.0\n[society]\nM = 3\nS = 2\nalpha = 0.1\nlambda = 0.01\nC = 0.5\nA = 1.0\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_config(MINIMAL, "mem").unwrap();
        assert_eq!(cfg.society.agents, 20);
        assert_eq!(cfg.society.network, crate::society::Network::Complete);
        assert_eq!(cfg.cadence, 0.5);
        assert_eq!(cfg.replicates, 1);
        assert!(!cfg.society.feedback);
    }

    #[test]
    fn out_of_range_certainty_is_named() {
        let text = MINIMAL.replace("C = 0.5", "C = 1.5");
        let err = parse_config(&text, "mem").unwrap_err().to_string();
        assert!(err.contains("C must lie in [0,1]"), "{err}");
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = MINIMAL.replace("alpha = 0.1", "alpha = 0.1\nbeta = 2");
        match parse_config(&text, "mem").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 6);
                assert!(message.contains("beta"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn preset_expands_fully() {
        let cfg = parse_config("preset = \"fig9\"\n", "mem").unwrap();
        let points = cfg.resolved_points();
        assert!(points.iter().all(|p| p.meanings == 55 && p.lambda == 0.01 && p.agents == 20));
        let mut signals: Vec<_> = points.iter().map(|p| p.signals).collect();
        signals.dedup();
        assert_eq!(signals, vec![5, 11]);
    }

    #[test]
    fn preset_and_society_conflict() {
        let text = format!("preset = \"fig5\"\n{MINIMAL}");
        assert!(matches!(parse_config(&text, "mem"), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn grid_expands_cartesian() {
        let text = format!("{MINIMAL}[grid]\nalpha = [0.1, 0.2]\nC = [0.2, 0.4, 0.6]\n");
        let cfg = parse_config(&text, "mem").unwrap();
        assert_eq!(cfg.points.len(), 6);
        assert_eq!(cfg.points[1].alpha, 0.2);
        assert_eq!(cfg.points[1].certainty, 0.2);
    }

    #[test]
    fn resolved_round_trip() {
        let text = MINIMAL.replacen("\n", "\nreplicates = 3\n", 1) + "[grid]\nA = [0.5, 1.0]\n";
        let cfg = parse_config(&text, "mem").unwrap();
        let again = parse_config(&cfg.to_toml(), "resolved").unwrap();
        assert_eq!(cfg, again);
        let preset = parse_config("preset = \"fig8\"\n", "mem").unwrap();
        assert_eq!(parse_config(&preset.to_toml(), "resolved").unwrap(), preset);
    }

    #[test]
    fn budget_is_enforced() {
        let mut cfg = parse_config(MINIMAL, "mem").unwrap();
        cfg.step_budget = Some(10);
        match cfg.check_budget() {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, 1000);
                assert_eq!(budget, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
