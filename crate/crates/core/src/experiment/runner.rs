//! Replicate execution and aggregation.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, GridSpec};
use super::output;
use super::snapshot::Snapshot;
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::rng::derive_seed;
use crate::society::{SocietyConfig, SocietyState};
use crate::theory::{regime_for, RegimeReport};

/// Seed of replicate `replicate` at grid point `point`.
pub fn replicate_seed(master: u64, point: usize, replicate: usize) -> u64 {
    derive_seed(derive_seed(master, point as u64), replicate as u64)
}

/// One finished (or failed) replicate.
#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub point: usize,
    pub replicate: usize,
    pub seed: u64,
    pub records: Vec<MetricsRecord>,
    pub snapshot: Option<Snapshot>,
    /// Panic or I/O message when the replicate aborted.
    pub error: Option<String>,
}

impl ReplicateOutcome {
    pub fn final_record(&self) -> Option<&MetricsRecord> {
        self.records.last()
    }
}

/// Mean and standard error over replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Zero for a single value.
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, stderr, count: n })
    }
}

/// Aggregates for one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub point: usize,
    pub society: SocietyConfig,
    pub completed: usize,
    pub failed: usize,
    /// Trailing-window gain at the end of each run.
    pub gain_window: Option<Estimate>,
    /// Instantaneous gain at the end of each run.
    pub gain_final: Option<Estimate>,
    pub variability: Option<Estimate>,
    pub dominant_count: Option<Estimate>,
    pub theory: RegimeReport,
}

impl PointSummary {
    fn from_outcomes(point: usize, society: SocietyConfig, outcomes: &[ReplicateOutcome]) -> Self {
        let finals: Vec<&MetricsRecord> = outcomes.iter().filter(|o| o.error.is_none()).filter_map(|o| o.final_record()).collect();
        let collect = |f: &dyn Fn(&MetricsRecord) -> Option<f64>| -> Option<Estimate> {
            Estimate::from_values(&finals.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
        };
        Self {
            point,
            completed: finals.len(),
            failed: outcomes.len() - finals.len(),
            gain_window: collect(&|r| Some(r.gain_window)),
            gain_final: collect(&|r| Some(r.gain)),
            variability: collect(&|r| r.variability),
            dominant_count: collect(&|r| Some(r.dominant_count() as f64)),
            theory: regime_for(&society),
            society,
        }
    }

    /// `λα / Γ`, or `None` when `Γ ≤ 0`.
    pub fn scaled_mutation(&self) -> Option<f64> {
        (self.theory.gamma > 0.0).then(|| self.theory.lambda_alpha / self.theory.gamma)
    }

    /// The headline indicator: mean trailing-window gain above one half.
    pub fn gain_above_half(&self) -> bool {
        self.gain_window.is_some_and(|g| g.mean > 0.5)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Indexed by point, then replicate.
    pub outcomes: Vec<Vec<ReplicateOutcome>>,
    pub summaries: Vec<PointSummary>,
}

impl ExperimentResult {
    pub fn failures(&self) -> impl Iterator<Item = &ReplicateOutcome> {
        self.outcomes.iter().flatten().filter(|o| o.error.is_some())
    }
}

/// Runs every replicate in memory; nothing is written.
pub fn run_in_memory(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    execute(config, jobs, None)
}

/// Runs every replicate and writes all outputs under `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    let dir = config.output_dir.clone();
    output::prepare_dir(&dir)?;
    let result = execute(config, jobs, Some(&dir))?;
    output::write_all(&result, &dir)?;
    Ok(result)
}

/// Expands `grid` over the experiment's base society and runs it.
pub fn sweep(config: &ExperimentConfig, grid: &GridSpec, jobs: usize) -> Result<ExperimentResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig(vec!["sweep grid must have at least one axis".into()]));
    }
    run_experiment(&config.clone().with_grid(grid), jobs)
}

fn execute(config: &ExperimentConfig, jobs: usize, log_dir: Option<&Path>) -> Result<ExperimentResult> {
    config.validate()?;
    config.check_budget()?;
    let points = config.resolved_points();
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..config.replicates).map(move |r| (p, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(vec![format!("cannot start worker pool: {e}")]))?;
    let log_dir: Option<PathBuf> = log_dir.filter(|_| config.log_interactions).map(Path::to_path_buf);
    let flat: Vec<ReplicateOutcome> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, r)| run_replicate(config, &points[p], p, r, log_dir.as_deref()))
            .collect()
    });
    let mut outcomes: Vec<Vec<ReplicateOutcome>> = vec![Vec::new(); points.len()];
    for o in flat {
        outcomes[o.point].push(o);
    }
    let summaries = points
        .iter()
        .enumerate()
        .map(|(p, society)| PointSummary::from_outcomes(p, society.clone(), &outcomes[p]))
        .collect();
    Ok(ExperimentResult { config: config.clone(), outcomes, summaries })
}

fn run_replicate(
    config: &ExperimentConfig,
    society: &SocietyConfig,
    point: usize,
    replicate: usize,
    log_dir: Option<&Path>,
) -> ReplicateOutcome {
    let seed = replicate_seed(society.seed, point, replicate);
    let attempt = panic::catch_unwind(AssertUnwindSafe(|| -> Result<(Vec<MetricsRecord>, Option<Snapshot>)> {
        let mut state = SocietyState::new(society.clone().with_seed(seed))?;
        let records = match log_dir {
            Some(dir) => {
                let mut log = output::InteractionLog::create(dir, point, replicate)?;
                let records = state.run_observed(config.duration, config.cadence, config.estimator, |rec| log.push(rec));
                log.finish()?;
                records
            }
            None => state.run_observed(config.duration, config.cadence, config.estimator, |_| {}),
        };
        let snapshot = config.snapshot.then(|| Snapshot::capture(&state));
        Ok((records, snapshot))
    }));
    let (records, snapshot, error) = match attempt {
        Ok(Ok((records, snapshot))) => (records, snapshot, None),
        Ok(Err(e)) => (Vec::new(), None, Some(e.to_string())),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "replicate panicked".to_string());
            (Vec::new(), None, Some(msg))
        }
    };
    ReplicateOutcome { point, replicate, seed, records, snapshot, error }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        let society = SocietyConfig::new(3, 4, 3, 0.1, 0.05, 0.5, 0.8).with_seed(4);
        ExperimentConfig::new(society, 20.0).with_replicates(3).with_cadence(5.0)
    }

    #[test]
    fn replicates_are_independent_and_reproducible() {
        let a = run_in_memory(&tiny(), 2).unwrap();
        let b = run_in_memory(&tiny(), 1).unwrap();
        assert_eq!(a.outcomes.len(), 1);
        let seeds: Vec<u64> = a.outcomes[0].iter().map(|o| o.seed).collect();
        assert_eq!(seeds.len(), 3);
        assert!(seeds[0] != seeds[1] && seeds[1] != seeds[2]);
        for (x, y) in a.outcomes[0].iter().zip(&b.outcomes[0]) {
            assert_eq!(x.records, y.records);
        }
        assert_eq!(a.summaries[0].completed, 3);
        assert_eq!(a.outcomes[0][0].records.len(), 5);
    }

    #[test]
    fn single_point_sweep_matches_plain_run() {
        let cfg = tiny();
        let grid = GridSpec { alpha: vec![cfg.society.alpha], ..GridSpec::default() };
        let plain = run_in_memory(&cfg, 1).unwrap();
        let swept = run_in_memory(&cfg.clone().with_grid(&grid), 1).unwrap();
        assert_eq!(plain.outcomes[0][2].records, swept.outcomes[0][2].records);
    }

    #[test]
    fn budget_refuses_before_running() {
        let mut cfg = tiny();
        cfg.step_budget = Some(100);
        assert!(matches!(run_in_memory(&cfg, 1), Err(Error::BudgetExceeded { required: 180, budget: 100 })));
    }

    #[test]
    fn estimate_matches_hand_computation() {
        let e = Estimate::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(Estimate::from_values(&[7.0]).unwrap().stderr, 0.0);
        assert!(Estimate::from_values(&[]).is_none());
    }
}
