//! Files written by an experiment.
//!
//! ```text
//! <out>/
//!   config.resolved.toml        re-loadable, reproduces the run exactly
//!   manifest.json               seeds and status of every replicate
//!   aggregate.csv               one row per parameter point
//!   gain.svg                    mean gain against time, one line per point
//!   metrics/pPPP_rRRR.csv       time series of one replicate
//!   snapshots/pPPP_rRRR.json    final counts (with `snapshot`)
//!   interactions/pPPP_rRRR.csv  every interaction (with `log_interactions`)
//!   dominance_histogram.csv     tight-constraint presets only
//! ```
//!
//! Metrics columns: `time,p_s,gain,gain_window,variability,dominant_count`.
//! `variability` is empty when undefined.
//!
//! Aggregate columns: [`AGGREGATE_COLUMNS`]. Each `_mean`/`_se` pair is the
//! mean and standard error across replicates of the final row's value.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::presets::Preset;
use super::runner::{Estimate, ExperimentResult, ReplicateOutcome};
use super::svg;
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::society::InteractionRecord;
use crate::theory::dominant_count_pmf;

pub const METRICS_COLUMNS: [&str; 6] = ["time", "p_s", "gain", "gain_window", "variability", "dominant_count"];

pub const AGGREGATE_COLUMNS: [&str; 25] = [
    "point",
    "N",
    "M",
    "S",
    "alpha",
    "lambda",
    "C",
    "A",
    "feedback",
    "completed",
    "failed",
    "gain_window_mean",
    "gain_window_se",
    "gain_final_mean",
    "gain_final_se",
    "variability_mean",
    "variability_se",
    "dominant_count_mean",
    "dominant_count_se",
    "gamma",
    "lambda_alpha_over_gamma",
    "regime",
    "x_c",
    "predicted_gain",
    "gain_above_half",
];

pub const HISTOGRAM_COLUMNS: [&str; 7] = ["point", "M", "alpha", "D", "count", "empirical", "theory"];

pub const INTERACTION_COLUMNS: [&str; 6] = ["signaller", "receiver", "topic", "signal", "interpretation", "stored"];

fn replicate_stem(point: usize, replicate: usize) -> String {
    format!("p{point:03}_r{replicate:03}")
}

pub(crate) fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn subdir(dir: &Path, name: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    prepare_dir(&p)?;
    Ok(p)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// Streams interactions of one replicate to CSV.
pub(crate) struct InteractionLog {
    writer: csv::Writer<BufWriter<File>>,
    error: Option<csv::Error>,
}

impl InteractionLog {
    pub(crate) fn create(dir: &Path, point: usize, replicate: usize) -> Result<Self> {
        let dir = subdir(dir, "interactions")?;
        let mut writer = create(&dir.join(format!("{}.csv", replicate_stem(point, replicate))))?;
        writer.write_record(INTERACTION_COLUMNS)?;
        Ok(Self { writer, error: None })
    }

    pub(crate) fn push(&mut self, rec: &InteractionRecord) {
        if self.error.is_some() {
            return;
        }
        let row = [
            rec.signaller.to_string(),
            rec.receiver.to_string(),
            rec.topic.to_string(),
            rec.signal.to_string(),
            rec.interpretation.to_string(),
            (rec.stored as u8).to_string(),
        ];
        if let Err(e) = self.writer.write_record(&row) {
            self.error = Some(e);
        }
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.writer.flush().map_err(|e| Error::io("interaction log", e))
    }
}

/// Writes one replicate's time series.
pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(METRICS_COLUMNS)?;
    for r in records {
        w.write_record([
            r.time.to_string(),
            r.p_s.to_string(),
            r.gain.to_string(),
            r.gain_window.to_string(),
            opt(r.variability),
            r.dominant_count().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the per-point aggregate table.
pub fn write_aggregate_csv(path: &Path, result: &ExperimentResult) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(AGGREGATE_COLUMNS)?;
    let split = |e: Option<Estimate>| (opt(e.map(|e| e.mean)), opt(e.map(|e| e.stderr)));
    for s in &result.summaries {
        let c = &s.society;
        let (gw, gw_se) = split(s.gain_window);
        let (gf, gf_se) = split(s.gain_final);
        let (v, v_se) = split(s.variability);
        let (d, d_se) = split(s.dominant_count);
        w.write_record([
            s.point.to_string(),
            c.agents.to_string(),
            c.meanings.to_string(),
            c.signals.to_string(),
            c.alpha.to_string(),
            c.lambda.to_string(),
            c.certainty.to_string(),
            c.alignment.to_string(),
            c.feedback.to_string(),
            s.completed.to_string(),
            s.failed.to_string(),
            gw,
            gw_se,
            gf,
            gf_se,
            v,
            v_se,
            d,
            d_se,
            s.theory.gamma.to_string(),
            opt(s.scaled_mutation()),
            s.theory.label().to_string(),
            opt(s.theory.x_c),
            opt(s.theory.predicted_gain),
            s.gain_above_half().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Empirical distribution of the final dominant-signal count next to the
/// random-assignment prediction, for every point.
pub fn write_histogram_csv(path: &Path, result: &ExperimentResult) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(HISTOGRAM_COLUMNS)?;
    for (p, outcomes) in result.outcomes.iter().enumerate() {
        let c = &result.summaries[p].society;
        let counts = dominant_histogram(outcomes, c.signals);
        let total: usize = counts.iter().sum();
        let pmf = dominant_count_pmf(c.signals, c.meanings);
        for d in 0..=c.signals {
            let empirical = if total > 0 { counts[d] as f64 / total as f64 } else { 0.0 };
            w.write_record([
                p.to_string(),
                c.meanings.to_string(),
                c.alpha.to_string(),
                d.to_string(),
                counts[d].to_string(),
                empirical.to_string(),
                pmf[d].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Counts of the final dominant-signal count `D = 0..=signals` over replicates.
pub fn dominant_histogram(outcomes: &[ReplicateOutcome], signals: usize) -> Vec<usize> {
    let mut counts = vec![0; signals + 1];
    for r in outcomes.iter().filter_map(|o| o.final_record()) {
        counts[r.dominant_count()] += 1;
    }
    counts
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    point: usize,
    replicate: usize,
    seed: u64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    metrics: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: String,
    expanded_from: Option<&'a str>,
    config: &'static str,
    duration: f64,
    cadence: f64,
    points: usize,
    replicates_per_point: usize,
    total_steps: u64,
    failed: usize,
    replicates: Vec<ManifestEntry<'a>>,
}

/// Writes every output file for a finished experiment.
pub fn write_all(result: &ExperimentResult, dir: &Path) -> Result<()> {
    let cfg = &result.config;
    let resolved = dir.join("config.resolved.toml");
    fs::write(&resolved, cfg.to_toml()).map_err(|e| Error::io(&resolved, e))?;

    let metrics_dir = subdir(dir, "metrics")?;
    let snapshot_dir = if cfg.snapshot { Some(subdir(dir, "snapshots")?) } else { None };
    let mut entries = Vec::new();
    for o in result.outcomes.iter().flatten() {
        let stem = replicate_stem(o.point, o.replicate);
        let metrics = if o.error.is_none() {
            write_metrics_csv(&metrics_dir.join(format!("{stem}.csv")), &o.records)?;
            Some(format!("metrics/{stem}.csv"))
        } else {
            None
        };
        if let (Some(sd), Some(snap)) = (&snapshot_dir, &o.snapshot) {
            snap.save(sd.join(format!("{stem}.json")))?;
        }
        entries.push(ManifestEntry {
            point: o.point,
            replicate: o.replicate,
            seed: o.seed,
            status: if o.error.is_none() { "ok" } else { "failed" },
            error: o.error.as_deref(),
            metrics,
        });
    }

    write_aggregate_csv(&dir.join("aggregate.csv"), result)?;
    let wants_histogram = cfg
        .expanded_from
        .as_deref()
        .and_then(|n| Preset::parse(n).ok())
        .is_some_and(Preset::wants_histogram);
    if wants_histogram {
        write_histogram_csv(&dir.join("dominance_histogram.csv"), result)?;
    }
    svg::write_gain_chart(&dir.join("gain.svg"), result)?;

    let manifest = Manifest {
        generator: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        expanded_from: cfg.expanded_from.as_deref(),
        config: "config.resolved.toml",
        duration: cfg.duration,
        cadence: cfg.cadence,
        points: result.summaries.len(),
        replicates_per_point: cfg.replicates,
        total_steps: cfg.total_steps(),
        failed: result.failures().count(),
        replicates: entries,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
