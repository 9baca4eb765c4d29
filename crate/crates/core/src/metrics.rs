//! Communicative performance of a society snapshot.
//!
//! All measurements read production frequencies only. The blind success
//! probability asks how often a random ordered pair would communicate a
//! uniformly random meaning if the receiver had no attentional hint:
//!
//! ```text
//! p_s = 1/(N(N-1)) Σ_{i≠j} (1/M) Σ_m Σ_s φ_i(s|m) φ_j(s|m) / Σ_μ φ_j(s|μ)
//! ```
//!
//! and the gain `G = (M p_s - 1)/(S - 1)` rescales it so that the uniform state
//! is 0 and a perfect code (when `M = S`) is 1.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::memory::AssociationMemory;

/// Fraction of a run, counted back from its end, that window averages cover.
pub const WINDOW_FRACTION: f64 = 0.2;

const DEGENERATE: f64 = 1e-12;

/// Production frequencies of every agent, `N × M × S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionSnapshot {
    agents: usize,
    meanings: usize,
    signals: usize,
    phi: Vec<f64>,
}

impl ProductionSnapshot {
    pub fn from_memories(memories: &[AssociationMemory]) -> Self {
        let agents = memories.len();
        assert!(agents > 0, "snapshot of an empty society");
        let (meanings, signals) = (memories[0].meanings(), memories[0].signals());
        let mut phi = vec![0.0; agents * meanings * signals];
        for (a, mem) in memories.iter().enumerate() {
            for m in 0..meanings {
                let start = (a * meanings + m) * signals;
                mem.production_into(m, &mut phi[start..start + signals]);
            }
        }
        Self {
            agents,
            meanings,
            signals,
            phi,
        }
    }

    /// Snapshot from explicit per-agent `M × S` tables.
    pub fn from_tables(tables: &[Vec<Vec<f64>>]) -> Self {
        let agents = tables.len();
        assert!(agents > 0, "snapshot of an empty society");
        let meanings = tables[0].len();
        let signals = tables[0][0].len();
        let mut phi = Vec::with_capacity(agents * meanings * signals);
        for t in tables {
            assert_eq!(t.len(), meanings, "ragged production tables");
            for row in t {
                assert_eq!(row.len(), signals, "ragged production tables");
                phi.extend_from_slice(row);
            }
        }
        Self {
            agents,
            meanings,
            signals,
            phi,
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn meanings(&self) -> usize {
        self.meanings
    }

    pub fn signals(&self) -> usize {
        self.signals
    }

    /// `φ_agent(·|meaning)`.
    pub fn row(&self, agent: usize, meaning: usize) -> &[f64] {
        let start = (agent * self.meanings + meaning) * self.signals;
        &self.phi[start..start + self.signals]
    }

    fn table(&self, agent: usize) -> &[f64] {
        let len = self.meanings * self.signals;
        &self.phi[agent * len..(agent + 1) * len]
    }

    /// `φ_j(s|m) / Σ_μ φ_j(s|μ)` for one agent, laid out `M × S`.
    fn receiver_table(&self, agent: usize) -> Vec<f64> {
        let (m_n, s_n) = (self.meanings, self.signals);
        let table = self.table(agent);
        let mut col = vec![0.0; s_n];
        for row in table.chunks(s_n) {
            for (c, v) in col.iter_mut().zip(row) {
                *c += v;
            }
        }
        let mut out = table.to_vec();
        for row in out.chunks_mut(s_n) {
            for (v, c) in row.iter_mut().zip(&col) {
                *v /= c;
            }
        }
        debug_assert_eq!(out.len(), m_n * s_n);
        out
    }

    /// Society-mean production table `(1/N) Σ_ℓ φ_ℓ(s|m)`, flattened `M × S`.
    pub fn mean_table(&self) -> Vec<f64> {
        let len = self.meanings * self.signals;
        let mut mean = vec![0.0; len];
        for a in 0..self.agents {
            for (acc, v) in mean.iter_mut().zip(self.table(a)) {
                *acc += v;
            }
        }
        let inv = 1.0 / self.agents as f64;
        mean.iter_mut().for_each(|v| *v *= inv);
        mean
    }
}

/// How the blind success probability is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessEstimator {
    /// All ordered pairs, `O(N² M S)`.
    #[default]
    Exact,
    /// Mean over this many random ordered pairs, with a standard error.
    Sampled { pairs: usize },
}

fn pair_success(sender: &[f64], receiver: &[f64], meanings: usize) -> f64 {
    sender.iter().zip(receiver).map(|(a, b)| a * b).sum::<f64>() / meanings as f64
}

/// Exact blind success probability over all ordered pairs.
pub fn blind_success_exact(snap: &ProductionSnapshot) -> f64 {
    let n = snap.agents;
    assert!(n >= 2, "blind success needs at least two agents");
    let receivers: Vec<Vec<f64>> = (0..n).map(|j| snap.receiver_table(j)).collect();
    let mut total = 0.0;
    for i in 0..n {
        let sender = snap.table(i);
        for (j, recv) in receivers.iter().enumerate() {
            if i != j {
                total += pair_success(sender, recv, snap.meanings);
            }
        }
    }
    total / (n * (n - 1)) as f64
}

/// Pair-sampled blind success: `(estimate, standard error)`.
pub fn blind_success_sampled<R: Rng + ?Sized>(snap: &ProductionSnapshot, pairs: usize, rng: &mut R) -> (f64, f64) {
    let n = snap.agents;
    assert!(n >= 2, "blind success needs at least two agents");
    assert!(pairs >= 2, "sampled blind success needs at least two pairs");
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; n];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..pairs {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let recv = cache[j].get_or_insert_with(|| snap.receiver_table(j));
        let q = pair_success(snap.table(i), recv, snap.meanings);
        sum += q;
        sum_sq += q * q;
    }
    let k = pairs as f64;
    let mean = sum / k;
    let var = ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0);
    (mean, (var / k).sqrt())
}

/// Exact blind success for a society's memories.
pub fn blind_success(memories: &[AssociationMemory]) -> f64 {
    blind_success_exact(&ProductionSnapshot::from_memories(memories))
}

/// `G = (M p_s - 1) / (S - 1)`.
pub fn communicative_gain(p_s: f64, meanings: usize, signals: usize) -> f64 {
    (meanings as f64 * p_s - 1.0) / (signals as f64 - 1.0)
}

/// Per-meaning dominant signal of the society-mean production table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceProfile {
    /// Signal with society-mean frequency strictly above 1/2, if any.
    pub dominant: Vec<Option<usize>>,
    /// Number of distinct signals that dominate at least one meaning.
    pub count: usize,
}

pub fn dominance_profile(snap: &ProductionSnapshot) -> DominanceProfile {
    let mean = snap.mean_table();
    let dominant: Vec<Option<usize>> = mean
        .chunks(snap.signals)
        .map(|row| row.iter().position(|&p| p > 0.5))
        .collect();
    let mut used = vec![false; snap.signals];
    for s in dominant.iter().flatten() {
        used[*s] = true;
    }
    DominanceProfile {
        count: used.iter().filter(|&&u| u).count(),
        dominant,
    }
}

/// Mean over meanings of `Σ_s Var_ℓ[φ_ℓ(s|m)] / (1 - Σ_s E_ℓ[φ_ℓ(s|m)]²)`,
/// with population (`1/N`) variances across agents.
///
/// Meanings on which the whole society is unanimously one-hot are skipped.
pub fn signal_variability(snap: &ProductionSnapshot) -> Result<f64> {
    if snap.agents < 2 {
        return Err(Error::UndefinedStatistic("variability needs at least two agents"));
    }
    let mean = snap.mean_table();
    let inv_n = 1.0 / snap.agents as f64;
    let (mut acc, mut used) = (0.0, 0usize);
    for m in 0..snap.meanings {
        let mean_row = &mean[m * snap.signals..(m + 1) * snap.signals];
        let denom = 1.0 - mean_row.iter().map(|p| p * p).sum::<f64>();
        if denom < DEGENERATE {
            continue;
        }
        let mut var = 0.0;
        for a in 0..snap.agents {
            for (v, mu) in snap.row(a, m).iter().zip(mean_row) {
                let d = v - mu;
                var += d * d;
            }
        }
        acc += var * inv_n / denom;
        used += 1;
    }
    if used == 0 {
        return Err(Error::UndefinedStatistic(
            "variability undefined: every meaning is unanimously one-hot",
        ));
    }
    Ok(acc / used as f64)
}

/// One row of a run's time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub time: f64,
    pub p_s: f64,
    /// Standard error of `p_s` when it was estimated from sampled pairs.
    pub p_s_stderr: Option<f64>,
    pub gain: f64,
    /// Mean gain over the trailing window `[(1 - WINDOW_FRACTION) time, time]`.
    pub gain_window: f64,
    /// `None` when every meaning was excluded.
    pub variability: Option<f64>,
    pub dominance: DominanceProfile,
}

impl MetricsRecord {
    pub fn measure<R: Rng + ?Sized>(
        time: f64,
        memories: &[AssociationMemory],
        estimator: SuccessEstimator,
        rng: &mut R,
    ) -> Self {
        Self::from_snapshot(time, &ProductionSnapshot::from_memories(memories), estimator, rng)
    }

    pub fn from_snapshot<R: Rng + ?Sized>(
        time: f64,
        snap: &ProductionSnapshot,
        estimator: SuccessEstimator,
        rng: &mut R,
    ) -> Self {
        let (p_s, p_s_stderr) = match estimator {
            SuccessEstimator::Exact => (blind_success_exact(snap), None),
            SuccessEstimator::Sampled { pairs } => {
                let (p, se) = blind_success_sampled(snap, pairs, rng);
                (p, Some(se))
            }
        };
        let gain = communicative_gain(p_s, snap.meanings, snap.signals);
        Self {
            time,
            p_s,
            p_s_stderr,
            gain,
            gain_window: gain,
            variability: signal_variability(snap).ok(),
            dominance: dominance_profile(snap),
        }
    }

    pub fn dominant_count(&self) -> usize {
        self.dominance.count
    }
}

/// Fills `gain_window` for every record of a time-ordered series.
pub fn fill_gain_window(records: &mut [MetricsRecord]) {
    let mut start = 0;
    let mut prefix = Vec::with_capacity(records.len() + 1);
    prefix.push(0.0);
    for r in records.iter() {
        prefix.push(prefix.last().unwrap() + r.gain);
    }
    for k in 0..records.len() {
        let from = (1.0 - WINDOW_FRACTION) * records[k].time;
        while records[start].time < from - 1e-9 {
            start += 1;
        }
        records[k].gain_window = (prefix[k + 1] - prefix[start]) / (k + 1 - start) as f64;
    }
}

/// Mean of `value` over records in the final `WINDOW_FRACTION` of the series.
/// Records where `value` is `None` are skipped.
pub fn window_mean<F>(records: &[MetricsRecord], value: F) -> Option<f64>
where
    F: Fn(&MetricsRecord) -> Option<f64>,
{
    let end = records.last()?.time;
    let from = (1.0 - WINDOW_FRACTION) * end - 1e-9;
    let vals: Vec<f64> = records.iter().filter(|r| r.time >= from).filter_map(value).collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn uniform_tables(n: usize, m: usize, s: usize) -> Vec<Vec<Vec<f64>>> {
        vec![vec![vec![1.0 / s as f64; s]; m]; n]
    }

    #[test]
    fn uniform_state_has_zero_gain() {
        let snap = ProductionSnapshot::from_tables(&uniform_tables(4, 24, 12));
        let ps = blind_success_exact(&snap);
        assert_abs_diff_eq!(ps, 1.0 / 24.0, epsilon = 1e-15);
        assert_eq!(communicative_gain(1.0 / 24.0, 24, 12), 0.0);
    }

    #[test]
    fn perfect_code_has_unit_gain() {
        let m = 5;
        let table: Vec<Vec<f64>> = (0..m)
            .map(|k| (0..m).map(|s| if s == k { 1.0 } else { 0.0 }).collect())
            .collect();
        let snap = ProductionSnapshot::from_tables(&vec![table; 3]);
        let ps = blind_success_exact(&snap);
        assert_abs_diff_eq!(ps, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(communicative_gain(ps, m, m), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gain_formula() {
        assert_abs_diff_eq!(communicative_gain(1.0 / 12.0, 24, 12), 1.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(communicative_gain(12.0 / 24.0, 24, 12), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dominance_threshold_is_strict() {
        let mut t = vec![vec![1.0 / 3.0; 3]; 3];
        t[0] = vec![0.6, 0.2, 0.2];
        t[1] = vec![0.5, 0.25, 0.25];
        let snap = ProductionSnapshot::from_tables(&[t.clone(), t]);
        let d = dominance_profile(&snap);
        assert_eq!(d.dominant, vec![Some(0), None, None]);
        assert_eq!(d.count, 1);

        let uniform = ProductionSnapshot::from_tables(&uniform_tables(3, 4, 3));
        assert_eq!(dominance_profile(&uniform).count, 0);
    }

    #[test]
    fn variability_limits() {
        let same = ProductionSnapshot::from_tables(&vec![vec![vec![0.7, 0.3], vec![0.2, 0.8]]; 4]);
        assert_eq!(signal_variability(&same).unwrap(), 0.0);

        let opposite = ProductionSnapshot::from_tables(&[vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]]);
        assert_abs_diff_eq!(signal_variability(&opposite).unwrap(), 1.0, epsilon = 1e-15);

        let unanimous = ProductionSnapshot::from_tables(&vec![vec![vec![1.0, 0.0]]; 3]);
        assert!(matches!(signal_variability(&unanimous), Err(Error::UndefinedStatistic(_))));
    }

    #[test]
    fn sampled_estimator_tracks_exact() {
        use crate::rng::stream;
        let mut rng = stream(11);
        let tables: Vec<Vec<Vec<f64>>> = (0..8)
            .map(|_| {
                (0..6)
                    .map(|_| {
                        let raw: Vec<f64> = (0..4).map(|_| rand::Rng::gen::<f64>(&mut rng) + 0.01).collect();
                        let t: f64 = raw.iter().sum();
                        raw.iter().map(|v| v / t).collect()
                    })
                    .collect()
            })
            .collect();
        let snap = ProductionSnapshot::from_tables(&tables);
        let exact = blind_success_exact(&snap);
        let (est, se) = blind_success_sampled(&snap, 20_000, &mut rng);
        assert!(se > 0.0);
        assert!((est - exact).abs() < 5.0 * se, "{est} vs {exact} (se {se})");
    }

    #[test]
    fn window_average_covers_final_fifth() {
        let mk = |time: f64, gain: f64| MetricsRecord {
            time,
            p_s: 0.0,
            p_s_stderr: None,
            gain,
            gain_window: 0.0,
            variability: None,
            dominance: DominanceProfile { dominant: vec![], count: 0 },
        };
        let mut recs: Vec<_> = (0..=10).map(|k| mk(k as f64 * 10.0, k as f64)).collect();
        fill_gain_window(&mut recs);
        // Final window [80, 100] holds gains 8, 9, 10.
        assert_abs_diff_eq!(recs[10].gain_window, 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(recs[0].gain_window, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(window_mean(&recs, |r| Some(r.gain)).unwrap(), 9.0, epsilon = 1e-12);
    }

    fn random_tables() -> impl Strategy<Value = Vec<Vec<Vec<f64>>>> {
        (2usize..5, 2usize..6, 2usize..5).prop_flat_map(|(n, m, s)| {
            prop::collection::vec(
                prop::collection::vec(prop::collection::vec(0.001f64..1.0, s), m),
                n,
            )
            .prop_map(|tables| {
                tables
                    .into_iter()
                    .map(|t| {
                        t.into_iter()
                            .map(|row| {
                                let tot: f64 = row.iter().sum();
                                row.into_iter().map(|v| v / tot).collect()
                            })
                            .collect()
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn blind_success_is_bounded(tables in random_tables()) {
            let snap = ProductionSnapshot::from_tables(&tables);
            let ps = blind_success_exact(&snap);
            let (m, s) = (snap.meanings(), snap.signals());
            prop_assert!(ps > 0.0);
            prop_assert!(ps <= s as f64 / m as f64 + 1e-12);
            prop_assert!(communicative_gain(ps, m, s) <= 1.0 + 1e-12);
        }

        #[test]
        fn dominance_count_is_permutation_invariant(tables in random_tables(), shift in 0usize..7) {
            let snap = ProductionSnapshot::from_tables(&tables);
            let s = snap.signals();
            let permuted: Vec<Vec<Vec<f64>>> = tables
                .iter()
                .map(|t| t.iter().map(|row| (0..s).map(|k| row[(k + shift) % s]).collect()).collect())
                .collect();
            let a = dominance_profile(&snap);
            let b = dominance_profile(&ProductionSnapshot::from_tables(&permuted));
            prop_assert_eq!(a.count, b.count);
            for (x, y) in a.dominant.iter().zip(&b.dominant) {
                prop_assert_eq!(x.is_some(), y.is_some());
            }
        }
    }
}
