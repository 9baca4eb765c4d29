//! The interaction engine.
//!
//! One step is one interaction:
//!
//! 1. an ordered (signaller, receiver) pair is drawn uniformly from the network;
//! 2. both parties receive attention weights;
//! 3. the signaller samples a topic from its own weights and
//! 4. a signal from its production row for that topic;
//! 5. the receiver samples an interpretation from its posterior over meanings;
//! 6. the receiver's row for the interpreted meaning decays and, unless
//!    feedback is on and the interpretation missed the topic, records the signal.
//!
//! The clock advances by `1/N` per step, so every agent receives on average
//! once per unit time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{AttentionDraw, AttentionParams, AttentionSampler};
use crate::error::{Error, Result};
use crate::memory::AssociationMemory;
use crate::metrics::{self, MetricsRecord, SuccessEstimator};
use crate::rng::{derive_seed, stream, SimRng};

/// Who may talk to whom.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    /// Every ordered pair `i != j`.
    #[default]
    Complete,
    /// Explicit directed `[signaller, receiver]` edges.
    Edges(Vec<[usize; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocietyConfig {
    #[serde(rename = "N", default = "default_agents")]
    pub agents: usize,
    #[serde(rename = "M")]
    pub meanings: usize,
    #[serde(rename = "S")]
    pub signals: usize,
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub certainty: f64,
    #[serde(rename = "A")]
    pub alignment: f64,
    #[serde(default)]
    pub feedback: bool,
    #[serde(default)]
    pub network: Network,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Long-run attention per meaning; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_weights: Option<Vec<f64>>,
}

pub(crate) fn default_agents() -> usize {
    20
}

pub(crate) fn default_seed() -> u64 {
    1
}

impl SocietyConfig {
    /// A complete-graph society without feedback.
    pub fn new(
        agents: usize,
        meanings: usize,
        signals: usize,
        alpha: f64,
        lambda: f64,
        certainty: f64,
        alignment: f64,
    ) -> Self {
        Self {
            agents,
            meanings,
            signals,
            alpha,
            lambda,
            certainty,
            alignment,
            feedback: false,
            network: Network::Complete,
            seed: default_seed(),
            mean_weights: None,
        }
    }

    pub fn with_feedback(mut self, feedback: bool) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_network(mut self, network: Network) -> Self {
        self.network = network;
        self
    }

    /// Checks every field and reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.agents < 2 {
            problems.push(format!("N must be at least 2 (got {})", self.agents));
        }
        if self.meanings < 2 {
            problems.push(format!("M must be at least 2 (got {})", self.meanings));
        }
        if self.signals < 2 {
            problems.push(format!("S must be at least 2 (got {})", self.signals));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            problems.push(format!("alpha must be positive (got {})", self.alpha));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            problems.push(format!("lambda must lie in (0,1) (got {})", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.certainty) {
            problems.push(format!("C must lie in [0,1] (got {})", self.certainty));
        }
        if !(0.0..=1.0).contains(&self.alignment) {
            problems.push(format!("A must lie in [0,1] (got {})", self.alignment));
        }
        if let Network::Edges(edges) = &self.network {
            if edges.is_empty() {
                problems.push("network must contain at least one ordered pair".into());
            }
            for &[i, j] in edges {
                if i == j {
                    problems.push(format!("network edge [{i}, {j}] is a self-loop"));
                } else if i >= self.agents || j >= self.agents {
                    problems.push(format!("network edge [{i}, {j}] names an agent outside 0..{}", self.agents));
                }
            }
        }
        if let Some(w) = &self.mean_weights {
            if w.len() != self.meanings {
                problems.push(format!("mean_weights must have M = {} entries", self.meanings));
            } else if w.iter().any(|&x| !(x > 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                problems.push("mean_weights must be positive and sum to 1".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn attention_params(&self) -> Result<AttentionParams> {
        match &self.mean_weights {
            Some(w) => AttentionParams::with_mean_weights(w.clone(), self.certainty, self.alignment),
            None => AttentionParams::new(self.meanings, self.certainty, self.alignment),
        }
    }

    /// Number of ordered pairs that may interact.
    pub fn pair_count(&self) -> usize {
        match &self.network {
            Network::Complete => self.agents * (self.agents - 1),
            Network::Edges(e) => e.len(),
        }
    }

    /// Interaction steps needed to cover `duration` time units.
    pub fn steps_for(&self, duration: f64) -> u64 {
        (duration * self.agents as f64).ceil() as u64
    }
}

/// What happened in one interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub signaller: usize,
    pub receiver: usize,
    pub topic: usize,
    pub signal: usize,
    pub interpretation: usize,
    pub stored: bool,
}

impl InteractionRecord {
    pub fn success(&self) -> bool {
        self.topic == self.interpretation
    }
}

pub struct SocietyState {
    config: SocietyConfig,
    memories: Vec<AssociationMemory>,
    steps: u64,
    rng: SimRng,
    /// Separate stream for sampled metrics, so measuring never perturbs the dynamics.
    metrics_rng: SimRng,
    sampler: AttentionSampler,
    draw: AttentionDraw,
    weights: Vec<f64>,
}

/// Builds an initial society: all memories empty, clock at zero.
pub fn init_society(config: SocietyConfig) -> Result<SocietyState> {
    SocietyState::new(config)
}

impl SocietyState {
    pub fn new(config: SocietyConfig) -> Result<Self> {
        config.validate()?;
        let params = config.attention_params()?;
        let memories = (0..config.agents)
            .map(|_| AssociationMemory::new(config.meanings, config.signals, config.alpha, config.lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rng: stream(derive_seed(config.seed, 0)),
            metrics_rng: stream(derive_seed(config.seed, 1)),
            sampler: AttentionSampler::new(params),
            draw: AttentionDraw::zeros(config.meanings),
            weights: vec![0.0; config.meanings],
            memories,
            steps: 0,
            config,
        })
    }

    /// Resumes from saved memories at a given step count. The random streams
    /// restart from the config seed, so the continuation is reproducible but
    /// differs from the uninterrupted run.
    pub fn resume(config: SocietyConfig, memories: Vec<AssociationMemory>, steps: u64) -> Result<Self> {
        let mut state = Self::new(config)?;
        state.set_memories(memories)?;
        state.steps = steps;
        Ok(state)
    }

    pub fn config(&self) -> &SocietyConfig {
        &self.config
    }

    pub fn memories(&self) -> &[AssociationMemory] {
        &self.memories
    }

    /// Replaces all memories, e.g. to resume from a snapshot.
    pub fn set_memories(&mut self, memories: Vec<AssociationMemory>) -> Result<()> {
        let c = &self.config;
        let ok = memories.len() == c.agents
            && memories
                .iter()
                .all(|m| m.meanings() == c.meanings && m.signals() == c.signals);
        if !ok {
            return Err(Error::InvalidConfig(vec![
                "memories do not match the society's N, M and S".into(),
            ]));
        }
        self.memories = memories;
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Elapsed time; one unit is `N` interactions.
    pub fn clock(&self) -> f64 {
        self.steps as f64 / self.config.agents as f64
    }

    /// Receiver attention used in the most recent step.
    pub fn last_receiver_attention(&self) -> &[f64] {
        &self.draw.receiver
    }

    fn draw_pair(&mut self) -> (usize, usize) {
        match &self.config.network {
            Network::Complete => {
                let n = self.config.agents;
                let i = self.rng.gen_range(0..n);
                let mut j = self.rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            }
            Network::Edges(edges) => {
                let [i, j] = edges[self.rng.gen_range(0..edges.len())];
                (i, j)
            }
        }
    }

    /// Performs one interaction and returns what happened.
    ///
    /// The signaller's attention only matters through the topic it yields.
    /// When the receiver does not share it, that vector is independent of
    /// everything else in the step, so the topic is drawn from its marginal
    /// (the mean weights) without materialising the vector.
    pub fn step(&mut self) -> InteractionRecord {
        let (signaller, receiver) = self.draw_pair();
        let shared = self.sampler.sample_shared(&mut self.rng);
        self.draw.shared = shared;
        self.sampler.sample_single(&mut self.rng, &mut self.draw.receiver);
        let topic = if shared {
            sample_index(&mut self.rng, &self.draw.receiver, 1.0)
        } else {
            self.sampler.sample_mean_meaning(&mut self.rng)
        };

        let speaker = &self.memories[signaller];
        let prior = speaker.alpha() / speaker.signals() as f64;
        let row = speaker.counts_row(topic);
        let mass = speaker.row_total(topic) + speaker.alpha();
        let mut u = self.rng.gen::<f64>() * mass;
        let mut signal = row.len() - 1;
        for (s, &n) in row.iter().enumerate() {
            u -= n + prior;
            if u < 0.0 {
                signal = s;
                break;
            }
        }

        let listener = &self.memories[receiver];
        let mut total = 0.0;
        for (m, (w, &r)) in self.weights.iter_mut().zip(&self.draw.receiver).enumerate() {
            let v = if r > 0.0 { listener.production_prob(m, signal) * r } else { 0.0 };
            *w = v;
            total += v;
        }
        let interpretation = sample_index(&mut self.rng, &self.weights, total);

        let stored = !self.config.feedback || interpretation == topic;
        self.memories[receiver].record_interaction(interpretation, signal, stored);
        self.steps += 1;

        InteractionRecord {
            signaller,
            receiver,
            topic,
            signal,
            interpretation,
            stored,
        }
    }

    /// Measures the current state.
    pub fn measure(&mut self, estimator: SuccessEstimator) -> MetricsRecord {
        MetricsRecord::measure(self.clock(), &self.memories, estimator, &mut self.metrics_rng)
    }

    /// Runs for `duration` time units with exact metrics every `cadence` units.
    pub fn run(&mut self, duration: f64, cadence: f64) -> Vec<MetricsRecord> {
        self.run_observed(duration, cadence, SuccessEstimator::Exact, |_| {})
    }

    /// Runs `⌈duration·N⌉` steps, measuring at the start, at every multiple of
    /// `cadence` and at the end. `on_step` sees every interaction.
    pub fn run_observed<F>(
        &mut self,
        duration: f64,
        cadence: f64,
        estimator: SuccessEstimator,
        mut on_step: F,
    ) -> Vec<MetricsRecord>
    where
        F: FnMut(&InteractionRecord),
    {
        if !(duration > 0.0) {
            return Vec::new();
        }
        let n = self.config.agents as f64;
        let total = self.config.steps_for(duration);
        let cadence_steps = if cadence > 0.0 {
            ((cadence * n).round() as u64).max(1)
        } else {
            total.max(1)
        };
        let mut records = vec![self.measure(estimator)];
        for k in 1..=total {
            let rec = self.step();
            on_step(&rec);
            if k % cadence_steps == 0 || k == total {
                records.push(self.measure(estimator));
            }
        }
        metrics::fill_gain_window(&mut records);
        records
    }
}

/// Inverse-CDF draw from unnormalised non-negative `weights` summing to `total`.
fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            u -= w;
            if u < 0.0 {
                return k;
            }
            last = k;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{blind_success, communicative_gain};

    fn small(feedback: bool) -> SocietyConfig {
        SocietyConfig::new(4, 5, 3, 0.1, 0.05, 0.3, 0.6).with_feedback(feedback).with_seed(9)
    }

    #[test]
    fn init_is_uniform_and_non_communicative() {
        let state = init_society(SocietyConfig::new(2, 3, 2, 0.1, 0.01, 0.5, 0.5)).unwrap();
        for mem in state.memories() {
            for row in mem.production_table() {
                assert_eq!(row, vec![0.5, 0.5]);
            }
        }
        assert_eq!(state.clock(), 0.0);
        let ps = blind_success(state.memories());
        assert!((ps - 1.0 / 3.0).abs() < 1e-15);
        assert!(communicative_gain(ps, 3, 2).abs() < 1e-15);
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut cfg = SocietyConfig::new(1, 1, 1, 0.0, 1.0, 1.5, -0.2);
        cfg.network = Network::Edges(vec![[0, 0]]);
        let Err(Error::InvalidConfig(problems)) = cfg.validate() else {
            panic!("expected validation failure");
        };
        assert_eq!(problems.len(), 8, "{problems:?}");
        assert!(problems.iter().any(|p| p.starts_with("C must lie in [0,1]")));
    }

    #[test]
    fn step_touches_one_row_and_advances_clock() {
        let mut state = init_society(small(false)).unwrap();
        for _ in 0..500 {
            let before: Vec<_> = state.memories().iter().map(|m| m.count_table()).collect();
            let rec = state.step();
            assert_ne!(rec.signaller, rec.receiver);
            for (a, (mem, old)) in state.memories().iter().zip(&before).enumerate() {
                for (m, (new_row, old_row)) in mem.count_table().iter().zip(old).enumerate() {
                    if a != rec.receiver || m != rec.interpretation {
                        assert_eq!(new_row, old_row);
                    }
                }
            }
        }
        assert!((state.clock() - 125.0).abs() < 1e-12);
    }

    #[test]
    fn feedback_stores_only_successes() {
        let mut state = init_society(small(true)).unwrap();
        for _ in 0..2000 {
            let rec = state.step();
            assert_eq!(rec.stored, rec.success());
        }
        let mut state = init_society(small(false)).unwrap();
        assert!((0..2000).all(|_| state.step().stored));
    }

    #[test]
    fn tight_constraints_always_succeed() {
        let cfg = SocietyConfig::new(5, 7, 3, 0.05, 0.01, 1.0, 1.0).with_feedback(true);
        let mut state = init_society(cfg).unwrap();
        for _ in 0..5000 {
            let rec = state.step();
            assert!(rec.success() && rec.stored);
        }
    }

    #[test]
    fn explicit_edges_are_respected() {
        let cfg = small(false).with_network(Network::Edges(vec![[0, 1], [2, 3]]));
        let mut state = init_society(cfg).unwrap();
        for _ in 0..200 {
            let rec = state.step();
            assert!(matches!((rec.signaller, rec.receiver), (0, 1) | (2, 3)));
        }
    }

    #[test]
    fn run_zero_duration_is_a_no_op() {
        let mut state = init_society(small(false)).unwrap();
        assert!(state.run(0.0, 1.0).is_empty());
        assert_eq!(state.steps(), 0);
    }

    #[test]
    fn run_measures_on_cadence() {
        let mut state = init_society(small(false)).unwrap();
        let records = state.run(10.0, 2.5);
        let times: Vec<f64> = records.iter().map(|r| r.time).collect();
        assert_eq!(times, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!(state.steps(), 40);
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let mut a = init_society(small(true)).unwrap();
        let mut b = init_society(small(true)).unwrap();
        for _ in 0..3000 {
            assert_eq!(a.step(), b.step());
        }
        assert_eq!(a.memories(), b.memories());
        let mut c = init_society(small(true).with_seed(10)).unwrap();
        let differs = (0..100).any(|_| a.step() != c.step());
        assert!(differs);
    }
}
