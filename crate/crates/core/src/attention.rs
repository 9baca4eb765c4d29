//! Momentary attention over meanings.
//!
//! In every interaction the signaller and the receiver each hold a probability
//! vector over the `M` meanings. Two statistics summarise how these vectors
//! behave across interactions:
//!
//! * **certainty** `C`: the summed per-meaning variance of one agent's weights,
//!   normalised by its maximum `1 - Σ E[ρ(m)]²`. `C = 0` is a fixed vector,
//!   `C = 1` is a one-hot vector on a random meaning.
//! * **alignment** `A`: the summed covariance between signaller and receiver
//!   weights, normalised by `Σ sqrt(Var_i Var_j)`.
//!
//! Draws use a symmetric (or mean-weighted) Dirichlet whose total concentration
//! is `(1 - C) / C`, which makes the certainty exactly `C`. The receiver copies
//! the signaller's vector with probability `A` and otherwise draws
//! independently, giving alignment exactly `A`.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Total mass below which a normalising denominator counts as zero.
const DEGENERATE: f64 = 1e-12;

/// Log-scale gap beyond which a Dirichlet component is treated as zero.
const NEGLIGIBLE_GAP: f64 = 700.0;

/// Per-component concentration of the symmetric Dirichlet whose certainty is `certainty`.
///
/// The symmetric Dirichlet with total concentration `a0` has
/// `Σ Var[ρ(m)] = (1 - 1/M) / (a0 + 1)`, so the certainty is `1 / (a0 + 1)` and
/// `a0 = (1 - C) / C`. Returns `a0 / M`.
pub fn concentration_from_certainty(certainty: f64, meanings: usize) -> Result<f64> {
    if !(certainty > 0.0 && certainty < 1.0) {
        return Err(Error::OutOfRange {
            name: "C",
            value: certainty,
            constraint: "Dirichlet attention needs 0 < C < 1",
        });
    }
    if meanings < 2 {
        return Err(Error::OutOfRange {
            name: "M",
            value: meanings as f64,
            constraint: "at least two meanings are required",
        });
    }
    Ok((1.0 - certainty) / (certainty * meanings as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    meanings: usize,
    certainty: f64,
    alignment: f64,
    mean_weights: Vec<f64>,
}

impl AttentionParams {
    /// Uniform mean attention `1/M` over `meanings`.
    pub fn new(meanings: usize, certainty: f64, alignment: f64) -> Result<Self> {
        if meanings < 2 {
            return Err(Error::OutOfRange {
                name: "M",
                value: meanings as f64,
                constraint: "at least two meanings are required",
            });
        }
        let uniform = vec![1.0 / meanings as f64; meanings];
        Self::with_mean_weights(uniform, certainty, alignment)
    }

    /// Attention whose long-run average is `mean_weights` rather than uniform.
    pub fn with_mean_weights(mean_weights: Vec<f64>, certainty: f64, alignment: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&certainty) {
            return Err(Error::OutOfRange {
                name: "C",
                value: certainty,
                constraint: "C must lie in [0,1]",
            });
        }
        if !(0.0..=1.0).contains(&alignment) {
            return Err(Error::OutOfRange {
                name: "A",
                value: alignment,
                constraint: "A must lie in [0,1]",
            });
        }
        if mean_weights.len() < 2 {
            return Err(Error::OutOfRange {
                name: "M",
                value: mean_weights.len() as f64,
                constraint: "at least two meanings are required",
            });
        }
        if let Some(&bad) = mean_weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::OutOfRange {
                name: "mean_weights",
                value: bad,
                constraint: "every mean attention weight must be positive",
            });
        }
        let total: f64 = mean_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange {
                name: "sum(mean_weights)",
                value: total,
                constraint: "mean attention weights must sum to 1",
            });
        }
        Ok(Self {
            meanings: mean_weights.len(),
            certainty,
            alignment,
            mean_weights,
        })
    }

    pub fn meanings(&self) -> usize {
        self.meanings
    }

    pub fn certainty(&self) -> f64 {
        self.certainty
    }

    pub fn alignment(&self) -> f64 {
        self.alignment
    }

    pub fn mean_weights(&self) -> &[f64] {
        &self.mean_weights
    }

    fn is_uniform(&self) -> bool {
        let u = 1.0 / self.meanings as f64;
        self.mean_weights.iter().all(|&w| w == u)
    }
}

/// Signaller and receiver attention for one interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionDraw {
    pub signaller: Vec<f64>,
    pub receiver: Vec<f64>,
    /// Whether the receiver copied the signaller's vector.
    pub shared: bool,
}

impl AttentionDraw {
    pub fn zeros(meanings: usize) -> Self {
        Self {
            signaller: vec![0.0; meanings],
            receiver: vec![0.0; meanings],
            shared: false,
        }
    }
}

/// Draws one attention pair. Allocates; the simulation kernel uses
/// [`AttentionSampler::sample_into`] instead.
pub fn sample_attention_pair<R: Rng + ?Sized>(params: &AttentionParams, rng: &mut R) -> AttentionDraw {
    let mut sampler = AttentionSampler::new(params.clone());
    let mut draw = AttentionDraw::zeros(params.meanings);
    sampler.sample_into(rng, &mut draw);
    draw
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Regime {
    /// `C = 0`: both vectors are the mean weights.
    Fixed,
    /// `C = 1`: one-hot vectors.
    OneHot,
    /// `0 < C < 1`: Dirichlet with total concentration `a0`.
    Dirichlet { total_concentration: f64 },
}

/// Reusable attention generator holding validated parameters and scratch space.
#[derive(Debug, Clone)]
pub struct AttentionSampler {
    params: AttentionParams,
    regime: Regime,
    uniform: bool,
    /// Per-meaning Dirichlet concentrations `a0 ρ(m)`.
    concentrations: Vec<f64>,
    /// Every concentration is at least one, so no boost is needed.
    all_large: bool,
    /// Cumulative mean weights for one-hot draws.
    cumulative: Vec<f64>,
    keys: Vec<f64>,
}

impl AttentionSampler {
    pub fn new(params: AttentionParams) -> Self {
        let regime = if params.certainty == 0.0 {
            Regime::Fixed
        } else if params.certainty == 1.0 {
            Regime::OneHot
        } else {
            Regime::Dirichlet {
                total_concentration: (1.0 - params.certainty) / params.certainty,
            }
        };
        let concentrations = match regime {
            Regime::Dirichlet { total_concentration } => params
                .mean_weights
                .iter()
                .map(|w| total_concentration * w)
                .collect(),
            _ => Vec::new(),
        };
        let mut acc = 0.0;
        let cumulative = params
            .mean_weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self {
            all_large: concentrations.iter().all(|&a| a >= 1.0),
            uniform: params.is_uniform(),
            keys: vec![0.0; params.meanings],
            params,
            regime,
            concentrations,
            cumulative,
        }
    }

    pub fn params(&self) -> &AttentionParams {
        &self.params
    }

    /// Overwrites `draw` with a fresh attention pair.
    ///
    /// The copy decision is always drawn first, so the random stream advances
    /// the same way in every regime.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, draw: &mut AttentionDraw) {
        debug_assert_eq!(draw.signaller.len(), self.params.meanings);
        debug_assert_eq!(draw.receiver.len(), self.params.meanings);
        let shared = self.sample_shared(rng);
        draw.shared = shared;
        self.sample_single(rng, &mut draw.signaller);
        if shared {
            draw.receiver.copy_from_slice(&draw.signaller);
        } else {
            self.sample_single(rng, &mut draw.receiver);
        }
    }

    /// Whether the receiver copies the signaller in this interaction.
    #[inline]
    pub fn sample_shared<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.gen::<f64>() < self.params.alignment
    }

    /// One agent's attention vector for one interaction.
    pub fn sample_single<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        match self.regime {
            Regime::Fixed => out.copy_from_slice(&self.params.mean_weights),
            Regime::OneHot => {
                let hot = self.sample_mean_meaning(rng);
                one_hot(out, hot);
            }
            Regime::Dirichlet { .. } => self.dirichlet_into(rng, out),
        }
    }

    /// A meaning drawn from the long-run mean weights.
    ///
    /// This is also the marginal law of a topic drawn from an attention vector
    /// that is never looked at again, since `E[ρ(m)]` is the mean weight.
    pub fn sample_mean_meaning<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.uniform {
            return rng.gen_range(0..self.params.meanings);
        }
        let u = rng.gen::<f64>();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.params.meanings - 1)
    }

    /// Normalised Gamma variates.
    ///
    /// A shape `a < 1` uses `X = Y exp(-E/a)` with `Y ~ Gamma(1 + a)` and
    /// `E ~ Exp(1)`. For near-one-hot vectors `X` underflows, so every
    /// component is scaled by `exp(min_m E_m/a_m)` first; this cancels in the
    /// normalisation. Components scaled below `e^-700` relative to the
    /// largest are set to zero without drawing `Y` (this also keeps subnormal
    /// arithmetic out of the hot loop).
    fn dirichlet_into<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        let mut total = 0.0;
        if self.all_large {
            for (o, &shape) in out.iter_mut().zip(&self.concentrations) {
                let g = marsaglia_tsang(shape, rng);
                *o = g;
                total += g;
            }
        } else {
            let mut floor = f64::INFINITY;
            for (k, &shape) in self.keys.iter_mut().zip(&self.concentrations) {
                *k = if shape < 1.0 {
                    let e: f64 = rng.sample(Exp1);
                    e / shape
                } else {
                    0.0
                };
                floor = floor.min(*k);
            }
            for ((o, &k), &shape) in out.iter_mut().zip(&self.keys).zip(&self.concentrations) {
                let gap = k - floor;
                let g = if gap > NEGLIGIBLE_GAP {
                    0.0
                } else if shape < 1.0 {
                    marsaglia_tsang(shape + 1.0, rng) * (-gap).exp()
                } else {
                    marsaglia_tsang(shape, rng) * (-gap).exp()
                };
                *o = g;
                total += g;
            }
        }
        let inv = 1.0 / total;
        for o in out.iter_mut() {
            *o *= inv;
        }
    }
}

fn one_hot(v: &mut [f64], hot: usize) {
    v.fill(0.0);
    v[hot] = 1.0;
}

/// A `Gamma(shape, 1)` variate; `shape < 1` uses `Y exp(-E/shape)` with
/// `Y ~ Gamma(1 + shape)` and `E ~ Exp(1)`.
pub fn gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let y = marsaglia_tsang(shape + 1.0, rng);
        let e: f64 = rng.sample(Exp1);
        y * (-e / shape).exp()
    } else {
        marsaglia_tsang(shape, rng)
    }
}

/// Natural log of a `Gamma(shape, 1)` variate.
///
/// Marsaglia–Tsang squeeze/rejection for `shape >= 1`. For `shape < 1` the
/// boost identity `X = Y U^{1/shape}` with `Y ~ Gamma(1 + shape)` is applied
/// as `ln Y + ln(U) / shape`.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let y = marsaglia_tsang(shape + 1.0, rng);
        // Open interval: ln(0) would give -inf.
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        y.ln() + u.ln() / shape
    } else {
        marsaglia_tsang(shape, rng).ln()
    }
}

fn marsaglia_tsang<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.gen();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Running per-meaning mean and sum of squared deviations (Welford).
#[derive(Debug, Clone)]
struct Moments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }
}

/// Streaming estimator of the certainty of one agent's attention.
#[derive(Debug, Clone)]
pub struct CertaintyEstimator {
    moments: Moments,
}

impl CertaintyEstimator {
    pub fn new(meanings: usize) -> Self {
        Self {
            moments: Moments::new(meanings),
        }
    }

    pub fn push(&mut self, weights: &[f64]) {
        let m = &mut self.moments;
        assert_eq!(weights.len(), m.mean.len(), "weight vector length mismatch");
        m.n += 1;
        let n = m.n as f64;
        for ((mean, m2), &w) in m.mean.iter_mut().zip(m.m2.iter_mut()).zip(weights) {
            let delta = w - *mean;
            *mean += delta / n;
            *m2 += delta * (w - *mean);
        }
    }

    pub fn count(&self) -> usize {
        self.moments.n
    }

    pub fn estimate(&self) -> Result<f64> {
        let m = &self.moments;
        if m.n < 2 {
            return Err(Error::UndefinedStatistic("certainty needs at least two draws"));
        }
        let dof = (m.n - 1) as f64;
        let variance: f64 = m.m2.iter().map(|s| s / dof).sum();
        let denom = 1.0 - m.mean.iter().map(|x| x * x).sum::<f64>();
        if denom < DEGENERATE {
            return Err(Error::UndefinedStatistic(
                "certainty denominator vanishes: all attention sits on one fixed meaning",
            ));
        }
        Ok(variance / denom)
    }
}

/// Streaming estimator of signaller/receiver alignment.
#[derive(Debug, Clone)]
pub struct AlignmentEstimator {
    signaller: Moments,
    receiver: Moments,
    comoment: Vec<f64>,
}

impl AlignmentEstimator {
    pub fn new(meanings: usize) -> Self {
        Self {
            signaller: Moments::new(meanings),
            receiver: Moments::new(meanings),
            comoment: vec![0.0; meanings],
        }
    }

    pub fn push(&mut self, signaller: &[f64], receiver: &[f64]) {
        let len = self.comoment.len();
        assert!(signaller.len() == len && receiver.len() == len, "weight vector length mismatch");
        let n = (self.signaller.n + 1) as f64;
        self.signaller.n += 1;
        self.receiver.n += 1;
        for m in 0..len {
            let (x, y) = (signaller[m], receiver[m]);
            let dx = x - self.signaller.mean[m];
            let dy = y - self.receiver.mean[m];
            self.signaller.mean[m] += dx / n;
            self.receiver.mean[m] += dy / n;
            self.signaller.m2[m] += dx * (x - self.signaller.mean[m]);
            self.receiver.m2[m] += dy * (y - self.receiver.mean[m]);
            self.comoment[m] += dx * (y - self.receiver.mean[m]);
        }
    }

    pub fn count(&self) -> usize {
        self.signaller.n
    }

    pub fn estimate(&self) -> Result<f64> {
        let n = self.signaller.n;
        if n < 2 {
            return Err(Error::UndefinedStatistic("alignment needs at least two pairs"));
        }
        let dof = (n - 1) as f64;
        let cov: f64 = self.comoment.iter().map(|c| c / dof).sum();
        let var_i: f64 = self.signaller.m2.iter().sum::<f64>() / dof;
        let var_j: f64 = self.receiver.m2.iter().sum::<f64>() / dof;
        if var_i < DEGENERATE || var_j < DEGENERATE {
            return Err(Error::UndefinedStatistic(
                "alignment undefined: attention does not vary in one of the roles",
            ));
        }
        let denom: f64 = self
            .signaller
            .m2
            .iter()
            .zip(&self.receiver.m2)
            .map(|(a, b)| (a / dof * b / dof).sqrt())
            .sum();
        if denom < DEGENERATE {
            return Err(Error::UndefinedStatistic(
                "alignment undefined: signaller and receiver vary on disjoint meanings",
            ));
        }
        Ok(cov / denom)
    }
}

/// Certainty `Σ Var[ρ(m)] / (1 - Σ E[ρ(m)]²)` from sample moments.
pub fn estimate_certainty<V: AsRef<[f64]>>(draws: &[V]) -> Result<f64> {
    let Some(first) = draws.first() else {
        return Err(Error::UndefinedStatistic("certainty needs at least two draws"));
    };
    let mut est = CertaintyEstimator::new(first.as_ref().len());
    for d in draws {
        est.push(d.as_ref());
    }
    est.estimate()
}

/// Alignment `Σ Cov[ρ_i, ρ_j] / Σ sqrt(Var ρ_i Var ρ_j)` from sample moments.
pub fn estimate_alignment<V: AsRef<[f64]>>(pairs: &[(V, V)]) -> Result<f64> {
    let Some((first, _)) = pairs.first() else {
        return Err(Error::UndefinedStatistic("alignment needs at least two pairs"));
    };
    let mut est = AlignmentEstimator::new(first.as_ref().len());
    for (i, j) in pairs {
        est.push(i.as_ref(), j.as_ref());
    }
    est.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn concentration_examples() {
        assert_abs_diff_eq!(concentration_from_certainty(0.5, 10).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            concentration_from_certainty(0.2, 55).unwrap(),
            4.0 / 55.0,
            epsilon = 1e-15
        );
        let near_one = concentration_from_certainty(1.0 - 1e-9, 4).unwrap();
        assert!(near_one > 0.0 && near_one < 1e-9);
    }

    #[test]
    fn concentration_rejects_limits() {
        for c in [0.0, 1.0, -0.1, 1.2, f64::NAN] {
            assert!(matches!(
                concentration_from_certainty(c, 10),
                Err(Error::OutOfRange { name: "C", .. })
            ));
        }
        assert!(concentration_from_certainty(0.5, 1).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(AttentionParams::new(5, 1.5, 0.5).is_err());
        assert!(AttentionParams::new(5, 0.5, -0.1).is_err());
        assert!(AttentionParams::new(1, 0.5, 0.5).is_err());
        assert!(AttentionParams::with_mean_weights(vec![0.5, 0.6], 0.5, 0.5).is_err());
        assert!(AttentionParams::with_mean_weights(vec![1.0, 0.0], 0.5, 0.5).is_err());
        assert!(AttentionParams::with_mean_weights(vec![0.25, 0.75], 0.5, 0.5).is_ok());
    }

    #[test]
    fn zero_certainty_is_fixed_uniform() {
        let params = AttentionParams::new(5, 0.0, 0.7).unwrap();
        let mut rng = stream(1);
        for _ in 0..100 {
            let d = sample_attention_pair(&params, &mut rng);
            assert!(d.signaller.iter().all(|&w| w == 0.2));
            assert_eq!(d.signaller, d.receiver);
        }
    }

    #[test]
    fn full_certainty_full_alignment_is_common_one_hot() {
        let params = AttentionParams::new(3, 1.0, 1.0).unwrap();
        let mut rng = stream(2);
        for _ in 0..200 {
            let d = sample_attention_pair(&params, &mut rng);
            assert!(d.shared);
            assert_eq!(d.signaller, d.receiver);
            assert_eq!(d.signaller.iter().filter(|&&w| w == 1.0).count(), 1);
            assert_eq!(d.signaller.iter().filter(|&&w| w == 0.0).count(), 2);
        }
    }

    #[test]
    fn tiny_concentration_stays_normalised() {
        let params = AttentionParams::new(40, 1.0 - 1e-7, 0.3).unwrap();
        let mut sampler = AttentionSampler::new(params);
        let mut draw = AttentionDraw::zeros(40);
        let mut rng = stream(3);
        for _ in 0..1000 {
            sampler.sample_into(&mut rng, &mut draw);
            for v in [&draw.signaller, &draw.receiver] {
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(v.iter().all(|&w| w >= 0.0 && w.is_finite()));
            }
        }
    }

    #[test]
    fn certainty_estimator_limits() {
        let uniform = vec![vec![0.1; 10]; 50];
        assert_eq!(estimate_certainty(&uniform).unwrap(), 0.0);

        let m = 6;
        let one_hots: Vec<Vec<f64>> = (0..600)
            .map(|k| {
                let mut v = vec![0.0; m];
                v[k % m] = 1.0;
                v
            })
            .collect();
        // Sample variance uses n-1, so the exact value is n/(n-1) times 1.
        assert_abs_diff_eq!(estimate_certainty(&one_hots).unwrap(), 600.0 / 599.0, epsilon = 1e-12);

        let stuck = vec![vec![1.0, 0.0, 0.0]; 10];
        assert!(matches!(estimate_certainty(&stuck), Err(Error::UndefinedStatistic(_))));
        assert!(estimate_certainty(&[vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn alignment_estimator_limits() {
        let params = AttentionParams::new(8, 0.4, 0.0).unwrap();
        let mut rng = stream(4);
        let copies: Vec<(Vec<f64>, Vec<f64>)> = (0..2000)
            .map(|_| {
                let d = sample_attention_pair(&params, &mut rng);
                (d.signaller.clone(), d.signaller)
            })
            .collect();
        assert_abs_diff_eq!(estimate_alignment(&copies).unwrap(), 1.0, epsilon = 1e-12);

        let fixed = vec![(vec![0.5, 0.5], vec![0.5, 0.5]); 10];
        assert!(matches!(estimate_alignment(&fixed), Err(Error::UndefinedStatistic(_))));
    }

    #[test]
    fn gamma_variates_have_unit_scale_mean() {
        let mut rng = stream(5);
        for shape in [0.05, 0.3, 1.0, 2.5, 9.0] {
            let n = 200_000;
            // Var = shape, so the standard error is sqrt(shape / n).
            let se = (shape / n as f64).sqrt();
            let direct: f64 = (0..n).map(|_| gamma_variate(shape, &mut rng)).sum::<f64>() / n as f64;
            assert!((direct - shape).abs() < 5.0 * se, "shape {shape}: mean {direct}");
            let logged: f64 = (0..n).map(|_| ln_gamma_variate(shape, &mut rng).exp()).sum::<f64>() / n as f64;
            assert!((logged - shape).abs() < 5.0 * se, "shape {shape}: mean {logged}");
        }
    }
}
