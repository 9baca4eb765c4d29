//! Closed-form predictions.
//!
//! * Under tight constraints each meaning ends up with one randomly assigned
//!   dominant signal; [`dominant_count_pmf`] gives the distribution of the
//!   number of distinct signals used.
//! * With weak constraints, restricting the dynamics to symmetric codes (each
//!   signal preferred with frequency `x` by `M/S` meanings) reduces everything
//!   to one coordinate:
//!
//!   ```text
//!   dx/dt = λ/(β + λα) · (1/M) · [Γ S²/(S-1) x(1-x) - λα] · (x - 1/S)
//!   ```
//!
//!   The uniform state `x = 1/S` is unstable iff `λα < Γ`; the communicative
//!   fixed point exists iff `λα < Γ S²/(4(S-1))` and is stable when it exists.
//! * `Γ = 1/M` with success feedback, and `Γ = C(1-V)(A - (1-V)/(1+V))`
//!   without it, where `V` is the across-agent variability.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::society::SocietyConfig;

/// Largest signal count for which the dominance distribution uses exact integers.
pub const EXACT_PMF_MAX_SIGNALS: usize = 20;

/// Distribution of the number `D` of distinct dominant signals when each of
/// `meanings` meanings independently gets a uniformly random signal out of
/// `signals`. Entry `d` is `P(D = d)`.
///
/// `P(D) = C(S,D) Σ_k C(D,k) (-1)^k ((D-k)/S)^M`.
pub fn dominant_count_pmf(signals: usize, meanings: usize) -> Vec<f64> {
    assert!(signals >= 1 && meanings >= 1, "need S >= 1 and M >= 1");
    if signals <= EXACT_PMF_MAX_SIGNALS {
        exact_pmf(signals, meanings)
    } else {
        compensated_pmf(signals, meanings)
    }
}

fn binomials(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 0..n {
        let next = &row[k] * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(next);
    }
    row
}

/// `num / den` as `f64`, keeping 60 significant bits of each operand.
fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let ns = num.bits().saturating_sub(60);
    let ds = den.bits().saturating_sub(60);
    let n = (num >> ns).to_f64().expect("60-bit value fits in f64");
    let d = (den >> ds).to_f64().expect("60-bit value fits in f64");
    n / d * 2f64.powi(ns as i32 - ds as i32)
}

fn exact_pmf(signals: usize, meanings: usize) -> Vec<f64> {
    let m = meanings as u32;
    let total = BigUint::from(signals).pow(m);
    let outer = binomials(signals);
    let mut pmf = vec![0.0; signals + 1];
    for d in 1..=signals {
        let inner = binomials(d);
        // Surjections onto d labels, split by sign to stay unsigned.
        let (mut plus, mut minus) = (BigUint::zero(), BigUint::zero());
        for (k, c) in inner.iter().enumerate() {
            let term = c * BigUint::from(d - k).pow(m);
            if k % 2 == 0 {
                plus += term;
            } else {
                minus += term;
            }
        }
        let onto = plus - minus;
        pmf[d] = ratio(&(&outer[d] * onto), &total);
    }
    pmf
}

/// Neumaier-compensated alternating sum in floating point, for large `S`.
fn compensated_pmf(signals: usize, meanings: usize) -> Vec<f64> {
    let s = signals as f64;
    let ln_choose = |n: usize, k: usize| ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    let mut pmf = vec![0.0; signals + 1];
    for d in 1..=signals {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 0..d {
            let mag = (ln_choose(signals, d) + ln_choose(d, k) + meanings as f64 * ((d - k) as f64 / s).ln()).exp();
            let term = if k % 2 == 0 { mag } else { -mag };
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        pmf[d] = (sum + comp).max(0.0);
    }
    pmf
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Blind success near the uniform state, `A C + (1 - A C)/M`.
pub fn chance_success(certainty: f64, alignment: f64, meanings: usize) -> f64 {
    let ac = alignment * certainty;
    ac + (1.0 - ac) / meanings as f64
}

/// Across-agent variability near the uniform state:
/// `V = λ / (λ + 2 p_s (1 + λα))` with `p_s` from [`chance_success`].
pub fn variability_estimate(lambda: f64, alpha: f64, certainty: f64, alignment: f64, meanings: usize) -> f64 {
    let ps = chance_success(certainty, alignment, meanings);
    lambda / (lambda + 2.0 * ps * (1.0 + lambda * alpha))
}

/// Which selection mechanism sets the threshold `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Learning gated by success feedback.
    Feedback { meanings: usize },
    /// Learning from every interaction; `variability` is `V`.
    NoFeedback {
        certainty: f64,
        alignment: f64,
        variability: f64,
    },
}

impl ThresholdMode {
    /// No-feedback mode with `V` taken from [`variability_estimate`].
    pub fn no_feedback_estimated(lambda: f64, alpha: f64, certainty: f64, alignment: f64, meanings: usize) -> Self {
        ThresholdMode::NoFeedback {
            certainty,
            alignment,
            variability: variability_estimate(lambda, alpha, certainty, alignment, meanings),
        }
    }
}

/// Threshold `Γ` for the given mode.
pub fn threshold_gamma(mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::Feedback { meanings } => 1.0 / meanings as f64,
        ThresholdMode::NoFeedback {
            certainty,
            alignment,
            variability: v,
        } => {
            debug_assert!((0.0..1.0).contains(&v), "variability must lie in [0,1)");
            certainty * (1.0 - v) * (alignment - (1.0 - v) / (1.0 + v))
        }
    }
}

/// Preferred-signal frequency at the communicative fixed point,
/// `x_c = (1 + sqrt(1 - 4λα(S-1)/(Γ S²))) / 2`, or `None` if it does not exist.
pub fn communicative_fixed_point(lambda_alpha: f64, gamma: f64, signals: usize) -> Option<f64> {
    assert!(signals >= 2, "need at least two signals");
    if !(gamma > 0.0) {
        return None;
    }
    let s = signals as f64;
    let load = 4.0 * lambda_alpha * (s - 1.0) / (gamma * s * s);
    if load > 1.0 {
        return None;
    }
    Some(0.5 * (1.0 + (1.0 - load).sqrt()))
}

/// `λα` at which the communicative fixed point disappears, `Γ S²/(4(S-1))`.
pub fn existence_limit(gamma: f64, signals: usize) -> f64 {
    let s = signals as f64;
    gamma * s * s / (4.0 * (s - 1.0))
}

/// Closed-form regime classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub gamma: f64,
    pub lambda_alpha: f64,
    pub x_c: Option<f64>,
    /// The uniform state is unstable (`λα < Γ`).
    pub noncomm_unstable: bool,
    /// A communicative fixed point exists (`Γ > 0` and `λα < Γ S²/(4(S-1))`).
    pub comm_exists: bool,
    /// Both states are locally stable.
    pub bistable: bool,
    pub predicted_gain: Option<f64>,
}

impl RegimeReport {
    /// Short label: `emergent`, `bistable` or `non_communicative`.
    pub fn label(&self) -> &'static str {
        if self.noncomm_unstable && self.comm_exists {
            "emergent"
        } else if self.bistable {
            "bistable"
        } else {
            "non_communicative"
        }
    }
}

pub fn classify_regime(lambda_alpha: f64, gamma: f64, signals: usize) -> RegimeReport {
    assert!(signals >= 2, "need at least two signals");
    let noncomm_unstable = lambda_alpha < gamma;
    let comm_exists = gamma > 0.0 && lambda_alpha < existence_limit(gamma, signals);
    let x_c = if comm_exists {
        communicative_fixed_point(lambda_alpha, gamma, signals)
    } else {
        None
    };
    RegimeReport {
        gamma,
        lambda_alpha,
        x_c,
        noncomm_unstable,
        comm_exists,
        bistable: comm_exists && !noncomm_unstable,
        predicted_gain: x_c.map(|x| predicted_gain(x, signals)),
    }
}

/// Threshold and regime for a society, using the estimated variability when
/// learning is not gated by feedback.
pub fn regime_for(config: &SocietyConfig) -> RegimeReport {
    let mode = if config.feedback {
        ThresholdMode::Feedback { meanings: config.meanings }
    } else {
        ThresholdMode::no_feedback_estimated(
            config.lambda,
            config.alpha,
            config.certainty,
            config.alignment,
            config.meanings,
        )
    };
    classify_regime(config.lambda * config.alpha, threshold_gamma(mode), config.signals)
}

/// Whether selection is gated by feedback in [`symmetric_rhs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningMode {
    Feedback,
    NoFeedback,
}

/// Mean success of symmetric-code learners, `β(x) = (S/M)(x² + (1-x)²/(S-1))`.
pub fn symmetric_beta(x: f64, signals: usize, meanings: usize) -> f64 {
    let s = signals as f64;
    s / meanings as f64 * (x * x + (1.0 - x) * (1.0 - x) / (s - 1.0))
}

/// Right-hand side of the one-coordinate symmetric dynamics.
pub fn symmetric_rhs(
    x: f64,
    lambda: f64,
    alpha: f64,
    gamma: f64,
    signals: usize,
    meanings: usize,
    mode: LearningMode,
) -> f64 {
    let s = signals as f64;
    let la = lambda * alpha;
    let beta = match mode {
        LearningMode::Feedback => symmetric_beta(x, signals, meanings),
        LearningMode::NoFeedback => 1.0,
    };
    lambda / (beta + la) / meanings as f64 * (gamma * s * s / (s - 1.0) * x * (1.0 - x) - la) * (x - 1.0 / s)
}

/// Gain of a homogeneous symmetric code with preferred-signal frequency `x`:
/// `(S(x² + (1-x)²/(S-1)) - 1)/(S - 1)`. Independent of `M`.
pub fn predicted_gain(x: f64, signals: usize) -> f64 {
    let s = signals as f64;
    (s * (x * x + (1.0 - x) * (1.0 - x) / (s - 1.0)) - 1.0) / (s - 1.0)
}

/// Blind success of a homogeneous symmetric code, `(S/M)(x² + (1-x)²/(S-1))`.
pub fn symmetric_success(x: f64, signals: usize, meanings: usize) -> f64 {
    symmetric_beta(x, signals, meanings)
}

/// Rates for the two-agent, two-signal, fully aligned system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAgentRates {
    pub d_plus: f64,
    pub d_minus: f64,
    /// `(d_plus + d_minus)/2`, evaluated in closed form.
    pub d_mean: f64,
    /// `λα/(8C)`; `None` when `C = 0`.
    pub growth_threshold: Option<f64>,
}

/// Deterministic drift of the majority signal's frequency in two agents,
/// `φ₊ ≥ φ₋`, with `ε = (φ₊ - φ₋)/2`:
///
/// ```text
/// dφ₊/dt = λ/(1+λα) (1/M) [-4Cε φ₊(1-φ₊) + λα(1/2 - φ₊)]
/// dφ₋/dt = λ/(1+λα) (1/M) [ 4Cε φ₋(1-φ₋) + λα(1/2 - φ₋)]
/// dφ/dt  = λ/(1+λα) (1/M) [8Cε² - λα] (φ - 1/2)
/// ```
pub fn two_agent_dynamics(
    phi_plus: f64,
    phi_minus: f64,
    certainty: f64,
    lambda: f64,
    alpha: f64,
    meanings: usize,
) -> TwoAgentRates {
    let la = lambda * alpha;
    let pre = lambda / (1.0 + la) / meanings as f64;
    let eps = 0.5 * (phi_plus - phi_minus);
    let sel = 4.0 * certainty * eps;
    let mean = 0.5 * (phi_plus + phi_minus);
    TwoAgentRates {
        d_plus: pre * (-sel * phi_plus * (1.0 - phi_plus) + la * (0.5 - phi_plus)),
        d_minus: pre * (sel * phi_minus * (1.0 - phi_minus) + la * (0.5 - phi_minus)),
        d_mean: pre * (8.0 * certainty * eps * eps - la) * (mean - 0.5),
        growth_threshold: (certainty > 0.0).then(|| la / (8.0 * certainty)),
    }
}

/// Classical fourth-order Runge–Kutta integration of the two-agent system
/// over `[0, horizon]` with `steps` equal steps; returns the final `(φ₊, φ₋)`.
pub fn integrate_two_agent(
    start: (f64, f64),
    certainty: f64,
    lambda: f64,
    alpha: f64,
    meanings: usize,
    horizon: f64,
    steps: usize,
) -> (f64, f64) {
    let f = |p: f64, q: f64| {
        let r = two_agent_dynamics(p, q, certainty, lambda, alpha, meanings);
        (r.d_plus, r.d_minus)
    };
    let h = horizon / steps as f64;
    let (mut p, mut q) = start;
    for _ in 0..steps {
        let k1 = f(p, q);
        let k2 = f(p + 0.5 * h * k1.0, q + 0.5 * h * k1.1);
        let k3 = f(p + 0.5 * h * k2.0, q + 0.5 * h * k2.1);
        let k4 = f(p + h * k3.0, q + h * k3.1);
        p += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Occupancy recursion: throw meanings one at a time into `S` boxes.
    fn occupancy_oracle(signals: usize, meanings: usize) -> Vec<f64> {
        let s = signals as f64;
        let mut p = vec![0.0; signals + 1];
        p[0] = 1.0;
        for _ in 0..meanings {
            let mut next = vec![0.0; signals + 1];
            for d in 0..=signals {
                next[d] += p[d] * d as f64 / s;
                if d < signals {
                    next[d + 1] += p[d] * (s - d as f64) / s;
                }
            }
            p = next;
        }
        p
    }

    #[test]
    fn pmf_small_cases() {
        assert_eq!(dominant_count_pmf(2, 1), vec![0.0, 1.0, 0.0]);
        let p = dominant_count_pmf(2, 2);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pmf_matches_occupancy_recursion() {
        for (s, m) in [(12, 14), (12, 17), (12, 36), (5, 55), (20, 100), (1, 3)] {
            let exact = dominant_count_pmf(s, m);
            let oracle = occupancy_oracle(s, m);
            for (a, b) in exact.iter().zip(&oracle) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn compensated_route_for_many_signals() {
        let p = dominant_count_pmf(30, 40);
        let oracle = occupancy_oracle(30, 40);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (a, b) in p.iter().zip(&oracle) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn variability_examples() {
        assert_abs_diff_eq!(chance_success(0.1, 1.0, 55), 0.116364, epsilon = 1e-6);
        assert_abs_diff_eq!(variability_estimate(0.01, 0.1, 0.1, 1.0, 55), 0.041159, epsilon = 1e-6);
        assert_abs_diff_eq!(variability_estimate(0.01, 1.0, 0.0, 0.3, 55), 0.21400, epsilon = 1e-5);
        assert!(variability_estimate(1e-12, 1.0, 0.2, 0.5, 10) < 1e-10);
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(threshold_gamma(ThresholdMode::Feedback { meanings: 24 }), 1.0 / 24.0, epsilon = 1e-15);
        let v: f64 = 0.3;
        let boundary = ThresholdMode::NoFeedback {
            certainty: 0.4,
            alignment: (1.0 - v) / (1.0 + v),
            variability: v,
        };
        assert_abs_diff_eq!(threshold_gamma(boundary), 0.0, epsilon = 1e-15);
        let g = threshold_gamma(ThresholdMode::NoFeedback {
            certainty: 0.1,
            alignment: 1.0,
            variability: 0.041159,
        });
        assert_abs_diff_eq!(g, 0.0075809, epsilon = 1e-7);
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(communicative_fixed_point(0.0, 0.1, 5), Some(1.0));
        let gamma = 1.0 / 24.0;
        let at_limit = existence_limit(gamma, 12);
        assert_abs_diff_eq!(communicative_fixed_point(at_limit, gamma, 12).unwrap(), 0.5, epsilon = 1e-7);
        let x = communicative_fixed_point(0.001, gamma, 12).unwrap();
        assert_abs_diff_eq!(x, 0.998163, epsilon = 1e-6);
        assert!(communicative_fixed_point(0.001, 0.0, 12).is_none());
        assert!(communicative_fixed_point(0.001, -0.1, 12).is_none());
        assert!(communicative_fixed_point(1.1 * at_limit, gamma, 12).is_none());
    }

    #[test]
    fn fixed_point_residual_vanishes() {
        for (la, gamma, s, m) in [(0.001, 1.0 / 24.0, 12, 24), (0.0005, 0.003, 11, 55), (0.01, 0.02, 5, 55)] {
            let x = communicative_fixed_point(la, gamma, s).unwrap();
            for mode in [LearningMode::Feedback, LearningMode::NoFeedback] {
                let r = symmetric_rhs(x, la / 0.01, 0.01, gamma, s, m, mode);
                // λ = la/0.01, α = 0.01 keeps λα = la.
                assert!(r.abs() < 1e-12, "{r}");
            }
        }
    }

    #[test]
    fn uniform_state_stability_sign() {
        let (s, m, lambda) = (12, 24, 0.01);
        let gamma = 1.0 / 24.0;
        for alpha in [0.5, 2.0, 4.0, 6.0, 10.0] {
            let r = symmetric_rhs(1.0 / 12.0 + 1e-3, lambda, alpha, gamma, s, m, LearningMode::Feedback);
            assert_eq!(r > 0.0, lambda * alpha < gamma, "alpha {alpha}");
            let r0 = symmetric_rhs(1.0 / 12.0, lambda, alpha, gamma, s, m, LearningMode::Feedback);
            assert_eq!(r0, 0.0);
        }
    }

    #[test]
    fn regime_examples() {
        let r = classify_regime(0.001, -0.01, 11);
        assert!(!r.noncomm_unstable && !r.comm_exists && !r.bistable && r.x_c.is_none());
        let r = classify_regime(0.0, 0.0, 11);
        assert!(!r.comm_exists);

        // At S = 2 the existence limit coincides with Γ.
        let r = classify_regime(0.0999, 0.1, 2);
        assert!(r.noncomm_unstable && r.comm_exists && !r.bistable);
        let r = classify_regime(0.1001, 0.1, 2);
        assert!(!r.noncomm_unstable && !r.comm_exists);

        let gamma = 1.0 / 24.0;
        let upper = gamma * 144.0 / 44.0;
        let r = classify_regime(0.5 * (gamma + upper), gamma, 12);
        assert!(r.bistable && r.label() == "bistable");
        let r = classify_regime(0.5 * gamma, gamma, 12);
        assert_eq!(r.label(), "emergent");
        let x = r.x_c.unwrap();
        assert!(x > 0.5 && x < 1.0);
        assert_abs_diff_eq!(r.predicted_gain.unwrap(), predicted_gain(x, 12), epsilon = 1e-15);
    }

    #[test]
    fn predicted_gain_examples() {
        assert_abs_diff_eq!(predicted_gain(1.0 / 12.0, 12), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(predicted_gain(1.0, 12), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(predicted_gain(0.9981635, 12), 0.99600, epsilon = 1e-5);
    }

    #[test]
    fn two_agent_examples() {
        let r = two_agent_dynamics(0.5, 0.5, 0.3, 0.01, 0.1, 2);
        assert_eq!((r.d_plus, r.d_minus, r.d_mean), (0.0, 0.0, 0.0));

        let (c, lambda, alpha): (f64, f64, f64) = (0.5, 0.01, 0.1);
        let eps = (lambda * alpha / (8.0 * c)).sqrt();
        let r = two_agent_dynamics(0.7 + eps, 0.7 - eps, c, lambda, alpha, 4);
        assert!(r.d_mean.abs() < 1e-18);

        let r = two_agent_dynamics(0.7, 0.6, 0.5, 0.01, 0.1, 3);
        assert!(r.d_mean > 0.0);
        assert!((r.d_mean - 0.5 * (r.d_plus + r.d_minus)).abs() < 1e-14);
        assert!(two_agent_dynamics(0.7, 0.6, 0.0, 0.01, 0.1, 3).growth_threshold.is_none());
    }
}
