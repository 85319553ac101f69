//! Per-rule action-index selection: Boltzmann, ε-greedy and UCB.
//!
//! Every function picks a zero-based index into one rule's row of q-values.
//! Time `t` is the one-based global step of the run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Boltzmann,
    EpsilonGreedy,
    Ucb,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Boltzmann, PolicyKind::EpsilonGreedy, PolicyKind::Ucb];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Boltzmann => "boltzmann",
            PolicyKind::EpsilonGreedy => "epsilon_greedy",
            PolicyKind::Ucb => "ucb",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boltzmann" => Ok(PolicyKind::Boltzmann),
            "epsilon_greedy" => Ok(PolicyKind::EpsilonGreedy),
            "ucb" => Ok(PolicyKind::Ucb),
            other => Err(Error::invalid("policy", format!("unknown policy `{other}`"))),
        }
    }
}

/// Exploration policy and its schedule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Boltzmann temperature `β(t) = beta1 / (beta2 + t)`.
    pub beta1: f64,
    pub beta2: f64,
    /// ε-greedy schedule `ε(t) = eps1 − eps2·t` up to `learn_horizon`.
    pub eps1: f64,
    pub eps2: f64,
    /// UCB exploration weight.
    pub c1: f64,
    pub learn_horizon: usize,
}

impl PolicyConfig {
    /// Default parameters for `kind` with a learning horizon of 1000 steps.
    ///
    /// `β(1) = 50`, `β(1000) = 10`, `ε(1) = 1`, `ε(1000) = 0`, `c1 = 30`.
    pub fn new(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            beta1: 12487.5,
            beta2: 248.75,
            eps1: 1.0 + 1.0 / 999.0,
            eps2: 1.0 / 999.0,
            c1: 30.0,
            learn_horizon: 1000,
        }
    }

    /// Schedules rescaled to a learning horizon of `t_learn` steps, keeping the
    /// endpoints `β(1) = 50`, `β(T_L) = 10`, `ε(1) = 1`, `ε(T_L) = 0`.
    ///
    /// Horizons below two leave no room for a line through both endpoints;
    /// they keep the default coefficients.
    pub fn for_horizon(kind: PolicyKind, t_learn: usize) -> Self {
        let mut cfg = PolicyConfig::new(kind);
        cfg.learn_horizon = t_learn;
        if t_learn >= 2 {
            let tl = t_learn as f64;
            cfg.beta2 = (tl - 5.0) / 4.0;
            cfg.beta1 = 50.0 * (cfg.beta2 + 1.0);
            cfg.eps2 = 1.0 / (tl - 1.0);
            cfg.eps1 = 1.0 + cfg.eps2;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0) || !self.beta1.is_finite() {
            return Err(Error::invalid("beta1", "must be positive and finite"));
        }
        // β(t) must stay positive for every t ≥ 1
        if !(self.beta2 + 1.0 > 0.0) || !self.beta2.is_finite() {
            return Err(Error::invalid("beta2", "beta2 + 1 must be positive"));
        }
        if !self.eps1.is_finite() || !self.eps2.is_finite() {
            return Err(Error::invalid("eps1", "epsilon schedule must be finite"));
        }
        if !(self.c1 >= 0.0) || !self.c1.is_finite() {
            return Err(Error::invalid("c1", "must be non-negative and finite"));
        }
        if self.learn_horizon == 0 {
            return Err(Error::invalid("learn_horizon", "must be at least 1"));
        }
        Ok(())
    }

    /// Whether the policy keeps per-rule state, so that every rule has to
    /// choose an index every step (not just the rules that carry weight).
    pub fn selects_every_rule(&self) -> bool {
        self.kind == PolicyKind::Ucb
    }

    /// Draws an index for one rule.
    pub fn select<R: Rng + ?Sized>(&self, q_row: &[f64], visits_row: &[u32], t: usize, rng: &mut R) -> usize {
        match self.kind {
            PolicyKind::Boltzmann => boltzmann_select(q_row, t, self, rng),
            PolicyKind::EpsilonGreedy => epsilon_greedy_select(q_row, t, self, rng),
            PolicyKind::Ucb => ucb_select(q_row, visits_row, t, self, rng),
        }
    }
}

pub fn boltzmann_beta(t: usize, cfg: &PolicyConfig) -> f64 {
    cfg.beta1 / (cfg.beta2 + t as f64)
}

/// Softmax probabilities of `q_row` at temperature `beta`.
pub fn boltzmann_probabilities(q_row: &[f64], beta: f64) -> Vec<f64> {
    let max = q_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = q_row.iter().map(|&q| ((q - max) / beta).exp()).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    p
}

/// Samples an index with probability proportional to `exp(q/β(t))`.
pub fn boltzmann_select<R: Rng + ?Sized>(q_row: &[f64], t: usize, cfg: &PolicyConfig, rng: &mut R) -> usize {
    sample_softmax(q_row, boltzmann_beta(t, cfg), rng)
}

pub(crate) fn sample_softmax<R: Rng + ?Sized>(q_row: &[f64], beta: f64, rng: &mut R) -> usize {
    const MAX_K: usize = 64;
    let max = q_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut buf = [0.0f64; MAX_K];
    let mut heap;
    let weights: &mut [f64] = if q_row.len() <= MAX_K {
        &mut buf[..q_row.len()]
    } else {
        heap = vec![0.0; q_row.len()];
        &mut heap
    };
    let mut total = 0.0;
    for (w, &q) in weights.iter_mut().zip(q_row) {
        *w = ((q - max) / beta).exp();
        total += *w;
    }
    if !(total > 0.0) || !total.is_finite() {
        // β underflowed to zero: the limit is a uniform draw over the maxima
        return argmax_random_tie(q_row, rng);
    }
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return k;
            }
            last_positive = k;
        }
        u -= w;
    }
    last_positive
}

/// `ε(t) = eps1 − eps2·t` for `t ≤ learn_horizon`, zero afterwards, clamped to `[0, 1]`.
pub fn epsilon(t: usize, cfg: &PolicyConfig) -> f64 {
    if t > cfg.learn_horizon {
        return 0.0;
    }
    (cfg.eps1 - cfg.eps2 * t as f64).clamp(0.0, 1.0)
}

pub fn epsilon_greedy_select<R: Rng + ?Sized>(q_row: &[f64], t: usize, cfg: &PolicyConfig, rng: &mut R) -> usize {
    select_epsilon_greedy_with(q_row, epsilon(t, cfg), rng)
}

pub(crate) fn select_epsilon_greedy_with<R: Rng + ?Sized>(q_row: &[f64], eps: f64, rng: &mut R) -> usize {
    if eps > 0.0 && rng.random::<f64>() < eps {
        rng.random_range(0..q_row.len())
    } else {
        argmax_random_tie(q_row, rng)
    }
}

/// Upper confidence bound selection.
///
/// Unvisited indices are preferred (uniformly among them); otherwise the index
/// maximising `q + c1·sqrt(ln t / visits)` wins. The caller records the visit.
pub fn ucb_select<R: Rng + ?Sized>(
    q_row: &[f64],
    visits_row: &[u32],
    t: usize,
    cfg: &PolicyConfig,
    rng: &mut R,
) -> usize {
    debug_assert_eq!(q_row.len(), visits_row.len());
    let unvisited = visits_row.iter().filter(|&&n| n == 0).count();
    if unvisited > 0 {
        let pick = rng.random_range(0..unvisited);
        return visits_row
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .nth(pick)
            .map(|(k, _)| k)
            .expect("pick is below the unvisited count");
    }
    let log_t = (t.max(1) as f64).ln();
    let mut best = f64::NEG_INFINITY;
    let mut ties = 0usize;
    let mut choice = 0usize;
    // reservoir sampling over the tied maxima
    for (k, (&q, &n)) in q_row.iter().zip(visits_row).enumerate() {
        let score = q + cfg.c1 * (log_t / n as f64).sqrt();
        if score > best {
            best = score;
            ties = 1;
            choice = k;
        } else if score == best {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                choice = k;
            }
        }
    }
    choice
}

/// Index of the largest value; ties are broken uniformly at random.
pub fn argmax_random_tie<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut ties = 0usize;
    let mut choice = 0usize;
    for (k, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            ties = 1;
            choice = k;
        } else if v == best {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                choice = k;
            }
        }
    }
    choice
}
