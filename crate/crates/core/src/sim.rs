//! The agent-based simulation: two fuzzy Q-learning divisions repeatedly
//! choose investments, trade the efficient quantity and learn from their
//! realised profits.
//!
//! One step runs, in order: rule truth values for the shared joint state,
//! per-rule action selection and investment inference for each agent, draws
//! of `θ_S` and `θ_B`, the efficient quantity, divisional rewards, the state
//! transition to `(I_S, I_B)`, and a TD update of both q-tables.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::{self, EconParams, Realization};
use crate::error::{Error, Result};
use crate::exploration::PolicyConfig;
use crate::fuzzy::{self, FuzzyPartition, QTable, RuleSelection, StateVector, TruthValues};
use crate::seed::{self, Stream};

/// Geometry of the fuzzy approximator shared by both agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyLayout {
    pub state_centers: Vec<f64>,
    pub stored_actions: Vec<f64>,
}

impl Default for FuzzyLayout {
    fn default() -> Self {
        FuzzyLayout {
            state_centers: vec![0.0, 12.5, 25.0, 37.5, 50.0],
            stored_actions: QTable::default_actions(),
        }
    }
}

impl FuzzyLayout {
    pub fn partition(&self) -> Result<FuzzyPartition> {
        FuzzyPartition::new(self.state_centers.clone(), self.state_centers.clone())
    }
}

/// Complete definition of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub econ: EconParams,
    /// Discount factor γ ∈ [0, 1).
    pub discount: f64,
    /// Learning rate α ∈ (0, 1].
    pub learning_rate: f64,
    pub policy: PolicyConfig,
    pub t_learn: usize,
    pub t_eval: usize,
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub layout: FuzzyLayout,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            econ: EconParams::default(),
            discount: 0.0,
            learning_rate: 0.5,
            policy: PolicyConfig::new(crate::exploration::PolicyKind::Boltzmann),
            t_learn: 1000,
            t_eval: 100,
            runs: 10_000,
            master_seed: 0,
            layout: FuzzyLayout::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn horizon(&self) -> usize {
        self.t_learn + self.t_eval
    }

    pub fn validate(&self) -> Result<()> {
        self.econ.validate()?;
        self.policy.validate()?;
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::invalid("discount", format!("must lie in [0, 1), got {}", self.discount)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid(
                "learning_rate",
                format!("must lie in (0, 1], got {}", self.learning_rate),
            ));
        }
        if self.t_learn == 0 {
            return Err(Error::invalid("t_learn", "must be at least 1"));
        }
        if self.t_eval == 0 {
            return Err(Error::invalid("t_eval", "must be at least 1"));
        }
        if self.policy.learn_horizon != self.t_learn {
            return Err(Error::invalid(
                "policy.learn_horizon",
                format!("must equal t_learn ({}), got {}", self.t_learn, self.policy.learn_horizon),
            ));
        }
        let partition = self.layout.partition()?;
        QTable::new(partition.n_rules(), self.layout.stored_actions.clone())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Seller,
    Buyer,
}

/// One division's learner.
#[derive(Debug, Clone)]
pub struct Agent {
    pub role: Role,
    pub qtable: QTable,
    pub partition: FuzzyPartition,
    rng: ChaCha8Rng,
    selection: RuleSelection,
}

impl Agent {
    fn new(role: Role, partition: FuzzyPartition, stored_actions: Vec<f64>, rng: ChaCha8Rng) -> Result<Self> {
        let n = partition.n_rules();
        Ok(Agent {
            role,
            qtable: QTable::new(n, stored_actions)?,
            partition,
            rng,
            selection: RuleSelection::uniform(n, 0),
        })
    }

    pub fn selection(&self) -> &RuleSelection {
        &self.selection
    }

    /// Picks per-rule indices and returns `(inferred action, inferred Q)`.
    fn act(&mut self, truth: &TruthValues, t: usize, policy: &PolicyConfig, forced: Option<usize>) -> (f64, f64) {
        match forced {
            Some(k) => {
                for &i in truth.active() {
                    self.selection.set(i, k);
                }
            }
            None if policy.selects_every_rule() => {
                for i in 0..self.qtable.n_rules() {
                    let k = policy.select(self.qtable.q_row(i), self.qtable.visits_row(i), t, &mut self.rng);
                    self.selection.set(i, k);
                    self.qtable.record_visit(i, k);
                }
            }
            None => {
                // Rules without weight affect neither the action nor the update.
                for &i in truth.active() {
                    let k = policy.select(self.qtable.q_row(i), self.qtable.visits_row(i), t, &mut self.rng);
                    self.selection.set(i, k);
                }
            }
        }
        (
            fuzzy::infer_action(&self.qtable, truth, &self.selection),
            fuzzy::infer_q(&self.qtable, truth, &self.selection),
        )
    }

    fn learn(&mut self, truth: &TruthValues, next_truth: &TruthValues, q_old: f64, reward: f64, cfg: &ScenarioConfig) {
        let delta = fuzzy::td_error(q_old, reward, next_truth, &self.qtable, cfg.learning_rate, cfg.discount);
        fuzzy::update(&mut self.qtable, truth, &self.selection, delta);
    }
}

/// Observables of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub inv_s: f64,
    pub inv_b: f64,
    pub theta_s: f64,
    pub theta_b: f64,
    pub quantity: f64,
    pub profit_s: f64,
    pub profit_b: f64,
    pub profit_hq: f64,
}

impl StepRecord {
    pub const CSV_HEADER: &'static str = "t,inv_s,inv_b,theta_s,theta_b,q,profit_s,profit_b,profit_hq";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.inv_s,
            self.inv_b,
            self.theta_s,
            self.theta_b,
            self.quantity,
            self.profit_s,
            self.profit_b,
            self.profit_hq
        )
    }
}

/// Test hook overriding the policy: every weighted rule of the agent picks
/// the given stored-action index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ForcedActions {
    pub seller: Option<usize>,
    pub buyer: Option<usize>,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct Episode {
    pub seller: Agent,
    pub buyer: Agent,
    state: StateVector,
    truth: TruthValues,
    env_rng: ChaCha8Rng,
    theta_s: Option<Normal<f64>>,
    theta_b: Option<Normal<f64>>,
}

impl Episode {
    pub fn state(&self) -> StateVector {
        self.state
    }

    pub fn step(&mut self, t: usize, cfg: &ScenarioConfig) -> Result<StepRecord> {
        self.step_with(t, cfg, ForcedActions::default())
    }

    pub fn step_with(&mut self, t: usize, cfg: &ScenarioConfig, forced: ForcedActions) -> Result<StepRecord> {
        let (inv_s, q_old_s) = self.seller.act(&self.truth, t, &cfg.policy, forced.seller);
        let (inv_b, q_old_b) = self.buyer.act(&self.truth, t, &cfg.policy, forced.buyer);

        let theta_s = draw(&self.theta_s, cfg.econ.mean_theta_s, &mut self.env_rng);
        let theta_b = draw(&self.theta_b, cfg.econ.mean_theta_b, &mut self.env_rng);
        let realization = Realization {
            theta_s,
            theta_b,
            inv_s,
            inv_b,
        };
        let quantity = realization.quantity(&cfg.econ);
        let (profit_s, profit_b) = econ::division_profits(&realization, &cfg.econ);
        let profit_hq = profit_s + profit_b;
        for (value, quantity) in [
            (inv_s, "seller investment"),
            (inv_b, "buyer investment"),
            (profit_s, "seller profit"),
            (profit_b, "buyer profit"),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFinite { step: t, quantity });
            }
        }

        let next_state = StateVector::new(inv_s, inv_b, &self.seller.partition);
        let next_truth = self.seller.partition.truth_values(&next_state);
        self.seller.learn(&self.truth, &next_truth, q_old_s, profit_s, cfg);
        self.buyer.learn(&self.truth, &next_truth, q_old_b, profit_b, cfg);
        self.state = next_state;
        self.truth = next_truth;

        Ok(StepRecord {
            t,
            inv_s,
            inv_b,
            theta_s,
            theta_b,
            quantity,
            profit_s,
            profit_b,
            profit_hq,
        })
    }
}

fn draw(dist: &Option<Normal<f64>>, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    match dist {
        Some(d) => d.sample(rng),
        None => mean,
    }
}

fn normal(mean: f64, sd: f64, name: &'static str) -> Result<Option<Normal<f64>>> {
    if sd == 0.0 {
        return Ok(None);
    }
    Normal::new(mean, sd)
        .map(Some)
        .map_err(|e| Error::invalid(name, e.to_string()))
}

/// Zero q-tables and a uniformly drawn initial joint state, seeded from
/// `(master_seed, run_index)`.
pub fn init_run(cfg: &ScenarioConfig, run_index: u64) -> Result<Episode> {
    cfg.validate()?;
    init_unchecked(cfg, run_index)
}

fn init_unchecked(cfg: &ScenarioConfig, run_index: u64) -> Result<Episode> {
    let partition = cfg.layout.partition()?;
    let run_seed = seed::run_seed(cfg.master_seed, run_index);
    let mut env_rng = seed::stream_rng(run_seed, Stream::Environment);
    let (lo_s, hi_s) = partition.hull(0);
    let (lo_b, hi_b) = partition.hull(1);
    let s0 = lo_s + (hi_s - lo_s) * env_rng.random::<f64>();
    let b0 = lo_b + (hi_b - lo_b) * env_rng.random::<f64>();
    let state = StateVector::new(s0, b0, &partition);
    let truth = partition.truth_values(&state);
    let seller = Agent::new(
        Role::Seller,
        partition.clone(),
        cfg.layout.stored_actions.clone(),
        seed::stream_rng(run_seed, Stream::Seller),
    )?;
    let buyer = Agent::new(
        Role::Buyer,
        partition,
        cfg.layout.stored_actions.clone(),
        seed::stream_rng(run_seed, Stream::Buyer),
    )?;
    Ok(Episode {
        seller,
        buyer,
        state,
        truth,
        env_rng,
        theta_s: normal(cfg.econ.mean_theta_s, cfg.econ.sd_theta_s, "sd_theta_s")?,
        theta_b: normal(cfg.econ.mean_theta_b, cfg.econ.sd_theta_b, "sd_theta_b")?,
    })
}

/// Means over the evaluation window of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_index: u64,
    pub mean_inv_s: f64,
    pub mean_inv_b: f64,
    pub mean_profit_hq: f64,
    pub mean_profit_s: f64,
    pub mean_profit_b: f64,
}

#[derive(Default)]
struct WindowMeans {
    n: usize,
    inv_s: f64,
    inv_b: f64,
    hq: f64,
    s: f64,
    b: f64,
}

impl WindowMeans {
    fn push(&mut self, r: &StepRecord) {
        self.n += 1;
        self.inv_s += r.inv_s;
        self.inv_b += r.inv_b;
        self.hq += r.profit_hq;
        self.s += r.profit_s;
        self.b += r.profit_b;
    }

    fn finish(self, run_index: u64) -> RunResult {
        let n = self.n as f64;
        RunResult {
            run_index,
            mean_inv_s: self.inv_s / n,
            mean_inv_b: self.inv_b / n,
            mean_profit_hq: self.hq / n,
            mean_profit_s: self.s / n,
            mean_profit_b: self.b / n,
        }
    }
}

fn run_inner(
    cfg: &ScenarioConfig,
    run_index: u64,
    mut trace: Option<&mut Vec<StepRecord>>,
) -> Result<(RunResult, Episode)> {
    let mut episode = init_unchecked(cfg, run_index)?;
    let mut window = WindowMeans::default();
    for t in 1..=cfg.horizon() {
        let rec = episode.step(t, cfg)?;
        if t > cfg.t_learn {
            window.push(&rec);
        }
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(rec);
        }
    }
    Ok((window.finish(run_index), episode))
}

/// Runs `T_L + T_E` steps and averages the last `T_E` of them. Learning
/// continues through the evaluation window.
pub fn run_episode(cfg: &ScenarioConfig, run_index: u64) -> Result<RunResult> {
    cfg.validate()?;
    run_inner(cfg, run_index, None).map(|(r, _)| r)
}

/// Like [`run_episode`], also returning every step and the final episode
/// state (for q-table dumps).
pub fn run_episode_traced(cfg: &ScenarioConfig, run_index: u64) -> Result<(RunResult, Vec<StepRecord>, Episode)> {
    cfg.validate()?;
    let mut trace = Vec::with_capacity(cfg.horizon());
    let (r, ep) = run_inner(cfg, run_index, Some(&mut trace))?;
    Ok((r, trace, ep))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub run_index: u64,
    pub error: Error,
}

/// Outcome of a batch: successful runs in run-index order plus failures.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub results: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
}

impl Batch {
    pub fn profit_hq(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.mean_profit_hq).collect()
    }

    pub fn inv_s(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.mean_inv_s).collect()
    }

    pub fn inv_b(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.mean_inv_b).collect()
    }
}

/// Runs `cfg.runs` independent episodes on the current rayon pool.
///
/// Every run draws from its own seeded streams, so the batch is identical for
/// any degree of parallelism.
pub fn run_batch(cfg: &ScenarioConfig) -> Result<Batch> {
    cfg.validate()?;
    let outcomes: Vec<(u64, Result<RunResult>)> = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|i| (i, run_inner(cfg, i, None).map(|(r, _)| r)))
        .collect();
    let mut batch = Batch::default();
    for (run_index, outcome) in outcomes {
        match outcome {
            Ok(r) => batch.results.push(r),
            Err(error) => batch.failures.push(RunFailure { run_index, error }),
        }
    }
    Ok(batch)
}
