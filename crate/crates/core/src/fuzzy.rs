//! Zero-order Takagi-Sugeno fuzzy Q-function.
//!
//! The joint state `(s_S, s_B)` is covered by a grid of triangular membership
//! functions. Rule `i` pairs one seller label with one buyer label and stores
//! `K` candidate actions, each with its own q-value. Rules are numbered with
//! the seller label as the major index: `i = seller_label · n_buyer + buyer_label`.
//!
//! Action indices are zero-based throughout.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Triangular strong fuzzy partition over a two-dimensional state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    centers: [Vec<f64>; 2],
}

impl Default for FuzzyPartition {
    /// Five labels per dimension centred on `{0, 12.5, 25, 37.5, 50}`.
    fn default() -> Self {
        let axis = vec![0.0, 12.5, 25.0, 37.5, 50.0];
        FuzzyPartition {
            centers: [axis.clone(), axis],
        }
    }
}

impl FuzzyPartition {
    pub fn new(seller_centers: Vec<f64>, buyer_centers: Vec<f64>) -> Result<Self> {
        for (name, c) in [("seller_centers", &seller_centers), ("buyer_centers", &buyer_centers)] {
            if c.is_empty() {
                return Err(Error::invalid(name, "needs at least one center"));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(name, "centers must be finite"));
            }
            if c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(name, "centers must be strictly increasing"));
            }
        }
        Ok(FuzzyPartition {
            centers: [seller_centers, buyer_centers],
        })
    }

    pub fn centers(&self, dim: usize) -> &[f64] {
        &self.centers[dim]
    }

    pub fn n_rules(&self) -> usize {
        self.centers[0].len() * self.centers[1].len()
    }

    /// `(lowest, highest)` center of a dimension.
    pub fn hull(&self, dim: usize) -> (f64, f64) {
        let c = &self.centers[dim];
        (c[0], c[c.len() - 1])
    }

    pub fn rule_index(&self, seller_label: usize, buyer_label: usize) -> usize {
        seller_label * self.centers[1].len() + buyer_label
    }

    /// The (at most two) nonzero memberships of `s` along `dim`, as
    /// `(label, grade)` pairs. Values outside the hull fall on a shoulder.
    pub fn memberships(&self, dim: usize, s: f64) -> ActiveLabels {
        let c = &self.centers[dim];
        let last = c.len() - 1;
        if c.len() == 1 || s <= c[0] {
            return ActiveLabels::one(0);
        }
        if s >= c[last] {
            return ActiveLabels::one(last);
        }
        // c[lo] < s < c[last]
        let lo = c.partition_point(|&x| x <= s) - 1;
        let right = (s - c[lo]) / (c[lo + 1] - c[lo]);
        if right == 0.0 {
            return ActiveLabels::one(lo);
        }
        ActiveLabels {
            labels: [(lo, 1.0 - right), (lo + 1, right)],
            len: 2,
        }
    }

    /// Dense membership vector of `s` along `dim`.
    pub fn membership_vector(&self, dim: usize, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.centers[dim].len()];
        for (label, grade) in self.memberships(dim, s).iter() {
            out[label] = grade;
        }
        out
    }

    /// Rule truth values `α_i = μ_S(s_S)·μ_B(s_B)` (T-norm product).
    pub fn truth_values(&self, state: &StateVector) -> TruthValues {
        let ms = self.memberships(0, state.seller());
        let mb = self.memberships(1, state.buyer());
        let mut dense = vec![0.0; self.n_rules()];
        let mut active = Vec::with_capacity(4);
        for (ls, gs) in ms.iter() {
            for (lb, gb) in mb.iter() {
                let i = self.rule_index(ls, lb);
                let alpha = gs * gb;
                dense[i] = alpha;
                active.push(i);
            }
        }
        TruthValues { dense, active }
    }
}

/// Up to two `(label, grade)` pairs with nonzero membership.
#[derive(Debug, Clone, Copy)]
pub struct ActiveLabels {
    labels: [(usize, f64); 2],
    len: usize,
}

impl ActiveLabels {
    fn one(label: usize) -> Self {
        ActiveLabels {
            labels: [(label, 1.0), (0, 0.0)],
            len: 1,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.labels[..self.len].iter().copied()
    }
}

/// Rule weights for one state: a dense length-`N` vector plus the indices of
/// the rules that carry weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthValues {
    dense: Vec<f64>,
    active: Vec<usize>,
}

impl TruthValues {
    /// Builds truth values from an explicit dense vector.
    pub fn from_dense(dense: Vec<f64>) -> Self {
        let active = dense
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, _)| i)
            .collect();
        TruthValues { dense, active }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dense
    }

    /// Rules with (possibly) nonzero truth value, in ascending order of the
    /// seller label.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn sum(&self) -> f64 {
        self.active.iter().map(|&i| self.dense[i]).sum()
    }

    pub fn get(&self, rule: usize) -> f64 {
        self.dense[rule]
    }
}

/// A joint state: the last investments of seller and buyer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    s_seller: f64,
    s_buyer: f64,
}

impl StateVector {
    /// Clamps each component into the partition's hull.
    pub fn new(s_seller: f64, s_buyer: f64, partition: &FuzzyPartition) -> Self {
        let (lo_s, hi_s) = partition.hull(0);
        let (lo_b, hi_b) = partition.hull(1);
        StateVector {
            s_seller: s_seller.clamp(lo_s, hi_s),
            s_buyer: s_buyer.clamp(lo_b, hi_b),
        }
    }

    pub fn seller(&self) -> f64 {
        self.s_seller
    }

    pub fn buyer(&self) -> f64 {
        self.s_buyer
    }
}

/// Per-rule chosen action indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSelection {
    indices: Vec<usize>,
}

impl RuleSelection {
    pub fn new(indices: Vec<usize>) -> Self {
        RuleSelection { indices }
    }

    /// Every rule picks the same stored action.
    pub fn uniform(n_rules: usize, action: usize) -> Self {
        RuleSelection {
            indices: vec![action; n_rules],
        }
    }

    pub fn get(&self, rule: usize) -> usize {
        self.indices[rule]
    }

    pub fn set(&mut self, rule: usize, action: usize) {
        self.indices[rule] = action;
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }
}

/// Look-up table of q-values and visit counts, one row per rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_rules: usize,
    stored_actions: Vec<f64>,
    q: Vec<f64>,
    visits: Vec<u32>,
}

impl QTable {
    /// Zero-initialised table with the given candidate actions for every rule.
    pub fn new(n_rules: usize, stored_actions: Vec<f64>) -> Result<Self> {
        if n_rules == 0 {
            return Err(Error::invalid("n_rules", "must be positive"));
        }
        if stored_actions.is_empty() {
            return Err(Error::invalid("stored_actions", "needs at least one action"));
        }
        if stored_actions.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("stored_actions", "actions must be finite"));
        }
        if stored_actions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("stored_actions", "actions must be strictly increasing"));
        }
        let k = stored_actions.len();
        Ok(QTable {
            n_rules,
            stored_actions,
            q: vec![0.0; n_rules * k],
            visits: vec![0; n_rules * k],
        })
    }

    /// Eleven actions `{0, 5, …, 50}`.
    pub fn default_actions() -> Vec<f64> {
        (0..=10).map(|k| 5.0 * k as f64).collect()
    }

    pub fn n_rules(&self) -> usize {
        self.n_rules
    }

    pub fn n_actions(&self) -> usize {
        self.stored_actions.len()
    }

    pub fn stored_actions(&self) -> &[f64] {
        &self.stored_actions
    }

    pub fn q_row(&self, rule: usize) -> &[f64] {
        let k = self.n_actions();
        &self.q[rule * k..(rule + 1) * k]
    }

    pub fn visits_row(&self, rule: usize) -> &[u32] {
        let k = self.n_actions();
        &self.visits[rule * k..(rule + 1) * k]
    }

    pub fn q(&self, rule: usize, action: usize) -> f64 {
        self.q[rule * self.n_actions() + action]
    }

    pub fn set_q(&mut self, rule: usize, action: usize, value: f64) {
        let k = self.n_actions();
        self.q[rule * k + action] = value;
    }

    pub fn record_visit(&mut self, rule: usize, action: usize) {
        let k = self.n_actions();
        self.visits[rule * k + action] += 1;
    }

    pub fn max_q(&self, rule: usize) -> f64 {
        self.q_row(rule).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn q_sum(&self) -> f64 {
        self.q.iter().sum()
    }

    /// Writes `rule,action,stored_action,q,visits` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rule,action,stored_action,q,visits")?;
        for rule in 0..self.n_rules {
            for (k, &a) in self.stored_actions.iter().enumerate() {
                writeln!(
                    out,
                    "{rule},{k},{a},{},{}",
                    self.q(rule, k),
                    self.visits_row(rule)[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Inferred action `A = Σ α_i · a[i, sel_i]`.
pub fn infer_action(table: &QTable, truth: &TruthValues, selection: &RuleSelection) -> f64 {
    truth
        .active()
        .iter()
        .map(|&i| truth.get(i) * table.stored_actions[selection.get(i)])
        .sum()
}

/// Inferred Q-value `Q = Σ α_i · q[i, sel_i]`.
pub fn infer_q(table: &QTable, truth: &TruthValues, selection: &RuleSelection) -> f64 {
    truth
        .active()
        .iter()
        .map(|&i| truth.get(i) * table.q(i, selection.get(i)))
        .sum()
}

/// Scaled temporal-difference error
/// `lr · (r + γ · Σ α_i(s') · max_k q[i,k] − Q(s, a))`.
pub fn td_error(
    q_old: f64,
    reward: f64,
    next_truth: &TruthValues,
    table: &QTable,
    learning_rate: f64,
    discount: f64,
) -> f64 {
    let future = if discount == 0.0 {
        0.0
    } else {
        next_truth
            .active()
            .iter()
            .map(|&i| next_truth.get(i) * table.max_q(i))
            .sum::<f64>()
    };
    learning_rate * (reward + discount * future - q_old)
}

/// `q[i, sel_i] += α_i · delta` for every rule with nonzero truth.
pub fn update(table: &mut QTable, truth: &TruthValues, selection: &RuleSelection, delta: f64) {
    for &i in truth.active() {
        let alpha = truth.get(i);
        if alpha != 0.0 {
            let a = selection.get(i);
            let v = table.q(i, a) + alpha * delta;
            table.set_q(i, a, v);
        }
    }
}
