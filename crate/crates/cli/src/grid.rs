//! Expansion of a [`SweepSpec`] into simulation cells.

use holdup_core::econ;
use holdup_core::exploration::PolicyKind;
use holdup_core::seed;
use holdup_core::sim::ScenarioConfig;

use crate::config::SweepSpec;
use crate::error::{CliError, Result};

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub lambda_s: f64,
    pub sd: f64,
    pub policy: PolicyKind,
    pub gamma_share: f64,
    pub discount: f64,
    /// Index of the cell this one is tested against: same `λ_S`, σ, policy
    /// and γ, with Γ the grid value closest to `Γ^sb`.
    pub baseline: usize,
    pub config: ScenarioConfig,
}

impl Cell {
    /// Key of the contour grid the cell belongs to.
    pub fn group(&self) -> GroupKey {
        GroupKey { lambda_s: self.lambda_s, sd: self.sd, policy: self.policy }
    }

    pub fn seed(&self) -> u64 {
        self.config.master_seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupKey {
    pub lambda_s: f64,
    pub sd: f64,
    pub policy: PolicyKind,
}

impl GroupKey {
    /// Directory-safe label, e.g. `ls0.8333_sd10_boltzmann`.
    pub fn label(&self) -> String {
        format!("ls{:.4}_sd{}_{}", self.lambda_s, self.sd, self.policy)
    }
}

fn policy_id(kind: PolicyKind) -> u64 {
    match kind {
        PolicyKind::Boltzmann => 0,
        PolicyKind::EpsilonGreedy => 1,
        PolicyKind::Ucb => 2,
    }
}

/// Seed of the cell at the given coordinates. Depends only on the master seed
/// and the coordinate values, not on the grid's shape or order.
pub fn cell_seed(master: u64, lambda_s: f64, sd: f64, policy: PolicyKind, gamma_share: f64, discount: f64) -> u64 {
    seed::derive_path(
        master,
        &[lambda_s.to_bits(), sd.to_bits(), policy_id(policy), gamma_share.to_bits(), discount.to_bits()],
    )
}

/// Position in `values` of the entry closest to `target` (first one on ties).
pub fn nearest(values: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        // Distances within rounding noise count as a tie.
        if (v - target).abs() < (values[best] - target).abs() - 1e-12 {
            best = i;
        }
    }
    best
}

/// Cartesian product of the axes in the order `λ_S`, σ, policy, Γ, γ (γ
/// fastest). Validates the spec and every resulting scenario first.
pub fn expand_grid(spec: &SweepSpec) -> Result<Vec<Cell>> {
    spec.validate()?;
    let n_gamma = spec.gamma_values.len();
    let n_disc = spec.discount_values.len();
    let mut cells = Vec::with_capacity(spec.cell_count());
    for &lambda_s in &spec.lambda_s_values {
        let gamma_sb = econ::gamma_second_best(&spec.econ(lambda_s, 0.0, 0.5))?;
        let base_row = nearest(&spec.gamma_values, gamma_sb);
        let base_gamma = spec.gamma_values[base_row];
        if (base_gamma - gamma_sb).abs() > 1e-9 {
            log::info!("lambda_s = {lambda_s}: Γ^sb = {gamma_sb} is not on the Γ grid, baseline uses Γ = {base_gamma}");
        }
        for &sd in &spec.sd_values {
            for &policy in &spec.policies {
                let group_start = cells.len();
                for &gamma_share in &spec.gamma_values {
                    for (col, &discount) in spec.discount_values.iter().enumerate() {
                        let config = ScenarioConfig {
                            econ: spec.econ(lambda_s, sd, gamma_share),
                            discount,
                            learning_rate: spec.learning_rate,
                            policy: spec.policy(policy),
                            t_learn: spec.t_learn,
                            t_eval: spec.t_eval,
                            runs: spec.runs,
                            master_seed: cell_seed(spec.master_seed, lambda_s, sd, policy, gamma_share, discount),
                            layout: Default::default(),
                        };
                        let index = cells.len();
                        config.validate().map_err(|e| {
                            CliError::invalid(format!("cell {index} (λ_S={lambda_s}, σ={sd}, Γ={gamma_share}, γ={discount})"), e.to_string())
                        })?;
                        cells.push(Cell {
                            index,
                            lambda_s,
                            sd,
                            policy,
                            gamma_share,
                            discount,
                            baseline: group_start + base_row * n_disc + col,
                            config,
                        });
                    }
                }
                debug_assert_eq!(cells.len() - group_start, n_gamma * n_disc);
            }
        }
    }
    Ok(cells)
}
