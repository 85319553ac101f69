//! Sweep configuration files.
//!
//! A config is a TOML (or JSON, by extension) table whose keys mirror
//! [`SweepSpec`]. Every key is optional; missing ones take the defaults of
//! [`SweepSpec::default`]. `lambda_s_values` entries may be numbers or
//! fraction strings such as `"5/6"`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use holdup_core::econ::EconParams;
use holdup_core::exploration::{PolicyConfig, PolicyKind};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

/// Distance within which a `λ_S` value is snapped onto the nearest twelfth.
pub const TWELFTH_SNAP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Seller cost parameters; the buyer's is always `1 − λ_S`.
    #[serde(deserialize_with = "lambda_list")]
    pub lambda_s_values: Vec<f64>,
    /// Surplus shares Γ (rows of the contour grids).
    pub gamma_values: Vec<f64>,
    /// Discount factors γ (columns of the contour grids).
    pub discount_values: Vec<f64>,
    /// Common standard deviation of both state variables.
    pub sd_values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub runs: usize,
    pub t_learn: usize,
    pub t_eval: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub b: f64,
    pub mean_theta_s: f64,
    pub mean_theta_b: f64,
    pub learning_rate: f64,
    /// Compare every cell with its baseline cell (Welch and rank-sum tests).
    pub hypothesis_tests: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let econ = EconParams::default();
        SweepSpec {
            lambda_s_values: vec![0.5],
            gamma_values: vec![0.5],
            discount_values: (0..10).map(|i| i as f64 / 10.0).collect(),
            sd_values: vec![0.0],
            policies: vec![PolicyKind::Boltzmann],
            runs: 10_000,
            t_learn: 1000,
            t_eval: 100,
            master_seed: 0,
            output_dir: PathBuf::from("results"),
            b: econ.b,
            mean_theta_s: econ.mean_theta_s,
            mean_theta_b: econ.mean_theta_b,
            learning_rate: 0.5,
            hypothesis_tests: true,
            beta1: None,
            beta2: None,
            eps1: None,
            eps2: None,
            c1: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LambdaEntry {
    Number(f64),
    Text(String),
}

fn lambda_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    use serde::de::Error;
    Vec::<LambdaEntry>::deserialize(d)?
        .into_iter()
        .map(|e| match e {
            LambdaEntry::Number(x) => Ok(x),
            LambdaEntry::Text(s) => parse_ratio(&s).map_err(D::Error::custom),
        })
        .collect()
}

/// Parses `"a/b"` or a plain decimal.
pub fn parse_ratio(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            n / d
        }
        None => s.parse().map_err(|_| format!("not a number: `{s}`"))?,
    };
    Ok(value)
}

/// Nearest `k/12` when `x` lies within [`TWELFTH_SNAP`] of it but is not
/// already equal to it.
pub fn snap_to_twelfth(x: f64) -> Option<f64> {
    let k = (x * 12.0).round();
    let snapped = k / 12.0;
    ((x - snapped).abs() <= TWELFTH_SNAP && snapped != x).then_some(snapped)
}

impl SweepSpec {
    /// Parses a config from TOML text and normalizes it. Does not validate.
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        let mut spec: SweepSpec = toml::from_str(text).map_err(|e| e.to_string())?;
        spec.normalize();
        Ok(spec)
    }

    /// Snaps rounded twelfths (0.58, 0.83, ...) onto their exact values.
    pub fn normalize(&mut self) {
        for (i, x) in self.lambda_s_values.iter_mut().enumerate() {
            if let Some(s) = snap_to_twelfth(*x) {
                log::info!("lambda_s_values[{i}] = {x} read as {}/12", (s * 12.0).round());
                *x = s;
            }
        }
    }

    pub fn econ(&self, lambda_s: f64, sd: f64, gamma_share: f64) -> EconParams {
        EconParams {
            b: self.b,
            lambda_s,
            lambda_b: 1.0 - lambda_s,
            mean_theta_s: self.mean_theta_s,
            mean_theta_b: self.mean_theta_b,
            sd_theta_s: sd,
            sd_theta_b: sd,
            gamma_share,
        }
    }

    /// Schedules for `kind` scaled to `t_learn`, with any explicit overrides.
    pub fn policy(&self, kind: PolicyKind) -> PolicyConfig {
        let mut p = PolicyConfig::for_horizon(kind, self.t_learn);
        if let Some(v) = self.beta1 {
            p.beta1 = v;
        }
        if let Some(v) = self.beta2 {
            p.beta2 = v;
        }
        if let Some(v) = self.eps1 {
            p.eps1 = v;
        }
        if let Some(v) = self.eps2 {
            p.eps2 = v;
        }
        if let Some(v) = self.c1 {
            p.c1 = v;
        }
        p
    }

    pub fn cell_count(&self) -> usize {
        self.lambda_s_values.len()
            * self.sd_values.len()
            * self.policies.len()
            * self.gamma_values.len()
            * self.discount_values.len()
    }

    pub fn validate(&self) -> Result<()> {
        non_empty("lambda_s_values", &self.lambda_s_values)?;
        non_empty("gamma_values", &self.gamma_values)?;
        non_empty("discount_values", &self.discount_values)?;
        non_empty("sd_values", &self.sd_values)?;
        if self.policies.is_empty() {
            return Err(CliError::invalid("policies", "must not be empty"));
        }
        let mut seen = HashSet::new();
        for p in &self.policies {
            if !seen.insert(*p) {
                return Err(CliError::invalid("policies", format!("`{p}` listed twice")));
            }
        }
        for (name, v) in [("b", self.b), ("mean_theta_s", self.mean_theta_s), ("mean_theta_b", self.mean_theta_b)] {
            if !v.is_finite() {
                return Err(CliError::invalid(name, "must be finite"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(CliError::invalid("learning_rate", "must lie in (0, 1]"));
        }
        if self.t_learn == 0 {
            return Err(CliError::invalid("t_learn", "must be at least 1"));
        }
        if self.t_eval == 0 {
            return Err(CliError::invalid("t_eval", "must be at least 1"));
        }
        let min_runs = if self.hypothesis_tests { 2 } else { 1 };
        if self.runs < min_runs {
            return Err(CliError::invalid(
                "runs",
                format!("must be at least {min_runs} (hypothesis tests need two runs per cell)"),
            ));
        }
        each("gamma_values", &self.gamma_values, |g| (0.0..=1.0).contains(&g), "must lie in [0, 1]")?;
        each("discount_values", &self.discount_values, |g| (0.0..1.0).contains(&g), "must lie in [0, 1)")?;
        each("sd_values", &self.sd_values, |s| s >= 0.0 && s.is_finite(), "must be finite and non-negative")?;
        each(
            "lambda_s_values",
            &self.lambda_s_values,
            |l| l > 0.0 && l < 1.0,
            "must lie strictly between 0 and 1",
        )?;
        for (i, &l) in self.lambda_s_values.iter().enumerate() {
            self.econ(l, 0.0, 0.5)
                .validate()
                .map_err(|e| CliError::invalid(format!("lambda_s_values[{i}]"), e.to_string()))?;
        }
        for kind in &self.policies {
            self.policy(*kind)
                .validate()
                .map_err(|e| CliError::invalid(format!("policy parameters for {kind}"), e.to_string()))?;
        }
        Ok(())
    }

    /// Conditions that are legal but probably not what was meant.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.hypothesis_tests {
            if self.gamma_values.contains(&0.0) {
                out.push(
                    "gamma_values contains 0: the seller keeps no surplus, a degenerate case; \
                     no baseline comparison possible for it"
                        .to_string(),
                );
            }
            if self.gamma_values.len() == 1 {
                out.push("gamma_values has a single entry: every cell is its own baseline".to_string());
            }
        }
        out
    }
}

fn non_empty(field: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(CliError::invalid(field, "must not be empty"));
    }
    let mut seen = HashSet::new();
    for (i, x) in v.iter().enumerate() {
        if x.is_nan() {
            return Err(CliError::invalid(format!("{field}[{i}]"), "is NaN"));
        }
        if !seen.insert(x.to_bits()) {
            return Err(CliError::invalid(format!("{field}[{i}]"), format!("duplicate value {x}")));
        }
    }
    Ok(())
}

fn each(field: &str, v: &[f64], ok: impl Fn(f64) -> bool, reason: &str) -> Result<()> {
    match v.iter().position(|&x| !ok(x)) {
        Some(i) => Err(CliError::invalid(format!("{field}[{i}]"), format!("{reason}, got {}", v[i]))),
        None => Ok(()),
    }
}

/// Reads, normalizes and validates a sweep config. Files ending in `.json`
/// are parsed as JSON (the `spec.json` echo written next to results), anything
/// else as TOML. Warnings go to the log.
pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo { path: path.to_path_buf(), source })?;
    let syntax = |message: String| CliError::ConfigSyntax { path: path.to_path_buf(), message };
    let spec = if path.extension().is_some_and(|e| e == "json") {
        let mut spec: SweepSpec = serde_json::from_str(&text).map_err(|e| syntax(e.to_string()))?;
        spec.normalize();
        spec
    } else {
        SweepSpec::from_toml(&text).map_err(syntax)?
    };
    spec.validate()?;
    for w in spec.warnings() {
        log::warn!("{w}");
    }
    Ok(spec)
}
