//! Closed-form first-best and second-best solutions on the nine-point
//! `λ_S = (11 − k)/12` ladder, checked against their published two-decimal
//! values.

use std::fmt;

use holdup_core::econ::{self, EconParams, EquilibriumSolution};

/// Largest accepted gap between a computed value and its printed rounding.
pub const TABLE_TOLERANCE: f64 = 0.005;

pub const COLUMNS: [&str; 8] = ["lambda_s", "lambda_b", "inv_s", "inv_b", "q", "profit_s", "profit_b", "profit_hq"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solution {
    FirstBest,
    SecondBest,
}

impl Solution {
    pub fn as_str(&self) -> &'static str {
        match self {
            Solution::FirstBest => "first-best",
            Solution::SecondBest => "second-best",
        }
    }
}

/// Printed values per Γ = 0.1 … 0.9, columns as in [`COLUMNS`].
const FIRST_BEST: [[f64; 8]; 9] = [
    [0.83, 0.17, 10.0, 50.0, 8.33, 0.0, 166.67, 166.67],
    [0.75, 0.25, 8.0, 24.0, 6.0, 19.2, 100.8, 120.0],
    [0.67, 0.33, 8.0, 16.0, 5.33, 29.87, 76.8, 106.67],
    [0.58, 0.42, 8.70, 12.17, 5.07, 39.70, 61.75, 101.45],
    [0.5, 0.5, 10.0, 10.0, 5.0, 50.0, 50.0, 100.0],
    [0.42, 0.58, 12.17, 8.70, 5.07, 61.75, 39.70, 101.45],
    [0.33, 0.67, 16.0, 8.0, 5.33, 76.8, 29.87, 106.67],
    [0.25, 0.75, 24.0, 8.0, 6.0, 100.8, 19.2, 120.0],
    [0.17, 0.83, 50.0, 10.0, 8.33, 166.67, 0.0, 166.67],
];

const SECOND_BEST: [[f64; 8]; 9] = [
    [0.83, 0.17, 0.74, 33.33, 6.17, 22.63, 113.17, 135.80],
    [0.75, 0.25, 1.25, 15.0, 4.69, 25.78, 77.34, 103.13],
    [0.67, 0.33, 1.90, 8.89, 4.23, 31.04, 62.08, 93.12],
    [0.58, 0.42, 2.78, 5.83, 4.05, 37.13, 51.99, 89.12],
    [0.5, 0.5, 4.0, 4.0, 4.0, 44.0, 44.0, 88.0],
    [0.42, 0.58, 5.83, 2.78, 4.05, 51.99, 37.13, 89.12],
    [0.33, 0.67, 8.89, 1.90, 4.23, 62.08, 31.04, 93.12],
    [0.25, 0.75, 15.0, 1.25, 4.69, 77.34, 25.78, 103.13],
    [0.17, 0.83, 33.33, 0.74, 6.17, 113.17, 22.63, 135.80],
];

#[derive(Debug, Clone, PartialEq)]
pub struct TableCheck {
    pub solution: Solution,
    pub gamma_share: f64,
    pub printed: [f64; 8],
    pub computed: [f64; 8],
}

impl TableCheck {
    pub fn max_deviation(&self) -> f64 {
        self.printed.iter().zip(&self.computed).map(|(p, c)| (p - c).abs()).fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_deviation() <= TABLE_TOLERANCE
    }
}

impl fmt::Display for TableCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<11} Γ={:.1}", self.solution.as_str(), self.gamma_share)?;
        for v in &self.computed {
            // keep tiny negative round-off from printing as -0.00
            let v = if v.abs() < 1e-9 { 0.0 } else { *v };
            write!(f, " {v:>9.2}")?;
        }
        write!(
            f,
            "  max|Δ|={:.4}  {}",
            self.max_deviation(),
            if self.passes() { "PASS" } else { "FAIL" }
        )
    }
}

fn columns(econ: &EconParams, s: &EquilibriumSolution) -> [f64; 8] {
    [econ.lambda_s, econ.lambda_b, s.inv_s, s.inv_b, s.quantity, s.profit_s, s.profit_b, s.profit_hq]
}

/// All eighteen rows, first-best then second-best, Γ ascending.
pub fn verify_tables() -> holdup_core::Result<Vec<TableCheck>> {
    let mut out = Vec::with_capacity(18);
    for (solution, printed) in [(Solution::FirstBest, &FIRST_BEST), (Solution::SecondBest, &SECOND_BEST)] {
        for (k, row) in (1..=9).zip(printed.iter()) {
            let lambda_s = (11 - k) as f64 / 12.0;
            let gamma_share = k as f64 / 10.0;
            let econ = EconParams { lambda_s, lambda_b: 1.0 - lambda_s, gamma_share, ..EconParams::default() };
            let s = match solution {
                Solution::FirstBest => econ::first_best(&econ)?,
                Solution::SecondBest => econ::second_best(&econ)?,
            };
            out.push(TableCheck { solution, gamma_share, printed: *row, computed: columns(&econ, &s) });
        }
    }
    Ok(out)
}

pub fn header() -> String {
    let mut h = format!("{:<11} {:<5}", "solution", "Γ");
    for c in COLUMNS {
        h.push_str(&format!(" {c:>9}"));
    }
    h
}
