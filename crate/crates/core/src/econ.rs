//! Economic primitives of the two-division firm and the closed-form equilibria.
//!
//! The seller's manufacturing cost is `(θ_S − I_S)·q`, the buyer's net revenue
//! is `(θ_B − ½·b·q + I_B)·q`, and each division pays a quadratic investment
//! cost `½·λ_j·I_j²`. Trade happens at the quantity that maximises the
//! contribution margin `M = R_B − C_S`; the seller keeps a share `Γ` of `M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Market and cost primitives of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    /// Slope of the inverse demand function.
    pub b: f64,
    /// Seller's marginal investment cost parameter.
    pub lambda_s: f64,
    /// Buyer's marginal investment cost parameter.
    pub lambda_b: f64,
    pub mean_theta_s: f64,
    pub mean_theta_b: f64,
    pub sd_theta_s: f64,
    pub sd_theta_b: f64,
    /// Seller's share Γ of the contribution margin.
    pub gamma_share: f64,
}

impl Default for EconParams {
    /// Symmetric setting: `b = 12`, `E[θ] = (60, 100)`, `λ = (½, ½)`, `Γ = ½`, no noise.
    fn default() -> Self {
        EconParams {
            b: 12.0,
            lambda_s: 0.5,
            lambda_b: 0.5,
            mean_theta_s: 60.0,
            mean_theta_b: 100.0,
            sd_theta_s: 0.0,
            sd_theta_b: 0.0,
            gamma_share: 0.5,
        }
    }
}

impl EconParams {
    /// Checks the parameter ranges and the conditions under which both
    /// closed-form solutions are finite and positive.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("b", self.b),
            ("lambda_s", self.lambda_s),
            ("lambda_b", self.lambda_b),
            ("mean_theta_s", self.mean_theta_s),
            ("mean_theta_b", self.mean_theta_b),
            ("sd_theta_s", self.sd_theta_s),
            ("sd_theta_b", self.sd_theta_b),
            ("gamma_share", self.gamma_share),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.b <= 0.0 {
            return Err(Error::invalid("b", format!("must be positive, got {}", self.b)));
        }
        if self.lambda_s <= 0.0 {
            return Err(Error::invalid("lambda_s", format!("must be positive, got {}", self.lambda_s)));
        }
        if self.lambda_b <= 0.0 {
            return Err(Error::invalid("lambda_b", format!("must be positive, got {}", self.lambda_b)));
        }
        if self.sd_theta_s < 0.0 {
            return Err(Error::invalid("sd_theta_s", "must be non-negative"));
        }
        if self.sd_theta_b < 0.0 {
            return Err(Error::invalid("sd_theta_b", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.gamma_share) {
            return Err(Error::invalid(
                "gamma_share",
                format!("must lie in [0, 1], got {}", self.gamma_share),
            ));
        }
        if self.first_best_denominator() <= 0.0 {
            return Err(Error::invalid(
                "lambda_s",
                "b·λ_S·λ_B − λ_S − λ_B must be positive",
            ));
        }
        if self.b * self.lambda_s <= 1.0 {
            return Err(Error::invalid("lambda_s", "b·λ_S must exceed 1"));
        }
        if self.b * self.lambda_b <= 1.0 {
            return Err(Error::invalid("lambda_b", "b·λ_B must exceed 1"));
        }
        Ok(())
    }

    /// `E[θ_B − θ_S]`.
    pub fn expected_gap(&self) -> f64 {
        self.mean_theta_b - self.mean_theta_s
    }

    /// `Var[θ_B − θ_S]` for independent state variables.
    pub fn gap_variance(&self) -> f64 {
        self.sd_theta_s * self.sd_theta_s + self.sd_theta_b * self.sd_theta_b
    }

    /// Expected gain from market volatility, `Var[θ_B − θ_S] / (2b)`.
    pub fn volatility_bonus(&self) -> f64 {
        self.gap_variance() / (2.0 * self.b)
    }

    fn first_best_denominator(&self) -> f64 {
        self.b * self.lambda_s * self.lambda_b - self.lambda_s - self.lambda_b
    }
}

/// One period's draws of the state variables together with the investments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub theta_s: f64,
    pub theta_b: f64,
    pub inv_s: f64,
    pub inv_b: f64,
}

impl Realization {
    pub fn new(theta_s: f64, theta_b: f64, inv_s: f64, inv_b: f64) -> Result<Self> {
        if !(inv_s >= 0.0) {
            return Err(Error::invalid("inv_s", format!("must be non-negative, got {inv_s}")));
        }
        if !(inv_b >= 0.0) {
            return Err(Error::invalid("inv_b", format!("must be non-negative, got {inv_b}")));
        }
        Ok(Realization {
            theta_s,
            theta_b,
            inv_s,
            inv_b,
        })
    }

    /// Quantity negotiated for this realization.
    pub fn quantity(&self, econ: &EconParams) -> f64 {
        efficient_quantity(self.theta_s, self.theta_b, self.inv_s, self.inv_b, econ.b)
    }
}

/// Expected outcome of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub inv_s: f64,
    pub inv_b: f64,
    pub quantity: f64,
    pub profit_s: f64,
    pub profit_b: f64,
    pub profit_hq: f64,
    pub gamma_used: f64,
}

pub fn seller_cost(q: f64, theta_s: f64, inv_s: f64) -> f64 {
    (theta_s - inv_s) * q
}

pub fn buyer_revenue(q: f64, theta_b: f64, inv_b: f64, b: f64) -> f64 {
    (theta_b - 0.5 * b * q + inv_b) * q
}

/// Margin-maximising quantity, clamped at zero when the market gap is negative.
pub fn efficient_quantity(theta_s: f64, theta_b: f64, inv_s: f64, inv_b: f64, b: f64) -> f64 {
    ((theta_b - theta_s + inv_s + inv_b) / b).max(0.0)
}

pub fn investment_cost(lambda: f64, inv: f64) -> f64 {
    0.5 * lambda * inv * inv
}

/// `M = R_B − C_S` at the efficient quantity.
pub fn contribution_margin(r: &Realization, econ: &EconParams) -> f64 {
    let q = r.quantity(econ);
    buyer_revenue(q, r.theta_b, r.inv_b, econ.b) - seller_cost(q, r.theta_s, r.inv_s)
}

/// Divisional profits `(Π_S, Π_B)` under the linear surplus sharing rule.
pub fn division_profits(r: &Realization, econ: &EconParams) -> (f64, f64) {
    let m = contribution_margin(r, econ);
    shared_profits(m, r.inv_s, r.inv_b, econ.gamma_share, econ)
}

fn shared_profits(margin: f64, inv_s: f64, inv_b: f64, gamma: f64, econ: &EconParams) -> (f64, f64) {
    (
        gamma * margin - investment_cost(econ.lambda_s, inv_s),
        (1.0 - gamma) * margin - investment_cost(econ.lambda_b, inv_b),
    )
}

/// Headquarters' profit `M − w_S − w_B`.
///
/// Summed from [`division_profits`] so that `Π_HQ = Π_S + Π_B` holds bit-exactly.
pub fn hq_profit(r: &Realization, econ: &EconParams) -> f64 {
    let (ps, pb) = division_profits(r, econ);
    ps + pb
}

/// Expected margin at fixed investments: `((E[Δθ] + I_S + I_B)² + Var[Δθ]) / (2b)`.
///
/// Ignores the quantity clamp, as the closed-form solutions do.
fn expected_margin(econ: &EconParams, inv_s: f64, inv_b: f64) -> f64 {
    let gap = econ.expected_gap() + inv_s + inv_b;
    (gap * gap + econ.gap_variance()) / (2.0 * econ.b)
}

fn evaluate(econ: &EconParams, inv_s: f64, inv_b: f64, gamma: f64) -> EquilibriumSolution {
    let margin = expected_margin(econ, inv_s, inv_b);
    let (profit_s, profit_b) = shared_profits(margin, inv_s, inv_b, gamma, econ);
    EquilibriumSolution {
        inv_s,
        inv_b,
        quantity: (econ.expected_gap() + inv_s + inv_b) / econ.b,
        profit_s,
        profit_b,
        profit_hq: profit_s + profit_b,
        gamma_used: gamma,
    }
}

/// Headquarters-optimal investments and quantity.
///
/// Built from the condition `I_j* = E[q*]/λ_j`; division profits are evaluated
/// with the scenario's `gamma_share`.
pub fn first_best(econ: &EconParams) -> Result<EquilibriumSolution> {
    econ.validate()?;
    let (ls, lb) = (econ.lambda_s, econ.lambda_b);
    let q = ls * lb * econ.expected_gap() / econ.first_best_denominator();
    Ok(evaluate(econ, q / ls, q / lb, econ.gamma_share))
}

/// Surplus share that maximises the headquarters' expected profit when both
/// divisions best-respond: `(b·λ_B − 1) / (b·(λ_S + λ_B) − 2)`.
pub fn gamma_second_best(econ: &EconParams) -> Result<f64> {
    let den = econ.b * (econ.lambda_s + econ.lambda_b) - 2.0;
    if !(den > 0.0) {
        return Err(Error::invalid("lambda_s", "b·(λ_S + λ_B) − 2 must be positive"));
    }
    let gamma = (econ.b * econ.lambda_b - 1.0) / den;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(
            "lambda_b",
            format!("second-best share {gamma} falls outside [0, 1]"),
        ));
    }
    Ok(gamma)
}

/// Subgame-perfect outcome when the headquarters also picks `Γ = Γ^sb`.
pub fn second_best(econ: &EconParams) -> Result<EquilibriumSolution> {
    econ.validate()?;
    let gamma = gamma_second_best(econ)?;
    let (b, ls, lb) = (econ.b, econ.lambda_s, econ.lambda_b);
    let gap = econ.expected_gap();
    let inv_s = lb * gap / ((b * ls - 1.0) * (ls + lb));
    let inv_b = ls * gap / ((b * lb - 1.0) * (ls + lb));
    Ok(evaluate(econ, inv_s, inv_b, gamma))
}

/// Divisions' simultaneous best responses for an arbitrary share `gamma`.
///
/// Solves `b·λ_S·I_S = Γ·(E[Δθ] + I_S + I_B)` and
/// `b·λ_B·I_B = (1 − Γ)·(E[Δθ] + I_S + I_B)` as a 2×2 linear system.
pub fn second_best_at_gamma(econ: &EconParams, gamma: f64) -> Result<EquilibriumSolution> {
    econ.validate()?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid("gamma", format!("must lie in [0, 1], got {gamma}")));
    }
    let gap = econ.expected_gap();
    let a11 = econ.b * econ.lambda_s - gamma;
    let a12 = -gamma;
    let a21 = -(1.0 - gamma);
    let a22 = econ.b * econ.lambda_b - (1.0 - gamma);
    let det = a11 * a22 - a12 * a21;
    let scale = a11.abs().max(a22.abs()).max(1.0);
    if det.abs() <= 1e-12 * scale * scale {
        return Err(Error::Singular { determinant: det });
    }
    let r1 = gamma * gap;
    let r2 = (1.0 - gamma) * gap;
    let inv_s = (r1 * a22 - a12 * r2) / det;
    let inv_b = (a11 * r2 - a21 * r1) / det;
    Ok(evaluate(econ, inv_s, inv_b, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn asym() -> EconParams {
        EconParams {
            lambda_s: 5.0 / 6.0,
            lambda_b: 1.0 / 6.0,
            gamma_share: 0.1,
            ..EconParams::default()
        }
    }

    #[test]
    fn cost_and_revenue_examples() {
        assert_eq!(seller_cost(4.0, 60.0, 4.0), 224.0);
        assert_eq!(seller_cost(0.0, 60.0, 4.0), 0.0);
        assert_eq!(seller_cost(5.0, 60.0, 10.0), 250.0);
        assert_eq!(buyer_revenue(4.0, 100.0, 4.0, 12.0), 320.0);
        assert_eq!(buyer_revenue(0.0, 100.0, 4.0, 12.0), 0.0);
        assert_eq!(buyer_revenue(5.0, 100.0, 10.0, 12.0), 400.0);
    }

    #[test]
    fn quantity_examples() {
        assert_eq!(efficient_quantity(60.0, 100.0, 4.0, 4.0, 12.0), 4.0);
        assert_eq!(efficient_quantity(100.0, 100.0, 0.0, 0.0, 12.0), 0.0);
        assert_abs_diff_eq!(efficient_quantity(60.0, 100.0, 10.0, 50.0, 12.0), 25.0 / 3.0, epsilon = 1e-12);
        // negative gap clamps
        assert_eq!(efficient_quantity(120.0, 100.0, 0.0, 0.0, 12.0), 0.0);
    }

    #[test]
    fn margin_and_profits() {
        let econ = EconParams::default();
        let r = Realization::new(60.0, 100.0, 4.0, 4.0).unwrap();
        assert_eq!(contribution_margin(&r, &econ), 96.0);
        assert_eq!(division_profits(&r, &econ), (44.0, 44.0));
        assert_eq!(hq_profit(&r, &econ), 88.0);

        let r = Realization::new(60.0, 100.0, 10.0, 10.0).unwrap();
        assert_eq!(contribution_margin(&r, &econ), 150.0);
        assert_eq!(hq_profit(&r, &econ), 100.0);

        let r = Realization::new(100.0, 100.0, 0.0, 0.0).unwrap();
        assert_eq!(contribution_margin(&r, &econ), 0.0);
        assert_eq!(division_profits(&r, &econ), (0.0, 0.0));
        assert_eq!(hq_profit(&r, &econ), 0.0);
    }

    #[test]
    fn asymmetric_division_profits() {
        let r = Realization::new(60.0, 100.0, 0.74, 33.33).unwrap();
        let (ps, pb) = division_profits(&r, &asym());
        assert_abs_diff_eq!(ps, 22.63, epsilon = 0.02);
        assert_abs_diff_eq!(pb, 113.17, epsilon = 0.02);
    }

    #[test]
    fn realization_rejects_negative_investment() {
        assert!(Realization::new(60.0, 100.0, -1.0, 0.0).is_err());
        assert!(Realization::new(60.0, 100.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn first_best_examples() {
        let fb = first_best(&EconParams::default()).unwrap();
        assert_abs_diff_eq!(fb.inv_s, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fb.inv_b, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fb.quantity, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fb.profit_hq, 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fb.profit_s, 50.0, epsilon = 1e-12);

        let fb = first_best(&asym()).unwrap();
        assert_abs_diff_eq!(fb.inv_s, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fb.inv_b, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fb.quantity, 25.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fb.profit_hq, 500.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fb.profit_s, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn first_best_matches_closed_form_profit() {
        // ½·λ_S·λ_B·E[Δθ]² / (b·λ_S·λ_B − λ_S − λ_B) + Var/(2b)
        for &(ls, sd) in &[(0.5, 0.0), (7.0 / 12.0, 5.0), (2.0 / 3.0, 10.0), (0.75, 0.0), (5.0 / 6.0, 10.0)] {
            let econ = EconParams {
                lambda_s: ls,
                lambda_b: 1.0 - ls,
                sd_theta_s: sd,
                sd_theta_b: sd,
                ..EconParams::default()
            };
            let lb = 1.0 - ls;
            let closed = 0.5 * ls * lb * 1600.0 / (12.0 * ls * lb - 1.0) + 2.0 * sd * sd / 24.0;
            assert_abs_diff_eq!(first_best(&econ).unwrap().profit_hq, closed, epsilon = 1e-9);
        }
    }

    #[test]
    fn volatility_adds_to_first_best() {
        let calm = first_best(&EconParams::default()).unwrap();
        let noisy = first_best(&EconParams {
            sd_theta_s: 10.0,
            sd_theta_b: 10.0,
            ..EconParams::default()
        })
        .unwrap();
        assert_abs_diff_eq!(noisy.profit_hq - calm.profit_hq, 200.0 / 24.0, epsilon = 1e-12);
        assert_abs_diff_eq!(noisy.profit_s + noisy.profit_b, noisy.profit_hq, epsilon = 1e-12);
    }

    #[test]
    fn gamma_second_best_examples() {
        assert_abs_diff_eq!(gamma_second_best(&EconParams::default()).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma_second_best(&asym()).unwrap(), 0.1, epsilon = 1e-12);
        for ls in [0.5, 7.0 / 12.0, 2.0 / 3.0, 0.75, 5.0 / 6.0, 0.3] {
            let e = EconParams { lambda_s: ls, lambda_b: 1.0 - ls, ..EconParams::default() };
            let swapped = EconParams { lambda_s: 1.0 - ls, lambda_b: ls, ..e };
            let g = gamma_second_best(&e).unwrap();
            assert_abs_diff_eq!(g, 1.0 - gamma_second_best(&swapped).unwrap(), epsilon = 1e-12);
            assert!(g > 0.0 && g < 1.0);
        }
    }

    #[test]
    fn second_best_examples() {
        let sb = second_best(&EconParams::default()).unwrap();
        assert_abs_diff_eq!(sb.inv_s, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sb.inv_b, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sb.quantity, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sb.profit_hq, 88.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sb.profit_s, 44.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sb.profit_b, 44.0, epsilon = 1e-12);

        let sb = second_best(&asym()).unwrap();
        assert_abs_diff_eq!(sb.inv_s, 40.0 / 54.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sb.inv_b, 100.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sb.profit_hq, 135.80, epsilon = 0.005);
        assert_abs_diff_eq!(sb.gamma_used, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn second_best_matches_closed_form_quantity_and_profit() {
        for &(ls, sd) in &[(0.5, 0.0), (7.0 / 12.0, 5.0), (0.75, 10.0), (5.0 / 6.0, 0.0)] {
            let lb = 1.0 - ls;
            let econ = EconParams {
                lambda_s: ls,
                lambda_b: lb,
                sd_theta_s: sd,
                sd_theta_b: sd,
                ..EconParams::default()
            };
            let b = 12.0;
            let gap = 40.0;
            let den = (b * ls - 1.0) * (b * lb - 1.0) * (ls + lb);
            let q = ls * lb * (b * (ls + lb) - 2.0) * gap / den;
            let hq = 0.5 * ls * lb * (b * (ls + lb) - 1.0) * gap * gap / den + 2.0 * sd * sd / (2.0 * b);
            let sb = second_best(&econ).unwrap();
            assert_abs_diff_eq!(sb.quantity, q, epsilon = 1e-9);
            assert_abs_diff_eq!(sb.profit_hq, hq, epsilon = 1e-9);
        }
    }

    #[test]
    fn second_best_is_dominated_by_first_best() {
        for ls in [0.5, 7.0 / 12.0, 2.0 / 3.0, 0.75, 5.0 / 6.0] {
            for lb in [ls, 1.0 - ls] {
                let econ = EconParams { lambda_s: lb, lambda_b: 1.0 - lb, ..EconParams::default() };
                assert!(second_best(&econ).unwrap().profit_hq < first_best(&econ).unwrap().profit_hq);
            }
        }
    }

    #[test]
    fn first_best_profit_decreases_in_lambda() {
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let ls = 0.3 + 0.05 * i as f64;
            let econ = EconParams { lambda_s: ls, lambda_b: 0.5, ..EconParams::default() };
            let hq = first_best(&econ).unwrap().profit_hq;
            assert!(hq < prev, "λ_S = {ls}");
            prev = hq;
        }
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let lb = 0.3 + 0.05 * i as f64;
            let econ = EconParams { lambda_s: 0.5, lambda_b: lb, ..EconParams::default() };
            let hq = first_best(&econ).unwrap().profit_hq;
            assert!(hq < prev, "λ_B = {lb}");
            prev = hq;
        }
    }

    #[test]
    fn second_best_at_gamma_consistency() {
        for econ in [EconParams::default(), asym()] {
            let g = gamma_second_best(&econ).unwrap();
            let a = second_best_at_gamma(&econ, g).unwrap();
            let b = second_best(&econ).unwrap();
            assert_abs_diff_eq!(a.inv_s, b.inv_s, epsilon = 1e-9);
            assert_abs_diff_eq!(a.inv_b, b.inv_b, epsilon = 1e-9);
            assert_abs_diff_eq!(a.profit_hq, b.profit_hq, epsilon = 1e-9);
            assert_abs_diff_eq!(a.profit_s, b.profit_s, epsilon = 1e-9);
        }
    }

    #[test]
    fn second_best_at_gamma_one_starves_buyer() {
        let s = second_best_at_gamma(&EconParams::default(), 1.0).unwrap();
        assert_eq!(s.inv_b, 0.0);
        // seller alone: 6·I_S = 40 + I_S
        assert_abs_diff_eq!(s.inv_s, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn second_best_at_gamma_matches_fixed_point_iteration() {
        let econ = EconParams::default();
        let gamma = 0.6;
        // iterate the two best-response maps from zero until they stop moving
        let (mut is, mut ib) = (0.0f64, 0.0f64);
        for _ in 0..10_000 {
            let q = (40.0 + is + ib) / 12.0;
            let next_s = gamma * q / 0.5;
            let next_b = (1.0 - gamma) * q / 0.5;
            let done = (next_s - is).abs() < 1e-15 && (next_b - ib).abs() < 1e-15;
            is = next_s;
            ib = next_b;
            if done {
                break;
            }
        }
        let s = second_best_at_gamma(&econ, gamma).unwrap();
        assert_abs_diff_eq!(s.inv_s, is, epsilon = 1e-10);
        assert_abs_diff_eq!(s.inv_b, ib, epsilon = 1e-10);
        assert_abs_diff_eq!(s.inv_s, 4.8, epsilon = 1e-10);
        assert_abs_diff_eq!(s.inv_b, 3.2, epsilon = 1e-10);
    }

    #[test]
    fn rejects_invalid_params() {
        let bad = [
            EconParams { b: 0.0, ..EconParams::default() },
            EconParams { lambda_s: -1.0, ..EconParams::default() },
            EconParams { gamma_share: 1.5, ..EconParams::default() },
            EconParams { lambda_s: 0.05, lambda_b: 0.95, ..EconParams::default() },
            EconParams { sd_theta_b: -1.0, ..EconParams::default() },
        ];
        for econ in bad {
            assert!(first_best(&econ).is_err(), "{econ:?}");
            assert!(second_best(&econ).is_err(), "{econ:?}");
        }
        assert!(second_best_at_gamma(&EconParams::default(), -0.1).is_err());
    }
}
