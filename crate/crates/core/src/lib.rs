//! Simulation and analysis toolkit for the hold-up problem under negotiated
//! transfer pricing.
//!
//! Two divisions (a supplying *seller* and a *buying* division) each choose a
//! specific investment before trading an intermediate product. The contribution
//! margin of the efficient trade is split by a surplus sharing parameter, which
//! leaves both divisions prone to underinvestment. This crate provides:
//!
//! - [`econ`]: the economic primitives and the closed-form first-best and
//!   second-best equilibria.
//! - [`fuzzy`]: a zero-order Takagi-Sugeno fuzzy Q-function approximator.
//! - [`exploration`]: Boltzmann, ε-greedy and UCB per-rule action selection.
//! - [`sim`]: the per-run event loop and seeded, order-independent batches.
//! - [`stats`]: summaries, one-tailed Welch and rank-sum tests, and the
//!   performance indicators used to compare sweep cells.

pub mod econ;
pub mod error;
pub mod exploration;
pub mod fuzzy;
pub mod seed;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
