//! Finite-blocklength covert communication as a zero-sum game.
//!
//! A transmitter (optionally helped by a cooperative jammer) picks a transmit
//! power, a warden running an energy detector picks a threshold. Payoffs trade
//! the normal-approximation coding rate against the warden's total detection
//! error. Equilibria come from a linear program solved by the in-crate
//! simplex implementation.

pub mod detection;
pub mod experiments;
pub mod lpsolve;
pub mod matrixgame;
pub mod model;
pub mod rate;
pub mod simkit;
pub mod specfun;

pub use detection::MixedStrategy;
pub use matrixgame::{build_payoff, solve_game, CovertGame, EquilibriumSolution, PayoffMatrix};
pub use model::{ActionSpace, Scenario};
