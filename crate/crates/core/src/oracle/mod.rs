//! Independent ground truth for the closed forms: a truncated
//! balance-equation solver, a discrete-event simulator, and a best-response
//! verifier built on the solver.
//!
//! Nothing here calls into [`crate::spectral`] or [`crate::benefit`].

pub mod balance;
pub mod simulate;
pub mod verify;

pub use balance::{clearing_means, solve_adaptive, solve_truncated_balance, TruncatedSolution};
pub use simulate::{simulate, Estimate, SimEstimates};
pub use verify::{verify_equilibrium, StateCheck, VerificationReport, VerificationSummary};
