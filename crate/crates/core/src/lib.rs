//! Two-qubit Hardy and Hardy-Unruh state families, their correlation arrays,
//! chains of conditionals and broken arrows, raffle-ticket local hidden-variable
//! models, and membership tests for the local polytope, the quantum convex set
//! and the non-signaling polytope.
//!
//! Outcomes ("tastes") take the values ±½ throughout, so a balanced cell has
//! `⟨AB⟩ = χ/4`.

pub mod chains;
pub mod correlations;
mod error;
pub mod geometry;
pub mod lhv;
pub mod qstate;
pub mod simplex;

pub use chains::{
    extract_conditionals, find_broken_arrows, relabel_array, BrokenArrow, ChainReport, Clause,
    Conditional, Entailment, Event, LabelMap, Proposition, Relabeling, Rule, Vacuous,
};
pub use correlations::{
    balance_array, born_array, cell_moments, check_nonsignaling, correlation_coefficient,
    moments_to_cell, Cell, ChiValue, CorrelationArray, Moments, NonSignalingReport, Outcome, Side,
};
pub use error::{Error, Result};
pub use geometry::{ChiPoint, DirectionSet, RegionReport};
pub use lhv::{FeasibilityResult, Raffle, Scenario, Ticket};
pub use qstate::{
    born_cell, family_settings, hardy_state, hu_state, hu_state_generic, rotate_basis, singlet,
    Amplitude, BasisRotation, Setting, TwoQubitState,
};

/// Default tolerance for zero/equality detection on probabilities.
pub const DEFAULT_TOL: f64 = 1e-10;
