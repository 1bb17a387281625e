//! Pricing, surplus and adverse-selection engine for lapse-supported life
//! insurance in the three-state (in force, dead, lapsed) Markov model.
//!
//! * [`hazards`]: mortality and lapse intensities, bases, discount factors
//! * [`contracts`]: endowment contracts and surrender-value rules
//! * [`thiele`]: policy values and premiums from Thiele's equation
//! * [`surplus`]: emerging surplus, premium-reduction identities, profit/loss diagnostics
//! * [`moments`]: first and second moments of the loss, mixtures, Monte Carlo oracle
//! * [`advsel`]: two-subpopulation adverse-selection cost scenarios

// `!(x >= 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advsel;
pub mod contracts;
pub mod error;
pub mod grid;
pub mod hazards;
pub mod moments;
pub mod surplus;
pub mod thiele;

pub use contracts::{Contract, PremiumForm, SurrenderRule};
pub use error::{Error, Result};
pub use grid::{Grid, DEFAULT_STEP};
pub use hazards::{Basis, LapseModel, MortalityModel};
pub use thiele::{PolicyFunctions, PremiumSchedule, Regime};
