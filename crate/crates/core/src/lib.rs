//! Logistic reformulation of a delay-coupled two-gene regulatory network.
//!
//! The network has two proteins `A` and `B` that activate each other and
//! repress themselves with delay. Three right-hand sides are provided:
//!
//! * the original Hill-linear hybrid ([`Formulation::Hill`]),
//! * linear additive activation with logistic self-repression
//!   ([`Formulation::LinearAdditive`]),
//! * a product of an increasing and a decreasing logistic scaled by a maximal
//!   rate ([`Formulation::Weighted`]).
//!
//! On top of those the crate offers Hill-to-logistic parameter matching,
//! equilibrium solving, delay-free stability classification, delay-induced
//! Hopf detection, closed-form Lipschitz bounds, a fixed-step DDE integrator
//! and least-squares parameter fitting. [`report::run_full_analysis`] chains
//! all of it into one JSON document.

pub mod config;
pub mod equilibrium;
pub mod error;
pub mod fit;
pub mod hopf;
pub mod lipschitz;
pub mod model;
pub mod report;
pub mod sigmoid;
pub mod simulate;
pub mod stability;

pub use config::ParameterSet;
pub use error::{Error, Result};
pub use model::{
    CoreParams, DelayConfig, DelayedState, Formulation, LogisticModelParams, Mat2, Model, State,
    WeightedModelParams,
};
