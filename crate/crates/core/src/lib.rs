//! A generic system metamodel for complex-systems simulation.
//!
//! A [`SystemModel`] is a tuple of structures (entities, their state set,
//! milieus, update rules, adaptation rules, adaptation end) and operations
//! (an update function and an optional adaptation function). Models move
//! through three regimes: declared but unparameterized ([`Regime::Virtual`]),
//! fully parameterized ([`Regime::Metastable`]) and executed with a
//! trajectory ([`Regime::Actual`]).
//!
//! Cellular automata ([`ca`]) and feed-forward or lattice neural networks
//! ([`ann`]) are constructed as special cases of the metamodel and can be
//! converted back. [`adaptation`] evolves rule tables toward a target state
//! and [`equivalence`] decides whether two models match structurally and
//! extensionally.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adaptation;
pub mod ann;
pub mod ca;
mod engine;
pub mod equivalence;
mod error;
mod loss;
mod milieu;
mod model;
mod rule_table;
mod state;

pub use engine::{actualize, step};
pub use error::{Error, Result};
pub use loss::loss;
pub use milieu::{Link, Milieus};
pub use model::{
    AdaptationEnd, AdaptationFunction, AdaptationRecord, ComparisonScope, ConcreteParameters,
    OperationKind, Regime, RuleSet, StructureKind, SystemModel, TableId, Trajectory,
    UpdateFunction,
};
pub use rule_table::RuleTable;
pub use state::{Entities, State, StateSet};
