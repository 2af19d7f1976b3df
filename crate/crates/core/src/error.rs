use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Regime;
use crate::state::State;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A structural constraint of the metamodel is violated (e.g. `s >= 1`).
    #[error("constraint violated: {0}")]
    Constraint(String),
    /// A declared structure or operation has no concrete binding.
    #[error("no concrete binding for declared {0}")]
    Binding(String),
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error("operation requires regime {expected}, model is {found}")]
    Regime { expected: &'static str, found: Regime },
    /// Stepping reached a neighborhood the rule table has no entry for.
    /// Entity index is 1-based.
    #[error("undefined transition for entity {entity} at neighborhood {neighborhood:?}")]
    UndefinedTransition {
        entity: usize,
        neighborhood: Vec<State>,
    },
    #[error("at time step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("out of range: {0}")]
    Range(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Capability(String),
}
