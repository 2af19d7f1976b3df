//! File formats and command-line front end for `metamodel-core`.
//!
//! - [`formats::model`]: model documents (JSON) for every regime.
//! - [`formats::trajectory`]: one line of states per time step.
//! - [`formats::rules`]: `<neighborhood> -> <state>` rule lines and the
//!   `wolfram:<n>` shorthand.
//! - [`formats::network`] and [`formats::dataset`]: network documents and
//!   `inputs | targets` training data.
//! - [`formats::log`]: adaptation logs.
//! - [`formats::report`]: equivalence reports as JSON and as a table.
//! - [`formats::pbm`]: plain PBM (P1) bitmaps of binary trajectories.

pub mod cli;
mod error;
pub mod formats;

pub use error::{FileError, Result};
