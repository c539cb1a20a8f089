//! Post-processing and evaluation toolkit for value-free text-to-SQL parsers.
//!
//! - [`corpus`]: Spider-format schemas, examples and read-only databases.
//! - [`sql`]: clause-level query representation with value slots.
//! - [`preprocess`]: question segmentation, enhanced column names,
//!   cell-value annotation and column-selection labels.
//! - [`value_filler`]: candidate retrieval and heuristic slot filling.
//! - [`evaluator`]: exact set match, execution match and hardness breakdown.
//! - [`cli`]: the `textsql` command-line pipelines.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod preprocess;
pub mod sql;
pub mod value_filler;

pub use error::{Error, Result};
