//! Discipline-specific search-term recommendation and query expansion.
//!
//! The crate builds one co-occurrence recommender per discipline of a
//! classified, descriptor-indexed corpus (plus a global one), expands topic
//! queries with their suggestions, retrieves with a tf-idf inverted index
//! and evaluates the expansion strategies with MAP, R-precision, P@k and a
//! paired t-test.
//!
//! See the `examples/` directory for one runnable walkthrough per stage.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod expansion;
pub mod index;
pub mod recommender;
pub mod synthetic;

pub use error::{Error, Result};
