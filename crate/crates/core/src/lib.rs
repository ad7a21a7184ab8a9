//! Indexing-time probabilistic structured queries (PSQ) for cross-language
//! sparse retrieval.
//!
//! Documents in one language are projected into the query language through
//! a lexical translation table, weighted for Jelinek-Mercer smoothed query
//! likelihood, and stored in an inverted index keyed by query-language
//! tokens. Pruning the table trades index size against effectiveness; the
//! [`sweep`] module measures that tradeoff over a grid and extracts the
//! Pareto frontier.
//!
//! Pipeline stages map to modules:
//!
//! * [`textprep`]: shared tokenization
//! * [`alignment`]: Model 1 training, count normalization, table I/O
//! * [`pruning`]: PMF / CDF / top-k pruning
//! * [`indexer`]: document projection, term weights, index build and format
//! * [`search`]: ranked retrieval and the dense scoring reference
//! * [`evaluation`]: MAP and recall@k against qrels
//! * [`sweep`]: grid runs, Pareto analysis, report files

pub mod alignment;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod indexer;
pub mod pruning;
pub mod search;
pub mod sweep;
pub mod synthetic;
pub mod textprep;

pub use error::{PsqError, Result};
pub use exec::Exec;
