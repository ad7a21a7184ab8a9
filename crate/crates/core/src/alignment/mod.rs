//! Lexical translation tables: estimation, ingestion and persistence.
//!
//! Probabilities are always P(query-language token | document-language
//! token); "source" below means the document language.

mod corpus;
mod counts;
mod model1;
mod table;

pub use corpus::{load_parallel_files, load_parallel_tsv, LoadedCorpus, ParallelCorpus};
pub use counts::{counts_from_alignments, normalize_counts, pharaoh_pairs, AlignmentCounts};
pub use model1::{
    model1_log_likelihood, train_model1, Model1Fit, Model1Trainer, DEFAULT_ITERATIONS, PROB_FLOOR,
};
pub use table::{
    load_table, save_table, Translation, TranslationTable, LOAD_SUM_TOLERANCE, SUM_TOLERANCE,
};
