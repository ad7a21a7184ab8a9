//! Indexing-time translation of documents into a query-language inverted
//! index weighted for smoothed query likelihood.

mod build;
mod docs;
mod index;
mod lm;
mod translate;
mod vocab;
mod weight;

pub use build::{build_index, IndexBuilder, DEFAULT_CHUNK_SIZE};
pub use docs::{load_documents_jsonl, read_documents_jsonl, RawDocument};
pub use index::{index_size, IndexMetadata, IndexSize, InvertedIndex, Posting, MAGIC};
pub use lm::{build_unigram_lm, UnigramLM, DEFAULT_LM_FLOOR};
pub use translate::{
    translate_document, weigh_document, DocumentVector, TranslatedDocVector, PROJECTION_FLOOR,
};
pub use vocab::Vocabulary;
pub use weight::{term_weight, SmoothingConfig, DEFAULT_ALPHA};
