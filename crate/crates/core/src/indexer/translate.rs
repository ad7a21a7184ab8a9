use std::collections::BTreeMap;

use super::lm::UnigramLM;
use super::weight::{weight_unchecked, SmoothingConfig};
use crate::alignment::TranslationTable;
use crate::textprep::TokenSequence;

/// Translated probabilities below this are dropped before weighting.
pub const PROJECTION_FLOOR: f64 = 1e-10;

/// Bag of document-language tokens. `length` counts tokens after
/// preprocessing, so stopwords removed upstream do not contribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentVector {
    pub doc_id: String,
    pub entries: BTreeMap<String, u32>,
    pub length: u32,
}

impl DocumentVector {
    pub fn from_tokens(doc_id: impl Into<String>, tokens: &TokenSequence) -> Self {
        let mut entries = BTreeMap::new();
        for t in tokens.iter() {
            *entries.entry(t.to_owned()).or_insert(0) += 1;
        }
        DocumentVector {
            doc_id: doc_id.into(),
            entries,
            length: u32::try_from(tokens.len()).expect("document longer than u32::MAX tokens"),
        }
    }

    /// P(w | D) estimated from term frequency.
    #[inline]
    pub fn share(&self, tf: u32) -> f64 {
        tf as f64 / self.length as f64
    }
}

/// P(query token | document), keyed by query-language token.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedDocVector {
    pub doc_id: String,
    pub entries: BTreeMap<String, f64>,
}

impl TranslatedDocVector {
    pub fn prob(&self, token: &str) -> f64 {
        self.entries.get(token).copied().unwrap_or(0.0)
    }
}

/// Projects a document into the query language:
/// `P(t | D) = Σ_s P(t | s) · tf(s) / |D|`. Source tokens missing from the
/// table contribute nothing.
pub fn translate_document(doc: &DocumentVector, table: &TranslationTable) -> TranslatedDocVector {
    let mut entries: BTreeMap<String, f64> = BTreeMap::new();
    if doc.length > 0 {
        for (source, &tf) in &doc.entries {
            let Some(list) = table.get(source) else {
                continue;
            };
            let share = doc.share(tf);
            for t in list {
                *entries.entry(t.target.clone()).or_insert(0.0) += t.prob * share;
            }
        }
    }
    entries.retain(|_, p| *p > 0.0);
    TranslatedDocVector {
        doc_id: doc.doc_id.clone(),
        entries,
    }
}

/// Term weights of a translated document, in token order. Entries under
/// [`PROJECTION_FLOOR`] are dropped.
pub fn weigh_document(
    doc: &TranslatedDocVector,
    lm: &UnigramLM,
    cfg: SmoothingConfig,
) -> Vec<(String, f64)> {
    doc.entries
        .iter()
        .filter(|(_, &p)| p >= PROJECTION_FLOOR)
        .map(|(t, &p)| (t.clone(), weight_unchecked(p, lm.lookup(t), cfg.alpha())))
        .filter(|(_, w)| *w > 0.0)
        .collect()
}
