use std::collections::HashMap;

use crate::error::{PsqError, Result};

pub const DEFAULT_LM_FLOOR: f64 = 1e-7;

/// Maximum-likelihood unigram model of the query language with a floor
/// probability for unseen tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramLM {
    probs: HashMap<String, f64>,
    floor: f64,
    total: u64,
}

impl UnigramLM {
    pub fn lookup(&self, token: &str) -> f64 {
        self.probs.get(token).copied().unwrap_or(self.floor)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.probs.contains_key(token)
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of tokens the model was estimated from.
    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    /// Builds a model directly from probabilities (e.g. a published LM).
    pub fn from_probabilities(
        probs: impl IntoIterator<Item = (String, f64)>,
        floor: f64,
    ) -> Result<Self> {
        check_floor(floor)?;
        let probs: HashMap<String, f64> = probs.into_iter().collect();
        if let Some((t, p)) = probs.iter().find(|(_, &p)| !(p > 0.0 && p <= 1.0)) {
            return Err(PsqError::InvalidConfig(format!(
                "P({t}) = {p} outside (0, 1]"
            )));
        }
        let sum: f64 = probs.values().sum();
        if sum > 1.0 + 1e-6 {
            return Err(PsqError::InvalidConfig(format!(
                "unigram probabilities sum to {sum}"
            )));
        }
        Ok(UnigramLM {
            probs,
            floor,
            total: 0,
        })
    }
}

fn check_floor(floor: f64) -> Result<()> {
    if floor > 0.0 && floor.is_finite() {
        Ok(())
    } else {
        Err(PsqError::InvalidConfig(format!(
            "LM floor {floor} must be positive"
        )))
    }
}

pub fn build_unigram_lm<I, S>(tokens: I, floor: f64) -> Result<UnigramLM>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    check_floor(floor)?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for t in tokens {
        let t = t.as_ref();
        match counts.get_mut(t) {
            Some(c) => *c += 1,
            None => {
                counts.insert(t.to_owned(), 1);
            }
        }
        total += 1;
    }
    if total == 0 {
        return Err(PsqError::EmptyInput("unigram LM token stream"));
    }
    let probs = counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total as f64))
        .collect();
    Ok(UnigramLM {
        probs,
        floor,
        total,
    })
}
