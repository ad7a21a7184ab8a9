use serde::{Deserialize, Serialize};

use crate::error::{PsqError, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Jelinek-Mercer interpolation weight on the background model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    alpha: f64,
}

impl SmoothingConfig {
    /// `alpha` must lie strictly inside (0, 1).
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(SmoothingConfig { alpha })
        } else {
            Err(PsqError::InvalidConfig(format!(
                "alpha {alpha} outside (0, 1)"
            )))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Sparse query-likelihood term weight
/// `ln((1 - α)·p_doc / (α·p_bg) + 1)`, exactly 0 when `p_doc` is 0.
pub fn term_weight(p_doc: f64, p_bg: f64, cfg: SmoothingConfig) -> Result<f64> {
    if p_bg.is_nan() || p_bg <= 0.0 {
        return Err(PsqError::InvalidConfig(format!(
            "background probability {p_bg} must be positive"
        )));
    }
    Ok(weight_unchecked(p_doc, p_bg, cfg.alpha))
}

#[inline]
pub(crate) fn weight_unchecked(p_doc: f64, p_bg: f64, alpha: f64) -> f64 {
    if p_doc <= 0.0 {
        return 0.0;
    }
    ((1.0 - alpha) * p_doc / (alpha * p_bg)).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_document_probability_scores_zero() {
        for a in [0.1, 0.5, 0.9] {
            let cfg = SmoothingConfig::new(a).unwrap();
            assert_eq!(term_weight(0.0, 0.3, cfg).unwrap(), 0.0);
            assert_eq!(term_weight(0.0, 1e-9, cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn balanced_ratio_is_ln2() {
        let cfg = SmoothingConfig::new(0.5).unwrap();
        for p in [0.5, 0.01, 1e-6] {
            assert!((term_weight(p, p, cfg).unwrap() - 2f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn direct_evaluation() {
        let cfg = SmoothingConfig::new(0.3).unwrap();
        let w = term_weight(0.2, 0.01, cfg).unwrap();
        let expected = (0.7 * 0.2 / (0.3 * 0.01) + 1.0f64).ln();
        assert!((w - expected).abs() < 1e-12);
        assert!((w - 3.86423).abs() < 5e-5, "{w}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(SmoothingConfig::new(0.0).is_err());
        assert!(SmoothingConfig::new(1.0).is_err());
        assert!(SmoothingConfig::new(f64::NAN).is_err());
        let cfg = SmoothingConfig::default();
        assert!(term_weight(0.1, 0.0, cfg).is_err());
        assert!(term_weight(0.1, -1.0, cfg).is_err());
    }

    #[test]
    fn monotone_in_both_probabilities() {
        let cfg = SmoothingConfig::new(0.4).unwrap();
        let grid = [1e-9, 1e-6, 1e-4, 0.01, 0.1, 0.3, 0.7, 1.0];
        for &bg in &grid {
            for w in grid.windows(2) {
                assert!(term_weight(w[0], bg, cfg).unwrap() < term_weight(w[1], bg, cfg).unwrap());
            }
        }
        for &p in &grid {
            for w in grid.windows(2) {
                assert!(term_weight(p, w[0], cfg).unwrap() > term_weight(p, w[1], cfg).unwrap());
            }
        }
    }
}
