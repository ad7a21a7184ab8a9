use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PsqError, Result};
use crate::indexer::{SmoothingConfig, DEFAULT_ALPHA};
use crate::pruning::{PruningConfig, TopK};

/// Cartesian grid of pruning settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub pmf: Vec<f64>,
    pub topk: Vec<TopK>,
    pub cdf: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub renormalize: bool,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

impl Default for SweepGrid {
    /// 6 PMF × 8 top-k × 10 CDF values, 480 cells. The PMF list keeps its
    /// published order (0.05 before 0.01).
    fn default() -> Self {
        SweepGrid {
            pmf: vec![0.0, 0.05, 0.01, 0.001, 0.0001, 0.00001],
            topk: [2, 4, 8, 16, 32, 64, 128]
                .into_iter()
                .map(TopK::Limit)
                .chain([TopK::Unbounded])
                .collect(),
            cdf: vec![
                0.800, 0.900, 0.950, 0.960, 0.965, 0.970, 0.975, 0.980, 0.990, 1.000,
            ],
            alpha: DEFAULT_ALPHA,
            renormalize: false,
        }
    }
}

/// One grid cell with its coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub pmf_index: usize,
    pub topk_index: usize,
    pub cdf_index: usize,
    pub config: PruningConfig,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.pmf.len() * self.topk.len() * self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(PsqError::InvalidConfig(
                "sweep grid has an empty axis".into(),
            ));
        }
        SmoothingConfig::new(self.alpha)?;
        for c in self.cells_unchecked() {
            c.config.validate()?;
        }
        Ok(())
    }

    fn cells_unchecked(&self) -> Vec<GridCell> {
        let mut cells = Vec::with_capacity(self.len());
        for (pi, &pmf) in self.pmf.iter().enumerate() {
            for (ki, &topk) in self.topk.iter().enumerate() {
                for (ci, &cdf) in self.cdf.iter().enumerate() {
                    cells.push(GridCell {
                        pmf_index: pi,
                        topk_index: ki,
                        cdf_index: ci,
                        config: PruningConfig {
                            pmf_min: pmf,
                            cdf_max: cdf,
                            top_k: topk,
                            renormalize: self.renormalize,
                        },
                    });
                }
            }
        }
        cells
    }

    /// Cells in PMF-major, then top-k, then CDF order.
    pub fn cells(&self) -> Result<Vec<GridCell>> {
        self.validate()?;
        Ok(self.cells_unchecked())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PsqError::io(path, e))?;
        let grid: SweepGrid = serde_json::from_str(&text)?;
        grid.validate()?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_480_cells() {
        let g = SweepGrid::default();
        assert_eq!((g.pmf.len(), g.topk.len(), g.cdf.len()), (6, 8, 10));
        let cells = g.cells().unwrap();
        assert_eq!(cells.len(), 480);
        assert_eq!(cells[0].config.pmf_min, 0.0);
        assert_eq!(cells[9].config.cdf_max, 1.0);
        assert_eq!(cells[79].config.top_k, TopK::Unbounded);
        assert!(cells.iter().all(|c| !c.config.renormalize));
    }

    #[test]
    fn json_grid() {
        let g: SweepGrid = serde_json::from_str(
            r#"{"pmf":[0,0.01],"topk":[4,"inf"],"cdf":[0.9,1.0],"alpha":0.3}"#,
        )
        .unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.topk[1], TopK::Unbounded);
        assert!(g.validate().is_ok());
        let bad: SweepGrid = serde_json::from_str(r#"{"pmf":[0],"topk":[1],"cdf":[0]}"#).unwrap();
        assert!(bad.validate().is_err());
        let empty: SweepGrid = serde_json::from_str(r#"{"pmf":[],"topk":[1],"cdf":[1]}"#).unwrap();
        assert!(empty.cells().is_err());
        let bad_alpha: SweepGrid =
            serde_json::from_str(r#"{"pmf":[0],"topk":[1],"cdf":[1],"alpha":1}"#).unwrap();
        assert!(bad_alpha.validate().is_err());
    }
}
