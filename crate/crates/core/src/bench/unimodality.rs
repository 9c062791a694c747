use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Design;
use crate::error::{domain, Result};
use crate::generators::{generate, Family};
use crate::matrix::DataMatrix;
use crate::objective::{ApproxPenalty, SizePenalty};
use crate::rng::derive_seed;
use crate::scanners::{scan_value, InnerInit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalityConfig {
    pub design: Design,
    pub family: Family,
    pub theta_mult: f64,
    pub m_bar: usize,
    pub n_bar: usize,
    /// Random-start LAS runs per grid cell; the best sum is kept.
    pub las_restarts: usize,
    pub las_max_iterations: usize,
    pub seed: u64,
}

impl UnimodalityConfig {
    /// 300 × 360 with a 40 × 60 block, frame 100 × 120, 2 × theta_crit.
    pub fn balanced() -> Self {
        Self {
            design: Design::new(300, 360, 40, 60),
            family: Family::Gaussian,
            theta_mult: 2.0,
            m_bar: 100,
            n_bar: 120,
            las_restarts: 100,
            las_max_iterations: 100,
            seed: 100,
        }
    }

    /// 500 × 50 with a 10 × 25 block, frame 100 × 50, 2 × theta_crit.
    pub fn imbalanced() -> Self {
        Self {
            design: Design::new(500, 50, 10, 25),
            m_bar: 100,
            n_bar: 50,
            ..Self::balanced()
        }
    }
}

/// Size profile `f(m, n)` on `[1, m_bar] × [1, n_bar]`, stored row-major with
/// `(m, n)` at index `(m - 1) * n_bar + (n - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalityGrid {
    pub m_bar: usize,
    pub n_bar: usize,
    pub raw: Vec<f64>,
    /// `(raw - min(raw))^4`, the display scale that sharpens the mode.
    pub display: Vec<f64>,
}

impl UnimodalityGrid {
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.raw[(m - 1) * self.n_bar + (n - 1)]
    }

    /// 1-based size with the largest raw value; ties go to the first in
    /// row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.raw.iter().enumerate() {
            if *v > self.raw[best] {
                best = k;
            }
        }
        (best / self.n_bar + 1, best % self.n_bar + 1)
    }

    pub fn raw_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::new(self.m_bar, self.n_bar, self.raw.clone())
    }

    pub fn display_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::new(self.m_bar, self.n_bar, self.display.clone())
    }

    /// Writes `<stem>_raw.csv`, `<stem>_display.csv` and `<stem>.json`.
    pub fn write(&self, stem: &Path, cfg: &UnimodalityConfig) -> Result<()> {
        let with = |suffix: &str| {
            let mut name = stem.file_name().unwrap_or_default().to_os_string();
            name.push(suffix);
            stem.with_file_name(name)
        };
        self.raw_matrix()?
            .write_csv(std::io::BufWriter::new(std::fs::File::create(with(
                "_raw.csv",
            ))?))?;
        self.display_matrix()?
            .write_csv(std::io::BufWriter::new(std::fs::File::create(with(
                "_display.csv",
            ))?))?;
        let (m, n) = self.argmax();
        let meta = serde_json::json!({
            "config": cfg,
            "argmax": { "m": m, "n": n },
            "rows_index": "m = 1..m_bar",
            "cols_index": "n = 1..n_bar",
        });
        std::fs::write(with(".json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

/// Evaluates the size profile on the full frame, with the scan value from the
/// best of `las_restarts` random-start LAS runs and the `k ln(K/k)` penalty
/// approximation.
pub fn unimodality_grid(cfg: &UnimodalityConfig) -> Result<UnimodalityGrid> {
    let d = cfg.design;
    if cfg.m_bar == 0 || cfg.m_bar > d.rows || cfg.n_bar == 0 || cfg.n_bar > d.cols {
        return Err(domain(format!(
            "frame ({}, {}) must lie within the {}x{} design",
            cfg.m_bar, cfg.n_bar, d.rows, d.cols
        )));
    }
    if cfg.las_restarts == 0 {
        return Err(domain("las_restarts must be >= 1"));
    }
    let spec = d.spec(cfg.family, cfg.theta_mult, derive_seed(cfg.seed, &[0]))?;
    let (x, _) = generate(&spec)?;
    let scan_seed = derive_seed(cfg.seed, &[1]);
    let penalty = ApproxPenalty {
        rows: d.rows,
        cols: d.cols,
    };
    let raw: Vec<f64> = (0..cfg.m_bar * cfg.n_bar)
        .into_par_iter()
        .map(|k| {
            let (m, n) = (k / cfg.n_bar + 1, k % cfg.n_bar + 1);
            let out = scan_value(
                &x,
                m,
                n,
                cfg.las_restarts,
                InnerInit::Random,
                scan_seed,
                cfg.las_max_iterations,
            )?;
            Ok(out.sum / ((m * n) as f64).sqrt() - penalty.value(m, n))
        })
        .collect::<Result<_>>()?;
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let display = raw.iter().map(|v| (v - lo).powi(4)).collect();
    Ok(UnimodalityGrid {
        m_bar: cfg.m_bar,
        n_bar: cfg.n_bar,
        raw,
        display,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_shape_and_mode() {
        let cfg = UnimodalityConfig {
            design: Design::new(60, 72, 8, 12),
            theta_mult: 4.0,
            m_bar: 20,
            n_bar: 24,
            las_restarts: 5,
            ..UnimodalityConfig::balanced()
        };
        let grid = unimodality_grid(&cfg).unwrap();
        assert_eq!(grid.raw.len(), 20 * 24);
        assert_eq!(grid.raw_matrix().unwrap().rows(), 20);
        let at_truth = grid.get(8, 12);
        assert!(at_truth > grid.get(1, 1));
        assert!(at_truth > grid.get(20, 24));
        assert!(grid.display.iter().all(|v| *v >= 0.0));
        assert_eq!(unimodality_grid(&cfg).unwrap(), grid);
    }

    #[test]
    fn frame_must_fit() {
        let cfg = UnimodalityConfig {
            m_bar: 301,
            ..UnimodalityConfig::balanced()
        };
        assert!(unimodality_grid(&cfg).is_err());
    }
}
