use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{top_k, ScanResult, TieBreak, TieKeys};
use crate::error::{domain, Result};
use crate::matrix::{DataMatrix, Selection};
use crate::objective::{block_sum, mscan_objective, PenaltyParams};
use crate::rng::{self, Rng};

/// Starting row set for LAS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LasInit {
    /// Explicit rows; must have exactly `m` distinct in-range entries.
    Rows(Vec<usize>),
    /// `m` rows drawn uniformly without replacement.
    Random { seed: u64 },
    /// The `m` rows with the largest full-row sums.
    LargestRowSums,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LasConfig {
    pub m: usize,
    pub n: usize,
    pub init: LasInit,
    pub max_iterations: usize,
    pub tie_break: TieBreak,
}

impl LasConfig {
    pub fn new(m: usize, n: usize, init: LasInit) -> Self {
        Self {
            m,
            n,
            init,
            max_iterations: 100,
            tie_break: TieBreak::LowerIndex,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LasOutcome {
    pub selection: Selection,
    /// Fixed-size scan value: the plain submatrix sum.
    pub sum: f64,
    /// Full (column step + row step) iterations performed.
    pub iterations: usize,
    pub converged: bool,
    /// Submatrix sum after every half step.
    pub trace: Vec<f64>,
}

impl LasOutcome {
    pub fn into_scan_result(self, x: &DataMatrix, params: PenaltyParams) -> Result<ScanResult> {
        let objective = mscan_objective(x, &self.selection, params)?;
        Ok(ScanResult {
            selection: self.selection,
            objective,
            iterations: self.iterations,
            restarts_used: 1,
        })
    }
}

pub(crate) fn random_rows(rng: &mut Rng, total: usize, m: usize) -> Vec<usize> {
    let mut rows = index::sample(rng, total, m).into_vec();
    rows.sort_unstable();
    rows
}

pub(crate) fn largest_row_sums(x: &DataMatrix, m: usize) -> Vec<usize> {
    top_k(&x.row_sums(), m, None)
}

/// Large Average Submatrix search at fixed size `(m, n)`.
///
/// Alternates: columns become the `n` largest column sums over the current
/// rows, then rows become the `m` largest row sums over those columns. Stops
/// when a full iteration leaves the rows unchanged.
pub fn las(x: &DataMatrix, cfg: &LasConfig) -> Result<LasOutcome> {
    let (m, n) = (cfg.m, cfg.n);
    if m == 0 || m > x.rows() || n == 0 || n > x.cols() {
        return Err(domain(format!(
            "LAS size ({m}, {n}) outside [1, {}] x [1, {}]",
            x.rows(),
            x.cols()
        )));
    }
    if cfg.max_iterations == 0 {
        return Err(domain("LAS needs max_iterations >= 1"));
    }
    let tie_seed = match cfg.init {
        LasInit::Random { seed } => seed,
        _ => 0,
    };
    let rows = match &cfg.init {
        LasInit::Rows(rows) => {
            let mut rows = rows.clone();
            rows.sort_unstable();
            if rows.len() != m
                || rows.windows(2).any(|w| w[0] == w[1])
                || rows.last().is_some_and(|&r| r >= x.rows())
            {
                return Err(domain(format!(
                    "initial rows must be {m} distinct indices below {}",
                    x.rows()
                )));
            }
            rows
        }
        LasInit::Random { seed } => random_rows(&mut rng::stream(*seed, 0), x.rows(), m),
        LasInit::LargestRowSums => largest_row_sums(x, m),
    };
    let keys = TieKeys::new(cfg.tie_break, x.rows(), x.cols(), tie_seed);
    Ok(run_las(x, n, rows, cfg.max_iterations, &keys))
}

pub(crate) fn run_las(
    x: &DataMatrix,
    n: usize,
    mut rows: Vec<usize>,
    max_iterations: usize,
    keys: &TieKeys,
) -> LasOutcome {
    let m = rows.len();
    let mut cols: Vec<usize> = Vec::new();
    let mut sum = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        let start_rows = rows.clone();

        let candidate = top_k(&x.col_sums_over(&rows), n, keys.cols());
        if candidate != cols {
            let s = block_sum(x, &rows, &candidate);
            if cols.is_empty() || s > sum {
                cols = candidate;
                sum = s;
            }
        }
        trace.push(sum);

        let candidate = top_k(&x.row_sums_over(&cols), m, keys.rows());
        if candidate != rows {
            let s = block_sum(x, &candidate, &cols);
            if s > sum {
                rows = candidate;
                sum = s;
            }
        }
        trace.push(sum);

        if rows == start_rows {
            converged = true;
            break;
        }
    }

    LasOutcome {
        selection: Selection::from_sorted_unchecked(rows, cols),
        sum,
        iterations,
        converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_block_is_a_fixed_point() {
        let mut rows = vec![vec![0.0; 6]; 5];
        for r in rows.iter_mut().take(2) {
            r[0] = 10.0;
            r[1] = 10.0;
        }
        let x = DataMatrix::from_rows(&rows).unwrap();
        let out = las(&x, &LasConfig::new(2, 2, LasInit::Rows(vec![0, 1]))).unwrap();
        assert_eq!(out.selection, Selection::leading(2, 2).unwrap());
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert_eq!(out.sum, 40.0);
    }

    #[test]
    fn diagonal_hand_trace() {
        let x = DataMatrix::from_rows(&[[5.0, 0.0], [0.0, 5.0]]).unwrap();
        let out = las(&x, &LasConfig::new(1, 1, LasInit::Rows(vec![0]))).unwrap();
        assert_eq!(out.selection, Selection::new(vec![0], vec![0]).unwrap());
        assert_eq!(out.sum, 5.0);
        let out = las(&x, &LasConfig::new(1, 1, LasInit::Rows(vec![1]))).unwrap();
        assert_eq!(out.selection, Selection::new(vec![1], vec![1]).unwrap());
    }

    #[test]
    fn init_policies() {
        let x = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 3.0], [2.0, 2.0]]).unwrap();
        let out = las(&x, &LasConfig::new(1, 1, LasInit::LargestRowSums)).unwrap();
        // Row 2 has the largest sum; its two equal columns tie toward column 0.
        assert_eq!(out.selection, Selection::new(vec![2], vec![0]).unwrap());
        let a = las(&x, &LasConfig::new(2, 1, LasInit::Random { seed: 4 })).unwrap();
        let b = las(&x, &LasConfig::new(2, 1, LasInit::Random { seed: 4 })).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_invalid_config() {
        let x = DataMatrix::zeros(3, 3).unwrap();
        assert!(las(&x, &LasConfig::new(0, 1, LasInit::LargestRowSums)).is_err());
        assert!(las(&x, &LasConfig::new(2, 4, LasInit::LargestRowSums)).is_err());
        assert!(las(&x, &LasConfig::new(2, 1, LasInit::Rows(vec![0]))).is_err());
        assert!(las(&x, &LasConfig::new(2, 1, LasInit::Rows(vec![0, 0]))).is_err());
        assert!(las(&x, &LasConfig::new(2, 1, LasInit::Rows(vec![0, 3]))).is_err());
    }
}
