use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::las::{random_rows, run_las};
use super::{order_desc, prefer, ScanResult, TieBreak, TieKeys};
use crate::error::{domain, Result};
use crate::matrix::{DataMatrix, Selection};
use crate::objective::{block_sum, PenaltyParams, PenaltyTable, SizePenalty};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Size of the initial LAS run; clipped to the matrix shape.
    pub m0: usize,
    pub n0: usize,
    pub restarts: usize,
    pub max_outer_iterations: usize,
    pub las_max_iterations: usize,
    pub penalty: PenaltyParams,
    pub tie_break: TieBreak,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            m0: 25,
            n0: 25,
            restarts: 50,
            max_outer_iterations: 100,
            las_max_iterations: 100,
            penalty: PenaltyParams::GAUSSIAN,
            tie_break: TieBreak::LowerIndex,
        }
    }
}

impl AdaptiveConfig {
    fn validate(&self) -> Result<()> {
        if self.m0 == 0 || self.n0 == 0 {
            return Err(domain("adaptive LAS needs an initial size of at least 1x1"));
        }
        if self.restarts == 0 || self.max_outer_iterations == 0 || self.las_max_iterations == 0 {
            return Err(domain(
                "adaptive LAS needs restarts and iteration caps >= 1",
            ));
        }
        PenaltyParams::new(self.penalty.delta)?;
        Ok(())
    }
}

/// One restart of adaptive LAS.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    pub selection: Selection,
    pub objective: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    /// Objective after the initial LAS run, then after every half step.
    pub trace: Vec<f64>,
}

/// Runs adaptive LAS once from `init_rows` (an initial LAS at `(|init_rows|, n0)`
/// followed by size-adaptive alternation).
pub fn adaptive_las_from(
    x: &DataMatrix,
    cfg: &AdaptiveConfig,
    init_rows: Vec<usize>,
) -> Result<AdaptiveRun> {
    cfg.validate()?;
    let mut rows = init_rows;
    rows.sort_unstable();
    rows.dedup();
    if rows.is_empty() || rows.last().is_some_and(|&r| r >= x.rows()) {
        return Err(domain("initial rows must be nonempty and within bounds"));
    }
    let table = PenaltyTable::for_matrix(x, cfg.penalty);
    let keys = TieKeys::lower_index();
    Ok(run(x, cfg, rows, &table, &keys))
}

fn objective(x: &DataMatrix, rows: &[usize], cols: &[usize], table: &PenaltyTable) -> f64 {
    block_sum(x, rows, cols) / ((rows.len() * cols.len()) as f64).sqrt()
        - table.value(rows.len(), cols.len())
}

/// Best prefix of `order` under `prefix_sum / sqrt(fixed * k) - penalty(k)`.
/// Earliest (smallest) size wins ties.
fn best_prefix(
    sums: &[f64],
    order: &[usize],
    fixed: usize,
    penalty: impl Fn(usize) -> f64,
) -> usize {
    let mut acc = 0.0;
    let mut best = (f64::NEG_INFINITY, 1);
    for (k0, &idx) in order.iter().enumerate() {
        let k = k0 + 1;
        acc += sums[idx];
        let v = acc / ((fixed * k) as f64).sqrt() - penalty(k);
        if v > best.0 {
            best = (v, k);
        }
    }
    best.1
}

fn run(
    x: &DataMatrix,
    cfg: &AdaptiveConfig,
    init_rows: Vec<usize>,
    table: &PenaltyTable,
    keys: &TieKeys,
) -> AdaptiveRun {
    let n0 = cfg.n0.min(x.cols());
    let start = run_las(x, n0, init_rows, cfg.las_max_iterations, keys);
    let (mut rows, mut cols) = (
        start.selection.rows().to_vec(),
        start.selection.cols().to_vec(),
    );
    let mut value = objective(x, &rows, &cols, table);
    let mut trace = vec![value];
    let mut outer_iterations = 0;
    let mut converged = false;

    while outer_iterations < cfg.max_outer_iterations {
        outer_iterations += 1;
        let (prev_rows, prev_cols) = (rows.clone(), cols.clone());

        // Columns: best size and set given the rows.
        let sums = x.col_sums_over(&rows);
        let order = order_desc(&sums, keys.cols());
        let n = best_prefix(&sums, &order, rows.len(), |k| table.value(rows.len(), k));
        let mut candidate = order[..n].to_vec();
        candidate.sort_unstable();
        if candidate != cols {
            let v = objective(x, &rows, &candidate, table);
            if v > value {
                cols = candidate;
                value = v;
            }
        }
        trace.push(value);

        // Rows: best size and set given the columns.
        let sums = x.row_sums_over(&cols);
        let order = order_desc(&sums, keys.rows());
        let m = best_prefix(&sums, &order, cols.len(), |k| table.value(k, cols.len()));
        let mut candidate = order[..m].to_vec();
        candidate.sort_unstable();
        if candidate != rows {
            let v = objective(x, &candidate, &cols, table);
            if v > value {
                rows = candidate;
                value = v;
            }
        }
        trace.push(value);

        if rows == prev_rows && cols == prev_cols {
            converged = true;
            break;
        }
    }

    AdaptiveRun {
        selection: Selection::from_sorted_unchecked(rows, cols),
        objective: value,
        outer_iterations,
        converged,
        trace,
    }
}

/// Adaptive LAS over `cfg.restarts` random starts; returns the restart with the
/// largest multiscale objective.
///
/// Restart `r` draws its initial `m0` rows uniformly from ChaCha8 stream `r`
/// under `seed`. Restarts run in parallel and are merged in restart order, so
/// the result does not depend on the thread count. Ties go to the smaller
/// submatrix, then the lexicographically smaller selection.
pub fn adaptive_las(x: &DataMatrix, cfg: &AdaptiveConfig, seed: u64) -> Result<ScanResult> {
    cfg.validate()?;
    let table = PenaltyTable::for_matrix(x, cfg.penalty);
    let m0 = cfg.m0.min(x.rows());
    let runs: Vec<ScanResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r as u64);
            let init = random_rows(&mut rng, x.rows(), m0);
            let keys = TieKeys::new(
                cfg.tie_break,
                x.rows(),
                x.cols(),
                rng::derive_seed(seed, &[r as u64]),
            );
            let out = run(x, cfg, init, &table, &keys);
            ScanResult {
                selection: out.selection,
                objective: out.objective,
                iterations: out.outer_iterations,
                restarts_used: cfg.restarts,
            }
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if prefer(&b, &a).is_lt() { b } else { a })
        .expect("restarts >= 1");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::mscan_objective;

    fn planted(rows: usize, cols: usize, m: usize, n: usize, value: f64) -> DataMatrix {
        let mut v = vec![vec![0.0; cols]; rows];
        for r in v.iter_mut().take(m) {
            for e in r.iter_mut().take(n) {
                *e = value;
            }
        }
        DataMatrix::from_rows(&v).unwrap()
    }

    #[test]
    fn recovers_noise_free_block() {
        let x = planted(30, 40, 6, 9, 50.0);
        let cfg = AdaptiveConfig {
            m0: 3,
            n0: 3,
            restarts: 5,
            ..AdaptiveConfig::default()
        };
        let res = adaptive_las(&x, &cfg, 1).unwrap();
        assert_eq!(res.selection, Selection::leading(6, 9).unwrap());
        let direct = mscan_objective(&x, &res.selection, PenaltyParams::GAUSSIAN).unwrap();
        assert_eq!(res.objective, direct);
    }

    #[test]
    fn trace_is_monotone_and_ends_at_objective() {
        let x = planted(12, 15, 4, 5, 3.0);
        let run = adaptive_las_from(&x, &AdaptiveConfig::default(), vec![7, 8, 9]).unwrap();
        assert!(run.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*run.trace.last().unwrap(), run.objective);
        assert!(run.converged);
    }

    #[test]
    fn same_seed_same_result() {
        let x = planted(20, 20, 5, 5, 2.0).map(|v| v + 0.01).unwrap();
        let cfg = AdaptiveConfig {
            restarts: 4,
            tie_break: TieBreak::Random,
            ..AdaptiveConfig::default()
        };
        assert_eq!(
            adaptive_las(&x, &cfg, 9).unwrap(),
            adaptive_las(&x, &cfg, 9).unwrap()
        );
    }

    #[test]
    fn invalid_config() {
        let x = DataMatrix::zeros(3, 3).unwrap();
        let cfg = AdaptiveConfig {
            restarts: 0,
            ..AdaptiveConfig::default()
        };
        assert!(adaptive_las(&x, &cfg, 0).is_err());
        assert!(adaptive_las_from(&x, &AdaptiveConfig::default(), vec![3]).is_err());
    }
}
