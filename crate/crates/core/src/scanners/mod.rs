//! Search algorithms for the multiscale scan statistic.
//!
//! - [`las`]: alternating top-k maximization at a fixed size.
//! - [`adaptive_las`]: the same alternation with the size re-chosen at every
//!   half step from penalized prefix sums, over random restarts.
//! - [`gss`]: golden-section search over the size grid with LAS as the inner
//!   scan.
//! - [`exhaustive_mscan`]: exact maximizer for small matrices.
//!
//! Every reported objective is recomputed with
//! [`mscan_objective`](crate::objective::mscan_objective)'s summation order.
//! Each half step of LAS and adaptive LAS only replaces the current index set
//! when that recomputed value strictly improves, so the traced sequences are
//! non-decreasing in floating point, not just in exact arithmetic.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::matrix::Selection;
use crate::rng;

mod adaptive;
mod exhaustive;
mod gss;
mod las;

pub use adaptive::{adaptive_las, adaptive_las_from, AdaptiveConfig, AdaptiveRun};
pub use exhaustive::{exhaustive_mscan, EXHAUSTIVE_MAX_ROWS};
pub use gss::{gss, gss_detailed, scan_value, Frame, GssConfig, GssReport, InnerInit};
pub use las::{las, LasConfig, LasInit, LasOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub selection: Selection,
    /// Multiscale objective of `selection`.
    pub objective: f64,
    pub iterations: usize,
    pub restarts_used: usize,
}

/// How equal values are ordered when picking the k largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Smaller index first.
    #[default]
    LowerIndex,
    /// A seeded random permutation decides among equal values.
    Random,
}

/// Secondary sort keys for rows and columns.
#[derive(Debug, Clone)]
pub(crate) struct TieKeys {
    rows: Option<Vec<u32>>,
    cols: Option<Vec<u32>>,
}

impl TieKeys {
    pub(crate) fn lower_index() -> Self {
        Self {
            rows: None,
            cols: None,
        }
    }

    pub(crate) fn new(tie_break: TieBreak, n_rows: usize, n_cols: usize, seed: u64) -> Self {
        match tie_break {
            TieBreak::LowerIndex => Self::lower_index(),
            TieBreak::Random => {
                let mut rng = rng::stream(seed, u64::MAX);
                let mut perm = |n: usize| {
                    let mut p: Vec<u32> = (0..n as u32).collect();
                    p.shuffle(&mut rng);
                    p
                };
                Self {
                    rows: Some(perm(n_rows)),
                    cols: Some(perm(n_cols)),
                }
            }
        }
    }

    pub(crate) fn rows(&self) -> Option<&[u32]> {
        self.rows.as_deref()
    }

    pub(crate) fn cols(&self) -> Option<&[u32]> {
        self.cols.as_deref()
    }
}

/// Descending by value; ties by key (or index) ascending.
#[inline]
fn rank_cmp(values: &[f64], keys: Option<&[u32]>, a: usize, b: usize) -> Ordering {
    values[b].total_cmp(&values[a]).then_with(|| match keys {
        Some(k) => k[a].cmp(&k[b]),
        None => a.cmp(&b),
    })
}

/// Indices of the `k` largest values, returned in increasing index order.
pub(crate) fn top_k(values: &[f64], k: usize, keys: Option<&[u32]>) -> Vec<usize> {
    debug_assert!(k >= 1 && k <= values.len());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| rank_cmp(values, keys, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// All indices ordered from largest to smallest value.
pub(crate) fn order_desc(values: &[f64], keys: Option<&[u32]>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_unstable_by(|&a, &b| rank_cmp(values, keys, a, b));
    idx
}

/// Preference between two results: larger objective, then smaller area,
/// then fewer rows, then lexicographically smaller selection.
pub(crate) fn prefer(a: &ScanResult, b: &ScanResult) -> Ordering {
    let area = |s: &Selection| s.n_rows() * s.n_cols();
    b.objective
        .total_cmp(&a.objective)
        .then_with(|| area(&a.selection).cmp(&area(&b.selection)))
        .then_with(|| a.selection.n_rows().cmp(&b.selection.n_rows()))
        .then_with(|| a.selection.cmp(&b.selection))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_k_breaks_ties_to_lower_index() {
        let v = [1.0, 3.0, 3.0, 2.0, 3.0];
        assert_eq!(top_k(&v, 2, None), vec![1, 2]);
        assert_eq!(top_k(&v, 4, None), vec![1, 2, 3, 4]);
        assert_eq!(top_k(&v, 5, None), vec![0, 1, 2, 3, 4]);
        assert_eq!(order_desc(&v, None), vec![1, 2, 4, 3, 0]);
    }

    #[test]
    fn random_keys_reorder_only_ties() {
        let v = [0.0, 5.0, 0.0, 0.0, 1.0];
        let keys = TieKeys::new(TieBreak::Random, 5, 1, 17);
        let ord = order_desc(&v, keys.rows());
        assert_eq!(&ord[..2], &[1, 4]);
        let mut rest = ord[2..].to_vec();
        rest.sort_unstable();
        assert_eq!(rest, vec![0, 2, 3]);
    }
}
