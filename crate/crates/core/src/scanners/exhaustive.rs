use super::{order_desc, ScanResult};
use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Selection};
use crate::objective::{block_sum, PenaltyParams, PenaltyTable, SizePenalty};

/// Largest row count [`exhaustive_mscan`] accepts.
pub const EXHAUSTIVE_MAX_ROWS: usize = 20;

/// Exact maximizer of the multiscale objective over all nonempty selections.
///
/// Enumerates the `2^M - 1` nonempty row sets. For a fixed row set and column
/// count `n`, the best columns are the `n` largest column sums, so each row set
/// costs one sort. Candidates whose fast prefix-sum value comes within
/// `1e-9` (relative) of the incumbent are re-scored with the reference
/// summation order and compared exactly; ties go to the lexicographically
/// smallest selection. Callers with `N < M` may transpose first.
pub fn exhaustive_mscan(x: &DataMatrix, params: PenaltyParams) -> Result<ScanResult> {
    if x.rows() > EXHAUSTIVE_MAX_ROWS {
        return Err(Error::GuardViolation {
            rows: x.rows(),
            limit: EXHAUSTIVE_MAX_ROWS,
        });
    }
    PenaltyParams::new(params.delta)?;
    let table = PenaltyTable::for_matrix(x, params);
    let exact = |rows: &[usize], cols: &[usize]| {
        block_sum(x, rows, cols) / ((rows.len() * cols.len()) as f64).sqrt()
            - table.value(rows.len(), cols.len())
    };

    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let mut rows = Vec::with_capacity(x.rows());
    let subsets = (1u64 << x.rows()) - 1;
    for mask in 1..=subsets {
        rows.clear();
        rows.extend((0..x.rows()).filter(|i| mask >> i & 1 == 1));
        let sums = x.col_sums_over(&rows);
        let order = order_desc(&sums, None);
        let mut acc = 0.0;
        for (k0, &j) in order.iter().enumerate() {
            let n = k0 + 1;
            acc += sums[j];
            let fast = acc / ((rows.len() * n) as f64).sqrt() - table.value(rows.len(), n);
            if let Some((incumbent, _, _)) = &best {
                if fast < incumbent - 1e-9 * incumbent.abs().max(1.0) {
                    continue;
                }
            }
            let mut cols = order[..n].to_vec();
            cols.sort_unstable();
            let value = exact(&rows, &cols);
            let replace = match &best {
                None => true,
                Some((b, br, bc)) => {
                    value > *b
                        || (value == *b
                            && (rows.as_slice(), cols.as_slice()) < (br.as_slice(), bc.as_slice()))
                }
            };
            if replace {
                best = Some((value, rows.clone(), cols));
            }
        }
    }

    let (objective, rows, cols) = best.expect("at least one nonempty selection");
    Ok(ScanResult {
        selection: Selection::from_sorted_unchecked(rows, cols),
        objective,
        iterations: subsets as usize,
        restarts_used: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{mscan_objective, penalty};

    /// Independent oracle: every nonempty (row set, column set) pair.
    fn brute_force(x: &DataMatrix, params: PenaltyParams) -> (f64, Selection) {
        let mut best: Option<(f64, Selection)> = None;
        for rm in 1u32..(1 << x.rows()) {
            for cm in 1u32..(1 << x.cols()) {
                let rows: Vec<usize> = (0..x.rows()).filter(|i| rm >> i & 1 == 1).collect();
                let cols: Vec<usize> = (0..x.cols()).filter(|j| cm >> j & 1 == 1).collect();
                let s = Selection::new(rows, cols).unwrap();
                let v = mscan_objective(x, &s, params).unwrap();
                if best
                    .as_ref()
                    .is_none_or(|(b, bs)| v > *b || (v == *b && s < *bs))
                {
                    best = Some((v, s));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn single_entry() {
        let x = DataMatrix::from_rows(&[[2.5]]).unwrap();
        let p = PenaltyParams::new(0.2).unwrap();
        let r = exhaustive_mscan(&x, p).unwrap();
        assert_eq!(r.selection, Selection::new(vec![0], vec![0]).unwrap());
        assert_eq!(r.objective, 2.5 - penalty(1, 1, 1, 1, p).unwrap());
    }

    #[test]
    fn two_by_two_hand_case() {
        let x = DataMatrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap();
        let r = exhaustive_mscan(&x, PenaltyParams::GAUSSIAN).unwrap();
        assert_eq!(r.selection, Selection::new(vec![0], vec![0]).unwrap());
    }

    #[test]
    fn matches_full_enumeration() {
        let x = DataMatrix::from_rows(&[
            [0.3, 2.1, -0.4, 1.7, 0.0],
            [1.9, 2.2, 0.1, 2.4, -1.1],
            [-0.6, 0.2, 0.9, -0.3, 0.8],
            [2.0, 1.8, -0.2, 2.6, 0.4],
        ])
        .unwrap();
        for delta in [0.0, 0.5] {
            let p = PenaltyParams::new(delta).unwrap();
            let (v, s) = brute_force(&x, p);
            let r = exhaustive_mscan(&x, p).unwrap();
            assert_eq!(r.selection, s);
            assert_eq!(r.objective, v);
        }
    }

    #[test]
    fn refuses_large_row_counts() {
        let x = DataMatrix::zeros(21, 2).unwrap();
        let err = exhaustive_mscan(&x, PenaltyParams::GAUSSIAN).unwrap_err();
        assert!(matches!(
            err,
            Error::GuardViolation {
                rows: 21,
                limit: 20
            }
        ));
    }
}
