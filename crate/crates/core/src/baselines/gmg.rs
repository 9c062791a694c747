use super::require_at_least_2x2;
use crate::error::Result;
use crate::matrix::{DataMatrix, Selection};

/// Indices above the largest gap between consecutive sorted values.
/// Equal values sort by index; the first largest gap wins.
fn above_largest_gap(sums: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_unstable_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)));
    let mut split = 0;
    let mut widest = f64::NEG_INFINITY;
    for k in 0..order.len() - 1 {
        let gap = sums[order[k + 1]] - sums[order[k]];
        if gap > widest {
            widest = gap;
            split = k;
        }
    }
    let mut upper = order[split + 1..].to_vec();
    upper.sort_unstable();
    upper
}

/// Greatest marginal gap: rows (and columns) whose sums lie above the largest
/// jump in the sorted row (column) sums.
pub fn gmg_localize(x: &DataMatrix) -> Result<Selection> {
    require_at_least_2x2(x, "greatest marginal gap")?;
    Selection::new(
        above_largest_gap(&x.row_sums()),
        above_largest_gap(&x.col_sums()),
    )
}
