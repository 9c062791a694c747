//! The multiscale scan objective: normalized submatrix sum minus a
//! size-dependent penalty, plus the log-scale recovery error.
//!
//! All logarithms are natural logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matrix::{DataMatrix, Selection};

/// Inflation of the penalty's leading constant: `2 + delta`. Zero gives the
/// Gaussian penalty; a positive `delta` is used for general exponential families.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub delta: f64,
}

impl PenaltyParams {
    pub const GAUSSIAN: Self = Self { delta: 0.0 };

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(domain(format!(
                "penalty delta must be finite and >= 0, got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    #[inline]
    fn factor(self) -> f64 {
        2.0 + self.delta
    }
}

/// `ln C(total, k)` through log-gamma. The two lower terms are added in a
/// fixed order so that `ln_binom(K, k)` and `ln_binom(K, K - k)` agree bitwise.
pub fn ln_binom(total: usize, k: usize) -> f64 {
    assert!(k <= total, "ln_binom: k={k} exceeds total={total}");
    let small = k.min(total - k) as f64;
    let large = k.max(total - k) as f64;
    libm::lgamma(total as f64 + 1.0) - (libm::lgamma(small + 1.0) + libm::lgamma(large + 1.0))
}

fn check_size(total_rows: usize, total_cols: usize, m: usize, n: usize) -> Result<()> {
    if m == 0 || m > total_rows || n == 0 || n > total_cols {
        return Err(domain(format!(
            "submatrix size ({m}, {n}) outside [1, {total_rows}] x [1, {total_cols}]"
        )));
    }
    Ok(())
}

#[inline]
fn combine(factor: f64, ln_dims: f64, lb_rows: f64, lb_cols: f64) -> f64 {
    (factor * (ln_dims + (lb_rows + lb_cols))).sqrt()
}

#[inline]
fn ln_dims(total_rows: usize, total_cols: usize) -> f64 {
    (total_rows as f64).ln() + (total_cols as f64).ln()
}

/// `sqrt((2 + delta) * ln[M N C(M, m) C(N, n)])`.
pub fn penalty(
    total_rows: usize,
    total_cols: usize,
    m: usize,
    n: usize,
    params: PenaltyParams,
) -> Result<f64> {
    check_size(total_rows, total_cols, m, n)?;
    Ok(combine(
        params.factor(),
        ln_dims(total_rows, total_cols),
        ln_binom(total_rows, m),
        ln_binom(total_cols, n),
    ))
}

/// The Gaussian penalty with `ln C(K, k)` replaced by `k ln(K / k)`.
pub fn penalty_approx(total_rows: usize, total_cols: usize, m: usize, n: usize) -> Result<f64> {
    check_size(total_rows, total_cols, m, n)?;
    Ok(approx_unchecked(total_rows, total_cols, m, n))
}

#[inline]
fn approx_unchecked(total_rows: usize, total_cols: usize, m: usize, n: usize) -> f64 {
    let entropy = |total: usize, k: usize| k as f64 * (total as f64 / k as f64).ln();
    combine(
        2.0,
        ln_dims(total_rows, total_cols),
        entropy(total_rows, m),
        entropy(total_cols, n),
    )
}

/// A penalty `lambda(m, n)` for a fixed matrix shape.
pub trait SizePenalty: Sync {
    fn shape(&self) -> (usize, usize);

    /// Caller guarantees `1 <= m <= rows`, `1 <= n <= cols`.
    fn value(&self, m: usize, n: usize) -> f64;
}

/// Exact penalty with the log-binomials tabulated once per matrix shape.
/// `value` is bitwise identical to [`penalty`].
#[derive(Debug, Clone)]
pub struct PenaltyTable {
    factor: f64,
    ln_dims: f64,
    lb_rows: Vec<f64>,
    lb_cols: Vec<f64>,
}

impl PenaltyTable {
    pub fn new(total_rows: usize, total_cols: usize, params: PenaltyParams) -> Self {
        Self {
            factor: params.factor(),
            ln_dims: ln_dims(total_rows, total_cols),
            lb_rows: (0..=total_rows).map(|k| ln_binom(total_rows, k)).collect(),
            lb_cols: (0..=total_cols).map(|k| ln_binom(total_cols, k)).collect(),
        }
    }

    pub fn for_matrix(x: &DataMatrix, params: PenaltyParams) -> Self {
        Self::new(x.rows(), x.cols(), params)
    }
}

impl SizePenalty for PenaltyTable {
    fn shape(&self) -> (usize, usize) {
        (self.lb_rows.len() - 1, self.lb_cols.len() - 1)
    }

    #[inline]
    fn value(&self, m: usize, n: usize) -> f64 {
        combine(self.factor, self.ln_dims, self.lb_rows[m], self.lb_cols[n])
    }
}

/// [`penalty_approx`] behind the [`SizePenalty`] interface.
#[derive(Debug, Clone, Copy)]
pub struct ApproxPenalty {
    pub rows: usize,
    pub cols: usize,
}

impl SizePenalty for ApproxPenalty {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn value(&self, m: usize, n: usize) -> f64 {
        approx_unchecked(self.rows, self.cols, m, n)
    }
}

/// Sum of the selected entries, accumulated row by row in increasing index order.
/// This summation order is the reference used for every reported objective.
pub fn submatrix_sum(x: &DataMatrix, s: &Selection) -> f64 {
    block_sum(x, s.rows(), s.cols())
}

#[inline]
pub(crate) fn block_sum(x: &DataMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    let mut acc = 0.0;
    for &i in rows {
        let row = x.row(i);
        for &j in cols {
            acc += row[j];
        }
    }
    acc
}

/// `sum / sqrt(|I| |J|) - lambda(|I|, |J|)`.
pub fn mscan_objective(x: &DataMatrix, s: &Selection, params: PenaltyParams) -> Result<f64> {
    s.check_fits(x)?;
    let lambda = penalty(x.rows(), x.cols(), s.n_rows(), s.n_cols(), params)?;
    Ok(normalized_sum(x, s) - lambda)
}

/// Same value as [`mscan_objective`] with a precomputed penalty.
pub fn mscan_objective_with(x: &DataMatrix, s: &Selection, penalty: &impl SizePenalty) -> f64 {
    normalized_sum(x, s) - penalty.value(s.n_rows(), s.n_cols())
}

#[inline]
fn normalized_sum(x: &DataMatrix, s: &Selection) -> f64 {
    submatrix_sum(x, s) / ((s.n_rows() * s.n_cols()) as f64).sqrt()
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                count += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                count += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    count + (a.len() - i) + (b.len() - j)
}

/// Symmetric-difference counts `(|rows Δ|, |cols Δ|)`.
pub fn symmetric_difference_counts(est: &Selection, truth: &Selection) -> (usize, usize) {
    (
        symmetric_difference(est.rows(), truth.rows()),
        symmetric_difference(est.cols(), truth.cols()),
    )
}

/// `ln(|I Δ I*| + |J Δ J*| + 1)`; zero exactly when the selections agree.
pub fn err_measure(est: &Selection, truth: &Selection) -> f64 {
    let (dr, dc) = symmetric_difference_counts(est, truth);
    ((dr + dc + 1) as f64).ln()
}
