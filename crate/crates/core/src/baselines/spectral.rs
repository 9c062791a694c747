use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::require_at_least_2x2;
use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Selection};
use crate::objective::block_sum;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Stop when the right vector moves less than this (Euclidean norm).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 1000,
        }
    }
}

/// Leading singular triple `(σ, u, v)` with unit `u` and `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPair {
    pub value: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub iterations: usize,
    /// The all-ones start was annihilated and a random start was used.
    pub reseeded: bool,
}

const RESEED: u64 = 0x5eed_5eed;

fn mul(x: &DataMatrix, v: &[f64]) -> Vec<f64> {
    (0..x.rows())
        .map(|i| x.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn mul_t(x: &DataMatrix, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.cols()];
    for (i, &ui) in u.iter().enumerate() {
        for (o, &a) in out.iter_mut().zip(x.row(i)) {
            *o += a * ui;
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

/// Power iteration on `XᵀX` from the all-ones vector. If an iterate is
/// annihilated (the start is orthogonal to the row space), restarts from a
/// seeded Gaussian vector; a zero matrix yields uniform vectors.
pub fn leading_singular_pair(x: &DataMatrix, cfg: &SpectralConfig) -> Result<SingularPair> {
    let ones = || {
        let mut v = vec![1.0; x.cols()];
        normalize(&mut v);
        v
    };
    let mut v = ones();
    let mut reseeded = false;
    let mut attempt = 0;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut next = mul_t(x, &mul(x, &v));
        if normalize(&mut next) == 0.0 {
            if attempt == 3 {
                // Only the zero matrix annihilates several random starts.
                let mut u = vec![1.0; x.rows()];
                normalize(&mut u);
                return Ok(SingularPair {
                    value: 0.0,
                    left: u,
                    right: ones(),
                    iterations,
                    reseeded: true,
                });
            }
            let mut rng = rng::stream(RESEED, attempt);
            attempt += 1;
            reseeded = true;
            v = (0..x.cols())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            normalize(&mut v);
            continue;
        }
        if next.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            next.iter_mut().for_each(|a| *a = -*a);
        }
        last_change = norm(&next.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
        v = next;
        if last_change < cfg.tolerance {
            let mut u = mul(x, &v);
            let value = normalize(&mut u);
            return Ok(SingularPair {
                value,
                left: u,
                right: v,
                iterations,
                reseeded,
            });
        }
    }
    let mut u = mul(x, &v);
    normalize(&mut u);
    Err(Error::NotConverged {
        iterations,
        last_change,
        left: u,
        right: v,
    })
}

/// Exact 2-means of one-dimensional data: the best split of the sorted values
/// by total within-cluster sum of squares. Returns one cluster when all values
/// coincide, otherwise the lower cluster first. Ties pick the earliest split.
pub fn two_means_1d(values: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let n = order.len();
    if n < 2 || values[order[0]] == values[order[n - 1]] {
        return vec![(0..n).collect()];
    }
    // Centre first so the prefix-sum formula does not cancel badly.
    let mean = values.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = order.iter().map(|&i| values[i] - mean).collect();
    let total: f64 = centred.iter().sum();
    let total_sq: f64 = centred.iter().map(|c| c * c).sum();
    let (mut s, mut sq) = (0.0, 0.0);
    let mut best = (f64::INFINITY, 1);
    for k in 1..n {
        s += centred[k - 1];
        sq += centred[k - 1] * centred[k - 1];
        let (right_s, right_sq) = (total - s, total_sq - sq);
        let wcss = (sq - s * s / k as f64) + (right_sq - right_s * right_s / (n - k) as f64);
        if wcss < best.0 {
            best = (wcss, k);
        }
    }
    let mut low = order[..best.1].to_vec();
    let mut high = order[best.1..].to_vec();
    low.sort_unstable();
    high.sort_unstable();
    vec![low, high]
}

/// Clusters rows by the left vector and columns by the right vector, then
/// returns the row-cluster × column-cluster block with the largest mean.
pub fn localize_from_pair(x: &DataMatrix, left: &[f64], right: &[f64]) -> Result<Selection> {
    let row_clusters = two_means_1d(left);
    let col_clusters = two_means_1d(right);
    let mut best: Option<(f64, &Vec<usize>, &Vec<usize>)> = None;
    for rows in &row_clusters {
        for cols in &col_clusters {
            let mean = block_sum(x, rows, cols) / (rows.len() * cols.len()) as f64;
            if best.is_none_or(|(b, _, _)| mean > b) {
                best = Some((mean, rows, cols));
            }
        }
    }
    let (_, rows, cols) = best.expect("at least one cluster per axis");
    Selection::new(rows.clone(), cols.clone())
}

/// Spectral localization from the leading singular pair.
pub fn spectral_localize(x: &DataMatrix, cfg: &SpectralConfig) -> Result<Selection> {
    require_at_least_2x2(x, "spectral localization")?;
    let pair = leading_singular_pair(x, cfg)?;
    localize_from_pair(x, &pair.left, &pair.right)
}
