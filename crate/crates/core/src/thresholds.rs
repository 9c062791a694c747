//! Reference signal-strength levels for a planted `m* × n*` block in an
//! `M × N` matrix.
//!
//! `theta_crit` indexes signal strength in the simulations, `theta0` is the
//! known-size minimax level and `theta1` the level at which the multiscale
//! scan provably recovers the block exactly.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::objective::{penalty, PenaltyParams};

/// Right-hand side of the fixed-point equation `C = 2 (r^1.5 + r^1.25)`,
/// `r = C / (C - 1)`.
pub fn constant_rhs(c: f64) -> f64 {
    let r = c / (c - 1.0);
    2.0 * (r.powf(1.5) + r.powf(1.25))
}

/// Unique fixed point `C > 1` of [`constant_rhs`], found by bisection on `(1, 100]`.
///
/// The right-hand side decreases from `+inf` near 1 to about 4.06 at 100, so
/// `C - rhs(C)` changes sign exactly once on the bracket. The root is near
/// 5.3258. The often-quoted value 4.32 does not satisfy this equation.
pub fn constant_c() -> f64 {
    let residual = |c: f64| c - constant_rhs(c);
    let (mut lo, mut hi) = (1.0 + 1e-9, 100.0);
    debug_assert!(residual(lo) < 0.0 && residual(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() < 1e-12 || hi - lo < f64::EPSILON * mid {
            return mid;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_block(rows: usize, cols: usize, m_star: usize, n_star: usize) -> Result<()> {
    if m_star == 0 || m_star >= rows || n_star == 0 || n_star >= cols {
        return Err(domain(format!(
            "planted size ({m_star}, {n_star}) must satisfy 1 <= m* < M={rows}, 1 <= n* < N={cols}"
        )));
    }
    Ok(())
}

/// `max(sqrt(ln M / n*), sqrt(ln N / m*), sqrt((ln M + ln N) / (m* + n*)))`.
pub fn theta_crit(rows: usize, cols: usize, m_star: usize, n_star: usize) -> Result<f64> {
    check_block(rows, cols, m_star, n_star)?;
    let (ln_m, ln_n) = ((rows as f64).ln(), (cols as f64).ln());
    let a = (ln_m / n_star as f64).sqrt();
    let b = (ln_n / m_star as f64).sqrt();
    let c = ((ln_m + ln_n) / (m_star + n_star) as f64).sqrt();
    Ok(a.max(b).max(c))
}

/// Known-size minimax threshold. Needs `m*, n* >= 2` and `M - m*, N - n* >= 2`
/// so every logarithm has an argument above one.
pub fn theta0(rows: usize, cols: usize, m_star: usize, n_star: usize) -> Result<f64> {
    check_block(rows, cols, m_star, n_star)?;
    for (what, arg) in [
        ("m*", m_star),
        ("n*", n_star),
        ("M - m*", rows - m_star),
        ("N - n*", cols - n_star),
    ] {
        if arg <= 1 {
            return Err(domain(format!(
                "theta0 needs ln({what}) > 0, got {what} = {arg}"
            )));
        }
    }
    let (m, n) = (m_star as f64, n_star as f64);
    let (big_m, big_n) = (rows as f64, cols as f64);
    let row_term = ((2.0 * n.ln()).sqrt() + (2.0 * (big_n - n).ln()).sqrt()) / m.sqrt();
    let col_term = ((2.0 * m.ln()).sqrt() + (2.0 * (big_m - m).ln()).sqrt()) / n.sqrt();
    let size_term =
        (2.0 * n * (big_n / n).ln() + 2.0 * m * (big_m / m).ln()).sqrt() / (m * n).sqrt();
    Ok(row_term.max(col_term).max(size_term))
}

/// The three terms inside the exact-recovery maximum, before scaling by `C`.
pub fn theta1_terms(rows: usize, cols: usize, m_star: usize, n_star: usize) -> Result<[f64; 3]> {
    check_block(rows, cols, m_star, n_star)?;
    let (m, n) = (m_star as f64, n_star as f64);
    let first = ((((rows - m_star) as f64).ln() + m.ln()) / n).sqrt();
    let second = ((((cols - n_star) as f64).ln() + n.ln()) / m).sqrt();
    let third = penalty(rows, cols, m_star, n_star, PenaltyParams::GAUSSIAN)? / (m * n).sqrt();
    Ok([first, second, third])
}

/// `C · max(...)` over [`theta1_terms`].
pub fn theta1(rows: usize, cols: usize, m_star: usize, n_star: usize) -> Result<f64> {
    let [a, b, c] = theta1_terms(rows, cols, m_star, n_star)?;
    Ok(constant_c() * a.max(b).max(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub theta0: f64,
    pub theta1: f64,
    pub theta_crit: f64,
    pub constant_c: f64,
}

impl Thresholds {
    pub fn compute(rows: usize, cols: usize, m_star: usize, n_star: usize) -> Result<Self> {
        Ok(Self {
            theta0: theta0(rows, cols, m_star, n_star)?,
            theta1: theta1(rows, cols, m_star, n_star)?,
            theta_crit: theta_crit(rows, cols, m_star, n_star)?,
            constant_c: constant_c(),
        })
    }
}
