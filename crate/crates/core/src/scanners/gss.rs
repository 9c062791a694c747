use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::las::{largest_row_sums, random_rows, run_las, LasOutcome};
use super::{ScanResult, TieKeys};
use crate::error::{domain, Result};
use crate::matrix::DataMatrix;
use crate::objective::{mscan_objective, PenaltyParams, PenaltyTable, SizePenalty};
use crate::rng;

/// Golden ratio conjugate `(sqrt(5) - 1) / 2`.
pub const PHI: f64 = 0.618_033_988_749_894_8;

/// Frames narrower than this on both axes are searched exhaustively.
const FRAME_STOP_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GssConfig {
    /// Upper bounds of the size search frame.
    pub m_bar: usize,
    pub n_bar: usize,
    /// LAS runs per evaluation of the size profile; the first starts from the
    /// largest row sums, later ones from random rows.
    pub inner_las_restarts: usize,
    pub las_max_iterations: usize,
    pub penalty: PenaltyParams,
}

impl GssConfig {
    pub fn new(m_bar: usize, n_bar: usize) -> Self {
        Self {
            m_bar,
            n_bar,
            inner_las_restarts: 1,
            las_max_iterations: 100,
            penalty: PenaltyParams::GAUSSIAN,
        }
    }
}

/// Initial rows for the LAS runs inside [`scan_value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerInit {
    /// First run from the `m` largest row sums, the rest random.
    LargestRowSumsFirst,
    /// Every run from uniformly random rows.
    Random,
}

/// Approximates the fixed-size scan `max sum over m×n submatrices` with the best
/// of `restarts` LAS runs. Random starts for size `(m, n)` use a stream keyed
/// by `(seed, m, n)`, so the value does not depend on evaluation order.
pub fn scan_value(
    x: &DataMatrix,
    m: usize,
    n: usize,
    restarts: usize,
    init: InnerInit,
    seed: u64,
    max_iterations: usize,
) -> Result<LasOutcome> {
    if m == 0 || m > x.rows() || n == 0 || n > x.cols() {
        return Err(domain(format!("scan size ({m}, {n}) outside the matrix")));
    }
    if restarts == 0 || max_iterations == 0 {
        return Err(domain("scan needs restarts and max_iterations >= 1"));
    }
    let keys = TieKeys::lower_index();
    let mut rng = rng::stream(rng::derive_seed(seed, &[m as u64, n as u64]), 0);
    let mut best: Option<LasOutcome> = None;
    for r in 0..restarts {
        let rows = if r == 0 && init == InnerInit::LargestRowSumsFirst {
            largest_row_sums(x, m)
        } else {
            random_rows(&mut rng, x.rows(), m)
        };
        let out = run_las(x, n, rows, max_iterations, &keys);
        if best.as_ref().is_none_or(|b| out.sum > b.sum) {
            best = Some(out);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Search frame `[m_min, m_max] × [n_min, n_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub m_min: usize,
    pub m_max: usize,
    pub n_min: usize,
    pub n_max: usize,
}

impl Frame {
    pub fn width(&self) -> usize {
        (self.m_max - self.m_min).max(self.n_max - self.n_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GssReport {
    pub result: ScanResult,
    /// Distinct `(m, n)` pairs at which the size profile was evaluated.
    pub evaluations: usize,
    /// Frame before each contraction, then the final frame.
    pub frames: Vec<Frame>,
    pub best_size: (usize, usize),
}

/// Interior probes of `[lo, hi]` with the ceil/floor rounding of the
/// discrete search: `(ceil(hi - (hi - lo) φ), floor(lo + (hi - lo) φ))`.
fn probes(lo: usize, hi: usize) -> (usize, usize) {
    let width = (hi - lo) as f64;
    let lower = (hi as f64 - width * PHI).ceil() as usize;
    let upper = (lo as f64 + width * PHI).floor() as usize;
    let (lower, upper) = (lower.clamp(lo, hi), upper.clamp(lo, hi));
    // On narrow frames both roundings can land on the same size, and comparing
    // a point with itself would discard one side blindly.
    if lower >= upper && lower < hi {
        (lower, lower + 1)
    } else {
        (lower, upper)
    }
}

/// A profile value at one size together with the LAS run behind it.
type Evaluated = ((usize, usize), (f64, LasOutcome));

/// Golden-section search over sizes `[1, m_bar] × [1, n_bar]` of the profile
/// `f(m, n) = scan(m, n) / sqrt(mn) - lambda(m, n)`.
///
/// Each round probes the four combinations of the two interior points per
/// axis. On an axis still wider than 3, the frame keeps the side of the winning
/// probe: a win at the lower probe moves the upper bound to the upper probe,
/// otherwise the lower bound moves to the lower probe. Once both axes are at
/// most 3 wide the remaining grid is evaluated exhaustively and the best size
/// is finalized with LAS. When rounding puts both probes on the same size,
/// the upper probe moves up by one so the comparison stays informative.
pub fn gss_detailed(x: &DataMatrix, cfg: &GssConfig, seed: u64) -> Result<GssReport> {
    if cfg.m_bar == 0 || cfg.m_bar > x.rows() || cfg.n_bar == 0 || cfg.n_bar > x.cols() {
        return Err(domain(format!(
            "search frame ({}, {}) must lie within the {}x{} matrix",
            cfg.m_bar,
            cfg.n_bar,
            x.rows(),
            x.cols()
        )));
    }
    if cfg.inner_las_restarts == 0 {
        return Err(domain("GSS needs inner_las_restarts >= 1"));
    }
    PenaltyParams::new(cfg.penalty.delta)?;

    let table = PenaltyTable::for_matrix(x, cfg.penalty);
    let mut memo: BTreeMap<(usize, usize), (f64, LasOutcome)> = BTreeMap::new();
    let evaluate = |memo: &mut BTreeMap<(usize, usize), (f64, LasOutcome)>,
                    sizes: Vec<(usize, usize)>|
     -> Result<()> {
        let fresh: Vec<(usize, usize)> = sizes
            .into_iter()
            .filter(|s| !memo.contains_key(s))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let values: Vec<Result<Evaluated>> = fresh
            .into_par_iter()
            .map(|(m, n)| {
                let out = scan_value(
                    x,
                    m,
                    n,
                    cfg.inner_las_restarts,
                    InnerInit::LargestRowSumsFirst,
                    seed,
                    cfg.las_max_iterations,
                )?;
                let f = out.sum / ((m * n) as f64).sqrt() - table.value(m, n);
                Ok(((m, n), (f, out)))
            })
            .collect();
        for v in values {
            let (k, v) = v?;
            memo.insert(k, v);
        }
        Ok(())
    };

    let mut frame = Frame {
        m_min: 1,
        m_max: cfg.m_bar,
        n_min: 1,
        n_max: cfg.n_bar,
    };
    let mut frames = Vec::new();
    let mut rounds = 0;
    while frame.width() > FRAME_STOP_WIDTH {
        frames.push(frame);
        rounds += 1;
        let (m1, m2) = probes(frame.m_min, frame.m_max);
        let (n1, n2) = probes(frame.n_min, frame.n_max);
        let combos = [(m1, n1), (m2, n1), (m1, n2), (m2, n2)];
        evaluate(&mut memo, combos.to_vec())?;
        let mut best = 0;
        for (k, s) in combos.iter().enumerate() {
            if memo[s].0 > memo[&combos[best]].0 {
                best = k;
            }
        }
        let (best_m, best_n) = combos[best];
        let m_lower_won = best_m == m1 && best % 2 == 0;
        let n_lower_won = best_n == n1 && best < 2;
        if frame.m_max - frame.m_min > FRAME_STOP_WIDTH {
            if m_lower_won {
                frame.m_max = m2;
            } else {
                frame.m_min = m1;
            }
        }
        if frame.n_max - frame.n_min > FRAME_STOP_WIDTH {
            if n_lower_won {
                frame.n_max = n2;
            } else {
                frame.n_min = n1;
            }
        }
    }
    frames.push(frame);

    let grid: Vec<(usize, usize)> = (frame.m_min..=frame.m_max)
        .flat_map(|m| (frame.n_min..=frame.n_max).map(move |n| (m, n)))
        .collect();
    evaluate(&mut memo, grid.clone())?;
    let mut best = grid[0];
    for s in &grid[1..] {
        if memo[s].0 > memo[&best].0 {
            best = *s;
        }
    }

    let evaluations = memo.len();
    let outcome = memo.remove(&best).expect("evaluated").1;
    let objective = mscan_objective(x, &outcome.selection, cfg.penalty)?;
    Ok(GssReport {
        result: ScanResult {
            selection: outcome.selection,
            objective,
            iterations: rounds,
            restarts_used: cfg.inner_las_restarts,
        },
        evaluations,
        frames,
        best_size: best,
    })
}

pub fn gss(x: &DataMatrix, cfg: &GssConfig, seed: u64) -> Result<ScanResult> {
    gss_detailed(x, cfg, seed).map(|r| r.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Selection;

    #[test]
    fn probe_rounding() {
        // 499 φ = 308.399..., so ceil(191.6) = 192 and floor(309.399) = 309
        assert_eq!(probes(1, 500), (192, 309));
        // ceil(2.53) = floor(3.47) = 3: collision is split into adjacent sizes
        assert_eq!(probes(1, 5), (3, 4));
        assert_eq!(probes(1, 7), (4, 5));
        let (a, b) = probes(10, 10);
        assert_eq!((a, b), (10, 10));
    }

    #[test]
    fn noise_free_block_is_found() {
        let mut v = vec![vec![0.0; 30]; 30];
        for r in v.iter_mut().take(5) {
            for e in r.iter_mut().take(5) {
                *e = 40.0;
            }
        }
        let x = DataMatrix::from_rows(&v).unwrap();
        let report = gss_detailed(&x, &GssConfig::new(30, 30), 0).unwrap();
        assert_eq!(report.result.selection, Selection::leading(5, 5).unwrap());
        assert_eq!(report.best_size, (5, 5));
        let widths: Vec<usize> = report.frames.iter().map(Frame::width).collect();
        assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
        assert!(*widths.last().unwrap() <= 3);
    }

    #[test]
    fn frame_outside_matrix_is_rejected() {
        let x = DataMatrix::zeros(4, 5).unwrap();
        assert!(gss(&x, &GssConfig::new(5, 5), 0).is_err());
        assert!(gss(&x, &GssConfig::new(4, 6), 0).is_err());
        assert!(gss(&x, &GssConfig::new(4, 5), 0).is_ok());
    }
}
