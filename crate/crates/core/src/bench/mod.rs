//! Simulation experiments: error curves over a signal-strength grid, timing,
//! and the size-profile landscape.
//!
//! Every (family, grid point, replication) cell derives its seeds from the
//! experiment seed and the cell coordinates alone. Cells run in parallel and
//! are gathered in coordinate order, so output does not depend on the thread
//! count.
//!
//! Results CSV, schema version 1:
//!
//! ```text
//! method,family,theta_mult,rep,err,millis
//! ```
//!
//! `rep` is 0-based. `millis` is left empty unless timing was requested,
//! which keeps error-curve output byte-reproducible.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{gmg_localize, localize_from_pair, spectral_localize, SpectralConfig};
use crate::error::{domain, Error, Result};
use crate::generators::{generate, Family, GenerationSpec};
use crate::matrix::{DataMatrix, Selection};
use crate::objective::err_measure;
use crate::rng::derive_seed;
use crate::scanners::{adaptive_las, gss, AdaptiveConfig, GssConfig};

pub mod plot;
mod unimodality;

pub use unimodality::{unimodality_grid, UnimodalityConfig, UnimodalityGrid};

pub const RESULTS_HEADER: &str = "method,family,theta_mult,rep,err,millis";
pub const RESULTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Adaptive,
    Gss,
    Spectral,
    Gmg,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Adaptive, Method::Gss, Method::Spectral, Method::Gmg];

    pub fn name(self) -> &'static str {
        match self {
            Method::Adaptive => "adaptive",
            Method::Gss => "gss",
            Method::Spectral => "spectral",
            Method::Gmg => "gmg",
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            Method::Adaptive => 101,
            Method::Gss => 102,
            Method::Spectral => 103,
            Method::Gmg => 104,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adaptive" | "adaptive_las" | "adaptivelas" => Ok(Method::Adaptive),
            "gss" => Ok(Method::Gss),
            "spectral" => Ok(Method::Spectral),
            "gmg" => Ok(Method::Gmg),
            other => Err(domain(format!("unknown method {other:?}"))),
        }
    }
}

/// Matrix shape and planted block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub rows: usize,
    pub cols: usize,
    pub block_rows: usize,
    pub block_cols: usize,
}

impl Design {
    pub const BALANCED: Design = Design::new(1000, 1200, 170, 140);
    pub const IMBALANCED: Design = Design::new(4000, 500, 70, 250);
    pub const TIMING: Design = Design::new(1000, 1000, 100, 100);
    /// Full-size designs with every dimension divided by 5.
    pub const BALANCED_DESK: Design = Design::new(200, 240, 34, 28);
    pub const IMBALANCED_DESK: Design = Design::new(800, 100, 14, 50);

    pub const fn new(rows: usize, cols: usize, block_rows: usize, block_cols: usize) -> Self {
        Self {
            rows,
            cols,
            block_rows,
            block_cols,
        }
    }

    pub fn spec(&self, family: Family, theta_mult: f64, seed: u64) -> Result<GenerationSpec> {
        GenerationSpec::with_theta_mult(
            family,
            self.rows,
            self.cols,
            self.block_rows,
            self.block_cols,
            theta_mult,
            seed,
        )
    }
}

/// Per-method tuning shared by the experiments and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub adaptive: AdaptiveConfig,
    /// Frame bounds are clipped to the matrix shape.
    pub gss: GssConfig,
    pub spectral: SpectralConfig,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            adaptive: AdaptiveConfig::default(),
            gss: GssConfig::new(500, 500),
            spectral: SpectralConfig::default(),
        }
    }
}

/// Runs one localizer. Spectral localization that exhausts its power-iteration
/// budget falls back to clustering the last iterate.
pub fn localize(
    x: &DataMatrix,
    method: Method,
    settings: &MethodSettings,
    seed: u64,
) -> Result<Selection> {
    match method {
        Method::Adaptive => Ok(adaptive_las(x, &settings.adaptive, seed)?.selection),
        Method::Gss => {
            let mut cfg = settings.gss.clone();
            cfg.m_bar = cfg.m_bar.min(x.rows());
            cfg.n_bar = cfg.n_bar.min(x.cols());
            Ok(gss(x, &cfg, seed)?.selection)
        }
        Method::Spectral => match spectral_localize(x, &settings.spectral) {
            Err(Error::NotConverged { left, right, .. }) => localize_from_pair(x, &left, &right),
            other => other,
        },
        Method::Gmg => gmg_localize(x),
    }
}

/// Seed handed to `method` in a cell whose derived seed is `cell_seed`.
pub fn method_seed(cell_seed: u64, method: Method) -> u64 {
    derive_seed(cell_seed, &[method.stream_tag()])
}

/// Generation seed for a cell.
pub fn data_seed(cell_seed: u64) -> u64 {
    derive_seed(cell_seed, &[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub design: Design,
    pub families: Vec<Family>,
    /// Signal strengths as multiples of `theta_crit`; nonnegative, increasing.
    pub theta_grid: Vec<f64>,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub settings: MethodSettings,
    /// Fill the `millis` column. Timing runs cells one at a time.
    pub record_timing: bool,
    pub output: Option<PathBuf>,
}

/// `lo, lo + step, ..., hi` in tenths, built from integers so that the
/// values print as short decimals.
pub fn tenths_grid(lo_tenths: u32, hi_tenths: u32, step_tenths: u32) -> Vec<f64> {
    (lo_tenths..=hi_tenths)
        .step_by(step_tenths as usize)
        .map(|t| t as f64 / 10.0)
        .collect()
}

impl ExperimentConfig {
    /// Error-curve defaults: all families, grid 1.0..=4.0 by 0.1, 30 replications,
    /// all four methods.
    pub fn error_curve(design: Design) -> Self {
        Self {
            design,
            families: Family::ALL.to_vec(),
            theta_grid: tenths_grid(10, 40, 1),
            replications: 30,
            methods: Method::ALL.to_vec(),
            seed: 100,
            settings: MethodSettings::default(),
            record_timing: false,
            output: None,
        }
    }

    /// Reduced preset for routine runs: meant for the `*_DESK` designs, with
    /// 10 replications and a GSS frame of 100 × 100.
    pub fn desk(design: Design) -> Self {
        let mut cfg = Self::error_curve(design);
        cfg.replications = 10;
        cfg.settings.gss = GssConfig::new(100, 100);
        cfg
    }

    /// Timing defaults: 1000 × 1000 with a 100 × 100 block, Gaussian,
    /// 2.5 × theta_crit, 100 replications, adaptive LAS started at 5 × 5.
    pub fn timing() -> Self {
        let mut cfg = Self::error_curve(Design::TIMING);
        cfg.families = vec![Family::Gaussian];
        cfg.theta_grid = vec![2.5];
        cfg.replications = 100;
        cfg.settings.adaptive.m0 = 5;
        cfg.settings.adaptive.n0 = 5;
        cfg.record_timing = true;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.methods.is_empty() || self.theta_grid.is_empty() {
            return Err(domain(
                "experiment needs at least one family, method and grid point",
            ));
        }
        if self.replications == 0 {
            return Err(domain("replications must be >= 1"));
        }
        if self
            .theta_grid
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(domain("theta multipliers must be finite and >= 0"));
        }
        if self.theta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("theta multipliers must be strictly increasing"));
        }
        // Surfaces design errors before any work is scheduled.
        self.design.spec(self.families[0], 0.0, 0)?;
        Ok(())
    }

    /// Seed of cell `(family, grid point, replication)`.
    pub fn cell_seed(&self, family_idx: usize, grid_idx: usize, rep: usize) -> u64 {
        derive_seed(self.seed, &[family_idx as u64, grid_idx as u64, rep as u64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub family: Family,
    pub theta_mult: f64,
    pub rep: usize,
    pub err: f64,
    pub millis: Option<f64>,
}

/// Runs every configured method on one cell's matrix.
pub fn run_cell(
    cfg: &ExperimentConfig,
    family_idx: usize,
    grid_idx: usize,
    rep: usize,
) -> Result<Vec<ResultRow>> {
    let family = cfg.families[family_idx];
    let theta_mult = cfg.theta_grid[grid_idx];
    let cell_seed = cfg.cell_seed(family_idx, grid_idx, rep);
    let spec = cfg.design.spec(family, theta_mult, data_seed(cell_seed))?;
    let (x, truth) = generate(&spec)?;
    cfg.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let est = localize(&x, method, &cfg.settings, method_seed(cell_seed, method))?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            Ok(ResultRow {
                method,
                family,
                theta_mult,
                rep,
                err: err_measure(&est, &truth),
                millis: cfg.record_timing.then_some(elapsed),
            })
        })
        .collect()
}

fn cells(cfg: &ExperimentConfig) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for f in 0..cfg.families.len() {
        for g in 0..cfg.theta_grid.len() {
            for r in 0..cfg.replications {
                out.push((f, g, r));
            }
        }
    }
    out
}

fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = cells(cfg);
    let per_cell: Vec<Result<Vec<ResultRow>>> = if cfg.record_timing {
        cells
            .iter()
            .map(|&(f, g, r)| run_cell(cfg, f, g, r))
            .collect()
    } else {
        cells
            .par_iter()
            .map(|&(f, g, r)| run_cell(cfg, f, g, r))
            .collect()
    };
    let mut rows = Vec::new();
    for cell in per_cell {
        rows.extend(cell?);
    }
    if let Some(path) = &cfg.output {
        write_results(path, &rows, cfg)?;
    }
    Ok(rows)
}

/// Error counts for every (family, multiplier, replication, method).
pub fn run_error_curve(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run(cfg)
}

/// Same cells as [`run_error_curve`], run sequentially with wall-clock timing.
pub fn run_timing(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut cfg = cfg.clone();
    cfg.record_timing = true;
    run(&cfg)
}

/// Renders rows as CSV text with the fixed header.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let millis = r.millis.map(|m| format!("{m:.3}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, r.family, r.theta_mult, r.rep, r.err, millis
        ));
    }
    out
}

/// Parses CSV produced by [`results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {RESULTS_HEADER:?}"),
        });
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, line)| {
            let bad = |message: String| Error::Parse {
                line: k + 2,
                message,
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", f.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("bad number {s:?}")))
            };
            Ok(ResultRow {
                method: f[0].parse()?,
                family: f[1].parse()?,
                theta_mult: num(f[2])?,
                rep: f[3]
                    .parse()
                    .map_err(|_| bad(format!("bad replication {:?}", f[3])))?,
                err: num(f[4])?,
                millis: if f[5].is_empty() {
                    None
                } else {
                    Some(num(f[5])?)
                },
            })
        })
        .collect()
}

/// Sidecar metadata written next to a results CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsMeta {
    pub schema_version: u32,
    pub columns: Vec<String>,
    pub config: ExperimentConfig,
}

/// Writes `path` (CSV) and `path` with extension `.json` (metadata).
pub fn write_results(path: &Path, rows: &[ResultRow], cfg: &ExperimentConfig) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(results_csv(rows).as_bytes())?;
    w.flush()?;
    let meta = ResultsMeta {
        schema_version: RESULTS_SCHEMA_VERSION,
        columns: RESULTS_HEADER.split(',').map(String::from).collect(),
        config: cfg.clone(),
    };
    std::fs::write(
        path.with_extension("json"),
        serde_json::to_string_pretty(&meta)?,
    )?;
    Ok(())
}

/// Mean, min and max error of one method on one family at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub method: Method,
    pub family: Family,
    pub theta_mult: f64,
    pub mean_err: f64,
    pub min_err: f64,
    pub max_err: f64,
    /// Replications with `err == 0`.
    pub exact: usize,
    pub count: usize,
}

/// Aggregates rows per (family, method, multiplier), ordered by those keys
/// in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryPoint> {
    let mut out: Vec<SummaryPoint> = Vec::new();
    for r in rows {
        let slot = out
            .iter_mut()
            .find(|p| p.method == r.method && p.family == r.family && p.theta_mult == r.theta_mult);
        match slot {
            Some(p) => {
                p.mean_err += r.err;
                p.min_err = p.min_err.min(r.err);
                p.max_err = p.max_err.max(r.err);
                p.exact += usize::from(r.err == 0.0);
                p.count += 1;
            }
            None => out.push(SummaryPoint {
                method: r.method,
                family: r.family,
                theta_mult: r.theta_mult,
                mean_err: r.err,
                min_err: r.err,
                max_err: r.err,
                exact: usize::from(r.err == 0.0),
                count: 1,
            }),
        }
    }
    for p in &mut out {
        p.mean_err /= p.count as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk(Design::new(30, 36, 6, 8));
        cfg.theta_grid = vec![0.0, 3.0];
        cfg.replications = 2;
        cfg.families = vec![Family::Gaussian, Family::Rademacher];
        cfg.settings.adaptive.restarts = 3;
        cfg.settings.adaptive.m0 = 4;
        cfg.settings.adaptive.n0 = 4;
        cfg.settings.gss = GssConfig::new(20, 20);
        cfg
    }

    #[test]
    fn row_count_is_the_full_cross_product() {
        let cfg = tiny();
        let rows = run_error_curve(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 4);
        assert!(rows.iter().all(|r| r.err >= 0.0 && r.millis.is_none()));
    }

    #[test]
    fn cells_reproduce_in_isolation() {
        let cfg = tiny();
        let rows = run_error_curve(&cfg).unwrap();
        let cell = run_cell(&cfg, 1, 1, 1).unwrap();
        let matching: Vec<_> = rows
            .iter()
            .filter(|r| r.family == Family::Rademacher && r.theta_mult == 3.0 && r.rep == 1)
            .cloned()
            .collect();
        assert_eq!(cell, matching);
    }

    #[test]
    fn csv_round_trip() {
        let mut cfg = tiny();
        cfg.record_timing = true;
        cfg.families = vec![Family::Poisson];
        cfg.replications = 1;
        let rows = run_error_curve(&cfg).unwrap();
        let parsed = parse_results_csv(&results_csv(&rows)).unwrap();
        assert_eq!(parsed.len(), rows.len());
        for (a, b) in parsed.iter().zip(&rows) {
            assert_eq!(
                (a.method, a.family, a.theta_mult, a.rep, a.err),
                (b.method, b.family, b.theta_mult, b.rep, b.err)
            );
            assert!(a.millis.is_some());
        }
        assert!(parse_results_csv("nope\n").is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny();
        cfg.theta_grid = vec![2.0, 1.0];
        assert!(cfg.validate().is_err());
        cfg.theta_grid = vec![1.0];
        cfg.replications = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny();
        cfg.design.block_rows = 30;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grid_values_print_short() {
        let g = tenths_grid(10, 40, 1);
        assert_eq!(g.len(), 31);
        assert_eq!(format!("{}", g[1]), "1.1");
        assert_eq!(format!("{}", g[30]), "4");
    }

    #[test]
    fn summary_aggregates() {
        let row = |method, err| ResultRow {
            method,
            family: Family::Gaussian,
            theta_mult: 1.0,
            rep: 0,
            err,
            millis: None,
        };
        let s = summarize(&[
            row(Method::Gmg, 1.0),
            row(Method::Gmg, 0.0),
            row(Method::Gss, 2.0),
        ]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mean_err, 0.5);
        assert_eq!(s[0].exact, 1);
        assert_eq!(s[1].max_err, 2.0);
    }
}
