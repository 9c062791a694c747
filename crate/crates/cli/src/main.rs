//! `mscan` command-line entry point. Every subcommand parses options, merges
//! them over an optional JSON config file and calls straight into the library.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use mscan::bench::{
    self, plot, Design, ExperimentConfig, Method, MethodSettings, UnimodalityConfig,
};
use mscan::scanners::exhaustive_mscan;
use mscan::{
    err_measure, generate, mscan_objective, theta_crit, DataMatrix, Family, GenerationSpec,
    PenaltyParams, Selection,
};

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
const SEED_ENV: &str = "MSCAN_SEED";
const DEFAULT_SEED: u64 = 100;

#[derive(Debug, Parser)]
#[command(
    name = "mscan",
    version,
    about = "Multiscale scan localization of large-mean submatrices"
)]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// JSON file with option values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a matrix with a planted block; writes the matrix CSV and truth JSON.
    Generate(GenerateOpts),
    /// Localize the anomalous block of a matrix CSV and print it as JSON.
    Localize(LocalizeOpts),
    /// Exact multiscale scan by enumeration (at most 20 rows).
    Oracle(OracleOpts),
    /// Error curves over a grid of signal strengths.
    BenchError(BenchOpts),
    /// Wall-clock timing of every method.
    BenchTime(BenchOpts),
    /// Size-profile landscape over a frame of submatrix sizes.
    Unimodality(UnimodalityOpts),
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<mscan::Error> for CliError {
    fn from(e: mscan::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Fills every unset field of `self` from `file`.
trait Merge {
    fn merge(self, file: Self) -> Self;
}

macro_rules! options {
    ($(#[$meta:meta])* struct $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        struct $name {
            $($(#[$fmeta])* $field: Option<$ty>,)*
        }

        impl Merge for $name {
            fn merge(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

options! {
    struct GenerateOpts {
        #[arg(long)]
        family: Family,
        /// Matrix rows.
        #[arg(long = "M", alias = "rows")]
        #[serde(rename = "M", alias = "rows")]
        big_m: usize,
        /// Matrix columns.
        #[arg(long = "N", alias = "cols")]
        #[serde(rename = "N", alias = "cols")]
        big_n: usize,
        /// Planted block rows.
        #[arg(long)]
        m: usize,
        /// Planted block columns.
        #[arg(long)]
        n: usize,
        /// Signal strength as a multiple of the critical level.
        #[arg(long, conflicts_with = "theta")]
        theta_mult: f64,
        /// Absolute natural parameter of the anomaly distribution.
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        seed: u64,
        /// Matrix CSV destination.
        #[arg(long)]
        out: PathBuf,
        /// Truth JSON destination; defaults to the matrix path with `.truth.json`.
        #[arg(long)]
        truth: PathBuf,
    }
}

options! {
    struct LocalizeOpts {
        /// Matrix CSV (no header).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        seed: u64,
        /// Truth JSON; when given, the error measure is reported.
        #[arg(long)]
        truth: PathBuf,
        /// Penalty slack delta.
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        restarts: usize,
        #[arg(long)]
        m0: usize,
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        m_bar: usize,
        #[arg(long)]
        n_bar: usize,
    }
}

options! {
    struct OracleOpts {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        truth: PathBuf,
    }
}

options! {
    struct BenchOpts {
        /// desk-balanced, desk-imbalanced, balanced or imbalanced.
        #[arg(long)]
        preset: String,
        #[arg(long, value_delimiter = ',')]
        families: Vec<Family>,
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        /// Comma-separated multiples of the critical signal level.
        #[arg(long, value_delimiter = ',')]
        theta_grid: Vec<f64>,
        #[arg(long)]
        replications: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        restarts: usize,
        #[arg(long)]
        m_bar: usize,
        #[arg(long)]
        n_bar: usize,
        /// Results CSV; a `.json` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Also write one SVG error-curve plot per family.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        plot: bool,
    }
}

options! {
    struct UnimodalityOpts {
        /// balanced or imbalanced.
        #[arg(long)]
        preset: String,
        #[arg(long)]
        family: Family,
        #[arg(long)]
        theta_mult: f64,
        #[arg(long)]
        m_bar: usize,
        #[arg(long)]
        n_bar: usize,
        #[arg(long)]
        las_restarts: usize,
        #[arg(long)]
        seed: u64,
        /// Output stem: writes `<stem>_raw.csv`, `<stem>_display.csv`, `<stem>.json`.
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG level plot.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        plot: bool,
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let file = File::open(path)
        .map_err(|e| CliError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn required<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{name}")))
}

fn resolve_seed(seed: Option<u64>) -> CliResult<u64> {
    if let Some(seed) = seed {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn read_matrix(path: &Path) -> CliResult<DataMatrix> {
    let file = File::open(path)
        .map_err(|e| CliError::Runtime(format!("cannot read matrix {}: {e}", path.display())))?;
    DataMatrix::read_csv(BufReader::new(file))
        .map_err(|e| CliError::Runtime(format!("malformed matrix {}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
struct Truth {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn read_truth(path: &Path) -> CliResult<Selection> {
    let file = File::open(path)
        .map_err(|e| CliError::Runtime(format!("cannot read truth {}: {e}", path.display())))?;
    let t: Truth = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Runtime(format!("malformed truth {}: {e}", path.display())))?;
    Ok(Selection::from_one_based(&t.rows, &t.cols)?)
}

fn selection_json(
    x: &DataMatrix,
    s: &Selection,
    params: PenaltyParams,
) -> CliResult<serde_json::Value> {
    Ok(json!({
        "rows": s.rows_one_based(),
        "cols": s.cols_one_based(),
        "objective": mscan_objective(x, s, params)?,
    }))
}

fn print_json(value: &serde_json::Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_generate(opts: GenerateOpts) -> CliResult<()> {
    if opts.theta.is_some() && opts.theta_mult.is_some() {
        return Err(CliError::Usage(
            "--theta and --theta-mult are mutually exclusive".into(),
        ));
    }
    let family = required(opts.family, "family")?;
    let (rows, cols) = (required(opts.big_m, "M")?, required(opts.big_n, "N")?);
    let (m, n) = (required(opts.m, "m")?, required(opts.n, "n")?);
    let seed = resolve_seed(opts.seed)?;
    let out = required(opts.out.clone(), "out")?;
    let spec = match (opts.theta, opts.theta_mult) {
        (Some(theta), None) => {
            let spec = GenerationSpec {
                family,
                rows,
                cols,
                block_rows: m,
                block_cols: n,
                theta,
                seed,
            };
            spec.validate()?;
            spec
        }
        (None, Some(mult)) => {
            GenerationSpec::with_theta_mult(family, rows, cols, m, n, mult, seed)?
        }
        _ => {
            return Err(CliError::Usage(
                "one of --theta or --theta-mult is required".into(),
            ))
        }
    };
    let (x, truth) = generate(&spec)?;
    x.write_csv(BufWriter::new(File::create(&out)?))?;

    let truth_path = opts
        .truth
        .clone()
        .unwrap_or_else(|| out.with_extension("truth.json"));
    let mut doc = selection_json(&x, &truth, PenaltyParams::GAUSSIAN)?;
    let effective = GenerateOpts {
        seed: Some(seed),
        truth: Some(truth_path.clone()),
        ..opts
    };
    doc["theta"] = json!(spec.theta);
    doc["theta_crit"] = json!(theta_crit(rows, cols, m, n)?);
    doc["config"] = serde_json::to_value(&effective)?;
    std::fs::write(&truth_path, serde_json::to_string(&doc)? + "\n")?;
    Ok(())
}

fn cmd_localize(opts: LocalizeOpts) -> CliResult<()> {
    let x = read_matrix(&required(opts.input.clone(), "input")?)?;
    let method = required(opts.method, "method")?;
    let seed = resolve_seed(opts.seed)?;
    let params = PenaltyParams::new(opts.delta.unwrap_or(PenaltyParams::GAUSSIAN.delta))?;

    let mut settings = MethodSettings::default();
    settings.adaptive.penalty = params;
    settings.gss.penalty = params;
    if let Some(r) = opts.restarts {
        settings.adaptive.restarts = r;
    }
    if let Some(m0) = opts.m0 {
        settings.adaptive.m0 = m0;
    }
    if let Some(n0) = opts.n0 {
        settings.adaptive.n0 = n0;
    }
    if let Some(m) = opts.m_bar {
        settings.gss.m_bar = m;
    }
    if let Some(n) = opts.n_bar {
        settings.gss.n_bar = n;
    }

    let s = bench::localize(&x, method, &settings, seed)?;
    let mut doc = selection_json(&x, &s, params)?;
    doc["method"] = json!(method);
    doc["seed"] = json!(seed);
    if let Some(path) = &opts.truth {
        doc["err"] = json!(err_measure(&s, &read_truth(path)?));
    }
    print_json(&doc)
}

fn cmd_oracle(opts: OracleOpts) -> CliResult<()> {
    let x = read_matrix(&required(opts.input.clone(), "input")?)?;
    let params = PenaltyParams::new(opts.delta.unwrap_or(PenaltyParams::GAUSSIAN.delta))?;
    let r = exhaustive_mscan(&x, params)?;
    let mut doc = json!({
        "rows": r.selection.rows_one_based(),
        "cols": r.selection.cols_one_based(),
        "objective": r.objective,
        "method": "oracle",
    });
    if let Some(path) = &opts.truth {
        doc["err"] = json!(err_measure(&r.selection, &read_truth(path)?));
    }
    print_json(&doc)
}

fn experiment(opts: &BenchOpts, timing: bool) -> CliResult<ExperimentConfig> {
    let mut cfg = match (timing, opts.preset.as_deref()) {
        (true, None | Some("timing")) => ExperimentConfig::timing(),
        (false, None | Some("desk-balanced")) => ExperimentConfig::desk(Design::BALANCED_DESK),
        (false, Some("desk-imbalanced")) => ExperimentConfig::desk(Design::IMBALANCED_DESK),
        (false, Some("balanced")) => ExperimentConfig::error_curve(Design::BALANCED),
        (false, Some("imbalanced")) => ExperimentConfig::error_curve(Design::IMBALANCED),
        (_, Some(other)) => return Err(CliError::Usage(format!("unknown preset {other:?}"))),
    };
    if let Some(f) = &opts.families {
        cfg.families = f.clone();
    }
    if let Some(m) = &opts.methods {
        cfg.methods = m.clone();
    }
    if let Some(g) = &opts.theta_grid {
        cfg.theta_grid = g.clone();
    }
    if let Some(r) = opts.replications {
        cfg.replications = r;
    }
    if let Some(r) = opts.restarts {
        cfg.settings.adaptive.restarts = r;
    }
    if let Some(m) = opts.m_bar {
        cfg.settings.gss.m_bar = m;
    }
    if let Some(n) = opts.n_bar {
        cfg.settings.gss.n_bar = n;
    }
    cfg.seed = resolve_seed(opts.seed)?;
    cfg.output = Some(required(opts.out.clone(), "out")?);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn cmd_bench(opts: BenchOpts, timing: bool) -> CliResult<()> {
    let cfg = experiment(&opts, timing)?;
    let rows = if timing {
        bench::run_timing(&cfg)?
    } else {
        bench::run_error_curve(&cfg)?
    };
    let summary = bench::summarize(&rows);
    let out = cfg.output.as_deref().expect("set by experiment()");
    if opts.plot.unwrap_or(false) {
        for family in &cfg.families {
            let svg = plot::error_curve_svg(&summary, *family);
            std::fs::write(with_suffix(out, &format!("_{family}.svg")), svg)?;
        }
    }
    let mut report = Vec::new();
    for p in &summary {
        let mut entry = json!({
            "method": p.method,
            "family": p.family,
            "theta_mult": p.theta_mult,
            "mean_err": p.mean_err,
            "exact": p.exact,
            "count": p.count,
        });
        if timing {
            let mut ms: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    r.method == p.method && r.family == p.family && r.theta_mult == p.theta_mult
                })
                .filter_map(|r| r.millis)
                .collect();
            ms.sort_by(f64::total_cmp);
            entry["median_millis"] = json!(ms.get(ms.len() / 2));
        }
        report.push(entry);
    }
    print_json(&json!({ "results": out, "summary": report }))
}

fn cmd_unimodality(opts: UnimodalityOpts) -> CliResult<()> {
    let mut cfg = match opts.preset.as_deref() {
        None | Some("balanced") => UnimodalityConfig::balanced(),
        Some("imbalanced") => UnimodalityConfig::imbalanced(),
        Some(other) => return Err(CliError::Usage(format!("unknown preset {other:?}"))),
    };
    if let Some(f) = opts.family {
        cfg.family = f;
    }
    if let Some(t) = opts.theta_mult {
        cfg.theta_mult = t;
    }
    if let Some(m) = opts.m_bar {
        cfg.m_bar = m;
    }
    if let Some(n) = opts.n_bar {
        cfg.n_bar = n;
    }
    if let Some(r) = opts.las_restarts {
        cfg.las_restarts = r;
    }
    cfg.seed = resolve_seed(opts.seed)?;
    let stem = required(opts.out.clone(), "out")?;
    let grid = mscan::bench::unimodality_grid(&cfg)?;
    grid.write(&stem, &cfg)?;
    if opts.plot.unwrap_or(false) {
        std::fs::write(with_suffix(&stem, ".svg"), plot::level_plot_svg(&grid))?;
    }
    let (m, n) = grid.argmax();
    print_json(&json!({ "argmax": { "m": m, "n": n }, "config": cfg }))
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot start thread pool: {e}")))?;
    }
    let config = cli.config.as_deref();
    match cli.command {
        Command::Generate(o) => {
            let file: GenerateOpts = load_config(config)?;
            // A flag choosing one theta form overrides either form in the file.
            let file = if o.theta.is_some() || o.theta_mult.is_some() {
                GenerateOpts {
                    theta: None,
                    theta_mult: None,
                    ..file
                }
            } else {
                file
            };
            cmd_generate(o.merge(file))
        }
        Command::Localize(o) => cmd_localize(o.merge(load_config(config)?)),
        Command::Oracle(o) => cmd_oracle(o.merge(load_config(config)?)),
        Command::BenchError(o) => cmd_bench(o.merge(load_config(config)?), false),
        Command::BenchTime(o) => cmd_bench(o.merge(load_config(config)?), true),
        Command::Unimodality(o) => cmd_unimodality(o.merge(load_config(config)?)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
