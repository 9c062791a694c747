use mscan::bench::{
    parse_results_csv, run_error_curve, unimodality_grid, write_results, Design, ExperimentConfig,
    Method, UnimodalityConfig, RESULTS_HEADER,
};
use mscan::{DataMatrix, Family};

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk(Design::new(40, 48, 6, 8));
    cfg.families = vec![Family::Gaussian, Family::Rademacher];
    cfg.theta_grid = vec![0.0, 3.0];
    cfg.replications = 3;
    cfg.methods = vec![Method::Gss, Method::Gmg];
    cfg.settings.gss = mscan::scanners::GssConfig::new(20, 20);
    cfg
}

#[test]
fn results_round_trip_through_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut cfg = small_config();
    cfg.output = Some(path.clone());
    let rows = run_error_curve(&cfg).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3 * 2);

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(RESULTS_HEADER));
    assert_eq!(parse_results_csv(&text).unwrap(), rows);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(meta["schema_version"], 1);
    let echoed: ExperimentConfig = serde_json::from_value(meta["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
}

#[test]
fn each_row_is_reproducible_in_isolation() {
    let cfg = small_config();
    let rows = run_error_curve(&cfg).unwrap();
    let single = mscan::bench::run_cell(&cfg, 1, 1, 2).unwrap();
    let from_full: Vec<_> = rows
        .iter()
        .filter(|r| r.family == Family::Rademacher && r.theta_mult == 3.0 && r.rep == 2)
        .cloned()
        .collect();
    assert_eq!(single, from_full);
}

#[test]
fn unimodality_grid_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = UnimodalityConfig {
        design: Design::new(50, 40, 6, 8),
        theta_mult: 3.0,
        m_bar: 12,
        n_bar: 15,
        las_restarts: 3,
        ..UnimodalityConfig::balanced()
    };
    let grid = unimodality_grid(&cfg).unwrap();
    let stem = dir.path().join("landscape");
    grid.write(&stem, &cfg).unwrap();
    let read = |name: &str| {
        DataMatrix::read_csv(std::io::BufReader::new(
            std::fs::File::open(dir.path().join(name)).unwrap(),
        ))
        .unwrap()
    };
    assert_eq!(read("landscape_raw.csv"), grid.raw_matrix().unwrap());
    assert_eq!(
        read("landscape_display.csv"),
        grid.display_matrix().unwrap()
    );
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("landscape.json")).unwrap())
            .unwrap();
    let (m, n) = grid.argmax();
    assert_eq!(meta["argmax"]["m"], m);
    assert_eq!(meta["argmax"]["n"], n);
    assert_eq!(meta["config"]["m_bar"], 12);
}
