use std::fs;
use std::process::Command as Process;

use foldgft::config::{Command, ConfigOverrides, Scheme};
use foldgft::experiment::{replay, run_sweep, run_table1, summarize, ExperimentResult};
use foldgft::io;
use foldgft_core::graph::build_knn_graph;
use foldgft_core::interp::ReconstructionMethod;
use foldgft_core::sensor::place_sensors;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_foldgft"))
}

fn small_sweep(trials: usize) -> foldgft::ExperimentConfig {
    ConfigOverrides {
        n_sensors: Some(80),
        knn_k: Some(6),
        omega: Some(vec![1.0, 3.0]),
        sigma: Some(vec![0.2]),
        sizes: Some(vec![16, 25]),
        trials: Some(trials),
        ..Default::default()
    }
    .resolve(Command::Sweep)
    .unwrap()
}

#[test]
fn empty_result_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let files = io::write_results(&ExperimentResult::default(), dir.path()).unwrap();
    let raw = fs::read_to_string(&files.raw).unwrap();
    assert_eq!(raw, io::RAW_HEADER.join(",") + "\n");
    let summary = fs::read_to_string(&files.summary).unwrap();
    assert_eq!(summary, io::SUMMARY_HEADER.join(",") + "\n");
    assert!(files.plots.is_empty());
}

#[test]
fn single_row_summary_equals_the_row() {
    let mut cfg = small_sweep(1);
    cfg.omega_list = vec![2.0];
    cfg.sample_sizes = vec![16];
    cfg.methods = vec![ReconstructionMethod::SfQ];
    let res = run_sweep(&cfg);
    assert_eq!(res.rows.len(), 1);
    let s = summarize(&res);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].mean_snr, res.rows[0].snr_db.unwrap());
    assert_eq!(s[0].std_snr, 0.0);
    assert_eq!((s[0].trials, s[0].failures), (1, 0));
}

#[test]
fn summary_matches_recomputation_from_raw_file() {
    let cfg = small_sweep(100);
    let res = run_sweep(&cfg);
    let dir = tempfile::tempdir().unwrap();
    let files = io::write_results(&res, dir.path()).unwrap();
    let back = io::read_raw(&files.raw).unwrap();
    assert_eq!(back, res);

    let summary = summarize(&res);
    assert_eq!(summary.len(), 2 * 2 * 3);
    for s in &summary {
        let vals: Vec<f64> = back
            .rows
            .iter()
            .filter(|r| {
                r.method == s.method
                    && r.omega == s.omega
                    && r.sample_size_requested == s.sample_size
            })
            .map(|r| r.snr_db.unwrap())
            .collect();
        assert_eq!(vals.len(), 100);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 99.0;
        assert!((s.mean_snr - mean).abs() <= 1e-12);
        assert!((s.std_snr - var.sqrt()).abs() <= 1e-12);
    }

    let summary_csv = fs::read_to_string(&files.summary).unwrap();
    assert_eq!(summary_csv.lines().count(), 1 + summary.len());
    assert_eq!(files.plots.len(), 2);
    let plot = fs::read_to_string(
        dir.path()
            .join(io::plot_file_name(Scheme::Uniform, 0.2, 3.0)),
    )
    .unwrap();
    assert!(plot.starts_with("sample_size,method,mean_snr,std\n"));
    assert_eq!(plot.lines().count(), 1 + 2 * 3);
}

#[test]
fn rows_replay_from_logged_seeds() {
    let cfg = ConfigOverrides {
        n_sensors: Some(70),
        sizes: Some(vec![15]),
        trials: Some(2),
        ..Default::default()
    }
    .resolve(Command::Table1)
    .unwrap();
    let res = run_table1(&cfg);
    assert_eq!(res.rows.len(), 2 * 2 * 3);
    for row in &res.rows {
        assert_eq!(replay(&cfg, row).unwrap(), row.snr_db.unwrap(), "{row:?}");
    }
}

#[test]
fn noiseless_single_trial_equals_sigma_zero() {
    let mut cfg = small_sweep(1);
    cfg.sigma_list = vec![0.0, 0.4];
    let res = run_sweep(&cfg);
    let mut clean = cfg.clone();
    clean.command = Command::Table1;
    clean.sigma_list = vec![0.0];
    clean.schemes = vec![Scheme::Uniform];
    clean.field_policy = foldgft::Redraw::Shared;
    let base = run_table1(&clean);
    let zero: Vec<_> = res.rows.iter().filter(|r| r.sigma == 0.0).collect();
    assert_eq!(zero.len(), base.rows.len());
    for (a, b) in zero.iter().zip(&base.rows) {
        assert_eq!(a.snr_db, b.snr_db);
    }
}

#[test]
fn two_sensor_field_runs_one_row_per_trial() {
    let cfg = ConfigOverrides {
        n_sensors: Some(2),
        knn_k: Some(1),
        sizes: Some(vec![1]),
        trials: Some(4),
        methods: Some(vec![ReconstructionMethod::SfQ]),
        ..Default::default()
    }
    .resolve(Command::Table1)
    .unwrap();
    let res = run_table1(&cfg);
    assert_eq!(res.rows.len(), 2 * 4);
    assert!(res
        .rows
        .iter()
        .all(|r| r.method == ReconstructionMethod::SfQ));
}

#[test]
fn positions_and_edges_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let field = place_sensors(40, 3).unwrap();
    let g = build_knn_graph(field.positions(), 4, 0.3).unwrap();
    let pos = dir.path().join("pos.csv");
    let edges = dir.path().join("edges.csv");
    io::write_positions(&pos, field.positions()).unwrap();
    io::write_edges(&edges, &g).unwrap();
    assert_eq!(io::read_positions(&pos).unwrap(), field.positions());
    assert_eq!(io::read_edges(&edges, 40).unwrap(), g);

    fs::write(&pos, "id,x,y\n0,0.1,0.2\n2,0.3,0.4\n").unwrap();
    assert!(io::read_positions(&pos).is_err());
    fs::write(&edges, "i,j,w\n3,1,0.5\n").unwrap();
    assert!(io::read_edges(&edges, 4).is_err());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin().args(["verify", "--trials", "10"]).output().unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );

    let fault = bin()
        .args(["verify", "--trials", "3", "--inject-fault"])
        .output()
        .unwrap();
    assert_eq!(fault.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fault.stdout).contains("FAIL spectral_folding"));

    let usage = bin().args(["table1", "--no-such-flag"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n_sensors = many\n").unwrap();
    let bad = bin()
        .args(["table1", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));

    let help = bin().args(["table1", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&help.stdout);
    for col in io::RAW_HEADER {
        assert!(text.contains(col), "--help lacks column {col}");
    }
}

#[test]
fn cli_writes_field_graph_and_results() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let cfg = p("exp.cfg");
    fs::write(
        &cfg,
        "n_sensors = 60\nknn_k = 5\nsizes = 12\ntrials = 2\nscheme = random\nmethods = SF_Q\n",
    )
    .unwrap();

    let st = bin()
        .args(["gen-field", "--config", &cfg, "--out", &p("field.csv")])
        .output()
        .unwrap();
    assert!(st.status.success());
    assert_eq!(
        io::read_positions(dir.path().join("field.csv").as_path())
            .unwrap()
            .len(),
        60
    );

    let st = bin()
        .args([
            "gen-graph",
            "--config",
            &cfg,
            "--positions",
            &p("field.csv"),
            "--out",
            &p("graph.csv"),
        ])
        .output()
        .unwrap();
    assert!(st.status.success());
    let g = io::read_edges(dir.path().join("graph.csv").as_path(), 60).unwrap();
    assert!(g.edges().count() >= 60 * 5 / 2);

    let st = bin()
        .args([
            "table1",
            "--config",
            &cfg,
            "--out",
            &p("t1"),
            "--trials",
            "3",
        ])
        .output()
        .unwrap();
    assert!(st.status.success());
    let raw = io::read_raw(dir.path().join("t1/raw.csv").as_path()).unwrap();
    assert_eq!(raw.rows.len(), 3);
    assert!(raw
        .rows
        .iter()
        .all(|r| r.scheme == Scheme::Random && r.is_ok()));
}
