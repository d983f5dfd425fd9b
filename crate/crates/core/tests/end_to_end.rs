use std::path::Path;
use std::process::Command;

use splitstudy::data::Basis;
use splitstudy::report::{render, AnalysisSettings, Selector};
use splitstudy::synthetic::{generate_history, ScenarioSpec, Universe};
use splitstudy::{analyze_universe, AnalysisReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splitstudy"))
}

fn generate(dir: &Path, seed: u64) {
    let out = bin()
        .args(["generate", "--seed", &seed.to_string(), "--out"])
        .arg(dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cli_run_from_files_writes_every_selector() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    generate(&input, 12);
    let out_dir = dir.path().join("out");
    let status = bin()
        .arg("run")
        .arg("--bars")
        .arg(input.join("bars.csv"))
        .arg("--splits")
        .arg(input.join("splits.csv"))
        .arg("--fundamentals")
        .arg(input.join("fundamentals.csv"))
        .arg("--rates")
        .arg(input.join("rates.csv"))
        .arg("--out")
        .arg(&out_dir)
        .args(["--emit", "all", "--timestamp", "2026-01-01T00:00:00Z"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for sel in Selector::all() {
        assert!(out_dir.join(sel.file_name()).exists(), "{sel}");
    }
    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    let report = AnalysisReport::from_json(&json).unwrap();
    assert_eq!(report.samples.len(), 9);
    assert_eq!(report.meta.inputs.len(), 4);
    assert!(report.meta.inputs.iter().all(|d| d.sha256.len() == 64));
    assert_eq!(report.meta.timestamp.as_deref(), Some("2026-01-01T00:00:00Z"));
    // emit then re-parse gives a structurally equal report
    assert_eq!(report.to_json().unwrap(), json);

    let table1 = std::fs::read_to_string(out_dir.join("table1.csv")).unwrap();
    let ratios: Vec<&str> = table1.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(ratios, ["1.25", "1.1", "1.015", "1.068", "1.569", "2", "1.333", "1.011", "4.899"]);

    let fig2 = std::fs::read_to_string(out_dir.join("fig2.csv")).unwrap();
    let row: Vec<f64> = fig2.lines().nth(1).unwrap().split(',').skip(1).take(2).map(|v| v.parse().unwrap()).collect();
    assert!((row[0] + row[1] - 1.0).abs() < 2e-6);
}

#[test]
fn cli_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "version = 1\nseed = 3\nout = \"{}\"\nemit = [\"json\", \"fig1\"]\n\n[analysis]\nhypothesis = \"h1\"\nvolume_basis = \"raw\"\n",
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--volume-basis", "adjusted"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report =
        AnalysisReport::from_json(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report.meta.settings.volume_basis, Basis::Adjusted);
    assert_eq!(report.meta.synthetic_seed, Some(3));
    assert!(report.samples.iter().all(|s| s.h1.is_some() && s.h2.is_none() && s.h3.is_none()));
    assert!(!dir.path().join("out/fig2.csv").exists());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    generate(&input, 1);
    let run = |extra: &[&str], splits: &Path| {
        bin()
            .arg("run")
            .arg("--bars")
            .arg(input.join("bars.csv"))
            .arg("--splits")
            .arg(splits)
            .arg("--out")
            .arg(dir.path().join("out"))
            .args(extra)
            .output()
            .unwrap()
    };

    let missing = run(&[], &dir.path().join("nope.csv"));
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.csv"));

    let empty = dir.path().join("empty_splits.csv");
    std::fs::write(&empty, "ticker,effective_date,ratio\n").unwrap();
    let out = run(&[], &empty);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no analyzable samples"));

    let bad_sel = run(&["--emit", "fig42"], &input.join("splits.csv"));
    assert_eq!(bad_sel.status.code(), Some(1));

    let bad_cov = run(&["--min-coverage", "1.5"], &input.join("splits.csv"));
    assert_eq!(bad_cov.status.code(), Some(1));

    let bad_flag = bin().args(["run", "--frobnicate"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(1));

    let bad_row = dir.path().join("bad_splits.csv");
    std::fs::write(&bad_row, "ticker,effective_date,ratio\nS1,2013-12-31,-2\n").unwrap();
    let out = run(&[], &bad_row);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn flat_ratio_one_sample_reports_no_change() {
    let h = generate_history(&ScenarioSpec {
        daily_vol: 0.0,
        volume_noise: 0.0,
        split_ratio: 1.0,
        intraday_range: 0.0,
        ..Default::default()
    })
    .unwrap();
    let universe = Universe {
        bars: h.bars,
        events: vec![h.event],
        fundamentals: Vec::new(),
        rates: h.rates,
    };
    let report = analyze_universe(&universe, &AnalysisSettings::default()).unwrap();
    let s = &report.samples[0];
    assert!(s.degenerate);
    let h1 = s.h1.as_ref().unwrap();
    assert_eq!(h1.volume_short.value().unwrap().after_pct_of_before, 100.0);
    let h2 = s.h2.as_ref().unwrap();
    for c in &h2.price_changes {
        assert_eq!(c.change.value().unwrap().pct, 0.0);
    }
    for m in &h2.month_changes {
        assert_eq!(m.before.value().unwrap().pct, 0.0);
        assert_eq!(m.after.value().unwrap().pct, 0.0);
    }
    for v in &h2.value_factors {
        assert_eq!(v.factor.value().unwrap().value_factor, 1.0);
    }
    // a flat stock has zero return variance, so beta is undefined
    assert!(h2.beta.reason().unwrap().contains("variance"));
    let h3 = s.h3.as_ref().unwrap();
    let g = h3.gaps_long.raw.value().unwrap();
    assert_eq!((g.mean_before, g.mean_after), (Some(0.0), Some(0.0)));

    let fig1 = render(&report, Selector::Fig(1)).unwrap().contents;
    assert!(fig1.lines().nth(1).unwrap().contains(",100.00,"));
}
