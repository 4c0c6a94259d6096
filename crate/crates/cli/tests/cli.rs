use std::path::{Path, PathBuf};
use std::process::{Command as Proc, Output};

use phs_cli::report::{AnalyzeReport, SimulateSummary, SpectrumReport};
use phs_cli::verify::{Status, VerifyTable};
use phs_cli::{run, Command, Config, Options};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.toml"))
}

fn phs(args: &[&str]) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_phs")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes a variant of a preset with textual replacements applied.
fn variant(dir: &Path, base: &str, name: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = std::fs::read_to_string(preset(base)).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "{from} not in {base}");
        text = text.replacen(from, to, 1);
    }
    text = text.replacen(&format!("name = \"{base}\""), &format!("name = \"{name}\""), 1);
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

fn analyze(path: &Path) -> AnalyzeReport {
    let o = phs(&["analyze", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn transmission_line_is_a_contraction() {
    let r = analyze(&preset("transmission_line"));
    assert_eq!(r.classification, "contraction");
    assert_eq!(r.rank, 2);
    let expected = [[0.0, 0.0], [0.0, 2.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((r.sigma_form[i][j] - expected[i][j]).abs() < 1e-14, "{:?}", r.sigma_form);
        }
    }
    assert_eq!(r.vvt_le_identity, Some(true));
    assert!(r.family.is_none());
}

#[test]
fn identity_blocks_are_exponentially_stable_and_rank_one_is_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let wb_old = "wb = [\n  [0.0, 0.7071067811865476, 0.7071067811865476, 0.0],\n  [-0.7071067811865476, 0.7071067811865476, -0.7071067811865476, 0.7071067811865476],\n]";
    let ii = variant(
        dir.path(),
        "transmission_line",
        "ii",
        &[(wb_old, "wb = [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]")],
    );
    assert_eq!(analyze(&ii).classification, "exponentially_stable_candidate");

    let r1 = variant(
        dir.path(),
        "transmission_line",
        "rank1",
        &[(wb_old, "wb = [[1.0, 0.0, 1.0, 0.0], [2.0, 0.0, 2.0, 0.0]]")],
    );
    let r = analyze(&r1);
    assert_eq!(r.classification, "invalid_rank");
    assert_eq!(r.rank, 1);
    assert!(r.kernel_basis.is_none());
}

#[test]
fn moving_family_reports_omega() {
    let r = analyze(&preset("moving_family"));
    let fam = r.family.expect("path present");
    assert!(fam.assumptions.holds());
    let omega = fam.omega.expect("assumptions hold");
    assert!(omega.is_finite() && omega >= 0.0);
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let no_dt = variant(dir.path(), "transmission_line", "no_dt", &[("dt = 0.01\n", "")]);
    let o = phs(&["simulate", no_dt.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("numerics.dt"), "{}", stderr(&o));

    let bad_q = variant(dir.path(), "stable", "bad_q", &[("q = [1.0, 1.0]", "q = [1.0, -1.0]")]);
    let o = phs(&["analyze", bad_q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("profile.minus"), "{}", stderr(&o));

    let typo = variant(dir.path(), "stable", "typo", &[("l0 = 0.0", "l0 = \"zero\"")]);
    let o = phs(&["analyze", typo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("interface.l0"), "{}", stderr(&o));

    let o = phs(&["verify", preset("stable").to_str().unwrap(), "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--suite"));
}

#[test]
fn numerical_failures_exit_3() {
    // A full coefficient matrix with a lossless interface is outside the scope
    // of the staggered discretization.
    let dir = tempfile::tempdir().unwrap();
    let full = variant(
        dir.path(),
        "stable",
        "full_q",
        &[("kind = \"constant_diagonal\"\nq = [1.0, 1.0]", "kind = \"constant_full\"\nq = [[2.0, 0.5], [0.5, 1.0]]")],
    );
    let o = phs(&["simulate", full.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn unitary_simulation_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = phs(&["simulate", preset("unitary").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: SimulateSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("unitary.summary.json")).unwrap()).unwrap();
    assert_eq!(s.label, "fixed");
    assert!(s.energy_drift.abs() <= 1e-8, "{}", s.energy_drift);
    assert!(s.max_balance_residual <= 1e-9 * s.initial_energy);
    let csv = std::fs::read_to_string(dir.path().join("unitary.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,H,fd1,fd2,ed1,ed2,fI,eI,balance_residual,trace_a1,trace_a2,trace_b1,trace_b2"
    );
    assert_eq!(csv.lines().count(), s.steps + 2);
}

#[test]
fn zero_initial_state_gives_empty_motion() {
    let dir = tempfile::tempdir().unwrap();
    let zero = variant(
        dir.path(),
        "transmission_line",
        "zero",
        &[(
            "kind = \"bump\"\ncenter = -0.4\nwidth = 0.2\namplitude = [1.0, 0.5]",
            "kind = \"polynomial\"\nx1 = [0.0]\nx2 = [0.0]",
        )],
    );
    let cfg = Config::load(&zero).unwrap();
    let (series, s) = phs_cli::report::simulate(&cfg).unwrap();
    assert!(s.empty_motion);
    assert_eq!(s.energy_drift, 0.0);
    assert!(series.records.iter().all(|r| r.h == 0.0));
}

#[test]
fn moving_preset_certifies_the_norm_bound() {
    let cfg = Config::load(&preset("moving_family")).unwrap();
    let (_, s) = phs_cli::report::simulate(&cfg).unwrap();
    assert_eq!(s.label, "family approximation");
    let cert = s.bound_certificate.expect("family assumptions hold");
    assert!(cert.held, "{cert:?}");
}

#[test]
fn spectra_of_presets() {
    let stable = phs_cli::report::spectrum(&Config::load(&preset("stable")).unwrap()).unwrap();
    let exact = (2.0f64 / 3.0).ln() / 2.0;
    assert!(stable.abscissa.unwrap() < 0.0);
    assert!((stable.abscissa.unwrap() - exact).abs() < 1e-8);

    let unitary = phs_cli::report::spectrum(&Config::load(&preset("unitary")).unwrap()).unwrap();
    assert!(!unitary.eigenvalues.is_empty());
    assert!(unitary.abscissa.unwrap().abs() <= 1e-6);

    let dir = tempfile::tempdir().unwrap();
    let empty =
        variant(dir.path(), "stable", "empty", &[("re_min = -2.0\nre_max = 1.0", "re_min = 0.0\nre_max = 0.0")]);
    let o = phs(&["spectrum", empty.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: SpectrumReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.eigenvalues.is_empty() && r.abscissa.is_none());
    assert!(stdout(&o).contains("\"eigenvalues\": []"));
}

#[test]
fn default_presets_pass_every_suite() {
    for name in ["transmission_line", "unitary", "stable", "moving_family"] {
        let table = phs_cli::verify::verify(&Config::load(&preset(name)).unwrap(), None).unwrap();
        let failed: Vec<_> = table.failures().map(|r| format!("{}: {} ({})", r.suite, r.check, r.detail)).collect();
        assert!(failed.is_empty(), "{name}: {failed:?}");
    }
}

#[test]
fn broken_boundary_fixture_fails_by_name_with_exit_0() {
    let o = phs(&["verify", fixture("broken_wb").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let failed: Vec<&str> = text.lines().filter(|l| l.contains(" FAIL ")).collect();
    assert!(failed.iter().any(|l| l.starts_with("dissipativity") && l.contains("<Ax, x> <= 0 on D(A)")), "{text}");
    assert!(failed.iter().any(|l| l.contains("classification indefinite")), "{text}");
}

#[test]
fn pinned_seed_reproduces_the_table() {
    let cfg = preset("moving_family");
    let a = phs(&["verify", cfg.to_str().unwrap(), "--seed", "7"]);
    let b = phs(&["verify", cfg.to_str().unwrap(), "--seed", "7"]);
    let c = phs(&["verify", cfg.to_str().unwrap(), "--seed", "8"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn reports_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let opts = Options { out: Some(dir.path().to_path_buf()), ..Options::default() };
    let cfg = Config::load(&preset("moving_family")).unwrap();

    run(Command::Simulate, cfg.clone(), &opts).unwrap();
    let (_, summary) = phs_cli::report::simulate(&cfg).unwrap();
    let parsed: SimulateSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("moving_family.summary.json")).unwrap()).unwrap();
    assert_eq!(parsed, summary);

    run(Command::Analyze, cfg.clone(), &opts).unwrap();
    let parsed: AnalyzeReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("moving_family.analyze.json")).unwrap()).unwrap();
    assert_eq!(parsed, phs_cli::report::analyze(&cfg).unwrap());

    run(Command::Verify, cfg.clone(), &Options { suite: Some("norm_equivalence".into()), ..opts.clone() }).unwrap();
    let parsed: VerifyTable =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("moving_family.verify.json")).unwrap()).unwrap();
    assert_eq!(parsed, phs_cli::verify::verify(&cfg, Some("norm_equivalence")).unwrap());
    assert!(parsed.rows.iter().all(|r| r.status == Status::Pass));
}

#[test]
fn batch_runs_every_scenario_and_leaves_no_temporaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let configs = [preset("transmission_line"), preset("stable"), preset("moving_family")];
    let mut args = vec!["simulate"];
    args.extend(configs.iter().map(|p| p.to_str().unwrap()));
    args.extend(["--out", out.to_str().unwrap()]);
    let o = phs(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "moving_family.csv",
            "moving_family.summary.json",
            "stable.csv",
            "stable.summary.json",
            "transmission_line.csv",
            "transmission_line.summary.json",
        ]
    );
}

#[test]
fn identical_runs_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = phs(&["simulate", preset("transmission_line").to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let read = |d: &Path| std::fs::read(d.join("transmission_line.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
