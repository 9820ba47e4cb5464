use std::process::Command;

use critwave::harness::{
    run_chain, run_sweep, verify_chain, ChainDepth, CheckStatus, CheckToggles, ExperimentConfig, PValue,
    SimulationSpec,
};
use critwave::{InitialDataSpec, Verdict};

fn spec(n: usize, amplitude: f64, h: f64, t_max: f64) -> SimulationSpec {
    SimulationSpec { n, h, t_max, initial_data: InitialDataSpec::bump(amplitude, 1.0), ..SimulationSpec::default() }
}

fn status(report: &critwave::harness::RunReport, name: &str) -> CheckStatus {
    report.check(name).unwrap_or_else(|| panic!("missing check {name}")).status
}

#[test]
fn zero_data_is_vacuous() {
    let config = spec(4, 0.0, 0.02, 6.0).resolve().unwrap();
    let report = verify_chain(&config, &CheckToggles::default(), 10, None).unwrap();
    assert_eq!(report.blowup.verdict, Verdict::SurvivedHorizon);
    assert!(report.passed(), "{:#?}", report.checks);
    assert!(report.growth_fit.is_none());
    for name in ["log_refinement", "power_lower_bound"] {
        let c = report.check(name).unwrap();
        assert_eq!(c.status, CheckStatus::Skip);
        assert!(c.reason.as_deref().unwrap().contains("zero data"));
    }
}

#[test]
fn large_data_blows_up_with_checks_passing_before() {
    let config = spec(4, 50.0, 1.0 / 400.0, 4.0).resolve().unwrap();
    let report = verify_chain(&config, &CheckToggles::default(), 10, None).unwrap();
    assert_eq!(report.blowup.verdict, Verdict::BlewUp);
    let t = report.blowup.t_detect.unwrap();
    assert!((2.6..2.9).contains(&t), "t_detect {t}");
    let fit = report.growth_fit.unwrap();
    assert!(fit.window[1] < t && fit.fitted_exponent > 2.0);
    assert!(report.passed(), "{:#?}", report.checks);
    assert_eq!(status(&report, "log_refinement"), CheckStatus::Skip);
}

#[test]
fn dimension_gates() {
    let r2 = verify_chain(&spec(2, 1.0, 0.01, 3.0).resolve().unwrap(), &CheckToggles::default(), 10, None).unwrap();
    assert_eq!(status(&r2, "pointwise_domination"), CheckStatus::Skip);
    assert_eq!(status(&r2, "weighted_Lp"), CheckStatus::Skip);
    for name in ["holder_volume", "holder_test_function", "lemma22", "radon_mass", "dalembert", "power_lower_bound"] {
        assert_eq!(status(&r2, name), CheckStatus::Pass, "{name}");
    }

    let r3 = verify_chain(&spec(3, 1.0, 0.02, 3.0).resolve().unwrap(), &CheckToggles::default(), 10, None).unwrap();
    assert_eq!(status(&r3, "pointwise_domination"), CheckStatus::Pass);
    assert_eq!(status(&r3, "weighted_Lp"), CheckStatus::Skip);
    assert_eq!(status(&r3, "log_refinement"), CheckStatus::Skip);
}

#[test]
fn toggles_remove_checks() {
    let config = spec(4, 1.0, 0.02, 2.0).resolve().unwrap();
    let off = CheckToggles {
        d2F0: false,
        holder: false,
        lemma22: false,
        radon_wave: false,
        dalembert: false,
        weighted_Lp: false,
        log_refinement: false,
    };
    let (report, artifacts) = run_chain("x", &config, &off, ChainDepth::Full, 10, None).unwrap();
    let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
    assert!(names.is_empty(), "{names:?}");
    assert_eq!(artifacts.pre_blowup_len, artifacts.series.len());
}

#[test]
fn linear_runs_skip_source_checks() {
    let mut s = spec(4, 1.0, 0.01, 3.0);
    s.nonlinear = false;
    let report = verify_chain(&s.resolve().unwrap(), &CheckToggles::default(), 10, None).unwrap();
    assert_eq!(status(&report, "d2F0_identity"), CheckStatus::Skip);
    assert_eq!(status(&report, "dalembert"), CheckStatus::Skip);
    assert_eq!(status(&report, "radon_wave"), CheckStatus::Pass);
    assert!(report.passed());
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let config = spec(4, 2.0, 0.02, 6.0).resolve().unwrap();
    verify_chain(&config, &CheckToggles::default(), 10, Some(dir.path())).unwrap();
    for f in ["diagnostics.csv", "snapshot_final.csv", "snapshot_final.json", "radon_0_u.csv", "radon_0_u.json", "log_refinement.csv", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let header = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert!(header.starts_with("t,F0,F1,Lp,umax,res_2_2p,res_2_3,res_2_4,lemma22_margin\n"));
}

fn small_sweep(jobs: usize, dir: &std::path::Path) -> ExperimentConfig {
    let mut exp = ExperimentConfig::default();
    exp.simulation = spec(4, 1.0, 0.02, 3.0);
    exp.sweep.p = vec![PValue::Offset { offset_from_pc: -0.2 }, PValue::critical(), PValue::Absolute(2.5)];
    exp.sweep.amplitude = vec![1.0, 20.0];
    exp.jobs = jobs;
    exp.out_dir = Some(dir.to_path_buf());
    exp
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = run_sweep(&small_sweep(1, a.path()), ChainDepth::Series).unwrap();
    let sb = run_sweep(&small_sweep(3, b.path()), ChainDepth::Series).unwrap();
    assert_eq!(sa.reports.len(), 6);
    assert_eq!(sa.reports.iter().map(|r| r.blowup.verdict).collect::<Vec<_>>(), sb.reports.iter().map(|r| r.blowup.verdict).collect::<Vec<_>>());
    let csv_a = std::fs::read(a.path().join("sweep.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    for id in ["run_000", "run_005"] {
        let da = std::fs::read(a.path().join(id).join("diagnostics.csv")).unwrap();
        let db = std::fs::read(b.path().join(id).join("diagnostics.csv")).unwrap();
        assert_eq!(da, db);
    }
}

#[test]
fn empty_sweep_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = ExperimentConfig::default();
    exp.out_dir = Some(dir.path().to_path_buf());
    let summary = run_sweep(&exp, ChainDepth::Series).unwrap();
    assert!(summary.reports.is_empty() && summary.passed());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_critwave"))
}

#[test]
fn cli_exponents() {
    let out = cli().args(["exponents", "--n", "4"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exponents"]["p_c"], 2.0);
    assert_eq!(v["exponents"]["a"], 2.0);

    let bad = cli().args(["exponents", "--n", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cli_rejects_short_domain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"simulation": {"n": 4, "h": 0.02, "t_max": 5, "r_max": 5.5,
            "initial_data": {"kind": "smooth_bump", "amplitude": 1, "radius": 1}}}"#,
    )
    .unwrap();
    let out = cli().args(["simulate", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_max"));
}

#[test]
fn cli_simulate_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["simulate", "--amplitude", "5", "--h", "0.005", "--t-max", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["reports"].as_array().unwrap().len(), 1);
    assert_eq!(summary["reports"][0]["blowup"]["verdict"], "survived_horizon");
    assert!(summary["reports"][0]["growth_fit"]["fitted_exponent"].is_f64());
}

#[test]
fn cli_ode_lemma() {
    let out = cli().args(["ode-lemma", "--n", "4", "--grid", "1,3", "--pairs", "10"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c0 = v["threshold"]["c0_estimate"].as_f64().unwrap();
    assert!(c0 > 9.8 && c0 < 10.1, "{c0}");
}

#[test]
fn reference_growth_is_at_least_critical() {
    let config = spec(4, 5.0, 1.0 / 200.0, 12.0).resolve().unwrap();
    let (report, _) = run_chain("ref", &config, &CheckToggles::default(), ChainDepth::Series, 10, None).unwrap();
    assert!(report.passed(), "{:#?}", report.checks);
    let fit = report.growth_fit.unwrap();
    assert!(fit.fitted_exponent >= report.exponents.a - 0.2, "{fit:?}");
    assert!(fit.log_factor_slope > 0.0, "{fit:?}");
}
