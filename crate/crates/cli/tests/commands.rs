use std::path::{Path, PathBuf};
use std::process::Command;

use evapsbp::energy::IDENTITY_TOL;
use evapsbp::verify::Mutation;
use evapsbp_cli::commands::{cmd_audit, cmd_converge, cmd_run, cmd_verify};
use evapsbp_cli::config::{parse_config, RunManifest};
use evapsbp_cli::output::{read_snapshots, LEDGER_COLUMNS};
use evapsbp_cli::{exit, CliError};

fn manifest(doc: &str, out: &Path) -> RunManifest {
    let mut m = parse_config(doc, "test.toml", false).unwrap().manifest;
    m.output_dir = out.to_path_buf();
    m
}

fn ledger_column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

fn row_count(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

fn cadence_rows(steps: usize, every: usize) -> usize {
    steps / every + 1 + usize::from(!steps.is_multiple_of(every))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_evapsbp"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn steady_run_satisfies_identity_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        "preset = \"steady\"\n[solver]\nt_end = 2e-6\naudit_every = 1\n",
        dir.path(),
    );
    let out = cmd_run(&m).unwrap();
    assert!(out.report.is_success());
    let ledger = dir.path().join("ledger.csv");
    let header: Vec<String> = csv::Reader::from_path(&ledger)
        .unwrap()
        .headers()
        .unwrap()
        .iter()
        .map(String::from)
        .collect();
    assert_eq!(header, LEDGER_COLUMNS);
    let res = ledger_column(&ledger, "identity_residual");
    assert_eq!(res.len(), out.report.summary.steps_taken + 1);
    assert!(res.iter().all(|&r| r <= IDENTITY_TOL), "{res:?}");
}

#[test]
fn zero_end_time_gives_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("preset = \"stefan\"\n[solver]\nt_end = 0.0\n", dir.path());
    cmd_run(&m).unwrap();
    assert_eq!(row_count(&dir.path().join("snapshots.csv")), 1);
    assert_eq!(row_count(&dir.path().join("ledger.csv")), 1);
}

#[test]
fn stefan_interface_advances_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        "preset = \"stefan\"\n[solver]\nt_end = 4e-6\n[output]\nsnapshot_every = 1\n",
        dir.path(),
    );
    cmd_run(&m).unwrap();
    let rows = read_snapshots(&dir.path().join("snapshots.csv")).unwrap();
    assert!(rows.len() > 100);
    for w in rows.windows(2) {
        assert!(w[1].state.x_delta > w[0].state.x_delta, "{} -> {}", w[0].state.x_delta, w[1].state.x_delta);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let doc = "preset = \"sucking\"\nseed = 11\n[solver]\nt_end = 2e-5\naudit_every = 3\n[output]\nsnapshot_every = 4\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_run(&manifest(doc, a.path())).unwrap();
    cmd_run(&manifest(doc, b.path())).unwrap();
    for f in ["snapshots.csv", "ledger.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn row_counts_follow_cadence() {
    for (snap, audit) in [(1usize, 1usize), (3, 7), (10, 10), (64, 5), (1000, 1000)] {
        let dir = tempfile::tempdir().unwrap();
        let doc = format!(
            "preset = \"sucking\"\n[solver]\nt_end = 1e-5\naudit_every = {audit}\n[output]\nsnapshot_every = {snap}\n"
        );
        let out = cmd_run(&manifest(&doc, dir.path())).unwrap();
        let steps = out.report.summary.steps_taken;
        assert!(steps > 10);
        assert_eq!(row_count(&dir.path().join("snapshots.csv")), cadence_rows(steps, snap), "snap {snap}");
        assert_eq!(row_count(&dir.path().join("ledger.csv")), cadence_rows(steps, audit), "audit {audit}");
    }
}

#[test]
fn emit_selects_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        "preset = \"steady\"\n[solver]\nt_end = 1e-7\n[output]\nemit = [\"summary\"]\n",
        dir.path(),
    );
    cmd_run(&m).unwrap();
    assert!(dir.path().join("summary.json").exists());
    assert!(!dir.path().join("snapshots.csv").exists());
    assert!(!dir.path().join("ledger.csv").exists());
}

#[test]
fn solver_failure_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // Interface starts just outside the depletion margin of the liquid.
    let margin = 2.0 * 1e-3 / 64.0;
    let doc = format!(
        "preset = \"sucking\"\n[domain]\nx_delta = {}\n[solver]\nt_end = 1e-3\n",
        1e-3 - 1.05 * margin
    );
    let path = dir.path().join("deplete.toml");
    std::fs::write(&path, doc).unwrap();
    let status = bin()
        .args(["--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "run"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(exit::SOLVER));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "failed");
    assert!(summary["failure"]["step"].as_u64().unwrap() > 0);
    assert!(summary["failure"]["error"].as_str().unwrap().contains("liquid"));
    assert!(row_count(&dir.path().join("snapshots.csv")) >= 2);
}

#[test]
fn audit_reproduces_run_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        "preset = \"stefan\"\n[solver]\nt_end = 2e-7\naudit_every = 1\n[output]\nsnapshot_every = 1\n",
        dir.path(),
    );
    cmd_run(&m).unwrap();
    let a = cmd_audit(&m, &dir.path().join("snapshots.csv")).unwrap();
    assert!(a.passed(), "{a:?}");
    let run_energy = ledger_column(&dir.path().join("ledger.csv"), "energy");
    let audit_energy = ledger_column(&a.path, "energy");
    assert_eq!(run_energy.len(), audit_energy.len());
    for (x, y) in run_energy.iter().zip(&audit_energy) {
        assert!((x - y).abs() <= 1e-15 * x.abs(), "{x} vs {y}");
    }
}

#[test]
fn audit_rejects_mismatched_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("preset = \"steady\"\n[solver]\nt_end = 0.0\n", dir.path());
    cmd_run(&m).unwrap();
    let mut other = m.clone();
    other.setup.config.n_v += 1;
    match cmd_audit(&other, &dir.path().join("snapshots.csv")) {
        Err(CliError::Malformed { .. }) => {}
        r => panic!("{r:?}"),
    }
    std::fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n").unwrap();
    assert!(matches!(
        cmd_audit(&m, &dir.path().join("bad.csv")),
        Err(CliError::Malformed { .. })
    ));
}

#[test]
fn verify_passes_and_catches_mutations() {
    let clean = cmd_verify(3, 300, None).unwrap();
    assert!(clean.iter().all(|r| r.passed), "{clean:?}");

    let flipped = cmd_verify(3, 300, Some(Mutation::PenaltySignFlip)).unwrap();
    let failed = |rs: &[evapsbp::verify::PropertyReport], name: &str| rs.iter().any(|r| r.name == name && !r.passed);
    assert!(failed(&flipped, "closed_form_equivalence"));

    let perturbed = cmd_verify(3, 300, Some(Mutation::QPerturbation)).unwrap();
    assert!(failed(&perturbed, "sbp_identity"));
}

#[test]
fn verify_exit_codes() {
    let ok = bin().args(["--seed", "5", "verify", "--samples", "100"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(exit::OK));
    let stdout = String::from_utf8(ok.stdout).unwrap();
    assert!(stdout.contains("closed_form_equivalence") && stdout.contains("PASS"));

    let bad = bin()
        .args(["verify", "--samples", "100", "--inject", "penalty-sign"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(exit::CHECK_FAILED));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("closed_form_equivalence"));
}

#[test]
fn config_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    std::fs::write(&path, "preset = \"steady\"\n[solver]\nt_end = 0.0\ntend = 1.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let args = |lenient: bool| {
        let mut v = vec!["--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
        if lenient {
            v.push("--lenient");
        }
        v.push("run");
        v
    };
    let strict = bin().args(args(false)).output().unwrap();
    assert_eq!(strict.status.code(), Some(exit::USAGE));
    assert!(String::from_utf8(strict.stderr).unwrap().contains("solver.tend"));
    let lenient = bin().args(args(true)).output().unwrap();
    assert_eq!(lenient.status.code(), Some(exit::OK));
    assert!(String::from_utf8(lenient.stderr).unwrap().contains("solver.tend"));

    let bad_flag = bin().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(exit::USAGE));
    let zero_audit = bin()
        .args(["--config", path.to_str().unwrap(), "--lenient", "--audit-every", "0", "run"])
        .output()
        .unwrap();
    assert_eq!(zero_audit.status.code(), Some(exit::USAGE));
}

#[test]
fn converge_reports_observed_orders() {
    let text = std::fs::read_to_string(config_path("mms.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut m = manifest(&text, dir.path());
    for (order, need) in [(2usize, 1.9), (4, 2.9)] {
        m.setup.config.sbp_order = order;
        let table = cmd_converge(&m, &[33, 65, 129]).unwrap();
        assert_eq!(table.levels.len(), 3);
        assert!(table.levels[0].order.is_none());
        let min = table.min_order().unwrap();
        assert!(min >= need, "order {order}:\n{table}");
    }
}

#[test]
fn converge_is_exact_for_linear_fields_on_a_static_mesh() {
    let text = std::fs::read_to_string(config_path("mms.toml")).unwrap();
    let text = text
        .replace("amplitude = 0.05", "amplitude = 0.0")
        .replace("t_end = 0.25", "t_end = 0.05");
    let text = text.split("[mms.vapor]").next().unwrap().to_string()
        + "[mms.vapor]\nkind = \"linear\"\nslope = 0.7\n[mms.liquid]\nkind = \"linear\"\nslope = -0.3\n";
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(&text, dir.path());
    let table = cmd_converge(&m, &[17, 33]).unwrap();
    for l in &table.levels {
        assert!(l.error <= 1e-12, "{table}");
    }
}

#[test]
fn converge_preconditions() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config_path("mms.toml")).unwrap();
    let m = manifest(&text, dir.path());
    assert!(matches!(cmd_converge(&m, &[33]), Err(CliError::Usage(_))));
    assert!(matches!(cmd_converge(&m, &[65, 33]), Err(CliError::Usage(_))));
    let plain = manifest("preset = \"stefan\"\n", dir.path());
    assert!(matches!(
        cmd_converge(&plain, &[33, 65]),
        Err(CliError::Invalid { field, .. }) if field == "mms"
    ));
}
