//! End-to-end tests of the `puqca` binary: flag surface, output formats,
//! and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use puqca::model::{serialize_rule, RuleSpec};
use puqca::tables;

fn run_in(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_puqca"));
    cmd.args(args).current_dir(dir);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_in(Path::new("."), args, &[])
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn write_rule(dir: &Path, name: &str, rule: RuleSpec) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serialize_rule(&rule, Some("test"))).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bound_prints_closed_form() {
    for (n, want) in [("4", "0.800000"), ("6", "0.727273"), ("14", "0.632489")] {
        let out = run(&["bound", n]);
        assert!(out.status.success());
        assert_eq!(stdout_of(&out).trim(), want);
    }
    let out = run(&["bound", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_reports_fitness_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let entry = &tables::PER_SIZE_FULL[1];
    assert_eq!(entry.n, 6);
    let rule = write_rule(
        dir.path(),
        "six.json",
        RuleSpec::Full(tables::full_rule(entry.layer1, entry.layer2)),
    );

    let out = run(&["eval", &rule, "--n", "6", "--t", "3", "--p", "1"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("fitness    1.000000"), "{text}");
    assert!(text.contains("total      44"), "{text}");
    assert!(text.contains("backend    sector"), "{text}");

    // The dense audit path agrees.
    let out = run(&["eval", &rule, "--n", "6", "--t", "3", "--p", "1", "--dense"]);
    assert!(stdout_of(&out).contains("fitness    1.000000"));

    // Sampled estimate with a fixed seed is deterministic.
    let sample_args = [
        "eval", &rule, "--n", "6", "--t", "3", "--p", "1", "--sample", "200", "--seed", "7",
    ];
    let a = run(&sample_args);
    assert!(a.status.success());
    assert_eq!(stdout_of(&a).lines().next(), Some("estimate   1.000000"));

    // Misclassified CSV for a rule that errs.
    let identity = write_rule(
        dir.path(),
        "id.json",
        RuleSpec::Full(puqca::model::PUQCARule::identity()),
    );
    let miss = dir.path().join("miss.csv");
    let out = run(&[
        "eval", &identity, "--n", "6", "--t", "1", "--p", "1",
        "--misclassified-out", miss.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&miss).unwrap();
    assert!(written.starts_with("configuration\n"));
    assert!(written.lines().count() > 1);
    assert!(written.lines().nth(1).unwrap().chars().all(|c| c == '0' || c == '1'));

    // Bad file → usage error.
    let bogus = dir.path().join("missing.json");
    let out = run(&["eval", bogus.to_str().unwrap(), "--n", "6", "--t", "3", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"schema\": 1").unwrap();
    let out = run(&["eval", broken.to_str().unwrap(), "--n", "6", "--t", "3", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_multi_size_rule_at_fourteen() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(
        dir.path(),
        "multi.json",
        RuleSpec::Full(tables::full_rule(
            tables::MULTI_SIZE_FULL_LAYER1,
            tables::MULTI_SIZE_FULL_LAYER2,
        )),
    );
    let out = run(&["eval", &rule, "--n", "14", "--t", "7", "--p", "1"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("fitness    0.980389"), "{text}");
    assert!(text.contains("wrong      254"), "{text}");
    assert!(text.contains("total      12952"), "{text}");
}

#[test]
fn eval_fermionic_rule_uses_momentum_path() {
    let dir = tempfile::tempdir().unwrap();
    let entry = &tables::SIMULABLE_PER_SIZE[0];
    let rule = write_rule(
        dir.path(),
        "fermi.json",
        RuleSpec::Fermionic(tables::simulable_rule(entry.layer1, entry.layer2)),
    );
    let out = run(&["eval", &rule, "--n", "4", "--t", "2", "--p", "0"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("fitness    1.000000"), "{text}");
    assert!(text.contains("backend    fermion"), "{text}");
}

fn parse_profile(text: &str) -> Vec<f64> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("site,probability"));
    lines
        .enumerate()
        .map(|(i, line)| {
            let (site, value) = line.split_once(',').expect("two columns");
            assert_eq!(site.parse::<usize>().unwrap(), i);
            value.parse::<f64>().unwrap()
        })
        .collect()
}

#[test]
fn profile_outputs_shift_covariant_csv() {
    let dir = tempfile::tempdir().unwrap();
    let entry = &tables::PER_SIZE_FULL[2];
    assert_eq!(entry.n, 8);
    let rule = write_rule(
        dir.path(),
        "eight.json",
        RuleSpec::Full(tables::full_rule(entry.layer1, entry.layer2)),
    );

    let out = run(&["profile", &rule, "10110000", "--t", "4"]);
    assert!(out.status.success());
    let base = parse_profile(&stdout_of(&out));
    assert_eq!(base.len(), 8);
    let total: f64 = base.iter().sum();
    assert!((total - 3.0).abs() < 1e-9, "{total}");

    // Input translated by two sites → profile translated by two sites.
    let out = run(&["profile", &rule, "00101100", "--t", "4"]);
    let shifted = parse_profile(&stdout_of(&out));
    for site in 0..8 {
        assert!((shifted[(site + 2) % 8] - base[site]).abs() < 1e-10);
    }

    // Vacuum stays vacuum.
    let out = run(&["profile", &rule, "00000000", "--t", "4"]);
    assert!(parse_profile(&stdout_of(&out)).iter().all(|&v| v == 0.0));

    // --out writes the same CSV to a file.
    let csv_path = dir.path().join("profile.csv");
    let out = run(&[
        "profile", &rule, "10110000", "--t", "4", "--out", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let from_file = parse_profile(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(from_file, base);
}

#[test]
fn profile_fermion_path_matches_statevector() {
    let dir = tempfile::tempdir().unwrap();
    let entry = &tables::SIMULABLE_PER_SIZE[1];
    assert_eq!(entry.n, 6);
    let fr = tables::simulable_rule(entry.layer1, entry.layer2);
    let fermi_file = write_rule(dir.path(), "fermi.json", RuleSpec::Fermionic(fr));
    let full_file = write_rule(dir.path(), "full.json", RuleSpec::Full(fr.to_full_rule()));

    let out = run(&["profile", &fermi_file, "110100", "--t", "3", "--fermion"]);
    assert!(out.status.success());
    let fermi = parse_profile(&stdout_of(&out));
    let out = run(&["profile", &full_file, "110100", "--t", "3"]);
    let dense = parse_profile(&stdout_of(&out));
    for (a, b) in fermi.iter().zip(&dense) {
        assert!((a - b).abs() < 1e-10);
    }

    // A non-simulable rule on the fermion path is a mode mismatch.
    let entry = &tables::PER_SIZE_FULL[1];
    let full = write_rule(
        dir.path(),
        "nonsim.json",
        RuleSpec::Full(tables::full_rule(entry.layer1, entry.layer2)),
    );
    let out = run(&["profile", &full, "110100", "--t", "3", "--fermion"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn search_writes_rule_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let rule_path = dir.path().join("best.json");
    let hist_path = dir.path().join("hist.csv");

    // --gens 0 → best of the random initial population.
    let out = run(&[
        "search", "--n", "4", "--t", "2", "--p", "1", "--pop", "40", "--gens", "0",
        "--seed", "3",
        "--out", rule_path.to_str().unwrap(),
        "--history-out", hist_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("gens       0"), "{text}");
    let saved = std::fs::read_to_string(&rule_path).unwrap();
    assert!(matches!(
        puqca::model::parse_rule(&saved).unwrap(),
        RuleSpec::Full(_)
    ));
    let hist = std::fs::read_to_string(&hist_path).unwrap();
    let mut lines = hist.lines();
    assert_eq!(lines.next(), Some("generation,best_fitness,mean_fitness"));
    assert_eq!(lines.count(), 1);

    // Same seed twice → identical outputs.
    let rule2 = dir.path().join("best2.json");
    let out = run(&[
        "search", "--n", "4", "--t", "2", "--p", "1", "--pop", "40", "--gens", "0",
        "--seed", "3", "--out", rule2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(saved, std::fs::read_to_string(&rule2).unwrap());

    // Small fermionic search that solves n = 4 from at least one seed.
    let fermi_rule = dir.path().join("fermi.json");
    let solved = ["1", "2", "3"].iter().any(|seed| {
        let out = run(&[
            "search", "--fermion", "--n", "4", "--t", "2", "--p", "1", "--pop", "60",
            "--gens", "40", "--seed", seed, "--out", fermi_rule.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        stdout_of(&out).contains("solved     true")
    });
    assert!(solved, "no seed in 1..=3 solved the 4-cell task");
    assert!(matches!(
        puqca::model::parse_rule(&std::fs::read_to_string(&fermi_rule).unwrap()).unwrap(),
        RuleSpec::Fermionic(_)
    ));

    // Multi-size flag parsing.
    let multi_rule = dir.path().join("multi.json");
    let out = run(&[
        "search", "--sizes", "4:2,6:3", "--pop", "20", "--gens", "0", "--seed", "2",
        "--out", multi_rule.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    // Bad config → usage error.
    let out = run(&["search", "--n", "4", "--t", "2", "--pop", "1", "--gens", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_tables_reports_and_exit_codes() {
    // The closed-form bound family passes under the default convention.
    let out = run(&["verify-tables", "--tables", "bound", "--csv", "-"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("all 7 rows match"), "{text}");
    assert!(text.contains("table,n,t,p,expected,computed,match,variant"), "{text}");
    assert!(text.contains("bound,4,0,0,"), "{text}");

    // The fermionic per-size family needs the periodic-grid variant.
    let out = run(&[
        "verify-tables", "--tables", "per-size-fermionic", "--conventions", "search",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("periodic"), "{text}");
    assert!(text.contains("all 6 rows match"), "{text}");

    // Same family without the convention search fails honestly.
    let out = run(&["verify-tables", "--tables", "per-size-fermionic"]);
    assert_eq!(out.status.code(), Some(1));

    // Unknown table id → usage error.
    let out = run(&["verify-tables", "--tables", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crosscheck_passes_and_rejects() {
    let out = run(&["crosscheck", "--n", "6", "--t", "3", "--trials", "20", "--seed", "1"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("pass"), "{text}");

    // t = 0 readback still goes through the momentum assembly.
    let out = run(&["crosscheck", "--n", "4", "--t", "0", "--trials", "5", "--seed", "1"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("pass"));

    // Dense side capped at n = 12.
    let out = run(&["crosscheck", "--n", "14", "--t", "2", "--trials", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));

    // Explicit non-simulable rule → mode mismatch.
    let dir = tempfile::tempdir().unwrap();
    let entry = &tables::PER_SIZE_FULL[0];
    let rule = write_rule(
        dir.path(),
        "full.json",
        RuleSpec::Full(tables::full_rule(entry.layer1, entry.layer2)),
    );
    let out = run(&[
        "crosscheck", "--n", "4", "--t", "2", "--trials", "1", "--seed", "1", "--rule", &rule,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn thread_cap_env_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["bound", "6"], &[("PUQCA_THREADS", "2")]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "0.727273");

    // Garbage value warns but does not fail.
    let out = run_in(dir.path(), &["bound", "6"], &[("PUQCA_THREADS", "soup")]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr.clone()).unwrap().contains("warning"));
}
