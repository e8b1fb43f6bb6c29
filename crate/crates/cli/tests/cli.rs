//! End-to-end tests of the `breadwinner` binary: flag coverage, error
//! paths, output schemas, and byte-level reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_breadwinner"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

/// A config equivalent to the defaults, as a file the tests can extend.
fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.config");
    fs::write(&path, body).unwrap();
    path
}

fn sha256_file(path: &Path) -> [u8; 32] {
    let bytes = fs::read(path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    Sha256::digest(&bytes).into()
}

#[test]
fn help_documents_every_flag_and_subcommand() {
    let top = run(&["--help"]);
    assert!(top.status.success());
    let text = stdout(&top);
    for sub in ["simulate", "calibrate", "counterfactual", "sweep", "regional"] {
        assert!(text.contains(sub), "top-level help lacks `{sub}`:\n{text}");
    }
    for sub in ["simulate", "calibrate", "counterfactual", "sweep", "regional"] {
        let out = run(&[sub, "--help"]);
        assert!(out.status.success());
        let text = stdout(&out);
        for flag in [
            "--config",
            "--out",
            "--seed",
            "--n",
            "--scenario",
            "--delta-grid",
            "--prefecture-data",
            "--threads",
        ] {
            assert!(text.contains(flag), "`{sub} --help` lacks `{flag}`:\n{text}");
        }
    }
}

#[test]
fn tiny_simulate_run_completes_quickly_with_all_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "");
    let out_dir = tmp.path().join("out");
    let started = Instant::now();
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "100",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    for table in [
        "moments.csv",
        "occupation_matrix.csv",
        "hours.csv",
        "gaps.csv",
        "relative_earnings.csv",
    ] {
        let path = out_dir.join(table);
        assert!(path.is_file(), "missing {}", path.display());
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().count() >= 2, "{table} is empty");
    }
}

#[test]
fn missing_config_file_fails_naming_the_path() {
    let out = run(&["simulate", "--config", "/definitely/not/here.config"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("/definitely/not/here.config"), "{err}");
}

#[test]
fn unknown_config_key_fails_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[population]\nn = 50\ncouples = 10\n");
    let out = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("couples"), "{err}");
    assert!(err.contains("run.config"), "{err}");
}

#[test]
fn unknown_target_statistic_fails_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("targets.txt"), "share_r_male = 0.9\nbogus_moment = 1\n").unwrap();
    let config = write_config(
        tmp.path(),
        "[population]\nn = 50\n[calibration]\ntargets = \"targets.txt\"\nn_sim = 50\nstarts = 1\nmax_evals_per_start = 1\n",
    );
    let out = run(&["calibrate", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("bogus_moment"), "{}", stderr(&out));
}

#[test]
fn unknown_scenario_name_is_rejected() {
    let out = run(&["counterfactual", "--scenario", "premium"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("premium"), "{}", stderr(&out));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[population]\nn = 2000\nseed = 777\n");
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for dir in &dirs {
        let out = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    for table in [
        "moments.csv",
        "occupation_matrix.csv",
        "hours.csv",
        "gaps.csv",
        "relative_earnings.csv",
    ] {
        assert_eq!(
            sha256_file(&dirs[0].join(table)),
            sha256_file(&dirs[1].join(table)),
            "{table} differs between identical runs"
        );
    }
}

#[test]
fn counterfactual_writes_per_scenario_tables_and_panels() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[population]\nn = 400\n");
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "counterfactual",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for scenario in ["baseline", "flexible", "outsourcing"] {
        for prefix in ["occupation_matrix", "hours", "gaps"] {
            assert!(out_dir.join(format!("{prefix}_{scenario}.csv")).is_file());
        }
    }
    let panels = fs::read_to_string(out_dir.join("occupation_panels.csv")).unwrap();
    assert_eq!(panels.lines().count(), 10, "{panels}");
    assert!(panels.starts_with("scenario,husband,wife_r,wife_nr,wife_nw\n"));

    // Restricting to one scenario shrinks the panel table accordingly.
    let one_dir = tmp.path().join("one");
    let out = run(&[
        "counterfactual",
        "--config",
        config.to_str().unwrap(),
        "--scenario",
        "flexible",
        "--out",
        one_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let panels = fs::read_to_string(one_dir.join("occupation_panels.csv")).unwrap();
    assert_eq!(panels.lines().count(), 4, "{panels}");
    assert!(!one_dir.join("gaps_baseline.csv").exists());
}

#[test]
fn sweep_respects_the_delta_grid_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[population]\nn = 200\n");
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--delta-grid",
        "0:0.8:3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let sweep = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "scenario,delta,gap,value");
    // 3 scenarios x 3 penalty levels x 4 gaps.
    assert_eq!(lines.len(), 1 + 36, "{sweep}");
    let deltas: std::collections::BTreeSet<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(deltas.into_iter().collect::<Vec<_>>(), vec!["0", "0.4", "0.8"]);

    let bad = run(&["sweep", "--config", config.to_str().unwrap(), "--delta-grid", "0:1"]);
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("start:stop:points"), "{}", stderr(&bad));
}

#[test]
fn regional_runs_on_the_bundled_prefecture_data() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[population]\nn = 300\n");
    let out_dir = tmp.path().join("out");
    let data = repo_file("data/prefectures_synthetic.csv");
    let out = run(&[
        "regional",
        "--config",
        config.to_str().unwrap(),
        "--prefecture-data",
        data.to_str().unwrap(),
        "--delta-grid",
        "0:1.58:5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for table in [
        "bridge.csv",
        "level_offsets.csv",
        "regional_curve.csv",
        "regional_comparison.csv",
        "regional_rms.csv",
    ] {
        assert!(out_dir.join(table).is_file(), "missing {table}");
    }
    let curve = fs::read_to_string(out_dir.join("regional_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 6);
    // The grid midpoint is the calibrated penalty, where the adjusted
    // curve reproduces the national gaps by construction.
    let at_hat = curve
        .lines()
        .find(|l| l.starts_with("0.79,"))
        .expect("curve row at the calibrated penalty");
    let gaps: Vec<&str> = at_hat.split(',').skip(2).collect();
    assert_eq!(gaps, vec!["0.16", "0.53", "0.49", "0.76"]);

    // Without data from either flag or config the command refuses.
    let none = run(&["regional", "--config", config.to_str().unwrap()]);
    assert!(!none.status.success());
    assert!(stderr(&none).contains("prefecture"), "{}", stderr(&none));
}

#[test]
fn calibration_resume_reproduces_the_written_objective() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "[population]\nn = 150\nseed = 9\n[calibration]\nn_sim = 120\nstarts = 1\nmax_evals_per_start = 25\n",
    );
    let first = tmp.path().join("first");
    let out = run(&[
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let summary = fs::read_to_string(first.join("summary.csv")).unwrap();
    let written_objective = summary
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_string();

    // Restart from the written parameter file: the first objective
    // evaluation must reproduce the reported value exactly.
    let params_file = first.join("params.csv");
    let resume_config = write_config(
        &tmp.path().join("."),
        &format!(
            "[parameters]\nfile = \"{}\"\n[population]\nn = 150\nseed = 9\n[calibration]\nn_sim = 120\nstarts = 1\nmax_evals_per_start = 1\n",
            params_file.display()
        ),
    );
    let second = tmp.path().join("second");
    let out = run(&[
        "calibrate",
        "--config",
        resume_config.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let trace = fs::read_to_string(second.join("trace.csv")).unwrap();
    let first_eval = trace.lines().nth(1).unwrap();
    assert_eq!(
        first_eval.split(',').nth(1).unwrap(),
        written_objective,
        "trace: {trace}\nsummary: {summary}"
    );
}
