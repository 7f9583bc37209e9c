//! End-to-end checks of the `bcs` binary: exit codes, output round-trips,
//! config-file merging, and sweep determinism.

use std::fmt::Write as _;
use std::process::{Command, Output};

fn bcs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bcs"))
}

fn run(args: &[&str]) -> Output {
    bcs().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Value of a `key = value` line.
fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|line| line.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing field {key} in:\n{text}"))
        .parse()
        .unwrap_or_else(|_| panic!("field {key} is not a number"))
}

/// Every floating-point `key = value` line must reproduce its bytes after
/// an f64 round trip, which is what 17 significant digits guarantee.
/// Counts are printed as plain integers and round-trip as such.
fn assert_round_trips(text: &str) {
    for line in text.lines() {
        let Some((_, value)) = line.split_once(" = ") else {
            continue;
        };
        if value.contains('e') {
            if let Ok(parsed) = value.parse::<f64>() {
                let mut reprinted = String::new();
                write!(reprinted, "{parsed:.16e}").unwrap();
                assert_eq!(reprinted, value, "field does not round-trip: {line}");
            }
        }
    }
}

const GAUSS: &[&str] = &[
    "-d",
    "1",
    "--mu",
    "1",
    "--potential",
    "gaussian:a=1,sigma=1",
];

#[test]
#[allow(clippy::excessive_precision)]
fn asym_is_reproducible_and_round_trips() {
    let args: Vec<&str> = ["asym"]
        .iter()
        .chain(GAUSS)
        .chain(["--lambda", "0.4"].iter())
        .copied()
        .collect();
    let first = run(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    let text = stdout(&first);
    assert_round_trips(&text);
    assert!((field(&text, "e_mu") - (-0.45293324691462073)).abs() < 1e-12);
    assert!((field(&text, "universal_ratio") - 1.7638769888620457).abs() < 1e-15);
    assert!(field(&text, "predicted_Xi") > field(&text, "predicted_Tc"));
}

#[test]
fn zero_coupling_exits_two_naming_the_module() {
    let out = run(&[
        "tc",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
        "--lambda",
        "0",
    ]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("no_transition"), "stderr: {err}");
    assert!(err.contains("critical_temperature"), "stderr: {err}");
    assert_eq!(err.trim_end().lines().count(), 1, "one diagnostic line");
}

#[test]
fn usage_problems_exit_one() {
    let bad_descriptor = run(&[
        "tc",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "lattice:q=2",
        "--lambda",
        "0.5",
    ]);
    assert_eq!(code(&bad_descriptor), 1);
    assert!(stderr(&bad_descriptor).contains("config_error"));

    let unknown_flag = run(&["tc", "--frobnicate"]);
    assert_eq!(code(&unknown_flag), 1);

    let missing = run(&[
        "tc",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
    ]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("--lambda"));

    let bad_format = run(&[
        "sweep",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
        "--lambdas",
        "0.5,0.4",
        "--format",
        "xml",
    ]);
    assert_eq!(code(&bad_format), 1);

    let bad_threads = bcs()
        .env("BCS_THREADS", "many")
        .args([
            "asym",
            "-d",
            "1",
            "--mu",
            "1",
            "--potential",
            "gaussian:a=1,sigma=1",
            "--lambda",
            "0.4",
        ])
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code().unwrap(), 1);
}

#[test]
fn help_exits_zero_and_names_units() {
    let top = run(&["--help"]);
    assert_eq!(code(&top), 0);
    assert!(stdout(&top).contains("BCS_THREADS"));

    for sub in ["validate", "tc", "gap", "asym", "sweep"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub} --help");
        let text = stdout(&out);
        assert!(text.contains("(energy)"), "{sub} help lacks units:\n{text}");
        assert!(text.contains("--potential"));
    }
}

#[test]
fn validate_prints_the_assumption_report() {
    let out = run(&[
        "validate",
        "-d",
        "2",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_round_trips(&text);
    assert!(text.contains("tc_eligible = true"));
    assert!(text.contains("gap_eligible = true"));
    assert!(field(&text, "vhat_zero") < 0.0);
}

#[test]
fn tabulated_potentials_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("attractive.tbl");
    let mut body = String::from("# radius  value\n");
    let mut r = 0.0f64;
    while r <= 8.0 {
        writeln!(body, "{r:.3} {:.12e}", -(-r * r / 2.0).exp()).unwrap();
        r += 0.02;
    }
    std::fs::write(&table, body).unwrap();

    let descriptor = format!("table:{}", table.display());
    let out = run(&[
        "validate",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        &descriptor,
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("tc_eligible = true"));

    let missing = run(&[
        "validate",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "table:/no/such/file",
    ]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn gap_converges_and_reports_iterations() {
    let out = bcs()
        .env("BCS_THREADS", "2")
        .args([
            "gap",
            "-d",
            "1",
            "--mu",
            "1",
            "--potential",
            "gaussian:a=1,sigma=1",
            "--lambda",
            "0.5",
            "--points-per-panel",
            "8",
            "--s-min",
            "5e-3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code().unwrap(), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert_round_trips(&text);
    let xi = field(&text, "Xi");
    let delta_fermi = field(&text, "Delta_fermi");
    assert!(xi > 0.0 && xi <= delta_fermi * (1.0 + 1e-12));
    assert!(field(&text, "residual") <= 1e-10);
    let iterations: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("iterations = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(iterations >= 1);
}

#[test]
fn tc_solution_lies_inside_its_bracket() {
    let out = run(&[
        "tc",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
        "--lambda",
        "0.5",
        "--points-per-panel",
        "8",
        "--s-min",
        "5e-3",
        "--rtol",
        "1e-7",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert_round_trips(&text);
    let tc = field(&text, "Tc");
    let lo = field(&text, "bracket_lo");
    let hi = field(&text, "bracket_hi");
    assert!(lo <= tc && tc <= hi);
    assert!((hi - lo) / tc <= 2e-7);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "# ladder defaults\ndimension = 1\nmu = 1.0\npotential = gaussian:a=1,sigma=1\nlambda = 0.4\nmode-cutoff = 16\n",
    )
    .unwrap();
    let cfg = config.to_str().unwrap();

    let from_file = run(&["asym", "--config", cfg]);
    assert_eq!(code(&from_file), 0, "stderr: {}", stderr(&from_file));
    let flags = run(&[
        "asym",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
        "--lambda",
        "0.4",
    ]);
    assert_eq!(
        field(&stdout(&from_file), "b_mu"),
        field(&stdout(&flags), "b_mu")
    );

    let overridden = run(&["asym", "--config", cfg, "--lambda", "0.3"]);
    assert_eq!(code(&overridden), 0);
    assert_ne!(
        field(&stdout(&overridden), "b_mu"),
        field(&stdout(&from_file), "b_mu"),
        "explicit flag must override the config file"
    );

    let garbled = dir.path().join("bad.cfg");
    std::fs::write(&garbled, "mu 1.0\n").unwrap();
    let bad = run(&["asym", "--config", garbled.to_str().unwrap()]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn sweep_writes_deterministic_files_and_a_plot() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("run1.csv");
    let second = dir.path().join("run2.csv");
    let base = [
        "sweep",
        "-d",
        "1",
        "--mu",
        "1",
        "--potential",
        "gaussian:a=1,sigma=1",
        "--lambdas",
        "0.5,0.45",
        "--points-per-panel",
        "8",
        "--tc-rtol",
        "1e-7",
        "--gap-rtol",
        "1e-9",
    ];
    for (path, plot) in [(&first, true), (&second, false)] {
        let mut args: Vec<&str> = base.to_vec();
        args.extend(["--output", path.to_str().unwrap()]);
        if plot {
            args.push("--plot");
        }
        let out = run(&args);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        let log = stderr(&out);
        assert_eq!(log.lines().count(), 2, "one log line per record: {log}");
        assert!(log.contains("status = ok"));
    }
    let csv1 = std::fs::read(&first).unwrap();
    let csv2 = std::fs::read(&second).unwrap();
    assert_eq!(csv1, csv2, "repeated sweeps must be byte-identical");
    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with("lambda,Tc,Xi,Delta_fermi,e_mu,b_mu,"));
    assert_eq!(text.lines().count(), 3);

    let svg = std::fs::read_to_string(dir.path().join("run1.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let json_out = bcs()
        .args(base)
        .args(["--format", "json"])
        .output()
        .unwrap();
    assert_eq!(json_out.status.code().unwrap(), 0);
    let json = String::from_utf8(json_out.stdout).unwrap();
    assert!(json.trim_start().starts_with('['));
    assert!(json.contains("\"status\": \"ok\""));

    let plot_without_output = bcs().args(base).arg("--plot").output().unwrap();
    assert_eq!(plot_without_output.status.code().unwrap(), 1);
}
