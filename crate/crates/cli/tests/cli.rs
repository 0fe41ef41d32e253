use std::fs;
use std::path::{Path, PathBuf};

use martingale_cli::app::{run, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, SHIPPED};

struct Run {
    code: u8,
    stdout: String,
    stderr: String,
}

fn mgale(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("mgale").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mgale-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn repo(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel).display().to_string()
}

#[test]
fn trivial_martingale_exits_zero() {
    let dir = scratch("trivial");
    let r = mgale(&["--out-dir", dir.to_str().unwrap(), "run", &repo("scenarios/constant_martingale.json")]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    assert!(r.stdout.contains("[PASS] 01 classify"));
    let summary = fs::read_to_string(dir.join("constant_martingale/summary.csv")).unwrap();
    assert!(summary.starts_with("index,check,holds,summary,csv\n1,classify,true,"));
}

#[test]
fn drifted_walk_fails_with_witness() {
    let dir = scratch("drift");
    let r = mgale(&["--out-dir", dir.to_str().unwrap(), "run", &repo("scenarios/drifted_walk.json")]);
    assert_eq!(r.code, EXIT_FAIL);
    // f_0 = 0 while μ[f_1 | ℱ_0] = 3/4 − 1/4 = 1/2 on every atom.
    assert!(r.stdout.contains("class=submartingale"), "{}", r.stdout);
    assert!(r.stdout.contains("witness (i=0, j=1, atom=0)"), "{}", r.stdout);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = scratch("config");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{\n  \"name\": \"broken\",\n  \"checks\": [\n    {\"check\": \"doob\",}\n  ]\n}\n").unwrap();
    let r = mgale(&["run", bad.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("line 4"), "{}", r.stderr);

    let exact_mc = dir.join("exact_mc.json");
    fs::write(
        &exact_mc,
        r#"{"name": "x", "checks": [{"check": "band_decay", "model": {"model": "fair_walk"}, "trials": 1, "horizon": 1, "band": [0, 1]}]}"#,
    )
    .unwrap();
    let r = mgale(&["run", exact_mc.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("cannot run in exact mode"));
    assert_eq!(mgale(&["--mode", "float", "--out-dir", dir.to_str().unwrap(), "run", exact_mc.to_str().unwrap()]).code, EXIT_PASS);

    let r = mgale(&["frobnicate"]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("Usage"), "{}", r.stderr);
    assert_eq!(mgale(&["run", dir.join("missing.json").to_str().unwrap()]).code, EXIT_CONFIG);
    assert_eq!(mgale(&["selftest", "--only", "14"]).code, EXIT_CONFIG);
    assert_eq!(mgale(&["bc"]).code, EXIT_CONFIG);
    assert_eq!(mgale(&["--help"]).code, EXIT_PASS);
}

#[test]
fn crossings_reproduce_figure_one() {
    let dir = scratch("figure");
    let r = mgale(&[
        "--out-dir",
        dir.to_str().unwrap(),
        "crossings",
        "--band",
        "0,1",
        "--path",
        &repo("data/figure1.json"),
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    assert!(r.stdout.contains("upcrossings=[2]"));
    let table = fs::read_to_string(dir.join("crossings/01_crossing_table.csv")).unwrap();
    let rows: Vec<(usize, usize)> = table
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<usize> = l.split(',').map(|c| c.parse().unwrap()).collect();
            (cells[2], cells[3])
        })
        .collect();
    assert_eq!(&rows[..4], &[(0, 1), (5, 7), (10, 11), (13, 13)]);
    assert!(rows[3..].iter().all(|&r| r == (13, 13)));
    // The built-in path is the same one.
    let other = scratch("figure-builtin");
    mgale(&["--out-dir", other.to_str().unwrap(), "crossings", "--band", "0,1"]);
    assert_eq!(fs::read(other.join("crossings/01_crossing_table.csv")).unwrap(), table.as_bytes());
    let r = mgale(&["crossings", "--band", "-1/2,1/2", "--path", &repo("data/figure1.json"), "--horizon", "20"]);
    assert_eq!(r.code, EXIT_CONFIG);
}

#[test]
fn bc_constant_half_matches() {
    let dir = scratch("bc");
    let r = mgale(&["--out-dir", dir.to_str().unwrap(), "bc", "--model", "independent", "--prob", "0.5", "--horizon", "200"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    let fraction: f64 = r
        .stdout
        .split("match_fraction=")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(fraction >= 0.999);
    let r = mgale(&["--out-dir", dir.to_str().unwrap(), "bc", "--schedule", "inverse-square", "--trials", "2000"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stdout);
}

#[test]
fn identical_runs_write_identical_csv() {
    let a = scratch("same-a");
    let b = scratch("same-b");
    let scenario = repo("scenarios/monte_carlo.json");
    let ra = mgale(&["--out-dir", a.to_str().unwrap(), "--seed", "9", "run", &scenario]);
    let rb = mgale(&["--out-dir", b.to_str().unwrap(), "--seed", "9", "--threads", "3", "run", &scenario]);
    assert_eq!(ra.stdout, rb.stdout);
    for entry in fs::read_dir(a.join("monte_carlo")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join("monte_carlo").join(&name)).unwrap(),
            fs::read(b.join("monte_carlo").join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn shipped_scenarios_behave_as_documented() {
    let dir = scratch("shipped");
    for (name, _, expected) in SHIPPED {
        let r = mgale(&["--out-dir", dir.to_str().unwrap(), "run", &repo(&format!("scenarios/{name}.json"))]);
        assert_eq!(r.code, *expected, "{name}: {}{}", r.stdout, r.stderr);
    }
}

#[test]
fn check_skips_monte_carlo_and_ui_runs_both_modes() {
    let dir = scratch("subcommands");
    let d = dir.to_str().unwrap();
    assert_eq!(mgale(&["--out-dir", d, "check", &repo("scenarios/monte_carlo.json")]).code, EXIT_CONFIG);
    assert_eq!(mgale(&["--out-dir", d, "check", &repo("scenarios/levy_four_atoms.json")]).code, EXIT_PASS);
    for mode in ["exact", "float"] {
        for kind in ["shrinking", "fixed-mass"] {
            let r = mgale(&["--out-dir", d, "--mode", mode, "ui", "--kind", kind, "--horizon", "16"]);
            assert_eq!(r.code, EXIT_PASS, "{mode} {kind}: {}", r.stdout);
        }
    }
    let r = mgale(&[
        "--out-dir", d, "converge", "--model", "polya", "--trials", "500", "--horizon", "2000", "--window", "200",
        "--tol", "0.05", "--min-fraction", "0.9", "--band", "0.2,0.8",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}{}", r.stdout, r.stderr);
}
