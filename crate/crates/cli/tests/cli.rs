use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sgrowth(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgrowth"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn example_under_both_rules() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgrowth(&["simulate", "--example-1-2", "--rule", "exposure"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vertex 2 paralyzed at t=5 by vertex 5"), "{}", stdout(&o));

    let o = sgrowth(&["simulate", "--example-1-2", "--rule", "contiguous"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vertex 2 paralyzed at t=6 by vertex 1"), "{}", stdout(&o));

    let last = read_json(&dir.path().join("final.json"));
    assert_eq!(last["initial"], "RGWGR");
    assert_eq!(last["colours"], "RRRRR");
    assert_eq!(last["time"], 6.0);
    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert!(trace.lines().all(|l| serde_json::from_str::<Value>(l).is_ok()));
}

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["simulate", "--lattice", "square", "--n", "8", "--pw", "0", "--pr", "0.2", "--seed", "7"];
    assert_eq!(sgrowth(&args, a.path()).status.code(), Some(0));
    assert_eq!(sgrowth(&args, b.path()).status.code(), Some(0));
    for f in ["trace.jsonl", "final.json", "manifest.json"] {
        let (x, y) = (a.path().join(f), b.path().join(f));
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{f}");
    }
    let other = tempfile::tempdir().unwrap();
    let mut args = args.to_vec();
    *args.last_mut().unwrap() = "8";
    sgrowth(&args, other.path());
    assert_ne!(
        std::fs::read(a.path().join("trace.jsonl")).unwrap(),
        std::fs::read(other.path().join("trace.jsonl")).unwrap()
    );
}

#[test]
fn autonomous_without_white_matches_stopped_invasion() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "3", "5"] {
        let o = sgrowth(
            &["autonomous", "--n", "20", "--pw", "0", "--pr", "0.2", "--seed", seed, "--extensions", "5"],
            dir.path(),
        );
        let text = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{text}");
        assert!(text.contains("reduces to stopped invasion"), "{text}");
        assert!(text.contains("condition (D-1)·ξ(p_w) < p_r"), "{text}");
        if text.contains("stopped invasion: τ*") {
            assert!(text.contains("both paths agree"), "{text}");
        }
    }
    for f in ["autonomous.json", "steps.jsonl", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn autonomous_from_a_red_vertex_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgrowth(&["autonomous", "--example-1-2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let h = read_json(&dir.path().join("autonomous.json"));
    assert_eq!(h["h_vertices"], serde_json::json!([0]));
    assert_eq!(h["external"], serde_json::json!([]));
}

#[test]
fn exhausted_budget_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgrowth(
        &["autonomous", "--n", "30", "--pw", "0.3", "--pr", "0.05", "--step-budget", "5", "--xi-replicates", "100"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let log = std::fs::read_to_string(dir.path().join("steps.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 5);
}

#[test]
fn verify_passes_and_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["verify", "--cases", "60", "--seed", "3"];
    let first = sgrowth(&args, a.path());
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let mut serial = vec!["--jobs", "1"];
    serial.extend(args);
    let second = sgrowth(&serial, b.path());
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn injected_faults_are_reported() {
    for (fault, suite) in [
        ("perturb-t1", "stopped-invasion"),
        ("flat-paralysis-time", "algorithm"),
        ("drop-external-edge", "autonomy"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let o = sgrowth(
            &["verify", "--suite", suite, "--cases", "100", "--seed", "3", "--fault", fault],
            dir.path(),
        );
        let text = stdout(&o);
        assert_eq!(o.status.code(), Some(1), "{fault}: {text}");
        assert!(text.contains("DIVERGENCE"), "{text}");
        let snapshot = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .find(|p| p.extension().is_some_and(|x| x == "snapshot"))
            .expect("failing instance dumped");
        let text = std::fs::read_to_string(snapshot).unwrap();
        assert!(spatial_growth::sampling::read_snapshot(&text).is_ok());
    }
}

#[test]
fn tails_check_the_geometric_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgrowth(
        &["tails", "--pw", "0", "--pr", "0.2", "--n", "30", "--replicates", "4000", "--n-grid", "1..12"],
        dir.path(),
    );
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("geometric law") && text.contains("PASS"), "{text}");
    let steps = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    assert_eq!(steps.lines().count(), 13);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config"]["p_r"], 0.2);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn xi_reports_an_interval_and_flags_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgrowth(&["xi", "--p", "0.01", "--n", "6", "--replicates", "20000"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&dir.path().join("manifest.json"));
    let mean = m["results"]["mean"].as_f64().unwrap();
    assert!((mean - 0.0104).abs() < 0.003, "{mean}");
    assert!(stdout(&o).contains("95% CI"));

    let o = sgrowth(&["xi", "--p", "0.55", "--n", "3", "--replicates", "500"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ponds_write_the_comparison_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgrowth(
        &["ponds", "--n", "24", "--samples", "150", "--conn-samples", "5000", "--grid", "2,4,8", "--max-censored", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("ponds.csv")).unwrap();
    assert!(table.starts_with("n,pond,pond_se,critical,critical_se,passes\n"));
    assert_eq!(table.lines().count(), 4);
    assert!(stdout(&o).contains("censored samples"));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "# example under the contiguous rule\ncommand = simulate\nexample_1_2 = true\nrule = contiguous\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_sgrowth"))
            .arg("--config")
            .arg(&cfg)
            .args(extra)
            .output()
            .unwrap()
    };
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vertex 2 paralyzed at t=6 by vertex 1"));
    let o = run(&["simulate", "--rule", "exposure"]);
    assert!(stdout(&o).contains("vertex 2 paralyzed at t=5 by vertex 5"), "command line wins");

    std::fs::write(&cfg, "command = simulate\nbogus = 1\n").unwrap();
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn invalid_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--pr", "1.5"][..],
        &["simulate", "--no-such-flag"],
        &["simulate", "--lattice", "pentagonal"],
        &["tails", "--n-grid", "5,3"],
        &["simulate", "--example-1-2", "--periodic"],
    ] {
        let o = sgrowth(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}
