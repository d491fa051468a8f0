//! Serialized outputs of the worked example, compared byte for byte.
//! Set `UPDATE_GOLDEN=1` to rewrite the files after an intended change.

use std::path::PathBuf;

use spatial_growth::autonomous::{run_algorithm, AlgoOptions};
use spatial_growth::fixtures::example_1_2;
use spatial_growth::{simulate, Rule, SimOptions};

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} changed");
}

#[test]
fn example_traces() {
    let (g, c, w) = example_1_2::<f64>();
    for (rule, name) in [
        (Rule::GreenExposure, "example_1_2_exposure.jsonl"),
        (Rule::ContiguousGreen, "example_1_2_contiguous.jsonl"),
    ] {
        let trace = simulate(&g, &c, &w, SimOptions::with_rule(rule)).unwrap();
        check(name, &trace.to_jsonl(&g));
    }
}

#[test]
fn example_exploration_log() {
    let (g, c, w) = example_1_2::<f64>();
    let run = run_algorithm(&g, &c, &w, 1, &AlgoOptions::default()).unwrap();
    check("example_1_2_autonomous.jsonl", &run.log_jsonl());
    let result = serde_json::to_string_pretty(&run.result().unwrap().to_json()).unwrap() + "\n";
    check("example_1_2_autonomous.json", &result);
}
