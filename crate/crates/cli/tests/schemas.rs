use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/schemas")
        .join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, instance: &Value, what: &str) {
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{what}: {errors:?}");
}

fn stdout_json(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_ricci-gnn"))
        .args(args)
        .output()
        .unwrap();
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn outputs_match_schemas() {
    let dir = TempDir::new().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let graph = stdout_json(&["generate", "--family", "barbell", "--k", "4", "--format", "json"]);
    assert_valid(&schema("graph.schema.json"), &graph, "graph");
    fs::write(path("bb.json"), graph.to_string()).unwrap();

    let curvature = stdout_json(&["curvature", &path("bb.json")]);
    assert_valid(&schema("curvature-report.schema.json"), &curvature, "curvature");

    let suite = schema("suite-report.schema.json");
    let report = stdout_json(&["verify", "--graph", &path("bb.json"), "--trials", "3", "--records"]);
    assert_valid(&suite, &report, "suite with records");
    let er = stdout_json(&[
        "generate",
        "--family",
        "erdos-renyi",
        "--n",
        "20",
        "--p",
        "0.3",
        "--seed",
        "16",
        "--format",
        "json",
    ]);
    fs::write(path("er.json"), er.to_string()).unwrap();
    let report = stdout_json(&["verify", "--graph", &path("er.json"), "--trials", "2"]);
    assert!(report["total_violations"].as_u64().unwrap() > 0);
    assert_valid(&suite, &report, "suite with violations");

    Command::new(env!("CARGO_BIN_EXE_ricci-gnn"))
        .args(["rewire", &path("bb.json"), "--tau-neg", "-0.3", "--tau-pos", "0.4"])
        .args(["--out-graph", &path("out.json"), "--out-trace", &path("trace.json")])
        .status()
        .unwrap();
    let trace: Value = serde_json::from_str(&fs::read_to_string(path("trace.json")).unwrap()).unwrap();
    assert!(!trace["steps"].as_array().unwrap().is_empty());
    assert_valid(&schema("rewire-trace.schema.json"), &trace, "trace");
    let rewired: Value = serde_json::from_str(&fs::read_to_string(path("out.json")).unwrap()).unwrap();
    assert_valid(&schema("graph.schema.json"), &rewired, "rewired graph");

    let simulation = stdout_json(&["simulate", "--demo-smoothing"]);
    assert_valid(&schema("simulation-report.schema.json"), &simulation, "simulation");
}

#[test]
fn spec_schema_accepts_library_specs() {
    use rand::SeedableRng;
    use ricci_gnn::mpnn::{Aggregator, LayerSpec, Mat, MpnnSpec, Update, UpdateMenu};

    let validator = schema("mpnn-spec.schema.json");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for aggregator in [Aggregator::Sum, Aggregator::Mean] {
        let spec = MpnnSpec::random(&mut rng, 8, 2, aggregator, UpdateMenu::Lipschitz);
        assert_valid(&validator, &serde_json::to_value(&spec).unwrap(), "random spec");
    }
    let gin = MpnnSpec::new(vec![LayerSpec::gin0(2, vec![Mat::identity(2)], 1.0)]);
    assert_valid(&validator, &serde_json::to_value(&gin).unwrap(), "gin");
    let leaky = MpnnSpec::new(vec![LayerSpec::gcn_mean(
        Mat::identity(1),
        Update::LeakyRelu { slope: 0.1 },
    )]);
    assert_valid(&validator, &serde_json::to_value(&leaky).unwrap(), "gcn");
    assert!(!validator.is_valid(
        &serde_json::json!({"layers": [{"aggregator": "max", "message": [[1]], "update": {"kind": "identity"}}]})
    ));
}
