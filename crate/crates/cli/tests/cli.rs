use std::path::{Path, PathBuf};
use std::process::Command;

use ccfusion::instance::{AnyInstance, InstanceFile};
use ccfusion::Tolerances;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}):\n{}\n{}", self.stdout, self.stderr))
    }
}

fn ccfusion(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ccfusion")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn load(path: &Path) -> AnyInstance {
    let text = std::fs::read_to_string(path).unwrap();
    InstanceFile::from_json(&text).unwrap().load(&Tolerances::default()).unwrap()
}

fn generate(dir: &Path, args: &[&str]) -> Run {
    let out = dir.display().to_string();
    let mut all = vec!["generate", "--out", out.as_str(), "--output", "json"];
    all.extend_from_slice(args);
    ccfusion(&all)
}

#[test]
fn bounds_of_the_example() {
    let run = ccfusion(&["bounds", &fixture("r3_example.json"), "--output", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = &run.json()["results"][0]["report"];
    assert!((r["bounds"]["lower"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert!((r["bounds"]["upper"].as_f64().unwrap() - 4.0).abs() <= 1e-10);
    assert_eq!(r["classification"], "frame");
    assert!(r["hermitian_residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn bounds_of_parseval_and_deficient() {
    let run = ccfusion(&["bounds", &fixture("parseval.json"), "--output", "json"]);
    assert_eq!(run.code, 0);
    let r = &run.json()["results"][0]["report"];
    assert_eq!(r["classification"], "parseval");
    assert!((r["bounds"]["lower"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((r["bounds"]["upper"].as_f64().unwrap() - 1.0).abs() <= 1e-12);

    let run = ccfusion(&["bounds", &fixture("deficient.json"), "--output", "json"]);
    assert_eq!(run.code, 2);
    let r = &run.json()["results"][0]["report"];
    assert!(r["bounds"]["lower"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(r["classification"], "bessel_only");
}

#[test]
fn text_output_lists_bounds() {
    let run = ccfusion(&["bounds", &fixture("r3_example.json")]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("classification frame"));
    assert!(run.stdout.contains("  B = 4"));
    assert!(run.stdout.starts_with("input "));
}

#[test]
fn classify_reports_the_gate_failure() {
    let run = ccfusion(&["classify", &fixture("r3_example.json"), "--output", "json"]);
    assert_eq!(run.code, 0);
    let r = &run.json()["results"][0];
    assert_eq!(r["sqrt_gate_passed"], false);
    assert_eq!(r["sqrt_gate_failures"][0]["index"], 1);
    assert_eq!(r["classification"], "frame");
}

#[test]
fn reconstruct_examples() {
    let run = ccfusion(&["reconstruct", &fixture("r3_example.json"), "--vector", "[1, 0, 0]", "--output", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.json()["results"][0]["relative_error"].as_f64().unwrap() <= 1e-9);

    let run = ccfusion(&["reconstruct", &fixture("parseval.json"), "--random", "--seed", "9", "--output", "json"]);
    assert_eq!(run.code, 0);
    let r = &run.json()["results"][0];
    assert!(r["relative_error"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["seed"], 9);

    let run = ccfusion(&["reconstruct", &fixture("deficient.json"), "--random"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("not a frame"), "{}", run.stderr);
}

#[test]
fn reconstruct_rejects_bad_vectors() {
    let run = ccfusion(&["reconstruct", &fixture("r3_example.json"), "--vector", "[1, 0]"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("dimension mismatch"));
    let run = ccfusion(&["reconstruct", &fixture("r3_example.json"), "--vector", "[[1, 2], 0, 0]"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("vector[0]"), "{}", run.stderr);
    let run = ccfusion(&["reconstruct", &fixture("r3_example.json")]);
    assert_eq!(run.code, 1);
}

#[test]
fn subspace_perturbation_with_z_equal_w() {
    let run = ccfusion(&["verify", &fixture("unperturbed.json"), "--theorem", "subspace-perturbation", "--output", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let o = &run.json()["results"][0]["outcomes"][0];
    assert_eq!(o["status"], "checked");
    assert_eq!(o["report"]["hypothesis_satisfied"], true);
    assert_eq!(o["report"]["containment_ok"], true);
    assert_eq!(o["report"]["diagnostics"]["epsilon_eff"], 0.0);
}

#[test]
fn q_dual_on_a_rank_deficient_frame() {
    let run = ccfusion(&["verify", &fixture("deficient.json"), "--theorem", "q-dual", "--output", "json"]);
    assert_eq!(run.code, 1);
    let o = &run.json()["results"][0]["outcomes"][0];
    assert_eq!(o["status"], "error");
    assert!(o["reason"].as_str().unwrap().contains("not surjective"));
    assert!(run.stderr.contains("not surjective"));
}

#[test]
fn qdual_needs_a_second_frame() {
    let run = ccfusion(&["qdual", &fixture("r3_example.json")]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("missing input: `second`"), "{}", run.stderr);
    let run = ccfusion(&["verify", &fixture("r3_example.json"), "--theorem", "lambda-perturbation"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("missing input: `second`"), "{}", run.stderr);
}

#[test]
fn qdual_command_reports_q() {
    let run = ccfusion(&["qdual", &fixture("unperturbed.json"), "--output", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = &run.json()["results"][0];
    assert_eq!(r["q_rows"], 9);
    assert_eq!(r["q_cols"], 9);
    assert!(r["defect"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["report"]["containment_ok"], true);
}

#[test]
fn perturb_runs_both_checks() {
    let run = ccfusion(&["perturb", &fixture("unperturbed.json"), "--output", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let outcomes = run.json()["results"][0]["outcomes"].as_array().unwrap().clone();
    let names: Vec<&str> = outcomes.iter().map(|o| o["theorem"].as_str().unwrap()).collect();
    assert_eq!(names, ["subspace-perturbation", "lambda-perturbation"]);
    assert!(outcomes.iter().all(|o| o["report"]["containment_ok"] == true));
}

#[test]
fn verify_all_on_generated_instances() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), &["--dim", "2-8", "--count", "100", "--seed", "42", "--constraint", "gate-passing"]);
    assert_eq!(gen.code, 0, "{}", gen.stderr);
    let run = ccfusion(&["verify", &dir.path().display().to_string(), "--all", "--output", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.json();
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 100);
    let mut checked = 0;
    for body in results {
        for o in body["outcomes"].as_array().unwrap() {
            if o["status"] == "checked" {
                checked += 1;
                let r = &o["report"];
                assert!(r["hypothesis_satisfied"] == false || r["containment_ok"] == true, "{o}");
            }
        }
        // every gated instance supports these two
        let by = |name: &str| body["outcomes"].as_array().unwrap().iter().find(|o| o["theorem"] == name).unwrap().clone();
        assert_eq!(by("factorization")["status"], "checked");
        assert_eq!(by("transform-adjoint")["report"]["hypothesis_satisfied"], true);
    }
    assert!(checked >= 500);
}

#[test]
fn verify_all_on_complex_instances() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), &["--dim", "2-5", "--count", "10", "--seed", "3", "--field", "complex", "--constraint", "same-controls"]);
    assert_eq!(gen.code, 0, "{}", gen.stderr);
    let run = ccfusion(&["verify", &dir.path().display().to_string(), "--all"]);
    assert_eq!(run.code, 0, "{}\n{}", run.stdout, run.stderr);
    assert!(!run.stdout.contains("containment FAILED"));
}

#[test]
fn generation_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--dim", "2-6", "--count", "100", "--seed", "11"];
    assert_eq!(generate(a.path(), &args).code, 0);
    assert_eq!(generate(b.path(), &args).code, 0);
    let (fa, fb) = (json_files(a.path()), json_files(b.path()));
    assert_eq!(fa.len(), 100);
    let mut contents = std::collections::BTreeSet::new();
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        let bytes = std::fs::read(x).unwrap();
        assert_eq!(bytes, std::fs::read(y).unwrap());
        contents.insert(bytes);
    }
    assert_eq!(contents.len(), 100);
}

#[test]
fn generated_files_round_trip() {
    let tol = Tolerances::default();
    for field in ["real", "complex"] {
        for constraint in ["none", "same-controls", "identity-controls", "gate-passing"] {
            let dir = tempfile::tempdir().unwrap();
            let run = generate(dir.path(), &["--dim", "2-5", "--count", "3", "--seed", "5", "--field", field, "--constraint", constraint]);
            assert_eq!(run.code, 0, "{}", run.stderr);
            for path in json_files(dir.path()) {
                let text = std::fs::read_to_string(&path).unwrap();
                let file = InstanceFile::from_json(&text).unwrap();
                assert!(file.load(&tol).is_ok(), "{}", path.display());
                assert_eq!(file.to_json(), text);
            }
        }
    }
}

#[test]
fn identity_controls_match_fusion_bounds() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate(dir.path(), &["--dim", "3", "--seed", "42", "--constraint", "identity-controls"]).code, 0);
    let AnyInstance::Real(inst) = load(&json_files(dir.path())[0]) else { panic!("expected real") };
    let controlled = inst.frame.bounds(&Tolerances::default()).bounds;
    let fusion = inst.frame.family().fusion_bounds();
    assert!((controlled.lower - fusion.lower).abs() <= 1e-12);
    assert!((controlled.upper - fusion.upper).abs() <= 1e-12);
}

#[test]
fn gate_passing_generation_passes_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate(dir.path(), &["--dim", "8", "--seed", "7", "--constraint", "gate-passing"]).code, 0);
    let path = json_files(dir.path())[0].display().to_string();
    let run = ccfusion(&["classify", &path, "--output", "json"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json()["results"][0]["sqrt_gate_passed"], true);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate(dir.path(), &["--dim", "3-6", "--count", "3", "--seed", "8", "--constraint", "same-controls"]).code, 0);
    let target = dir.path().display().to_string();
    let args = ["verify", target.as_str(), "--all", "--seed", "4", "--samples", "200", "--output", "json"];
    let first = without_timing(ccfusion(&args).json());
    let second = without_timing(ccfusion(&args).json());
    assert_eq!(first, second);
    assert_eq!(first["results"][0]["samples"], 200);
    assert_eq!(first["results"][0]["seed"], 4);
    assert!(first["rng"].as_str().unwrap().starts_with("ChaCha20"));
}

#[test]
fn tolerance_overrides_are_recorded() {
    let run = ccfusion(&["bounds", &fixture("parseval.json"), "--tol", "containment=1e-6", "--output", "json"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json()["tolerances"]["containment"], 1e-6);
    let run = ccfusion(&["bounds", &fixture("parseval.json"), "--tol", "nope=1"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("unknown tolerance"));
}

#[test]
fn usage_and_parse_errors_exit_one() {
    assert_eq!(ccfusion(&["frobnicate"]).code, 1);
    assert_eq!(ccfusion(&["verify", &fixture("parseval.json")]).code, 1);
    let dir = tempfile::tempdir().unwrap();
    let run = generate(dir.path(), &["--dim", "65"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("invalid range"));
    assert_eq!(generate(dir.path(), &["--dim", "3", "--count", "0"]).code, 1);

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"version\": 1,\n  \"field\": \"real\",\n  oops\n}\n").unwrap();
    let run = ccfusion(&["bounds", &broken.display().to_string()]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("line 4"), "{}", run.stderr);

    let text = std::fs::read_to_string(fixture("r3_example.json")).unwrap();
    let bad = dir.path().join("bad_weight.json");
    std::fs::write(&bad, text.replacen("\"weight\": 1", "\"weight\": 0", 1)).unwrap();
    let run = ccfusion(&["bounds", &bad.display().to_string()]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("subspaces[0].weight"), "{}", run.stderr);
    assert_eq!(ccfusion(&["bounds", "/nonexistent/instance.json"]).code, 1);
}

#[test]
fn help_exits_zero() {
    let run = ccfusion(&["--help"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("verify"));
}
