use std::process::{Command, Output};

use serde_json::Value;
use sl2tree::sl2::Mat2;
use sl2tree::valued_field::Field;

const ONE_ITER_A: &str = "[[7,6],[-1/7,1/49]]";
const ONE_ITER_B: &str = "[[2/7^4,7^3],[1/7^3,7^4]]";

fn sl2tree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl2tree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn counterexample() -> (String, String) {
    let f = Field::Qp(7);
    let x = Mat2::parse(f, "[[7^3,0],[0,1/7^3]]").unwrap();
    let y = Mat2::parse(f, "[[2/7^7,7^3],[1/7^3,7^7]]").unwrap();
    (x.mul(&y).to_string(), x.pow(3).mul(&y.pow(3)).to_string())
}

#[test]
fn decide_reports_one_iteration() {
    let r = json(&sl2tree(&["decide", "--field", "qp:7", "--A", ONE_ITER_A, "--B", ONE_ITER_B]));
    assert_eq!(r["discrete_free"], true);
    assert_eq!(r["iterations"], 1);
    assert_eq!(r["trace"][0]["lxinvy"], 12);
    assert!(r["certificate"]["anchor"].is_object());
}

#[test]
fn reports_are_byte_identical() {
    let args = ["decide", "--field", "qp:5", "--A", "[[5^3,0],[0,1/5^3]]", "--B", "[[2/5^10,5^3],[1/5^3,5^10]]"];
    let (first, second) = (sl2tree(&args), sl2tree(&args));
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn elliptic_translation_length() {
    let r = json(&sl2tree(&["tl", "--field", "qp:5", "--A", "[[1,5],[0,1]]"]));
    assert_eq!(r["translation_length"], 0);
    assert_eq!(r["hyperbolic"], false);
    let r = json(&sl2tree(&["decide", "--field", "qp:5", "--A", "[[1,5],[0,1]]", "--B", "[[1,0],[5,1]]"]));
    assert_eq!(r["discrete_free"], false);
    assert_eq!(r["witness_kind"], "elliptic_generator");
}

#[test]
fn overlap_on_counterexample() {
    let (a, b) = counterexample();
    let r = json(&sl2tree(&["overlap", "--field", "qp:7", "--A", &a, "--B", &b]));
    assert_eq!(r["min_product_length"], 16);
    assert_eq!(r["lengths"]["a"], 8);
    assert_eq!(r["lengths"]["b"], 32);
    assert_eq!(r["from_lengths"]["case"], "ambiguous");
    assert_eq!(r["geometry"]["length"], 8);
    assert_eq!(r["geometry"]["secondary_overlap"], 4);
}

#[test]
fn membership_recovers_words() {
    let r = json(&sl2tree(&["membership", "--A", ONE_ITER_A, "--B", ONE_ITER_B, "--words", "a b A A b"]));
    assert_eq!(r["member"], true);
    assert_eq!(r["word"], "abAAb");
    let r = json(&sl2tree(&["membership", "--A", ONE_ITER_A, "--B", ONE_ITER_B, "--C", "[[-1,0],[0,-1]]"]));
    assert_eq!(r["member"], false);
}

#[test]
fn truncated_backend_reports_precision() {
    let r = json(&sl2tree(&[
        "decide", "--field", "qp:3", "--precision", "0", "--A", "[[3^3,0],[0,1/3^3]]", "--B",
        "[[2/3^7,3^3],[1/3^3,3^7]]",
    ]));
    assert_eq!(r["backend"], "truncated");
    assert!(r["precision"]["restarts"].as_u64().unwrap() > 0);
    assert_eq!(r["discrete_free"], true);
}

#[test]
fn amalgam_decide_and_json_out() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("z4_z6.json");
    std::fs::write(
        &spec,
        r#"{"h": {"table": [[0,1,2,3],[1,2,3,0],[2,3,0,1],[3,0,1,2]]},
            "k": {"table": [[0,1,2,3,4,5],[1,2,3,4,5,0],[2,3,4,5,0,1],[3,4,5,0,1,2],[4,5,0,1,2,3],[5,0,1,2,3,4]]},
            "c_into_h": [0, 2], "c_into_k": [0, 3]}"#,
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let status = sl2tree(&[
        "amalgam-decide",
        "--amalgam",
        spec.to_str().unwrap(),
        "--A",
        "h1 k1",
        "--B",
        "h1 k2 h1 k2 h1 k1 k4 h3 k4 h3",
        "--json-out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["discrete_free"], true);
    let r = json(&sl2tree(&["amalgam-decide", "--amalgam", spec.to_str().unwrap(), "--A", "h1", "--B", "k1"]));
    assert_eq!(r["discrete_free"], false);
    assert_eq!(r["iterations"], 0);
}

#[test]
fn batch_runs_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let jobs = dir.path().join("jobs.json");
    let body = serde_json::json!([
        {"command": "tl", "field": "qp:5", "a": "[[1,5],[0,1]]"},
        {"command": "decide", "field": "qp:7", "a": ONE_ITER_A, "b": ONE_ITER_B},
        {"command": "tl", "field": "qp:5", "a": "[[2,0],[0,1]]"}
    ]);
    std::fs::write(&jobs, body.to_string()).unwrap();
    let r = json(&sl2tree(&["batch", jobs.to_str().unwrap()]));
    assert_eq!(r[0]["translation_length"], 0);
    assert_eq!(r[1]["iterations"], 1);
    assert_eq!(r[2]["kind"], "determinant");
    assert_eq!(r[2]["exit_code"], 5);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| sl2tree(args).status.code();
    assert_eq!(code(&["tl", "--A", "[[1,2],[3]]"]), Some(3));
    assert_eq!(code(&["tl", "--field", "qp:6", "--A", "[[1,0],[0,1]]"]), Some(3));
    assert_eq!(code(&["tl", "--field", "qp:5", "--A", "[[t,0],[0,1/t]]"]), Some(4));
    assert_eq!(code(&["tl", "--A", "[[2,0],[0,1]]"]), Some(5));
    assert_eq!(code(&["amalgam-decide", "--amalgam", "/nonexistent/spec.json", "--A", "h1", "--B", "k1"]), Some(6));
    assert_eq!(code(&["tl", "--field", "fqt:5", "--A", "[[t,0],[0,1/t]]"]), Some(0));
}
