use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn ratnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratnet")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ratnet-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn degrees_of_binary_net() {
    let out = ratnet(&["degrees", "--arch", "2,2,2,1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!((v["n"].as_u64(), v["m"].as_u64()), (Some(3), Some(2)));
}

#[test]
fn dim_of_table_row() {
    let out = ratnet(&["dim", "--arch", "3,3,3,3", "--seed", "7"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["jacobian_rank"], 22);
    assert_eq!(v["ambient_dim"], 136);
    assert_eq!(v["param_count"], 27);
}

#[test]
fn factor_cubic_from_file() {
    let dir = scratch("factor");
    let path = dir.join("q.json");
    let term = |e: [u32; 3], c: f64| json!({"exp": e, "re": c});
    let q = json!({
        "nvars": 3,
        "degree": 3,
        "terms": [
            term([3, 0, 0], 1.0),
            term([1, 2, 0], -1.0),
            term([1, 1, 1], -1.0),
            term([0, 2, 1], 1.0),
            term([1, 0, 2], -1.0),
            term([0, 1, 2], 1.0),
        ]
    });
    fs::write(&path, q.to_string()).unwrap();
    let out = ratnet(&["factor", "--poly", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["decomposable"], true);
    assert_eq!(v["factors"].as_array().unwrap().len(), 3);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn irreducible_quadric_is_a_negative_verdict() {
    let dir = scratch("quadric");
    let path = dir.join("q.json");
    // x1² + x2² + x3² has rank 3 and does not split
    let q = json!({"nvars": 3, "degree": 2, "terms": [
        {"exp": [2, 0, 0], "re": 1.0}, {"exp": [0, 2, 0], "re": 1.0}, {"exp": [0, 0, 2], "re": 1.0}
    ]});
    fs::write(&path, q.to_string()).unwrap();
    let out = ratnet(&["factor", "--poly", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["decomposable"], false);
}

#[test]
fn forward_reconstruct_forward_round_trip() {
    let dir = scratch("roundtrip");
    for (arch, seed) in [("3,3,2", "1"), ("2,2,2,2,1", "2")] {
        let fwd = ratnet(&["forward", "--arch", arch, "--field", "complex", "--seed", seed]);
        assert!(fwd.status.success());
        let f_path = dir.join(format!("{seed}.json"));
        fs::write(&f_path, &fwd.stdout).unwrap();
        let rec = ratnet(&["reconstruct", "--tuple", f_path.to_str().unwrap(), "--arch", arch]);
        assert!(rec.status.success(), "{arch}: {}", String::from_utf8_lossy(&rec.stdout));
        let v = stdout_json(&rec);
        assert!(v["residual"].as_f64().unwrap() <= 1e-6);
        let w_path = dir.join(format!("{seed}_w.json"));
        fs::write(&w_path, v["weights"].to_string()).unwrap();
        let again = ratnet(&["forward", "--weights", w_path.to_str().unwrap()]);
        assert!(again.status.success());
        let t2 = dir.join(format!("{seed}_again.json"));
        fs::write(&t2, &again.stdout).unwrap();
        // the re-derived tuple is itself in the model
        let rec2 = ratnet(&["membership", "--tuple", t2.to_str().unwrap(), "--arch", arch]);
        assert_eq!(rec2.status.code(), Some(0));
    }
}

#[test]
fn rank_membership_rejects_noise() {
    let dir = scratch("rank");
    let fwd = ratnet(&["forward", "--arch", "4,2,2", "--field", "complex", "--seed", "5"]);
    let mut v = stdout_json(&fwd);
    let path = dir.join("on.json");
    fs::write(&path, v.to_string()).unwrap();
    let out = ratnet(&["membership", "--method", "rank", "--tuple", path.to_str().unwrap(), "--arch", "4,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let re = v["tuple"]["denominator"]["terms"][0]["re"].as_f64().unwrap();
    v["tuple"]["denominator"]["terms"][0]["re"] = json!(re + 0.05);
    let path = dir.join("off.json");
    fs::write(&path, v.to_string()).unwrap();
    let out = ratnet(&["membership", "--method", "rank", "--tuple", path.to_str().unwrap(), "--arch", "4,2,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_and_hpoly() {
    let dir = scratch("eval");
    let w = json!({"arch": [2, 2, 1], "field": "real", "mats": [[[1.0, 1.0], [1.0, -1.0]], [[1.0, 1.0]]]});
    let path = dir.join("w.json");
    fs::write(&path, w.to_string()).unwrap();
    let out = ratnet(&["eval", "--weights", path.to_str().unwrap(), "--point", "0.5,0.4"]);
    assert!(out.status.success());
    let y = stdout_json(&out)["output"][0][0].as_f64().unwrap();
    assert!((y - (1.0 / 0.9 + 1.0 / 0.1)).abs() < 1e-12);
    let pole = ratnet(&["eval", "--weights", path.to_str().unwrap(), "--point", "0.5,-0.5"]);
    assert_eq!(pole.status.code(), Some(1));
    let h = ratnet(&["hpoly", "--weights", path.to_str().unwrap()]);
    assert!(h.status.success());
    let v = stdout_json(&h);
    assert_eq!((v["nvars"].as_u64(), v["degree"].as_u64()), (Some(3), Some(2)));
}

#[test]
fn census_csv_is_worker_independent() {
    let run = |workers: &str| {
        let out = ratnet(&["census", "--max-params", "8", "--max-layers", "2", "--seed", "3", "--workers", workers]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        // drop runtime_s, the only wall-clock column
        text.lines()
            .map(|l| {
                let cols: Vec<&str> = l.rsplitn(3, ',').collect();
                format!("{},{}", cols[2], cols[0])
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a, b);
    assert!(a.iter().any(|l| l.starts_with("\"[2,2,1]\",5,5,6,5,true")));
}

#[test]
fn short_training_writes_outputs() {
    let dir = scratch("train");
    let out_dir = dir.join("runs");
    let out = ratnet(&["train", "--inits", "3", "--epochs", "20", "--seed", "1", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["inits"], 3);
    let agg = fs::read_to_string(out_dir.join("aggregate.csv")).unwrap();
    assert!(agg.starts_with("run,final_loss,angle1,angle2,full_success,partial_success"));
    assert_eq!(agg.lines().count(), 4);
    let run0 = fs::read_to_string(out_dir.join("run_0000.csv")).unwrap();
    assert_eq!(run0.lines().count(), 21);
    let w: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("run_0000_weights.json")).unwrap()).unwrap();
    assert!(w.get("initial").is_some() && w.get("final").is_some());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ratnet(&["dim"]).status.code(), Some(1));
    assert_eq!(ratnet(&["dim", "--arch", "3,x"]).status.code(), Some(1));
    assert_eq!(ratnet(&["dim", "--arch", "3,3,3", "--prime", "101"]).status.code(), Some(1));
    let v = ratnet(&["--version"]);
    assert!(v.status.success() && String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}
