use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sharpext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpext"))
        .args(args)
        .env_remove("SHARPEXT_ZERO_CACHE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn witness_gives_exit_1() {
    let out = sharpext(&["sets", "check", "--h", "3", "--set", "[-1,1,2]"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "violated");
    assert_eq!(v["result"]["witness"]["sum"], "3");
}

#[test]
fn passing_set_and_text_format() {
    let out = sharpext(&["sets", "check", "--h", "3", "--set", "[-3,-2,2,3]", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("is P(3)"));
}

#[test]
fn generated_windows() {
    let ok = sharpext(&["sets", "generate", "--kind", "powers", "--q", "6", "--window", "1e6", "--h", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["size"], 17);
    let bad = sharpext(&["sets", "check", "--h", "2", "--kind", "powers", "--q", "2", "--window", "64"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn quad_i3_reference_value() {
    let out = sharpext(&["quad", "i3", "--orders", "0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["lower"].as_f64().unwrap() > 0.33682);
    // 17 significant digits in the raw text
    assert!(String::from_utf8_lossy(&out.stdout).contains("3.36824812155399"));
}

#[test]
fn usage_errors_give_exit_2() {
    assert_eq!(sharpext(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sharpext(&["quad", "i3", "--orders", "1,2"]).status.code(), Some(2));
    assert_eq!(sharpext(&["quad", "i6", "--orders", "1,0,0,0,0,0"]).status.code(), Some(2));
    assert_eq!(sharpext(&["quad", "i3", "--orders", "0,0,0", "--n", "10"]).status.code(), Some(2));
}

#[test]
fn wide_enclosure_gives_exit_3() {
    let out = sharpext(&["quad", "i3", "--orders", "0,0,0", "--n", "1000", "--budget", "1e-6"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zero_cache_file_and_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("zeros.cache");
    let out = sharpext(&["bessel", "zeros", "--count", "100", "--out", cache.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.starts_with("# j1-zeros count=100 tol=1e-12\n"));
    assert_eq!(text.lines().count(), 101);

    let cache = dir.path().join("quad.cache");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_sharpext"))
            .args(["quad", "i3", "--orders", "1,2,3"])
            .env("SHARPEXT_ZERO_CACHE", &cache)
            .output()
            .unwrap()
    };
    let fresh = run();
    assert!(cache.exists());
    let reused = run();
    assert_eq!(fresh.status.code(), Some(0));
    assert_eq!(fresh.stdout, reused.stdout);
}

#[test]
fn extension_commands() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_spec(dir.path(), "one.json", r#"{"0": [2, 0]}"#);
    let out = sharpext(&["extension", "verify", "--spec", &one]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "equality");

    let bad = write_spec(dir.path(), "bad.json", r#"{"-1": [1, 0], "1": [1, 0], "2": [1, 0]}"#);
    let out = sharpext(&["extension", "verify", "--spec", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["spectrumIsPh"], false);
    assert_eq!(sharpext(&["extension", "audit", "--spec", &bad]).status.code(), Some(1));

    let g = write_spec(dir.path(), "g.json", r#"{"0": [1, 0], "1": [1, 0]}"#);
    let out = sharpext(&["extension", "audit", "--spec", &g]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["nondecreasing"], true);
    let out = sharpext(&["extension", "verify", "--spec", &g, "--theorem", "mixed"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "strict");

    let shifted = sharpext(&["extension", "norm", "--spec", &g, "--shift", "-1"]);
    assert_eq!(shifted.status.code(), Some(0));
    assert_eq!(json(&shifted)["spectrumSize"], 2);
}

#[test]
fn certify_lemma31_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("report.json");
    let out = sharpext(&["certify", "lemma31", "--json", full.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let t: Vec<u64> = v["thresholds"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(t, vec![5, 14, 9, 49, 145]);
    assert!(full.exists());
}
