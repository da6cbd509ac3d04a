use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwtree"))
        .args(args)
        .env_remove("CWTREE_FORMAT")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn golden(name: &str) -> String {
    fs::read_to_string(crate_dir().join("tests/golden").join(name)).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&stdout(&full)).unwrap()
}

#[test]
fn headline_values() {
    assert_eq!(stdout(&["sum", "--depth", "4", "--mode", "exact"]), "23/2\n");
    assert_eq!(stdout(&["cdf", "[1;(2)]"]).lines().next(), Some("3/5"));
    assert_eq!(stdout(&["padic-mu", "--p", "2", "--z", "0", "--nu", "0"]).lines().next(), Some("2/3"));
}

#[test]
fn golden_files() {
    let cases: &[(&str, &[&str])] = &[
        ("sum_depth4_exact.txt", &["sum", "--depth", "4", "--mode", "exact"]),
        ("cdf_sqrt2.txt", &["cdf", "[1;(2)]"]),
        ("padic_mu_p2_z0_nu0.txt", &["padic-mu", "--p", "2", "--z", "0", "--nu", "0"]),
        ("sum_depth4_exact.json", &["--format", "json", "sum", "--depth", "4", "--mode", "exact"]),
        ("cdf_sqrt2.json", &["--format", "json", "cdf", "[1;(2)]"]),
        ("padic_mu_p2_z0_nu0.json", &["--format", "json", "padic-mu", "--p", "2", "--z", "0", "--nu", "0"]),
        ("locate_5_3.json", &["--format", "json", "locate", "5/3"]),
        ("hit_3_5.json", &["--format", "json", "hit", "--alpha", "3", "--beta", "5"]),
        (
            "walk_seed2024.json",
            &["--format", "json", "walk", "--alpha", "1", "--beta", "2", "--seed", "2024", "--trials", "1", "--max-steps", "200"],
        ),
        ("gen_depth4.csv", &["--format", "csv", "gen", "--depth", "4"]),
        ("bell_8.csv", &["--format", "csv", "bell", "--max", "8"]),
        ("padic_residues_p7_n8.csv", &["--format", "csv", "padic-residues", "--p", "7", "--depth", "8"]),
        ("padic_orbit_p3_k2.txt", &["padic-orbit", "--p", "3", "--kappa", "2"]),
        ("cf_355_113.txt", &["cf", "355/113"]),
    ];
    for (file, args) in cases {
        assert_eq!(stdout(args), golden(file), "{file}");
    }
}

#[test]
fn golden_walk_hit_step() {
    let v = json(&["walk", "--alpha", "1", "--beta", "2", "--seed", "2024", "--trials", "1", "--max-steps", "200"]);
    assert_eq!(v["results"]["first_hit_step"], 7);
    assert_eq!(v["results"]["first_final_value"], "7/6");
}

fn validate(schema_file: &Path, instance: &Value) {
    let schema: Value = serde_json::from_str(&fs::read_to_string(schema_file).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{} rejects output: {errors:?}", schema_file.display());
}

#[test]
fn json_outputs_match_schemas() {
    let cases: &[&[&str]] = &[
        &["gen", "--depth", "5"],
        &["sum", "--depth", "6"],
        &["sum", "--depth", "6", "--mode", "exact"],
        &["mean", "--depth", "6", "--mode", "exact"],
        &["cf", "355/113"],
        &["cf", "0"],
        &["locate", "22/7"],
        &["at", "L^3 R"],
        &["at", "root"],
        &["hit", "--alpha", "[1;(2)]", "--beta", "3/2", "--prefix", "LR"],
        &["cdf", "[(1)]"],
        &["cdf", "~[1;2,3]"],
        &["ecdf", "--depth", "10", "--x", "3/2"],
        &["supdev", "--depth", "10"],
        &["moments", "--max", "4", "--depth", "12"],
        &["bell", "--max", "5"],
        &["padic-residues", "--p", "5", "--depth", "9", "--char-poly"],
        &["padic-orbit", "--p", "2", "--kappa", "3"],
        &["padic-mu", "--p", "3", "--z", "1/3", "--nu", "-1", "--empirical", "12"],
        &["zeta", "--p", "3", "--s", "-0.5"],
        &["walk", "--alpha", "0.1", "--beta", "0.11", "--seed", "5", "--trials", "200", "--max-steps", "40"],
        &["walk", "--alpha", "0", "--beta", "inf", "--trials", "3"],
    ];
    for args in cases {
        let v = json(args);
        assert_eq!(v["format_version"], 1);
        let schema = crate_dir().join("schemas").join(format!("{}.schema.json", args[0]));
        validate(&schema, &v);
    }
}

#[test]
fn every_schema_is_used() {
    let commands = [
        "gen", "sum", "mean", "cf", "locate", "at", "hit", "cdf", "ecdf", "supdev", "moments", "bell",
        "padic-residues", "padic-orbit", "padic-mu", "zeta", "walk",
    ];
    let mut names: Vec<String> = fs::read_dir(crate_dir().join("schemas"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut expected: Vec<String> = commands.iter().map(|c| format!("{c}.schema.json")).collect();
    expected.sort();
    assert_eq!(names, expected);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["sum"]), 2);
    assert_eq!(code(&["cf", "1/0"]), 2);
    assert_eq!(code(&["padic-mu", "--p", "4", "--z", "0", "--nu", "0"]), 2);
    assert_eq!(code(&["gen", "--depth", "27"]), 2);
    assert_eq!(code(&["padic-orbit", "--p", "7", "--kappa", "7"]), 2);
    assert_eq!(code(&["hit", "--alpha", "2", "--beta", "1"]), 1);
    assert_eq!(code(&["padic-orbit", "--p", "3", "--kappa", "0"]), 1);
    assert_eq!(code(&["zeta", "--p", "3", "--s", "1.5"]), 1);
    assert_eq!(code(&["sum", "--depth", "3"]), 0);
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cwtree"))
        .args(["sum", "--depth", "4"])
        .env("CWTREE_FORMAT", "json")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["value"], "23/2");
    assert_eq!(v["provenance"], "closed_form");
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("cwtree-out-{}.csv", std::process::id()));
    let out = run(&["--format", "csv", "--out", path.to_str().unwrap(), "gen", "--depth", "3"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), "index,value\n1,1/3\n2,3/2\n3,2/3\n4,3/1\n");
    fs::remove_file(path).unwrap();
}

#[test]
fn streamed_and_json_rows_agree() {
    let text = stdout(&["gen", "--depth", "7"]);
    let v = json(&["gen", "--depth", "7"]);
    let listed: Vec<&str> = v["results"]["elements"].as_array().unwrap().iter().map(|e| e.as_str().unwrap()).collect();
    assert_eq!(text.lines().collect::<Vec<_>>(), listed);
    assert_eq!(v["results"]["count"], 64);
}

#[test]
fn exact_and_closed_sums_agree() {
    for n in ["1", "2", "9", "15"] {
        assert_eq!(stdout(&["sum", "--depth", n, "--mode", "exact"]), stdout(&["sum", "--depth", n]));
        assert_eq!(stdout(&["mean", "--depth", n, "--mode", "exact"]), stdout(&["mean", "--depth", n]));
    }
}

#[test]
fn schemas_reject_float_rationals() {
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(crate_dir().join("schemas/sum.schema.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut v = json(&["sum", "--depth", "4"]);
    assert!(validator.is_valid(&v));
    v["results"]["value"] = serde_json::json!(11.5);
    assert!(!validator.is_valid(&v));
}
