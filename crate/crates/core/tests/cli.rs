use std::io::Write;
use std::process::{Command, Output};

use gradsk_core::cli::parse_report;

fn gradsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradsk"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn file(suffix: &str, text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const UNRAMIFIED: &str = r#"{
  "center": [[1]],
  "residue": {
    "kind": "abstract",
    "u": [12],
    "ut": [12],
    "norm": [[1]],
    "r0_part": [[2]],
    "sigma_subgroups": [{"h": [], "generators": [[4]]}]
  },
  "involution": {"kind": "unitary", "fixed_lattice": [[1]], "residue_nontrivial": true, "signs": []},
  "residue_model": {"ind_e0": 2, "center_degree": 1, "galois_orders": [], "theta_images": []}
}"#;

const UNRAMIFIED_TOML: &str = r#"
center = [[1]]

[residue]
kind = "abstract"
u = [12]
ut = [12]
norm = [[1]]
r0_part = [[2]]
sigma_subgroups = [{ h = [], generators = [[4]] }]

[involution]
kind = "unitary"
fixed_lattice = [[1]]
residue_nontrivial = true
signs = []

[residue_model]
ind_e0 = 2
center_degree = 1
galois_orders = []
theta_images = []
"#;

const QUATERNION_NO_TAU: &str = r#"{
  "center": [[2, 0], [0, 2]],
  "generators": [{"degree": [1, 0], "power": 2}, {"degree": [0, 1], "power": 2}],
  "commutation": [[0, 1], [1, 0]],
  "residue": {"kind": "roots_of_unity", "m": 2},
  "involution": {"kind": "unitary", "fixed_lattice": [[2, 0], [0, 2]], "residue_nontrivial": true, "signs": [0, 0]}
}"#;

#[test]
fn symbol_sk1u_text() {
    let o = gradsk(&["sk1u", "--example", "toex", "--r", "4,4", "--mu", "16", "--theta", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("SK1U = Z/2 (ThSktotal via ThInvolthm2)"),
        "{}",
        stdout(&o)
    );
    assert!(!stdout(&o).contains('\x1b'));
}

#[test]
fn symbol_sk1_json() {
    let o = gradsk(&[
        "sk1",
        "--example",
        "toex",
        "--r",
        "4,4",
        "--mu",
        "16",
        "--theta",
        "7",
        "--output",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = parse_report(&stdout(&o)).unwrap();
    let g = r.result.unwrap();
    assert_eq!(g.invariant_factors, ["4"]);
    assert_eq!(g.rendered, "Z/4");
    assert_eq!(g.theorem, "NonUnitaryTotallyRamified");
}

#[test]
fn classify_unramified() {
    let f = file(".json", UNRAMIFIED);
    let o = gradsk(&["classify", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("Unramified, ∂=1"), "{}", stdout(&o));
}

#[test]
fn toml_reads_like_json() {
    let j = file(".json", UNRAMIFIED);
    let t = file(".toml", UNRAMIFIED_TOML);
    for cmd in ["classify", "sk1u"] {
        let a = gradsk(&[cmd, "--input", j.path().to_str().unwrap(), "--output", "json"]);
        let b = gradsk(&[cmd, "--input", t.path().to_str().unwrap(), "--output", "json"]);
        assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
    let o = gradsk(&["sk1u", "--input", t.path().to_str().unwrap()]);
    assert!(stdout(&o).contains("SK1U = Z/2 (CorUnramified)"), "{}", stdout(&o));
}

#[test]
fn verify_lembe_counts() {
    let o = gradsk(&["verify", "--suite", "lembe", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "lembe: pass 500 passed, 0 failed (seed 42)");
}

#[test]
fn missing_tau_multiplier_is_named() {
    let f = file(".json", QUATERNION_NO_TAU);
    let o = gradsk(&["sk1u", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("residue.tau_multiplier"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_rejected() {
    let doc = UNRAMIFIED.replacen("\"center\"", "\"centre\": [[1]],\n  \"center\"", 1);
    let f = file(".json", &doc);
    let o = gradsk(&["classify", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("centre"), "{}", stderr(&o));
    let doc = UNRAMIFIED.replacen("\"u\": [12]", "\"u\": [12], \"uu\": 1", 1);
    let f = file(".json", &doc);
    let o = gradsk(&["classify", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("residue"), "{}", stderr(&o));
}

#[test]
fn exponent_one_is_rejected() {
    let o = gradsk(&["bridge", "--example", "toex", "--r", "2,1", "--mu", "2", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--r[1]"), "{}", stderr(&o));
}

#[test]
fn precondition_failures_exit_two() {
    let o = gradsk(&[
        "bridge",
        "--example",
        "toex",
        "--r",
        "2,2",
        "--mu",
        "2",
        "--theta",
        "1",
        "--residue-char",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("strongly tame"), "{}", stderr(&o));
    // a unitary involution must move the center
    let doc = UNRAMIFIED.replacen("\"residue_nontrivial\": true", "\"residue_nontrivial\": false", 1);
    let f = file(".json", &doc);
    let o = gradsk(&["sk1u", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn example_document_reads_back() {
    let args = ["--example", "toex", "--r", "2,4", "--mu", "8", "--theta", "7"];
    let o = gradsk(&[&["example", "--output", "json"][..], &args].concat());
    assert_eq!(o.status.code(), Some(0));
    let doc = serde_json::to_string(&parse_report(&stdout(&o)).unwrap().document.unwrap()).unwrap();
    let f = file(".json", &doc);
    let direct = gradsk(&[&["sk1u", "--output", "json"][..], &args].concat());
    let read = gradsk(&["sk1u", "--output", "json", "--input", f.path().to_str().unwrap()]);
    assert_eq!(read.status.code(), Some(0), "{}", stderr(&read));
    let a = parse_report(&stdout(&direct)).unwrap().result.unwrap();
    let b = parse_report(&stdout(&read)).unwrap().result.unwrap();
    assert_eq!(a.invariant_factors, b.invariant_factors);
    assert_eq!(a.invariant_factors, ["2"]);
}

#[test]
fn usage_errors() {
    assert_eq!(gradsk(&[]).status.code(), Some(1));
    assert_eq!(gradsk(&["verify", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(gradsk(&["sk1u", "--input", "/nonexistent.json"]).status.code(), Some(1));
}
