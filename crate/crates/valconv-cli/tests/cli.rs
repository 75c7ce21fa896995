//! End-to-end checks of the `valconv` binary: exit codes, report
//! determinism, and the JSON contracts of each subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use valconv_core::conv::unit_form;
use valconv_core::gen::{random_bigraded, rng_for};
use valconv_core::forms::Values;
use valconv_core::lie::{abelian, so3};
use valconv_core::valuation::{beta_form, InvariantValuation};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_valconv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

struct Fixtures {
    dir: PathBuf,
}

impl Fixtures {
    fn new(tag: &str) -> Fixtures {
        let dir = std::env::temp_dir().join(format!("valconv-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).expect("fixture dir");
        Fixtures { dir }
    }

    fn write(&self, name: &str, v: &Value) -> PathBuf {
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(v).unwrap()).expect("fixture write");
        path
    }

    fn write_text(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.join(name);
        fs::write(&path, text).expect("fixture write");
        path
    }
}

impl Drop for Fixtures {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}

#[test]
fn lie_check_reports_unimodularity() {
    let out = run(&["lie", "check", "so3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("jacobi: ok"));
    assert!(text.contains("unimodular: yes"));

    let out = run(&["lie", "check", "aff1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("unimodular: no (tr ad_e1 = 1)"));
}

#[test]
fn lie_check_exit_codes_separate_invalid_from_inconsistent() {
    let fx = Fixtures::new("liecheck");
    let garbled = fx.write_text("garbled.json", "{ not json");
    let out = run(&["lie", "check", path_str(&garbled)]);
    assert_eq!(code(&out), 2);

    // A bracket table failing the Jacobi identity is a readable spec that
    // flunks the check itself.
    let bad = fx.write(
        "bad.json",
        &serde_json::json!({
            "name": "broken",
            "dim": 3,
            "brackets": [
                {"i": 1, "j": 2, "coeffs": {"3": "1"}},
                {"i": 2, "j": 3, "coeffs": {"2": "1"}},
                {"i": 1, "j": 3, "coeffs": {"2": "-1"}}
            ]
        }),
    );
    let out = run(&["lie", "check", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("jacobi: violated"));

    let out = run(&["lie", "check", "nosuchalgebra"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn s3_table_json_matches_the_pinned_products() {
    let out = run(&["s3", "table", "--basis", "nu", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).expect("table json");
    assert_eq!(v["products"]["nu1*nu2"]["nu0"], "2");
    assert_eq!(v["products"]["nu1*nu2"]["nu2"], "-2");
    assert_eq!(v["products"]["nu2*nu2"]["nu1"], "1/4*pi^2");

    let out = run(&["s3", "table", "--basis", "mu", "--format", "md"]);
    assert_eq!(code(&out), 0);
    let md = stdout(&out);
    assert!(md.contains("2*pi mu1"), "mu1*mu1 row: {md}");

    let out = run(&["s3", "table", "--basis", "sigma"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn s3_verify_passes_cleanly() {
    let out = run(&["s3", "verify", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).expect("report json");
    assert_eq!(v["passed"], true);
    assert_eq!(v["properties"].as_array().unwrap().len(), 8);
}

#[test]
fn suite_rejects_zero_trials() {
    let out = run(&["suite", "--lie", "so3", "--trials", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn suite_reports_are_byte_identical_for_fixed_seed() {
    let args = ["suite", "--lie", "so3", "--seed", "5", "--trials", "2", "--max-deg", "0", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).expect("suite json");
    assert_eq!(v["passed"], true);
    assert!(v["suites"].as_array().unwrap().len() == 6);
}

#[test]
fn suite_passes_on_the_non_unimodular_builtin() {
    let out = run(&["suite", "--lie", "aff1", "--seed", "3", "--trials", "3", "--max-deg", "0"]);
    assert_eq!(code(&out), 0);
    let md = stdout(&out);
    assert!(md.contains("negative control"));
}

#[test]
fn forms_convolve_unit_acts_as_identity() {
    let fx = Fixtures::new("formsconv");
    let spec = so3();
    let unit = unit_form(&spec);
    let mut rng = rng_for(99, 0);
    let zeta = random_bigraded(&mut rng, spec.n, spec.n, Values::Dual, 1);
    let unit_path = fx.write("unit.json", &unit.to_json());
    let zeta_path = fx.write("zeta.json", &zeta.to_json());
    let out_path = fx.dir.join("result.json");

    let out = run(&[
        "forms", "convolve",
        path_str(&unit_path), path_str(&zeta_path),
        "--lie", "so3",
        "--out", path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let got: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(got, zeta.to_json());
}

#[test]
fn forms_convolve_rejects_incompatible_degrees() {
    let fx = Fixtures::new("formsbad");
    let spec = so3();
    let mut rng = rng_for(99, 1);
    let a = random_bigraded(&mut rng, spec.n, 1, Values::Dual, 0);
    let b = random_bigraded(&mut rng, spec.n, 1, Values::Dual, 0);
    let a_path = fx.write("a.json", &a.to_json());
    let b_path = fx.write("b.json", &b.to_json());
    let out = run(&["forms", "convolve", path_str(&a_path), path_str(&b_path), "--lie", "so3"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn forms_d_and_integrate_on_known_forms() {
    let fx = Fixtures::new("formsd");
    let spec = so3();
    let unit_path = fx.write("unit.json", &unit_form(&spec).to_json());
    let out = run(&["forms", "d", path_str(&unit_path), "--lie", "so3"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("zero: true"));

    let beta_path = fx.write("beta.json", &beta_form(&spec).unwrap().to_json());
    let out = run(&["forms", "integrate", path_str(&beta_path), "--lie", "so3"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).expect("integral json");
    assert_eq!(v["terms"][""]["0"], "1");
}

#[test]
fn val_convolve_chi_absorbs_and_specs_must_match() {
    let fx = Fixtures::new("valconv");
    let spec = so3();
    let chi = InvariantValuation::chi(&spec);
    let haar = InvariantValuation::haar(&spec);
    let chi_path = fx.write("chi.json", &chi.to_json(Value::String("so3".into())));
    let haar_path = fx.write("haar.json", &haar.to_json(Value::String("so3".into())));

    let out = run(&["val", "convolve", path_str(&chi_path), path_str(&haar_path)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let got: Value = serde_json::from_str(&stdout(&out)).expect("valuation json");
    assert_eq!(got, chi.to_json(spec.to_json()));

    let other = abelian(3);
    let foreign = fx.write(
        "foreign.json",
        &InvariantValuation::chi(&other).to_json(Value::String("abelian3".into())),
    );
    let out = run(&["val", "convolve", path_str(&chi_path), path_str(&foreign)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn val_validate_separates_valid_from_invalid() {
    let fx = Fixtures::new("valval");
    let spec = so3();
    let haar_path = fx.write(
        "haar.json",
        &InvariantValuation::haar(&spec).to_json(Value::String("so3".into())),
    );
    let out = run(&["val", "validate", path_str(&haar_path)]);
    assert_eq!(code(&out), 0, "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("closed: ok"));

    // A generic degree-n form is not closed, so validation must fail.
    let mut rng = rng_for(4, 2);
    let mut tau = random_bigraded(&mut rng, spec.n, spec.n, Values::Dual, 1);
    while tau.d_total(&spec).unwrap().is_zero() {
        tau = random_bigraded(&mut rng, spec.n, spec.n, Values::Dual, 1);
    }
    let bad = InvariantValuation { c: valconv_core::scalar::Scalar::zero(), tau };
    let bad_path = fx.write("bad.json", &bad.to_json(Value::String("so3".into())));
    let out = run(&["val", "validate", path_str(&bad_path)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("closed: FAIL"));
}

#[test]
fn color_is_opt_in_and_reports_stay_plain() {
    let mut cmd = bin();
    cmd.args(["s3", "verify"]).env("VALCONV_COLOR", "1");
    let out = cmd.output().expect("binary runs");
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("\u{1b}["), "forced color should emit ANSI");
    assert!(!stdout(&out).contains('\u{1b}'), "the report itself stays plain");

    let mut cmd = bin();
    cmd.args(["s3", "verify"]).env("VALCONV_COLOR", "0");
    let out = cmd.output().expect("binary runs");
    assert!(!stderr(&out).contains('\u{1b}'));
    assert!(!stdout(&out).contains('\u{1b}'));
}

#[test]
fn suite_with_unknown_spec_is_invalid_input() {
    let out = run(&["suite", "--lie", "nosuch"]);
    assert_eq!(code(&out), 2);
}
