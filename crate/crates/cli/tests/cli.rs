use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn divcurl(args: &[&str], out: &Path) -> (i32, Value, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_divcurl")).args(args).arg("--out").arg(out).output().expect("spawn divcurl");
    let report = std::fs::read_to_string(out.join("report.json")).ok().map(|t| serde_json::from_str(&t).expect("report is JSON")).unwrap_or(Value::Null);
    (o.status.code().expect("exit code"), report, String::from_utf8_lossy(&o.stderr).into_owned())
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(r: &Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(r).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

#[test]
fn torus_magnetic_basis() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = divcurl(&["basis", "--mesh", "torus:2,0.5,1", "--coeff", "identity", "--kind", "magnetic"], dir.path());
    assert_eq!(code, 0);
    assert_valid(&r);
    assert_eq!(r["results"]["dimension"], 1);
    assert!((r["results"]["gram"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(r["mesh"]["betti"], serde_json::json!([0, 1]));
    assert!(dir.path().join("basis_0.vtk").exists());
}

#[test]
fn mean_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, err) = divcurl(&["check", "--system", "magnetostatic", "--rho", "one", "--lambda", "zero", "--mesh", "cube:2"], dir.path());
    assert_eq!(code, 2);
    assert_valid(&r);
    assert_eq!(r["results"]["failed"], serde_json::json!(["meanBalance"]));
    assert!(err.contains("meanBalance"));
}

#[test]
fn solve_refuses_incompatible_data() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = divcurl(&["solve", "--data", "torus-circulation", "--mesh", "torus:2,0.5,1"], dir.path());
    assert_eq!(code, 2);
    assert_valid(&r);
    assert!(r["results"]["failed"].as_array().unwrap().iter().any(|f| f == "cutCirculation_1"));
    assert!(!dir.path().join("u0.vtk").exists());
}

#[test]
fn zero_electric_solve_on_shell() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = divcurl(&["solve", "--system", "electric", "--mesh", "shell:1,2,1", "--data", "zero"], dir.path());
    assert_eq!(code, 0);
    assert_valid(&r);
    assert_eq!(r["results"]["family_dimension"], 1);
    assert_eq!(r["results"]["u0_max_dof"], 0.0);
}

#[test]
fn manufactured_solve_meets_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = divcurl(&["solve", "--data", "manufactured-2", "--mesh", "cube:2"], dir.path());
    assert_eq!(code, 0, "{r}");
    assert_valid(&r);
    assert_eq!(r["coefficient"]["M"], 3.0);
    for (name, v) in r["residuals"].as_object().unwrap() {
        assert!(v.as_f64().unwrap() < 1e-8, "{name} = {v}");
    }
}

#[test]
fn decompose_and_friedrichs_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = divcurl(&["decompose", "--mesh", "torus:2,0.5,1", "--kind", "electric", "--coeff", "random:3", "--seed", "5"], dir.path());
    assert_eq!(code, 0, "{r}");
    assert_valid(&r);
    assert!(r["results"]["reconstruction"].as_f64().unwrap() < 1e-8);
    for f in ["u", "h", "gradient_part", "curl_part", "chi", "w"] {
        assert!(dir.path().join(format!("{f}.vtk")).exists(), "{f}");
    }
    let (code, r, _) = divcurl(&["friedrichs", "--mesh", "cube:1", "--kind", "normal"], dir.path());
    assert_eq!(code, 0);
    assert_valid(&r);
    assert!(r["results"]["constant"].as_f64().unwrap().is_finite());
    assert_eq!(r["results"]["lower_bound"], false);
    let (code, r, _) = divcurl(&["friedrichs", "--mesh", "cube:1", "--p", "3"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(r["results"]["lower_bound"], true);
}

#[test]
fn mesh_info_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = divcurl(&["mesh-info", "--mesh", "shell:1,2,1"], dir.path());
    assert_eq!(code, 0);
    assert_valid(&r);
    assert_eq!(r["mesh"]["betti"], serde_json::json!([1, 0]));
    assert_eq!(r["results"]["boundary_components"], 2);
    assert!(r["stats"]["seconds"].is_null());
    let (_, r, _) = divcurl(&["mesh-info", "--mesh", "cube:1", "--timing"], dir.path());
    assert!(r["stats"]["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn input_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["basis", "--mesh", "/no/such/file.msh"][..],
        &["basis", "--mesh", "cube:1", "--coeff", "diagonal(1,-1,1)"],
        &["basis", "--mesh", "cube:1", "--kind", "sideways"],
        &["check", "--mesh", "cube:1", "--data", "no-such-dataset"],
        &["friedrichs", "--mesh", "cube:1", "--form", "cut-flux"],
        &["solve", "--mesh", "cube:1", "--bogus-flag"],
        &["basis"],
    ] {
        let (code, _, err) = divcurl(args, dir.path());
        assert_eq!(code, 4, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[mesh]\nmesh = cube:1\n\n[data]\nsystem = magnetostatic\nrho = one\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, _, _) = divcurl(&["check", "--config", cfg], dir.path());
    assert_eq!(code, 2);
    let (code, _, _) = divcurl(&["check", "--config", cfg, "--rho", "zero"], dir.path());
    assert_eq!(code, 0);
}

fn without_timestamp(dir: &Path) -> String {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    text.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn repeated_runs_are_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["decompose", "--mesh", "cube:2", "--kind", "magnetic", "--coeff", "random:1", "--seed", "9"];
    assert_eq!(divcurl(&args, a.path()).0, 0);
    assert_eq!(divcurl(&args, b.path()).0, 0);
    assert_eq!(without_timestamp(a.path()), without_timestamp(b.path()));
    assert_eq!(std::fs::read(a.path().join("h.vtk")).unwrap(), std::fs::read(b.path().join("h.vtk")).unwrap());
}
