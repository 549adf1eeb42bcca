use std::process::{Command, Output};

use serde_json::Value;

fn folstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folstab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

const TORUS: [&str; 7] = ["run", "--space", "flat_torus:extents=1x1", "--foliation", "linear", "--res", "16"];

#[test]
fn identical_runs_are_byte_identical() {
    let args: Vec<&str> = TORUS.iter().copied().chain(["--suite", "spectrum,harmonicity,second-variation", "--seed", "7"]).collect();
    let a = folstab(&args);
    let b = folstab(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["schema"], "folstab-report/1");
    assert!(!String::from_utf8_lossy(&a.stdout).contains("wall"));
    assert!(String::from_utf8_lossy(&a.stderr).contains("wall time"));
}

#[test]
fn seed_changes_the_report() {
    let base: Vec<&str> = TORUS.iter().copied().chain(["--suite", "second-variation"]).collect();
    let a = folstab(&[base.as_slice(), &["--seed", "1"]].concat());
    let b = folstab(&[base.as_slice(), &["--seed", "2"]].concat());
    assert_ne!(a.stdout, b.stdout);
    assert_ne!(json(&a)["metadata"]["config_hash"], json(&b)["metadata"]["config_hash"]);
}

#[test]
fn empty_suite_selection_reports_metadata_only() {
    let out = folstab(&["run", "--suite", ""]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["suites"].as_array().unwrap().len(), 0);
    assert_eq!(r["passed"], true);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["run", "--res", "4"],
        vec!["run", "--suite", "everything"],
        vec!["run", "--space", "klein_bottle"],
        vec!["run", "--format", "yaml"],
        vec!["run", "--tolerance-scale", "-1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(folstab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_errors_exit_3() {
    assert_eq!(folstab(&["run", "--config", "/nonexistent/folstab.conf"]).status.code(), Some(3));
    assert_eq!(folstab(&["run", "--suite", "", "--out", "/nonexistent/dir/report.json"]).status.code(), Some(3));
    assert_eq!(folstab(&["emit", "--in", "/nonexistent/report.json"]).status.code(), Some(3));
    assert_eq!(folstab(&["classify", "--catalog", "/nonexistent/symspaces.txt"]).status.code(), Some(3));
}

#[test]
fn failed_checks_exit_1() {
    let out = folstab(&["run", "--space", "warped_torus", "--foliation", "warped_circles", "--suite", "harmonicity", "--res", "12"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["passed"], false);
    assert_eq!(r["suites"][0]["status"], "failed");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# torus\nspace = flat_torus:extents=1x1\nfoliation = linear\nsuite = spectrum\nres = 12\n").unwrap();
    let out_path = dir.path().join("r.json");
    let out = folstab(&["run", "--config", conf.to_str().unwrap(), "--res", "16", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["metadata"]["config"]["res"], "16");
    assert_eq!(r["suites"][0]["data"]["resolution"], serde_json::json!([16, 16]));
}

#[test]
fn emit_round_trips_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args: Vec<&str> = TORUS.iter().copied().chain(["--suite", "spectrum", "--out", path.to_str().unwrap()]).collect();
    assert_eq!(folstab(&args).status.code(), Some(0));
    let original = std::fs::read_to_string(&path).unwrap();
    let again = folstab(&["emit", "--in", path.to_str().unwrap()]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), original);

    let csv = folstab(&["emit", "--in", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("suite,kind,name,index,value,relation,tolerance,resolution,passed"));
    let eig: Vec<f64> = text
        .lines()
        .filter(|l| l.contains(",eigenvalue,"))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eig.len(), 6);
    assert!(eig.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn classify_clause_bounds() {
    let out = folstab(&["classify", "--name", "SU(4)/Sp(2)"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &json(&out)["suites"][0]["data"]["records"][0];
    assert_eq!(rec["unstable"], false);
    assert_eq!(rec["clause"], "c");
    assert_eq!(rec["condition_lambda1"], true);

    let out = folstab(&["classify", "--name", "SU(6)/Sp(3)", "--name", "S^5"]);
    let data = &json(&out)["suites"][0]["data"];
    assert_eq!(data["records"][0]["unstable"], true);
    assert_eq!(data["product_unstable"], true);

    assert_eq!(folstab(&["classify", "--name", "SU(99)"]).status.code(), Some(1));
}

#[test]
fn classify_reads_a_catalog_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.txt");
    std::fs::write(&path, "# name | tag | params | dim | lambda1 | scalar | sc | irr | normalization | source\nS^4 | d | n=4 | 4 | 4 | 12 | true | true | round, K = 1 | test\n").unwrap();
    let out = folstab(&["classify", "--catalog", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["suites"][0]["data"]["records"][0]["unstable"], true);
}

#[test]
fn list_spaces_names_every_builtin() {
    let out = String::from_utf8(folstab(&["list-spaces"]).stdout).unwrap();
    for name in ["flat_torus", "round_sphere", "hopf_s3_fibration", "hopf_complex", "cpn_fubini_study", "warped_torus"] {
        assert!(out.contains(name), "{name}");
    }
}
