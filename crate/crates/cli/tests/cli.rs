use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schrlat"))
        .args(args)
        .env("SCHRLAT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const LATTICE: &[&str] = &["lattice", "--delta-log2", "12", "--sigma", "1/4", "--n", "3", "--c", "1/40"];

#[test]
fn lattice_csv_has_338_rows() {
    let o = run(LATTICE);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_1,x_2,t"));
    assert_eq!(lines.count(), 338);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn csv_and_json_agree() {
    let csv = stdout(&run(LATTICE));
    let mut args = LATTICE.to_vec();
    args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    let t_count = json["t_values"].as_array().unwrap().len();
    let x_count = json["x_values"].as_array().unwrap().len();
    assert_eq!(x_count * x_count * t_count, csv.lines().count() - 1);
}

#[test]
fn concentration_slope_passes() {
    let o = run(&["verify", "concentration", "--delta-log2", "12,16,20", "--sigma", "1/4", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.contains(",min_modulus,")).unwrap();
    let slope: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!((slope - 0.75).abs() < 0.05, "slope {slope}");
}

#[test]
fn region_reports_the_gap() {
    let o = run(&["region", "--n", "4", "--alpha", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"2/3\"") && text.contains("\"4/5\""), "{text}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["extension", "check-red", "--delta-log2", "8", "--sigma", "1/4", "--n", "2", "--count", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&run(LATTICE)), stdout(&run(LATTICE)));
}

#[test]
fn empty_result_is_header_only() {
    let o = run(&["extension", "check-red", "--delta-log2", "12", "--sigma", "1/4", "--n", "3", "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x_1,x_2,x_3,extension,solution,relative_difference\n");
}

#[test]
fn invalid_input_exits_with_2() {
    let non_dyadic = run(&["lattice", "--delta-log2", "12", "--sigma", "1/5", "--n", "3"]);
    assert_eq!(non_dyadic.status.code(), Some(2));
    assert!(!non_dyadic.stderr.is_empty());
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["lattice", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["lattice", "--delta-log2", "12", "--sigma", "1/4", "--n", "3", "--c", "1/100000"]).status.code(), Some(2));
}

#[test]
fn out_writes_the_file_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lattice.csv");
    let mut args = LATTICE.to_vec();
    let p = path.to_str().unwrap();
    args.extend(["--out", p]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&run(LATTICE)));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn failed_run_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let o = run(&["lattice", "--delta-log2", "12", "--sigma", "1/5", "--n", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
