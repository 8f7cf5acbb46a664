use std::path::Path;
use std::process::{Command, Output};

use udcodes::io::parse_code_file;
use udcodes::verify_ud;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udcodes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["verify", "--catalog", "lindstrom"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("UD"));

    let bad = write(dir.path(), "bad.toml", "d = 1\ncodes = [[0, 1], [0, 1]]\n");
    let out = run(&["verify", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("NOT UD"));
    assert!(text.contains("witness (0, 1) (1, 0) sum [1]"), "{text}");

    let dup = write(dir.path(), "dup.toml", "d = 2\ncodes = [[3, 3]]\n");
    let out = run(&["verify", &dup]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("codes[0][1]"));

    let json = write(dir.path(), "l.json", r#"{"d": 2, "codes": [[1, 2, 3], [0, 3]]}"#);
    assert_eq!(run(&["verify", &json]).status.code(), Some(0));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["verify", "--catalog", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "/nonexistent/file.toml"]).status.code(), Some(2));
}

#[test]
fn spectrum_lines() {
    let out = run(&["spectrum", "--catalog", "lindstrom", "--n", "2", "--index", "1"]);
    assert_eq!(stdout(&out), "2 4\n3 4\n4 1\n");
}

#[test]
fn improve_reports_rate_and_certificate() {
    let out = run(&["improve", "--catalog", "T6-KM", "--n", "26", "--g", "8,12,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("dim 104\n"));
    assert!(text.contains("rate 2.005264438\n"));
    assert!(text.contains("gap 1"));
    let full = stdout(&run(&[
        "--precision",
        "improve",
        "--catalog",
        "T6-KM",
        "--n",
        "26",
        "--g",
        "8,12,0,0,0",
    ]));
    assert!(full.contains("rate 2.00526443"));
    assert!(!full.contains("rate 2.005264438\n"));
}

#[test]
fn bounds_and_table() {
    assert_eq!(stdout(&run(&["bounds", "--T", "6"])), "upper 2.3334\n");
    let out = run(&["table1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("all rows match"));
    assert!(text.contains("2.0000"));
}

#[test]
fn search_as_given() {
    let out = run(&["search", "--catalog", "T6-KM", "--nmax", "30", "--as-is"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("best n=26 g2=8 g3=12 g4=0 g5=0 g6=0"), "{text}");
}

#[test]
fn analyze_lindstrom() {
    let text = stdout(&run(&["analyze", "--catalog", "lindstrom"]));
    assert!(text.contains("kappa 1/6"));
    assert!(text.contains("smallest improving n"));
}

#[test]
fn discover_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("found.toml");
    let p = path.to_str().unwrap();
    let out = run(&["discover", "--d", "2", "--sizes", "3,2", "--seed", "3", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    let sys = parse_code_file(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(sys.sizes(), vec![3, 2]);
    assert!(verify_ud(&sys).unwrap().is_ud);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    let fail = run(&["discover", "--d", "1", "--sizes", "2,2", "--budget", "50"]);
    assert_eq!(fail.status.code(), Some(1));
}

#[test]
fn catalog_listing() {
    let text = stdout(&run(&["catalog"]));
    assert_eq!(text.lines().count(), 8);
    let t7 = stdout(&run(&["catalog", "t7-km"]));
    let record: String = t7
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let sys = parse_code_file(&record).unwrap();
    assert_eq!(sys.dim(), 8);
    assert_eq!(sys.users(), 7);
}
