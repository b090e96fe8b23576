use std::path::PathBuf;
use std::process::{Command, Output};

fn lsbbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsbbi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("lsbbi-cli-{}-{name}", std::process::id()))
}

fn suite() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../suites/benchmark.txt").to_string()
}

#[test]
fn prove_reports_and_exits() {
    let o = lsbbi(&["prove", "a -> T* * a"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PROVED\n"));
    assert!(stdout(&o).contains("branches="));
    let o = lsbbi(&["prove", "T*"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("UNPROVED"));
}

#[test]
fn malformed_input_exits_two() {
    assert_eq!(lsbbi(&["prove", "a ->"]).status.code(), Some(2));
    assert_eq!(lsbbi(&["prove"]).status.code(), Some(2));
    assert_eq!(lsbbi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lsbbi(&["prove", "--depth", "0", "a"]).status.code(), Some(2));
    assert_eq!(lsbbi(&["check", "/nonexistent/proof.json"]).status.code(), Some(2));
}

#[test]
fn semantic_flags_enable_their_rules() {
    let pd = "(~(T -* ~T*) * ~(T -* ~T*)) -> ~(T -* ~T*)";
    assert_eq!(lsbbi(&["prove", "--pd", pd]).status.code(), Some(0));
    assert_eq!(lsbbi(&["prove", "--td", "(~T* -* F) -> T*"]).status.code(), Some(0));
    assert_eq!(lsbbi(&["prove", "(~T* -* F) -> T*"]).status.code(), Some(1));
}

#[test]
fn emitted_proofs_check() {
    for (name, args) in [
        ("unit", vec!["prove", "a -> T* * a"]),
        ("assoc", vec!["prove", "a * (b * c) -> (a * b) * c"]),
        ("total", vec!["prove", "--td", "(~T* -* F) -> T*"]),
    ] {
        let path = temp(&format!("{name}.json"));
        let p = path.to_str().unwrap();
        let mut args = args.clone();
        args.extend(["--emit-proof", p]);
        assert_eq!(lsbbi(&args).status.code(), Some(0));
        let o = lsbbi(&["check", p]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).starts_with("ACCEPTED"));
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replacen("\"a0\"", "\"a9\"", 1)).unwrap();
        assert_eq!(lsbbi(&["check", p]).status.code(), Some(1));
        std::fs::write(&path, "{ not json").unwrap();
        assert_eq!(lsbbi(&["check", p]).status.code(), Some(1));
        std::fs::remove_file(&path).unwrap();
    }
}

#[test]
fn check_flags_add_rules_to_the_file() {
    let path = temp("flags.json");
    let p = path.to_str().unwrap();
    let pd = "(~(T -* ~T*) * ~(T -* ~T*)) -> ~(T -* ~T*)";
    assert_eq!(lsbbi(&["prove", "--pd", pd, "--emit-proof", p]).status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut doc = doc.as_object().unwrap().clone();
    assert!(doc.remove("semantics").is_some());
    std::fs::write(&path, serde_json::Value::Object(doc).to_string()).unwrap();
    assert_eq!(lsbbi(&["check", p]).status.code(), Some(1));
    assert_eq!(lsbbi(&["check", "--pd", p]).status.code(), Some(0));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn bench_table_is_deterministic_apart_from_timing() {
    let strip = |o: &Output| -> Vec<String> {
        stdout(o)
            .lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split_whitespace().collect();
                if cols.len() > 3 && cols[0].parse::<usize>().is_ok() {
                    cols.pop();
                }
                cols.join(" ")
            })
            .collect()
    };
    let s = suite();
    let one = lsbbi(&["bench", &s]);
    let two = lsbbi(&["bench", "--jobs", "3", &s]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(strip(&one), strip(&two));
    assert_eq!(stdout(&one).lines().last(), Some("proved 14/14"));
}

#[test]
fn oracle_finds_countermodels() {
    let o = lsbbi(&["oracle", "(a * a) -> a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("COUNTERMODEL"));
    assert_eq!(lsbbi(&["oracle", "a * b -> b * a"]).status.code(), Some(0));
    assert_eq!(lsbbi(&["oracle", "--max-model-size", "9", "a"]).status.code(), Some(2));
}
