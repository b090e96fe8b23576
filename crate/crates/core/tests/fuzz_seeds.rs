//! Replays the checked-in fuzz corpus through the properties the fuzz
//! targets assert.

use std::path::PathBuf;

use lsbbi::formula::{parse, parse_suite, print};
use lsbbi::kernel::{check, from_json, to_json_with_semantics, CheckOptions};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.expect("directory entry").path();
            let text = std::fs::read_to_string(&path).expect("seed is UTF-8");
            (path, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn formula_seeds_round_trip() {
    let mut parsed = 0;
    for (path, text) in seeds("parse_formula") {
        if let Ok(f) = parse(&text) {
            parsed += 1;
            assert_eq!(parse(&print(&f)).as_ref(), Ok(&f), "{}", path.display());
        }
    }
    assert!(parsed >= 14);
}

#[test]
fn proof_seeds_re_encode() {
    let mut accepted = 0;
    for (path, text) in seeds("proof_json") {
        let Ok(file) = from_json(&text) else {
            continue;
        };
        let opts = CheckOptions {
            allow_cut: true,
            extras: file.semantics.clone(),
        };
        let report = check(&file.root, &opts);
        accepted += usize::from(report.accepted);
        let again = from_json(&to_json_with_semantics(&file.root, &file.semantics)).expect("re-encoded proof decodes");
        assert_eq!(again.root, file.root, "{}", path.display());
        assert_eq!(check(&again.root, &opts).accepted, report.accepted);
    }
    assert_eq!(accepted, 3);
}

#[test]
fn suite_seeds_agree_with_the_formula_parser() {
    let mut entries = 0;
    for (_, text) in seeds("suite") {
        if let Ok(es) = parse_suite(&text) {
            for e in es {
                entries += 1;
                assert_eq!(parse(&e.text).as_ref(), Ok(&e.formula));
            }
        }
    }
    assert_eq!(entries, 14);
}
