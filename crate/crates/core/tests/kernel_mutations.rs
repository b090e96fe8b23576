mod common;

use std::collections::BTreeMap;

use common::{f, kernel_accepts, mutants, mutation_corpus, prove_with};

#[test]
fn every_single_mutation_is_rejected() {
    let corpus = mutation_corpus();
    assert!(corpus.len() >= 10);
    let mut killed: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut survivors = Vec::new();
    for (text, extras) in &corpus {
        let out = prove_with(&f(text), extras.clone());
        let proof = out.proof().unwrap_or_else(|| panic!("{text} is not proved"));
        assert!(kernel_accepts(&proof.derivation, extras), "{text}: proof rejected");
        for m in mutants(&proof.derivation) {
            let entry = killed.entry(m.kind).or_default();
            entry.1 += 1;
            if kernel_accepts(&m.tree, extras) {
                survivors.push(format!("{text}: {} at {:?}", m.kind, m.path));
            } else {
                entry.0 += 1;
            }
        }
    }
    for (kind, (k, n)) in &killed {
        println!("{kind}: {k}/{n} killed");
    }
    for kind in ["rename", "delete", "swap", "fresh"] {
        assert!(killed.get(kind).is_some_and(|(_, n)| *n > 0), "no {kind} mutants generated");
    }
    assert!(survivors.is_empty(), "surviving mutants:\n{}", survivors.join("\n"));
}
