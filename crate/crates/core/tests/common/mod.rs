//! Formula corpus and checks shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use lsbbi::formula::{parse, parse_suite, Formula, RESERVED};
use lsbbi::kernel::{check, CheckOptions, Derivation, Extra, Label, Rule};
use lsbbi::search::{prove, Outcome, SearchOptions};

pub const BENCHMARK: &str = include_str!("../../../../suites/benchmark.txt");

pub const UNIT_INTRO: &str = "a -> T* * a";
pub const UNIT_ELIM: &str = "T* * a -> a";
pub const EXCHANGE: &str = "a * b -> b * a";
pub const ASSOCIATIVITY: &str = "a * (b * c) -> (a * b) * c";
pub const MONOID_LAWS: [&str; 4] = [UNIT_INTRO, UNIT_ELIM, EXCHANGE, ASSOCIATIVITY];
pub const HARD: &str = "~(T* & a & (b * ~(c -* (T* -> a))))";
pub const UNIT: &str = "T*";
/// `(F * F) -> F` for `F = ~(T -* ~T*)`: needs partial determinism.
pub const PD_ONLY: &str = "(~(T -* ~T*) * ~(T -* ~T*)) -> ~(T -* ~T*)";
/// Need totality.
pub const TD_ONLY: [&str; 2] = ["(~T* -* F) -> T*", "(T* & ((p * q) -* F)) -> ((p -* F) | (q -* F))"];

pub fn f(text: &str) -> Formula {
    parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn benchmark() -> Vec<Formula> {
    parse_suite(BENCHMARK).expect("suite parses").into_iter().map(|e| e.formula).collect()
}

pub fn extras(names: &[Extra]) -> BTreeSet<Extra> {
    names.iter().copied().collect()
}

pub fn prove_with(f: &Formula, extras: BTreeSet<Extra>) -> Outcome {
    prove(
        f,
        &SearchOptions {
            extras,
            ..SearchOptions::default()
        },
    )
}

pub fn kernel_accepts(d: &Derivation, extras: &BTreeSet<Extra>) -> bool {
    check(
        d,
        &CheckOptions {
            allow_cut: false,
            extras: extras.clone(),
        },
    )
    .accepted
}

pub const STRUCTURAL: [Rule; 10] = [
    Rule::E,
    Rule::A,
    Rule::U,
    Rule::AC,
    Rule::Eq1,
    Rule::Eq2,
    Rule::P,
    Rule::T,
    Rule::IU,
    Rule::C,
];

/// Formulas the mutation suite proves and mutates, with their extras.
pub fn mutation_corpus() -> Vec<(String, BTreeSet<Extra>)> {
    let mut out: Vec<(String, BTreeSet<Extra>)> = MONOID_LAWS.iter().map(|s| (s.to_string(), BTreeSet::new())).collect();
    out.push((HARD.to_string(), BTreeSet::new()));
    out.push((PD_ONLY.to_string(), extras(&[Extra::P])));
    out.push((TD_ONLY[0].to_string(), extras(&[Extra::P, Extra::T])));
    for e in parse_suite(BENCHMARK).expect("suite parses").into_iter().take(6) {
        out.push((e.text, BTreeSet::new()));
    }
    out
}

/// A single mutation of a derivation.
#[derive(Clone, Debug)]
pub struct Mutant {
    pub kind: &'static str,
    pub path: Vec<usize>,
    pub tree: Derivation,
}

fn labels_in_conclusion(d: &Derivation) -> BTreeSet<Label> {
    d.conclusion.labels()
}

/// Every mutation of the four kinds: one renamed label occurrence in a
/// conclusion, one structural node deleted, the premises of a binary rule
/// swapped when they differ, a fresh label replaced by one already present.
pub fn mutants(root: &Derivation) -> Vec<Mutant> {
    let mut out = Vec::new();
    let outsider = Label::world("zz_mut");
    for path in root.paths() {
        let node = root.at(&path).expect("path from paths()").clone();
        let mut push = |kind, replacement: Derivation| {
            let mut tree = root.clone();
            *tree.at_mut(&path).expect("path from paths()") = replacement;
            out.push(Mutant {
                kind,
                path: path.clone(),
                tree,
            });
        };
        let c = &node.conclusion;
        for i in 0..c.rels.len() {
            for k in 0..3 {
                let mut n = node.clone();
                let a = &mut n.conclusion.rels[i];
                match k {
                    0 => a.left = outsider.clone(),
                    1 => a.right = outsider.clone(),
                    _ => a.parent = outsider.clone(),
                }
                push("rename", n);
            }
        }
        for i in 0..c.lhs.len() {
            let mut n = node.clone();
            n.conclusion.lhs[i].0 = outsider.clone();
            push("rename", n);
        }
        for i in 0..c.rhs.len() {
            let mut n = node.clone();
            n.conclusion.rhs[i].0 = outsider.clone();
            push("rename", n);
        }
        if STRUCTURAL.contains(&node.rule) && node.premises.len() == 1 {
            push("delete", node.premises[0].clone());
        }
        if node.premises.len() == 2 && node.premises[0].conclusion != node.premises[1].conclusion {
            let mut n = node.clone();
            n.premises.swap(0, 1);
            push("swap", n);
        }
        for i in 0..node.params.fresh.len() {
            for existing in labels_in_conclusion(&node) {
                let mut n = node.clone();
                n.params.fresh[i] = existing;
                push("fresh", n);
            }
        }
    }
    out
}

pub fn atom() -> impl Strategy<Value = Formula> {
    "[a-z][a-z0-9_]{0,3}"
        .prop_filter("reserved words are not atoms", |s| !RESERVED.contains(&s.as_str()))
        .prop_map(|s| Formula::Atom(Arc::from(s.as_str())))
}

/// Formulas of depth at most 8 over short atom names.
pub fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        4 => atom(),
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
        1 => Just(Formula::MEmp),
    ];
    leaf.prop_recursive(8, 128, 2, |inner| {
        let b = |x: Formula| Box::new(x);
        prop_oneof![
            inner.clone().prop_map(move |x| Formula::Not(b(x))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Formula::And(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Formula::Or(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Formula::Imp(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Formula::Star(b(x), b(y))),
            (inner.clone(), inner).prop_map(move |(x, y)| Formula::Wand(b(x), b(y))),
        ]
    })
}

pub fn depth(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) | Formula::Top | Formula::Bot | Formula::MEmp => 0,
        Formula::Not(x) => 1 + depth(x),
        Formula::And(x, y) | Formula::Or(x, y) | Formula::Imp(x, y) | Formula::Star(x, y) | Formula::Wand(x, y) => {
            1 + depth(x).max(depth(y))
        }
    }
}
