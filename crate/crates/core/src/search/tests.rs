use super::*;
use crate::formula::parse;
use crate::kernel::{check, CheckOptions, RelAtom};

fn f(s: &str) -> Formula {
    parse(s).unwrap()
}

fn a(n: u32) -> Label {
    Label::world(&format!("a{n}"))
}

fn root(s: &str) -> (Sequent, FreshLabels) {
    let mut fresh = FreshLabels::with_prefix("a");
    let w = fresh.fresh_where(|_| false);
    (Sequent::goal(w, f(s)), fresh)
}

fn quick() -> SearchOptions {
    SearchOptions {
        timeout: Duration::from_secs(5),
        ..Default::default()
    }
}

#[test]
fn saturation_decomposes_nested_stars() {
    let (s, mut fresh) = root("((a * b) * c) -> (a * (b * c))");
    let sat = saturate(&s, &mut fresh).unwrap();
    assert_eq!(sat.leaves.len(), 1);
    let leaf = &sat.leaves[0];
    assert_eq!(
        leaf.rels,
        vec![RelAtom::new(a(1), a(2), a(0)), RelAtom::new(a(3), a(4), a(1))]
    );
    assert_eq!(leaf.rhs, vec![(a(0), f("a * (b * c)"))]);
    assert_eq!(leaf.lhs.len(), 3);
}

#[test]
fn saturation_drops_closed_branches() {
    let (s, mut fresh) = root("(F & a) -> b");
    let sat = saturate(&s, &mut fresh).unwrap();
    assert!(sat.leaves.is_empty());
}

#[test]
fn unit_on_the_left_records_its_atom() {
    let (s, mut fresh) = root("T* -> a");
    let sat = saturate(&s, &mut fresh).unwrap();
    assert_eq!(sat.leaves[0].rels, vec![RelAtom::new(Label::Eps, a(0), Label::Eps)]);
    assert!(sat.leaves[0].lhs.is_empty());
}

#[test]
fn proves_exchange_with_checked_derivation() {
    let out = prove(&f("(a * b) -> (b * a)"), &quick());
    let p = out.proof().expect("proved");
    let report = check(&p.derivation, &CheckOptions::default());
    assert!(report.accepted, "{:?}", report.violation);
    assert!(p.derivation.count(Rule::StarR) >= 1);
    assert!(p.derivation.count(Rule::E) >= 1);
    assert_eq!(out.stats().multiplicity, 1);
}

#[test]
fn proves_unit_laws() {
    for s in ["a -> (T* * a)", "(T* * a) -> a"] {
        assert!(prove(&f(s), &quick()).is_proved(), "{s}");
    }
}

#[test]
fn unit_alone_is_not_valid() {
    let out = prove(&f("T*"), &quick());
    assert!(matches!(out, Outcome::Unproved(StopReason::Exhausted, _)));
}

#[test]
fn proves_associativity() {
    let out = prove(&f("T* -> ((a * (b * c)) -* ((a * b) * c))"), &quick());
    let p = out.proof().expect("proved");
    assert!(check(&p.derivation, &CheckOptions::default()).accepted);
    assert!(p.derivation.count(Rule::A) >= 1);
}

#[test]
fn reconstruction_reports_missing_assignment() {
    let out = prove(&f("(a * b) -> (b * a)"), &quick());
    let p = out.proof().unwrap();
    let mut sol = p.solution.clone();
    sol.theta = crate::kernel::Substitution::identity();
    let err = reconstruct(&p.symbolic, &sol, &BTreeSet::new()).unwrap_err();
    assert!(matches!(err, ReconstructError::Unassigned(_)), "{err}");
}

#[test]
fn example_derivation_rule_multiset() {
    let out = prove(&f("a -> T* * a"), &quick());
    let d = &out.proof().expect("proved").derivation;
    for r in [Rule::ImpR, Rule::StarR, Rule::EmpR, Rule::Id] {
        assert_eq!(d.count(r), 1, "{r}");
    }
    for r in d.rules() {
        assert!(
            r.is_structural() || [Rule::ImpR, Rule::StarR, Rule::EmpR, Rule::Id].contains(&r),
            "{r}"
        );
    }
}

#[test]
fn short_proof_of_the_hard_formula() {
    let out = prove(&f("~(T* & a & (b * ~(c -* (T* -> a))))"), &quick());
    let d = &out.proof().expect("proved").derivation;
    assert_eq!(d.count(Rule::EmpL), 2);
    assert!(d.count(Rule::StarL) >= 1);
    assert!(d.count(Rule::WandR) >= 1);
    assert!(out.stats().elapsed < Duration::from_secs(1));
}

#[test]
fn totality_needs_its_rule() {
    let f = f("(~T* -* F) -> T*");
    let mut opts = quick();
    assert!(!prove(&f, &opts).is_proved());
    opts.extras = [Extra::P, Extra::T].into_iter().collect();
    let out = prove(&f, &opts);
    let d = &out.proof().expect("proved").derivation;
    assert!(d.count(Rule::T) >= 1);
    let report = check(d, &CheckOptions::with_extras(opts.extras.clone()));
    assert!(report.accepted);
    assert!(!check(d, &CheckOptions::default()).accepted);
}

#[test]
fn saturation_steps_bounded_by_connectives() {
    for s in [
        "((a * b) * c) -> (a * (b * c))",
        "~((a -* ~(a * b)) & ((~a -* ~b) & b))",
        "(T* & ((p * q) -* F)) -> ((p -* F) | (q -* F))",
    ] {
        let (seq, mut fresh) = root(s);
        let sat = saturate(&seq, &mut fresh).unwrap();
        assert!(sat.steps <= f(s).size(), "{s}");
    }
}

#[test]
fn proofs_persist_at_higher_multiplicity() {
    let g = f("(a * (b * c)) -> ((a * b) * c)");
    for m in 1..=3 {
        let opts = SearchOptions {
            multiplicity: m,
            ..quick()
        };
        assert!(prove(&g, &opts).is_proved(), "multiplicity {m}");
    }
}
