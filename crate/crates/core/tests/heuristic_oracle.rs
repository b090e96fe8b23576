mod common;

use common::oracle::{compare, INSTANCES};

#[test]
fn heuristic_agrees_with_brute_force() {
    let c = compare(INSTANCES, 7);
    assert!(c.discrepancies.is_empty(), "{}", c.discrepancies.join("\n"));
    assert_eq!(c.agree, INSTANCES);
    assert!(c.solvable > INSTANCES / 2 && c.solvable < INSTANCES, "solvable {}", c.solvable);
}
