//! Entailment between sets of relational atoms: structural-rule sequences,
//! label identification, bounded search and tree permutations.

mod entail;
mod eq;
mod sigma;
mod tree;

pub use entail::{
    pattern_holds, prune, r_entails, r_entails_with, r_match, Budget, EntailOptions, Goal, Match, Pattern, Slot,
};
pub use eq::{eq_classes, normalize, EqClasses};
pub use sigma::{apply_step, s_apply, RelSet, SApplyError, SigmaSeq, StepError, StructuralStep};
pub use tree::{
    brute_permute, find_tree, heuristic_solve, match_variant, rel_of_tree, trees_of, Multiset, Tree, TreeError,
    TreeSolution,
};
