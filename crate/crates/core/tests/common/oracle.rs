//! Random tree-permutation instances solved by the heuristic and by
//! breadth-first search.

use lsbbi::kernel::{FreshLabels, Label, RelAtom};
use lsbbi::relsolve::{brute_permute, eq_classes, heuristic_solve, rel_of_tree, s_apply, RelSet, Tree, TreeSolution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INSTANCES: usize = 600;
const BRUTE_BUDGET: usize = 20_000;

fn l(s: &str) -> Label {
    Label::world(s)
}

/// A random binary tree over `leaves`, with internal labels from `internal`.
fn random_tree(rng: &mut ChaCha8Rng, leaves: &[Label], internal: &mut dyn FnMut() -> Label) -> Tree {
    if leaves.len() == 1 {
        return Tree::leaf(leaves[0].clone());
    }
    let cut = rng.gen_range(1..leaves.len());
    let label = internal();
    let left = random_tree(rng, &leaves[..cut], internal);
    let right = random_tree(rng, &leaves[cut..], internal);
    Tree::node(label, left, right)
}

struct Instance {
    g: RelSet,
    source: Tree,
    target: Tree,
    vars: Vec<Label>,
}

fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let width = rng.gen_range(2..=5);
    let leaves: Vec<Label> = (0..width).map(|i| l(&format!("b{i}"))).collect();
    let mut n = 0;
    let mut ground = || {
        n += 1;
        if n == 1 {
            l("r")
        } else {
            l(&format!("k{n}"))
        }
    };
    let source = random_tree(rng, &leaves, &mut ground);
    let mut g = rel_of_tree(&source).expect("width at least 2");
    for i in 0..rng.gen_range(0..=(6 - g.len()).min(2)) {
        g.insert(RelAtom::new(l(&format!("d{i}")), l("b0"), l(&format!("e{i}"))));
    }
    let mut target_leaves = leaves.clone();
    target_leaves.shuffle(rng);
    if rng.gen_bool(0.2) {
        target_leaves[0] = l("stranger");
    }
    let mut m = 0;
    let mut var = || {
        m += 1;
        if m == 1 {
            l("r")
        } else {
            Label::Var(m)
        }
    };
    let target = random_tree(rng, &target_leaves, &mut var);
    let vars = target.internal_labels()[1..].to_vec();
    Instance { g, source, target, vars }
}

/// Whether the witness turns `g` into a set containing the bound target,
/// up to the identifications derivable afterwards.
fn replays(g: &RelSet, target: &Tree, sol: &TreeSolution) -> bool {
    let Ok((s, subst)) = s_apply(g, &sol.sigma) else {
        return false;
    };
    let eq = eq_classes(&s);
    let bound = target.map_labels(&|x| {
        let v = sol.assignment.iter().find(|(v, _)| v == x).map_or(x.clone(), |(_, w)| w.clone());
        eq.rep(&subst.apply(&v))
    });
    let Ok(want) = rel_of_tree(&bound) else {
        return false;
    };
    want.iter().all(|a| eq.normalized.contains(a))
}

#[derive(Debug, Default)]
pub struct Comparison {
    pub agree: usize,
    pub solvable: usize,
    pub discrepancies: Vec<String>,
}

/// Runs `count` seeded instances.
pub fn compare(count: usize, seed: u64) -> Comparison {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Comparison::default();
    for i in 0..count {
        let inst = instance(&mut rng);
        assert!(inst.source.width() <= 5 && inst.g.len() <= 6);
        let h = heuristic_solve(&inst.g, &inst.target, &inst.vars, &mut FreshLabels::new()).ok();
        let b = brute_permute(&inst.source, &inst.target, BRUTE_BUDGET, &mut FreshLabels::new());
        let ok = h.is_some() == b.is_some()
            && h.as_ref().is_none_or(|s| replays(&inst.g, &inst.target, s))
            && b.as_ref().is_none_or(|s| replays(&inst.g, &inst.target, s));
        out.solvable += usize::from(h.is_some());
        if ok {
            out.agree += 1;
        } else {
            out.discrepancies.push(format!("instance {i}: heuristic {} brute {}", h.is_some(), b.is_some()));
        }
    }
    out
}

