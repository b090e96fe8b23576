use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use super::sigma::{apply_step, RelSet, SigmaSeq, StructuralStep};
use crate::kernel::{FreshLabels, Label, RelAtom};

/// A labelled binary tree: a leaf, or a node with exactly two children.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tree {
    pub label: Label,
    pub children: Option<Box<(Tree, Tree)>>,
}

/// Leaf labels with multiplicities.
pub type Multiset = BTreeMap<Label, usize>;

fn ms_add(m: &mut Multiset, l: &Label, n: usize) {
    *m.entry(l.clone()).or_default() += n;
}

fn ms_union(a: &Multiset, b: &Multiset) -> Multiset {
    let mut out = a.clone();
    for (l, n) in b {
        ms_add(&mut out, l, *n);
    }
    out
}

fn ms_intersection(a: &Multiset, b: &Multiset) -> Multiset {
    a.iter()
        .filter_map(|(l, n)| b.get(l).map(|m| (l.clone(), (*n).min(*m))))
        .filter(|(_, n)| *n > 0)
        .collect()
}

fn ms_difference(a: &Multiset, b: &Multiset) -> Multiset {
    a.iter()
        .filter_map(|(l, n)| {
            let left = n.saturating_sub(b.get(l).copied().unwrap_or(0));
            (left > 0).then(|| (l.clone(), left))
        })
        .collect()
}

fn ms_subset(a: &Multiset, b: &Multiset) -> bool {
    a.iter().all(|(l, n)| b.get(l).copied().unwrap_or(0) >= *n)
}

impl Tree {
    pub fn leaf(label: Label) -> Tree {
        Tree {
            label,
            children: None,
        }
    }

    pub fn node(label: Label, left: Tree, right: Tree) -> Tree {
        Tree {
            label,
            children: Some(Box::new((left, right))),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// Number of leaves.
    pub fn width(&self) -> usize {
        match &self.children {
            None => 1,
            Some(c) => c.0.width() + c.1.width(),
        }
    }

    /// Leaf labels from left to right.
    pub fn leaves(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Label>) {
        match &self.children {
            None => out.push(self.label.clone()),
            Some(c) => {
                c.0.collect_leaves(out);
                c.1.collect_leaves(out);
            }
        }
    }

    pub fn leaf_multiset(&self) -> Multiset {
        let mut m = Multiset::new();
        for l in self.leaves() {
            ms_add(&mut m, &l, 1);
        }
        m
    }

    /// Labels of internal nodes, root first.
    pub fn internal_labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.collect_internal(&mut out);
        out
    }

    fn collect_internal(&self, out: &mut Vec<Label>) {
        if let Some(c) = &self.children {
            out.push(self.label.clone());
            c.0.collect_internal(out);
            c.1.collect_internal(out);
        }
    }

    /// The tree with internal labels erased, as a comparison key.
    fn shape_key(&self) -> String {
        match &self.children {
            None => self.label.to_string(),
            Some(c) => format!("({} {})", c.0.shape_key(), c.1.shape_key()),
        }
    }

    pub fn map_labels(&self, f: &impl Fn(&Label) -> Label) -> Tree {
        Tree {
            label: f(&self.label),
            children: self
                .children
                .as_ref()
                .map(|c| Box::new((c.0.map_labels(f), c.1.map_labels(f)))),
        }
    }

    fn push_rel(&self, out: &mut RelSet) {
        if let Some(c) = &self.children {
            out.insert(RelAtom::new(c.0.label.clone(), c.1.label.clone(), self.label.clone()));
            c.0.push_rel(out);
            c.1.push_rel(out);
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.children {
            None => write!(f, "{}", self.label),
            Some(c) => write!(f, "{}[{}, {}]", self.label, c.0, c.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("a tree of width {0} has no relational atoms")]
    TooNarrow(usize),
    #[error("internal node {0} is not a free variable occurring once")]
    InternalNotVar(Label),
    #[error("leaf or root {0} must be a ground label other than eps")]
    BadEndpoint(Label),
    #[error("the variable order does not list the internal nodes")]
    VarOrder,
    #[error("no subset of the atoms forms a tree rooted at {root} with leaves {leaves}")]
    NoMatchingTree { root: Label, leaves: String },
}

/// The relational atoms encoded by a tree.
pub fn rel_of_tree(tr: &Tree) -> Result<RelSet, TreeError> {
    if tr.is_leaf() {
        return Err(TreeError::TooNarrow(1));
    }
    let mut out = RelSet::new();
    tr.push_rel(&mut out);
    Ok(out)
}

/// Splits a set of atoms into the trees it encodes, or `None` when it does
/// not encode a forest with each atom used once.
pub fn trees_of(r: &RelSet) -> Option<Vec<Tree>> {
    let mut by_parent: BTreeMap<&Label, &RelAtom> = BTreeMap::new();
    for a in r {
        if by_parent.insert(&a.parent, a).is_some() {
            return None;
        }
    }
    let mut child_uses: BTreeMap<&Label, usize> = BTreeMap::new();
    for a in r {
        for c in [&a.left, &a.right] {
            if by_parent.contains_key(c) {
                *child_uses.entry(c).or_default() += 1;
            }
        }
    }
    if child_uses.values().any(|n| *n > 1) {
        return None;
    }
    let mut used = 0usize;
    let mut trees = Vec::new();
    for root in by_parent.keys().filter(|l| !child_uses.contains_key(*l)) {
        trees.push(grow(root, &by_parent, &mut used)?);
    }
    (used == r.len()).then_some(trees)
}

fn grow(l: &Label, by_parent: &BTreeMap<&Label, &RelAtom>, used: &mut usize) -> Option<Tree> {
    match by_parent.get(l) {
        None => Some(Tree::leaf(l.clone())),
        Some(a) => {
            *used += 1;
            if *used > by_parent.len() {
                return None;
            }
            let left = grow(&a.left, by_parent, used)?;
            let right = grow(&a.right, by_parent, used)?;
            Some(Tree::node(l.clone(), left, right))
        }
    }
}

/// Searches `g` for a tree of width at least two rooted at `root` whose leaves
/// form the multiset `leaves`.
pub fn find_tree(g: &RelSet, root: &Label, leaves: &Multiset) -> Option<Tree> {
    let mut st = FindState {
        g,
        remaining: leaves.clone(),
        used: BTreeSet::new(),
        path: Vec::new(),
    };
    let mut found = None;
    st.expand(root, &mut |st, t| {
        if st.remaining.values().all(|n| *n == 0) {
            found = Some(t);
            true
        } else {
            false
        }
    });
    found
}

struct FindState<'a> {
    g: &'a RelSet,
    remaining: Multiset,
    used: BTreeSet<RelAtom>,
    path: Vec<Label>,
}

type TreeK<'k> = dyn FnMut(&mut FindState, Tree) -> bool + 'k;

impl FindState<'_> {
    /// A node that may be a leaf.
    fn subtree(&mut self, l: &Label, k: &mut TreeK) -> bool {
        if self.remaining.get(l).copied().unwrap_or(0) > 0 {
            *self.remaining.get_mut(l).expect("present") -= 1;
            if k(self, Tree::leaf(l.clone())) {
                return true;
            }
            *self.remaining.get_mut(l).expect("present") += 1;
        }
        self.expand(l, k)
    }

    /// A node decomposed by some unused atom.
    fn expand(&mut self, l: &Label, k: &mut TreeK) -> bool {
        if self.path.contains(l) {
            return false;
        }
        let atoms: Vec<RelAtom> = self
            .g
            .iter()
            .filter(|a| a.parent == *l && !self.used.contains(*a))
            .cloned()
            .collect();
        for a in atoms {
            self.used.insert(a.clone());
            self.path.push(l.clone());
            let parent = l.clone();
            let right_label = a.right.clone();
            let done = self.subtree(&a.left, &mut |st, lt| {
                st.subtree(&right_label, &mut |st, rt| k(st, Tree::node(parent.clone(), lt.clone(), rt)))
            });
            self.path.pop();
            self.used.remove(&a);
            if done {
                return true;
            }
        }
        false
    }
}

/// What a permutation must produce below a node.
#[derive(Clone, Debug)]
enum Target {
    Leaf(Label),
    /// An internal node; the label is the variable to assign, if any.
    Node(Option<Label>, Box<Target>, Box<Target>),
    /// Any tree over these leaves.
    Any(Multiset),
}

impl Target {
    fn of_pattern(tr: &Tree, root: bool) -> Target {
        match &tr.children {
            None => Target::Leaf(tr.label.clone()),
            Some(c) => Target::Node(
                (!root).then(|| tr.label.clone()),
                Box::new(Target::of_pattern(&c.0, false)),
                Box::new(Target::of_pattern(&c.1, false)),
            ),
        }
    }

    fn leaves(&self) -> Multiset {
        match self {
            Target::Leaf(l) => [(l.clone(), 1)].into_iter().collect(),
            Target::Node(_, a, b) => ms_union(&a.leaves(), &b.leaves()),
            Target::Any(m) => m.clone(),
        }
    }

    fn split(left: Multiset, right: Multiset) -> Target {
        Target::Node(None, Box::new(Target::Any(left)), Box::new(Target::Any(right)))
    }
}

/// Applies structural steps to a working set while recording them.
struct Permuter<'a> {
    set: RelSet,
    sigma: SigmaSeq,
    fresh: &'a mut FreshLabels,
    avoid: BTreeSet<Label>,
}

impl Permuter<'_> {
    fn push(&mut self, step: StructuralStep) {
        apply_step(&mut self.set, &step).expect("permutation steps use present atoms");
        for l in &step.introduced {
            self.avoid.insert(l.clone());
        }
        self.sigma.push(step);
    }

    fn fresh(&mut self) -> Label {
        let avoid = &self.avoid;
        let w = self.fresh.fresh_where(|l| avoid.contains(l));
        self.avoid.insert(w.clone());
        w
    }

    fn exchange(&mut self, a: &RelAtom) {
        if !self.set.contains(&a.swapped()) {
            self.push(StructuralStep::e(a));
        }
    }

    fn assoc(&mut self, first: &RelAtom, second: &RelAtom) -> Label {
        let w = self.fresh();
        let step = StructuralStep::a(first, second, w.clone()).expect("second decomposes first.left");
        self.push(step);
        w
    }

    /// Rearranges `src` (whose atoms are in the set) until it matches `tgt`.
    fn permute(&mut self, src: Tree, tgt: &Target) -> Tree {
        let (tl, tr) = match tgt {
            Target::Any(_) | Target::Leaf(_) => return src,
            Target::Node(_, tl, tr) => (tl, tr),
        };
        let (s1, s2) = match src.children {
            Some(c) => *c,
            None => unreachable!("leaf multisets agree"),
        };
        let r = src.label;
        let (l1, l2, l3) = (s1.leaf_multiset(), s2.leaf_multiset(), tl.leaves());
        let l4 = tr.leaves();
        let atom = |a: &Tree, b: &Tree, p: &Label| RelAtom::new(a.label.clone(), b.label.clone(), p.clone());

        if l1 == l3 {
            let a = self.permute(s1, tl);
            let b = self.permute(s2, tr);
            return Tree::node(r, a, b);
        }
        let swap = l1 == l4
            || (!ms_subset(&l1, &l3) && ms_subset(&l2, &l3))
            || (!ms_subset(&l1, &l3) && !ms_subset(&l3, &l1) && ms_subset(&l3, &l2));
        if swap {
            self.exchange(&atom(&s1, &s2, &r));
            return self.permute(Tree::node(r, s2, s1), tgt);
        }
        if ms_subset(&l1, &l3) {
            // Move part of the right subtree under the left one.
            let extra = ms_difference(&l3, &l1);
            let rest = ms_difference(&l2, &extra);
            let s2 = self.permute(s2, &Target::split(extra, rest));
            let (s7, s8) = *s2.children.clone().expect("split node");
            let top = atom(&s1, &s2, &r);
            let low = atom(&s7, &s8, &s2.label);
            self.exchange(&top);
            self.exchange(&low);
            let w = self.assoc(&top.swapped(), &low.swapped());
            self.exchange(&RelAtom::new(s8.label.clone(), w.clone(), r.clone()));
            let joined = Tree::node(w, s1, s7);
            return self.permute(Tree::node(r, joined, s8), tgt);
        }
        if ms_subset(&l3, &l1) {
            // Lift part of the left subtree to the root.
            let rest = ms_difference(&l1, &l3);
            let s1 = self.permute(s1, &Target::split(l3.clone(), rest));
            let (s5, s6) = *s1.children.clone().expect("split node");
            let top = atom(&s1, &s2, &r);
            let low = atom(&s5, &s6, &s1.label);
            let w = self.assoc(&top, &low);
            let moved = Tree::node(w, s2, s6);
            return self.permute(Tree::node(r, s5, moved), tgt);
        }
        // Both subtrees contribute to each side.
        let keep_left = ms_intersection(&l1, &l3);
        let from_right = ms_difference(&l3, &keep_left);
        let s1 = self.permute(s1, &Target::split(keep_left.clone(), ms_difference(&l1, &keep_left)));
        let s2 = self.permute(s2, &Target::split(from_right.clone(), ms_difference(&l2, &from_right)));
        let (s5, s6) = *s1.children.clone().expect("split node");
        let (s7, s8) = *s2.children.clone().expect("split node");
        let (w1, w2) = (s1.label.clone(), s2.label.clone());
        let root_atom = RelAtom::new(w1.clone(), w2.clone(), r.clone());
        let a1 = RelAtom::new(s5.label.clone(), s6.label.clone(), w1.clone());
        self.exchange(&a1);
        let wa = self.assoc(&root_atom, &a1.swapped());
        let a2 = RelAtom::new(s7.label.clone(), s8.label.clone(), w2.clone());
        self.exchange(&a2);
        let mid = RelAtom::new(w2.clone(), s5.label.clone(), wa.clone());
        let wb = self.assoc(&mid, &a2.swapped());
        let top = RelAtom::new(s6.label.clone(), wa.clone(), r.clone());
        let inner = RelAtom::new(s8.label.clone(), wb.clone(), wa.clone());
        self.exchange(&top);
        self.exchange(&inner);
        let wc = self.assoc(&top.swapped(), &inner.swapped());
        let left = Tree::node(wb, s5, s7);
        let right = Tree::node(wc, s6, s8);
        self.permute(Tree::node(r, left, right), tgt)
    }
}

fn assign(tgt: &Target, actual: &Tree, out: &mut BTreeMap<Label, Label>) {
    if let Target::Node(var, a, b) = tgt {
        if let Some(v) = var {
            out.insert(v.clone(), actual.label.clone());
        }
        let (x, y) = &**actual.children.as_ref().expect("shape matches target");
        assign(a, x, out);
        assign(b, y, out);
    }
}

/// Result of a tree permutation: the assignment of internal variables and
/// the structural steps realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSolution {
    pub assignment: Vec<(Label, Label)>,
    pub sigma: SigmaSeq,
}

fn check_pattern(tr: &Tree) -> Result<(), TreeError> {
    if tr.is_leaf() {
        return Err(TreeError::TooNarrow(1));
    }
    let ground = |l: &Label| !l.is_eps() && !l.is_var();
    if !ground(&tr.label) {
        return Err(TreeError::BadEndpoint(tr.label.clone()));
    }
    if let Some(l) = tr.leaves().into_iter().find(|l| !ground(l)) {
        return Err(TreeError::BadEndpoint(l));
    }
    let internal = tr.internal_labels();
    let mut seen = BTreeSet::new();
    for l in &internal[1..] {
        if !l.is_var() || !seen.insert(l) {
            return Err(TreeError::InternalNotVar(l.clone()));
        }
    }
    Ok(())
}

/// Solves the relational goals `Rel(tr)` against `g` by permuting a tree
/// found in `g` with the same root and leaves. Internal nodes of `tr` other
/// than the root are free variables; the assignment lists them in
/// `var_order`.
pub fn heuristic_solve(
    g: &RelSet,
    tr: &Tree,
    var_order: &[Label],
    fresh: &mut FreshLabels,
) -> Result<TreeSolution, TreeError> {
    check_pattern(tr)?;
    let internal: BTreeSet<Label> = tr.internal_labels()[1..].iter().cloned().collect();
    let listed: BTreeSet<Label> = var_order.iter().cloned().collect();
    if internal != listed || listed.len() != var_order.len() {
        return Err(TreeError::VarOrder);
    }
    let leaves = tr.leaf_multiset();
    let src = find_tree(g, &tr.label, &leaves).ok_or_else(|| TreeError::NoMatchingTree {
        root: tr.label.clone(),
        leaves: tr.leaves().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
    })?;
    let mut avoid: BTreeSet<Label> = g.iter().flat_map(|a| a.labels().map(Clone::clone)).collect();
    avoid.extend(tr.internal_labels());
    avoid.extend(tr.leaves());
    let mut p = Permuter {
        set: g.clone(),
        sigma: Vec::new(),
        fresh,
        avoid,
    };
    let tgt = Target::of_pattern(tr, true);
    let result = p.permute(src, &tgt);
    let mut map = BTreeMap::new();
    assign(&tgt, &result, &mut map);
    Ok(TreeSolution {
        assignment: var_order.iter().map(|v| (v.clone(), map[v].clone())).collect(),
        sigma: p.sigma,
    })
}

/// Whether `set` contains a variant of the pattern `tr` rooted at its root;
/// returns the assignment of the pattern's internal variables.
pub fn match_variant(set: &RelSet, tr: &Tree) -> Option<BTreeMap<Label, Label>> {
    let mut out = BTreeMap::new();
    match_at(set, tr, &tr.label, &mut out).then_some(out)
}

fn match_at(set: &RelSet, pat: &Tree, actual: &Label, out: &mut BTreeMap<Label, Label>) -> bool {
    let Some(c) = &pat.children else {
        return pat.label == *actual;
    };
    for a in set.iter().filter(|a| a.parent == *actual) {
        let saved = out.clone();
        if pat.label.is_var() {
            out.insert(pat.label.clone(), actual.clone());
        }
        if match_at(set, &c.0, &a.left, out) && match_at(set, &c.1, &a.right, out) {
            return true;
        }
        *out = saved;
    }
    false
}

/// Breadth-first search over exchange and associativity moves on
/// `Rel(source)` until the accumulated atoms contain a variant of `target`.
/// `budget` bounds the number of explored trees.
pub fn brute_permute(
    source: &Tree,
    target: &Tree,
    budget: usize,
    fresh: &mut FreshLabels,
) -> Option<TreeSolution> {
    let start = rel_of_tree(source).ok()?;
    let mut avoid: BTreeSet<Label> = start.iter().flat_map(|a| a.labels().map(Clone::clone)).collect();
    avoid.extend(target.internal_labels());
    avoid.extend(target.leaves());
    let vars: Vec<Label> = target.internal_labels().into_iter().filter(|l| l.is_var()).collect();
    let mut queue = VecDeque::from([(source.clone(), start, SigmaSeq::new())]);
    let mut seen = BTreeSet::from([source.shape_key()]);
    let mut explored = 0;
    while let Some((tree, set, sigma)) = queue.pop_front() {
        if let Some(map) = match_variant(&set, target) {
            return Some(TreeSolution {
                assignment: vars.iter().filter_map(|v| map.get(v).map(|l| (v.clone(), l.clone()))).collect(),
                sigma,
            });
        }
        explored += 1;
        if explored > budget {
            return None;
        }
        for path in internal_paths(&tree) {
            for rotate in [false, true] {
                let mut set = set.clone();
                let mut sigma = sigma.clone();
                let moved = if rotate {
                    rotate_at(&tree, &path, &mut set, &mut sigma, fresh, &mut avoid)
                } else {
                    swap_at(&tree, &path, &mut set, &mut sigma)
                };
                if let Some(t) = moved {
                    if seen.insert(t.shape_key()) {
                        queue.push_back((t, set, sigma));
                    }
                }
            }
        }
    }
    None
}

fn internal_paths(t: &Tree) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    fn walk(t: &Tree, path: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if let Some(c) = &t.children {
            out.push(path.clone());
            path.push(false);
            walk(&c.0, path, out);
            path.pop();
            path.push(true);
            walk(&c.1, path, out);
            path.pop();
        }
    }
    walk(t, &mut Vec::new(), &mut out);
    out
}

/// Rebuilds `t` with the subtree at `path` replaced by `f` of it.
fn edit_at(t: &Tree, path: &[bool], f: &mut dyn FnMut(&Tree) -> Option<Tree>) -> Option<Tree> {
    match path.split_first() {
        None => f(t),
        Some((right, rest)) => {
            let (a, b) = &**t.children.as_ref()?;
            let (a, b) = if *right {
                (a.clone(), edit_at(b, rest, f)?)
            } else {
                (edit_at(a, rest, f)?, b.clone())
            };
            Some(Tree::node(t.label.clone(), a, b))
        }
    }
}

fn swap_at(t: &Tree, path: &[bool], set: &mut RelSet, sigma: &mut SigmaSeq) -> Option<Tree> {
    edit_at(t, path, &mut |n| {
        let (a, b) = &**n.children.as_ref()?;
        let atom = RelAtom::new(a.label.clone(), b.label.clone(), n.label.clone());
        if !set.contains(&atom.swapped()) {
            let step = StructuralStep::e(&atom);
            apply_step(set, &step).ok()?;
            sigma.push(step);
        }
        Some(Tree::node(n.label.clone(), b.clone(), a.clone()))
    })
}

fn rotate_at(
    t: &Tree,
    path: &[bool],
    set: &mut RelSet,
    sigma: &mut SigmaSeq,
    fresh: &mut FreshLabels,
    avoid: &mut BTreeSet<Label>,
) -> Option<Tree> {
    edit_at(t, path, &mut |n| {
        let (x, y) = &**n.children.as_ref()?;
        let (u, v) = &**x.children.as_ref()?;
        let first = RelAtom::new(x.label.clone(), y.label.clone(), n.label.clone());
        let second = RelAtom::new(u.label.clone(), v.label.clone(), x.label.clone());
        let w = fresh.fresh_where(|l| avoid.contains(l));
        avoid.insert(w.clone());
        let step = StructuralStep::a(&first, &second, w.clone()).ok()?;
        apply_step(set, &step).ok()?;
        sigma.push(step);
        Some(Tree::node(
            n.label.clone(),
            u.clone(),
            Tree::node(w, y.clone(), v.clone()),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relsolve::s_apply;

    fn l(s: &str) -> Label {
        Label::world(s)
    }

    fn leaf(s: &str) -> Tree {
        Tree::leaf(l(s))
    }

    #[test]
    fn rel_of_small_trees() {
        let t = Tree::node(l("r"), leaf("a"), leaf("b"));
        assert_eq!(rel_of_tree(&t).unwrap().len(), 1);
        let t = Tree::node(l("a0"), leaf("a3"), Tree::node(l("x6"), leaf("a4"), leaf("a2")));
        let rel = rel_of_tree(&t).unwrap();
        assert!(rel.contains(&RelAtom::new(l("a3"), l("x6"), l("a0"))));
        assert!(rel.contains(&RelAtom::new(l("a4"), l("a2"), l("x6"))));
        assert_eq!(rel_of_tree(&leaf("a")), Err(TreeError::TooNarrow(1)));
    }

    #[test]
    fn trees_of_partitions() {
        let r: RelSet = [
            RelAtom::new(l("x5"), l("x6"), l("a0")),
            RelAtom::new(l("x7"), l("x8"), l("x6")),
        ]
        .into_iter()
        .collect();
        let ts = trees_of(&r).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].label, l("a0"));
        assert_eq!(ts[0].width(), 3);
        let r: RelSet = [RelAtom::new(l("a"), l("b"), l("c")), RelAtom::new(l("a"), l("b"), l("d"))]
            .into_iter()
            .collect();
        assert_eq!(trees_of(&r).unwrap().len(), 2);
        let r: RelSet = [RelAtom::new(l("a"), l("b"), l("c")), RelAtom::new(l("c"), l("d"), l("a"))]
            .into_iter()
            .collect();
        assert!(trees_of(&r).is_none());
    }

    #[test]
    fn heuristic_on_worked_example() {
        let g: RelSet = [
            RelAtom::new(l("a1"), l("a2"), l("a0")),
            RelAtom::new(l("a3"), l("a4"), l("a1")),
        ]
        .into_iter()
        .collect();
        let x6 = Label::Var(6);
        let tr = Tree::node(l("a0"), leaf("a3"), Tree::node(x6.clone(), leaf("a4"), leaf("a2")));
        let sol = heuristic_solve(&g, &tr, std::slice::from_ref(&x6), &mut FreshLabels::new()).unwrap();
        let w = &sol.assignment[0].1;
        assert!(!g.iter().any(|a| a.labels().contains(&w)));
        let (s, _) = s_apply(&g, &sol.sigma).unwrap();
        let bound = tr.map_labels(&|x| if *x == x6 { w.clone() } else { x.clone() });
        assert!(rel_of_tree(&bound).unwrap().is_subset(&s));
        assert!(sol.sigma.iter().any(|s| s.rule == crate::kernel::Rule::A));
    }

    #[test]
    fn heuristic_trivial_and_failing() {
        let g: RelSet = [RelAtom::new(l("a"), l("b"), l("c"))].into_iter().collect();
        let tr = Tree::node(l("c"), leaf("a"), leaf("b"));
        let sol = heuristic_solve(&g, &tr, &[], &mut FreshLabels::new()).unwrap();
        assert!(sol.sigma.is_empty() && sol.assignment.is_empty());
        let tr = Tree::node(l("c"), leaf("a"), leaf("d"));
        assert!(matches!(
            heuristic_solve(&g, &tr, &[], &mut FreshLabels::new()),
            Err(TreeError::NoMatchingTree { .. })
        ));
    }

    #[test]
    fn brute_permute_examples() {
        let src = Tree::node(l("a"), Tree::node(l("b"), leaf("d"), leaf("e")), leaf("c"));
        let x = Label::Var(0);
        let swapped = Tree::node(l("a"), Tree::node(x.clone(), leaf("e"), leaf("d")), leaf("c"));
        let sol = brute_permute(&src, &swapped, 1000, &mut FreshLabels::new()).unwrap();
        assert_eq!(sol.sigma.len(), 1);
        assert_eq!(sol.sigma[0].rule, crate::kernel::Rule::E);
        let regrouped = Tree::node(l("a"), leaf("d"), Tree::node(x.clone(), leaf("c"), leaf("e")));
        let sol = brute_permute(&src, &regrouped, 1000, &mut FreshLabels::new()).unwrap();
        assert!(sol.sigma.iter().any(|s| s.rule == crate::kernel::Rule::A));
        let same = Tree::node(l("a"), Tree::node(x, leaf("d"), leaf("e")), leaf("c"));
        assert!(brute_permute(&src, &same, 1000, &mut FreshLabels::new()).unwrap().sigma.is_empty());
    }
}
