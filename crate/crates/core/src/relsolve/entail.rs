use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::eq::next_merge;
use super::sigma::{apply_step, s_apply, RelSet, SigmaSeq, StructuralStep};
use crate::kernel::{Extra, FreshLabels, Label, RelAtom, Substitution};

/// Limits for the structural search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of `A`/`A_C` (and `T`) applications in one witness.
    pub max_a: usize,
    /// Maximum number of search states visited by one query.
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_a: 4,
            max_states: 20_000,
        }
    }
}

/// A relational entailment goal over ground labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Goal {
    Eq(Label, Label),
    Rel(RelAtom),
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Eq(u, v) => write!(f, "{u} = {v}"),
            Goal::Rel(a) => write!(f, "{a}"),
        }
    }
}

/// One position of a relational pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Known(Label),
    /// An unknown; equal numbers must bind to the same label.
    Unknown(u32),
}

/// A relational goal whose positions may be unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub left: Slot,
    pub right: Slot,
    pub parent: Slot,
}

impl Pattern {
    pub fn ground(a: &RelAtom) -> Pattern {
        Pattern {
            left: Slot::Known(a.left.clone()),
            right: Slot::Known(a.right.clone()),
            parent: Slot::Known(a.parent.clone()),
        }
    }

    fn slots(&self) -> [&Slot; 3] {
        [&self.left, &self.right, &self.parent]
    }

    fn has_unknown(&self) -> bool {
        self.slots().iter().any(|s| matches!(s, Slot::Unknown(_)))
    }

    /// Bindings under which `atom` (in the current naming) matches.
    fn matches(&self, atom: &RelAtom, subst: &Substitution) -> Option<BTreeMap<u32, Label>> {
        let mut binding = BTreeMap::new();
        for (slot, l) in self.slots().into_iter().zip(atom.labels()) {
            match slot {
                Slot::Known(k) => {
                    if subst.apply(k) != *l {
                        return None;
                    }
                }
                Slot::Unknown(i) => match binding.get(i) {
                    Some(b) if b != l => return None,
                    Some(_) => {}
                    None => {
                        binding.insert(*i, l.clone());
                    }
                },
            }
        }
        Some(binding)
    }
}

/// Parameters of an entailment query.
#[derive(Clone, Debug, Default)]
pub struct EntailOptions {
    pub budget: Budget,
    pub extras: BTreeSet<Extra>,
    /// Labels `U` may be applied to; defaults to the labels of the input set
    /// and goal.
    pub scope: Option<BTreeSet<Label>>,
    /// Labels fresh labels must avoid in addition to those of the state.
    pub avoid: BTreeSet<Label>,
    /// Labels preferred as survivors when identifications are made.
    pub protect: BTreeSet<Label>,
}

/// A witness for a pattern: the steps and the bindings of its unknowns, named
/// as after the steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub sigma: SigmaSeq,
    pub binding: BTreeMap<u32, Label>,
}

#[derive(Clone)]
struct State {
    set: RelSet,
    sigma: SigmaSeq,
    subst: Substitution,
    used: BTreeSet<(RelAtom, RelAtom)>,
}

impl State {
    fn push(&mut self, step: StructuralStep) {
        apply_step(&mut self.set, &step).expect("step built from the current set");
        self.subst = self.subst.then(&step.theta);
        self.sigma.push(step);
    }

    fn labels(&self) -> BTreeSet<Label> {
        self.set.iter().flat_map(|a| a.labels().map(Clone::clone)).collect()
    }
}

struct Searcher<'a> {
    opts: &'a EntailOptions,
    fresh: &'a mut FreshLabels,
    states: usize,
}


impl Searcher<'_> {
    fn protect(&self) -> impl Fn(&Label) -> bool + '_ {
        move |l: &Label| self.opts.protect.contains(l)
    }

    /// Exchange closure and identifications to fixpoint.
    fn close(&self, st: &mut State) {
        loop {
            let missing: Vec<RelAtom> = st
                .set
                .iter()
                .filter(|a| !st.set.contains(&a.swapped()))
                .cloned()
                .collect();
            for a in &missing {
                if st.set.contains(a) && !st.set.contains(&a.swapped()) {
                    st.push(StructuralStep::e(a));
                }
            }
            let protect = self.protect();
            match next_merge(&st.set, &self.opts.extras, &protect) {
                Some(step) => st.push(step),
                None if missing.is_empty() => return,
                None => {}
            }
        }
    }

    fn moves(&mut self, st: &State, avoid: &BTreeSet<Label>) -> Vec<State> {
        let mut out = Vec::new();
        let taken = |l: &Label, labels: &BTreeSet<Label>| labels.contains(l) || avoid.contains(l);
        let labels = st.labels();
        for first in &st.set {
            if first.right.is_eps() {
                continue;
            }
            for second in st.set.iter().filter(|s| s.parent == first.left) {
                if second.left.is_eps() || second.right.is_eps() {
                    continue;
                }
                let key = (first.clone(), second.clone());
                if st.used.contains(&key) {
                    continue;
                }
                let w = self.fresh.fresh_where(|l| taken(l, &labels));
                let step = StructuralStep::a(first, second, w).expect("second decomposes first.left");
                let mut next = st.clone();
                next.used.insert(key);
                next.push(step);
                out.push(next);
            }
        }
        if self.opts.extras.contains(&Extra::T) {
            let ground: Vec<&Label> = labels.iter().filter(|l| !l.is_eps()).collect();
            for (i, a) in ground.iter().enumerate() {
                for b in &ground[i..] {
                    if st.set.iter().any(|r| r.left == **a && r.right == **b) {
                        continue;
                    }
                    let c = self.fresh.fresh_where(|l| taken(l, &labels));
                    let mut next = st.clone();
                    next.push(StructuralStep::t((*a).clone(), (*b).clone(), c));
                    out.push(next);
                }
            }
        }
        out
    }
}

/// Initial state: optional unit atoms on the scope labels, then closure.
fn start(g: &RelSet, opts: &EntailOptions, searcher: &Searcher, units: bool, goal_labels: &[&Label]) -> State {
    let mut st = State {
        set: g.clone(),
        sigma: Vec::new(),
        subst: Substitution::identity(),
        used: BTreeSet::new(),
    };
    searcher.close(&mut st);
    if units {
        let mut scope: BTreeSet<Label> = match &opts.scope {
            Some(s) => s.clone(),
            None => {
                let mut s: BTreeSet<Label> = g.iter().flat_map(|a| a.labels().map(Clone::clone)).collect();
                s.extend(goal_labels.iter().map(|l| (*l).clone()));
                s
            }
        };
        scope.insert(Label::Eps);
        let mapped: BTreeSet<Label> = scope.iter().map(|l| st.subst.apply(l)).collect();
        for l in mapped {
            let unit = RelAtom::new(l.clone(), Label::Eps, l.clone());
            if !st.set.contains(&unit) {
                st.push(StructuralStep::u(l));
            }
        }
        searcher.close(&mut st);
    }
    st
}

fn all_matches(st: &State, pattern: &Pattern) -> Vec<BTreeMap<u32, Label>> {
    st.set
        .iter()
        .filter_map(|a| pattern.matches(a, &st.subst))
        .collect()
}

/// Iterative deepening on the number of `A` applications. `visit` sees every
/// closed state and returns true to stop.
fn deepen(
    g: &RelSet,
    opts: &EntailOptions,
    fresh: &mut FreshLabels,
    units: bool,
    goal_labels: &[&Label],
    visit: &mut dyn FnMut(&State, usize) -> bool,
) {
    let mut avoid = opts.avoid.clone();
    avoid.extend(goal_labels.iter().map(|l| (*l).clone()));
    if let Some(s) = &opts.scope {
        avoid.extend(s.iter().cloned());
    }
    let mut searcher = Searcher {
        opts,
        fresh,
        states: 0,
    };
    let root = start(g, opts, &searcher, units, goal_labels);
    for depth in 0..=opts.budget.max_a {
        if dfs(&mut searcher, &root, depth, depth, &avoid, visit) {
            return;
        }

        if searcher.states >= opts.budget.max_states {
            return;
        }
    }
}

fn dfs(
    s: &mut Searcher,
    st: &State,
    left: usize,
    depth: usize,
    avoid: &BTreeSet<Label>,
    visit: &mut dyn FnMut(&State, usize) -> bool,
) -> bool {
    s.states += 1;
    if visit(st, depth - left) {
        return true;
    }
    if left == 0 || s.states >= s.opts.budget.max_states {
        return false;
    }
    for mut next in s.moves(st, avoid) {
        s.close(&mut next);
        if dfs(s, &next, left - 1, depth, avoid, visit) {
            return true;
        }
        if s.states >= s.opts.budget.max_states {
            return false;
        }
    }
    false
}

fn goal_holds(set: &RelSet, subst: &Substitution, goal: &Goal) -> bool {
    match goal {
        Goal::Eq(u, v) => subst.apply(u) == subst.apply(v),
        Goal::Rel(a) => set.contains(&a.substitute(subst)),
    }
}

fn mentions_eps(g: &RelSet, labels: &[&Label]) -> bool {
    let eq = super::eq::eq_classes(g);
    labels.iter().any(|l| eq.rep(l).is_eps())
}

/// Searches for σ such that the goal holds in `S(G,σ)` after identifications.
pub fn r_entails(g: &RelSet, goal: &Goal, budget: &Budget) -> Option<SigmaSeq> {
    let opts = EntailOptions {
        budget: *budget,
        ..Default::default()
    };
    r_entails_with(g, goal, &opts, &mut FreshLabels::new())
}

/// [`r_entails`] with explicit options and fresh-label supply.
pub fn r_entails_with(
    g: &RelSet,
    goal: &Goal,
    opts: &EntailOptions,
    fresh: &mut FreshLabels,
) -> Option<SigmaSeq> {
    let goal_labels: Vec<&Label> = match goal {
        Goal::Eq(u, v) => vec![u, v],
        Goal::Rel(a) => a.labels().to_vec(),
    };
    let units = matches!(goal, Goal::Rel(_)) && mentions_eps(g, &goal_labels);
    let mut found = None;
    deepen(g, opts, fresh, units, &goal_labels, &mut |st, _| {
        if goal_holds(&st.set, &st.subst, goal) {
            found = Some(st.sigma.clone());
            true
        } else {
            false
        }
    });
    found.map(|sigma| prune(g, sigma, |set, subst| goal_holds(set, subst, goal)))
}

/// Enumerates witnesses for a pattern, shallowest first, at most `limit`
/// distinct bindings.
pub fn r_match(
    g: &RelSet,
    pattern: &Pattern,
    opts: &EntailOptions,
    fresh: &mut FreshLabels,
    limit: usize,
) -> Vec<Match> {
    let goal_labels: Vec<&Label> = pattern
        .slots()
        .into_iter()
        .filter_map(|s| match s {
            Slot::Known(l) => Some(l),
            Slot::Unknown(_) => None,
        })
        .collect();
    let units = pattern.has_unknown() || mentions_eps(g, &goal_labels);
    let mut out: Vec<Match> = Vec::new();
    let mut seen: BTreeSet<Vec<(u32, Label)>> = BTreeSet::new();
    deepen(g, opts, fresh, units, &goal_labels, &mut |st, _| {
        for binding in all_matches(st, pattern) {
            let key: Vec<(u32, Label)> = binding.iter().map(|(k, v)| (*k, v.clone())).collect();
            if seen.insert(key) {
                out.push(Match {
                    sigma: st.sigma.clone(),
                    binding,
                });
            }
        }
        out.len() >= limit
    });
    out.truncate(limit);
    out
}

/// Whether a pattern holds under a binding after σ.
pub fn pattern_holds(set: &RelSet, subst: &Substitution, pattern: &Pattern, binding: &BTreeMap<u32, Label>) -> bool {
    let resolve = |s: &Slot| match s {
        Slot::Known(l) => Some(subst.apply(l)),
        Slot::Unknown(i) => binding.get(i).map(|l| subst.apply(l)),
    };
    match (resolve(&pattern.left), resolve(&pattern.right), resolve(&pattern.parent)) {
        (Some(l), Some(r), Some(p)) => set.contains(&RelAtom::new(l, r, p)),
        _ => false,
    }
}

/// Drops steps that the goal does not need, keeping replay valid.
pub fn prune(g: &RelSet, mut sigma: SigmaSeq, holds: impl Fn(&RelSet, &Substitution) -> bool) -> SigmaSeq {
    let mut i = sigma.len();
    while i > 0 {
        i -= 1;
        let mut candidate = sigma.clone();
        candidate.remove(i);
        if let Ok((set, subst)) = s_apply(g, &candidate) {
            if holds(&set, &subst) {
                sigma = candidate;
            }
        }
    }
    sigma
}
