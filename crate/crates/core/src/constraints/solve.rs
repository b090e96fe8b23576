use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use thiserror::Error;

use super::{goal_labels, goal_substitute, Constraint, ConstraintSystem, Solution, WellFormedError};
use crate::kernel::{Extra, FreshLabels, Label, RelAtom, Substitution};
use crate::relsolve::{
    apply_step, heuristic_solve, normalize, pattern_holds, prune, r_entails_with, r_match, s_apply, Budget, EntailOptions, Goal,
    Pattern, SigmaSeq, Slot, StructuralStep, Tree,
};

/// Parameters of the constraint solver.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub budget: Budget,
    pub extras: BTreeSet<Extra>,
    /// Candidate witnesses tried per constraint with unknowns.
    pub match_limit: usize,
    /// Search nodes before giving up.
    pub max_nodes: usize,
    pub deadline: Option<Instant>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: Budget::default(),
            extras: BTreeSet::new(),
            match_limit: 32,
            max_nodes: 20_000,
            deadline: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: usize,
    pub backtracks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("constraint system is ill-formed: {0}")]
    IllFormed(#[from] WellFormedError),
    #[error("no solution; c{id} ({goal}) could not be discharged")]
    Unsolvable { id: usize, goal: Goal },
    #[error("no solution")]
    NoSolution,
    #[error("deadline reached")]
    Timeout,
    #[error("search budget exhausted")]
    Exhausted,
}

type Binding = BTreeMap<Label, Label>;

struct Solver<'a> {
    opts: &'a SolveOptions,
    fresh: FreshLabels,
    avoid: BTreeSet<Label>,
    stats: SolveStats,
    stop: Option<SolveError>,
    failed: Option<(usize, Goal)>,
}

/// Finds an assignment and per-constraint step sequences discharging every
/// constraint. Minimal constraints are taken in id order; unknowns are bound
/// from equality constraints first, then by the tree heuristic, then by
/// bounded pattern matching, backtracking over the alternatives.
pub fn solve(sys: &ConstraintSystem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    solve_with_stats(sys, opts).0
}

pub fn solve_with_stats(sys: &ConstraintSystem, opts: &SolveOptions) -> (Result<Solution, SolveError>, SolveStats) {
    if let Err(e) = sys.well_formed() {
        return (Err(e.into()), SolveStats::default());
    }
    let mut s = Solver {
        opts,
        fresh: FreshLabels::new(),
        avoid: sys.labels(),
        stats: SolveStats::default(),
        stop: None,
        failed: None,
    };
    let found = s.go(sys, &Substitution::identity(), &Binding::new(), &BTreeMap::new());
    let result = match found {
        Some(sol) => Ok(sol),
        None => Err(match (s.stop.take(), s.failed.take()) {
            (Some(e), _) => e,
            (None, Some((id, goal))) => SolveError::Unsolvable { id, goal },
            (None, None) => SolveError::NoSolution,
        }),
    };
    (result, s.stats)
}

fn as_subst(b: &Binding) -> Substitution {
    let mut s = Substitution::identity();
    for (k, v) in b {
        s.insert(k.clone(), v.clone()).expect("variables are not eps");
    }
    s
}

impl Solver<'_> {
    fn go(
        &mut self,
        sys: &ConstraintSystem,
        fixed: &Substitution,
        pending: &Binding,
        sigmas: &BTreeMap<usize, SigmaSeq>,
    ) -> Option<Solution> {
        if self.stop.is_some() {
            return None;
        }
        if self.opts.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop = Some(SolveError::Timeout);
            return None;
        }
        self.stats.nodes += 1;
        if self.stats.nodes > self.opts.max_nodes {
            self.stop = Some(SolveError::Exhausted);
            return None;
        }
        let Some(&id) = sys.minima().first() else {
            let mut theta = fixed.clone();
            for (k, v) in pending {
                theta.insert(k.clone(), v.clone()).expect("variables are not eps");
            }
            return Some(Solution {
                theta,
                sigmas: sigmas.clone(),
            });
        };
        let c = sys.get(id).expect("minimum exists").clone();
        let goal = goal_substitute(&c.rhs, &as_subst(pending));
        let unbound: Vec<Label> = goal_labels(&goal).into_iter().filter(Label::is_var).collect();
        if unbound.is_empty() {
            let opts = self.entail_options(&c);
            let found = r_entails_with(&c.lhs, &goal, &opts, &mut self.fresh);
            return match found {
                Some(sigma) => self.discharge(sys, &c, pending.clone(), sigma, fixed, sigmas),
                None => {
                    self.note_failure(id, goal);
                    None
                }
            };
        }
        for v in &unbound {
            let cands = eq_candidates(sys, pending, v);
            if !cands.is_empty() {
                for cand in cands {
                    let mut next = pending.clone();
                    next.insert(v.clone(), cand);
                    if let Some(sol) = self.go(sys, fixed, &next, sigmas) {
                        return Some(sol);
                    }
                    self.stats.backtracks += 1;
                }
                return None;
            }
        }
        match &goal {
            Goal::Eq(..) => {
                let v = &unbound[0];
                let choices: Vec<Label> = c.scope.iter().filter(|l| !l.is_var()).cloned().collect();
                for l in choices {
                    let mut next = pending.clone();
                    next.insert(v.clone(), l);
                    if let Some(sol) = self.go(sys, fixed, &next, sigmas) {
                        return Some(sol);
                    }
                    self.stats.backtracks += 1;
                }
                None
            }
            Goal::Rel(atom) => {
                let options = self.rel_options(sys, &c, atom, pending);
                if options.is_empty() {
                    self.note_failure(id, goal.clone());
                }
                for (ext, sigma) in options {
                    let mut next = pending.clone();
                    next.extend(ext);
                    if let Some(sol) = self.discharge(sys, &c, next, sigma, fixed, sigmas) {
                        return Some(sol);
                    }
                    self.stats.backtracks += 1;
                    if self.stop.is_some() {
                        return None;
                    }
                }
                None
            }
        }
    }

    fn note_failure(&mut self, id: usize, goal: Goal) {
        if self.failed.as_ref().is_none_or(|(f, _)| id >= *f) {
            self.failed = Some((id, goal));
        }
    }

    fn discharge(
        &mut self,
        sys: &ConstraintSystem,
        c: &Constraint,
        pending: Binding,
        sigma: SigmaSeq,
        fixed: &Substitution,
        sigmas: &BTreeMap<usize, SigmaSeq>,
    ) -> Option<Solution> {
        let vars = c.rhs_vars();
        let (mine, rest): (Binding, Binding) = pending.into_iter().partition(|(k, _)| vars.contains(k));
        let theta = as_subst(&mine);
        let next = sys.restrict(c.id, &theta, &sigma).ok()?;
        let (_, subst) = s_apply(&c.lhs, &sigma).ok()?;
        let rest: Binding = rest.into_iter().map(|(k, v)| (k, subst.apply(&v))).collect();
        let mut fixed = fixed.clone();
        for (k, v) in mine {
            fixed.insert(k, v).expect("variables are not eps");
        }
        let mut sigmas = sigmas.clone();
        sigmas.insert(c.id, sigma);
        self.go(&next, &fixed, &rest, &sigmas)
    }

    fn entail_options(&self, c: &Constraint) -> EntailOptions {
        let ground = |l: &&Label| !l.is_var();
        let mut scope: BTreeSet<Label> = c.scope.iter().filter(ground).cloned().collect();
        scope.extend(c.lhs.iter().flat_map(|a| a.labels()).cloned());
        EntailOptions {
            budget: self.opts.budget,
            extras: self.opts.extras.clone(),
            scope: Some(scope),
            avoid: self.avoid.clone(),
            protect: c.scope.iter().filter(ground).cloned().collect(),
        }
    }

    /// Candidate bindings and steps for a relational goal with unknowns.
    fn rel_options(
        &mut self,
        sys: &ConstraintSystem,
        c: &Constraint,
        atom: &RelAtom,
        pending: &Binding,
    ) -> Vec<(Binding, SigmaSeq)> {
        let mut out: Vec<(Binding, SigmaSeq)> = Vec::new();
        if let Some(opt) = self.tree_option(sys, c, atom, pending) {
            out.push(opt);
        }
        let slot = |l: &Label| match l {
            Label::Var(n) => Slot::Unknown(*n),
            other => Slot::Known(other.clone()),
        };
        let pattern = Pattern {
            left: slot(&atom.left),
            right: slot(&atom.right),
            parent: slot(&atom.parent),
        };
        let opts = self.entail_options(c);
        let matches = r_match(&c.lhs, &pattern, &opts, &mut self.fresh, self.opts.match_limit);
        for m in matches {
            let binding = m.binding.clone();
            let sigma = prune(&c.lhs, m.sigma, |set, subst| pattern_holds(set, subst, &pattern, &binding));
            let ext: Binding = m.binding.iter().map(|(n, l)| (Label::Var(*n), l.clone())).collect();
            if !out.iter().any(|(b, _)| *b == ext) {
                out.push((ext, sigma));
            }
        }
        out
    }

    /// The tree heuristic, when the goal and the constraints above it whose
    /// parents are its unknowns form a tree with known leaves.
    fn tree_option(
        &mut self,
        sys: &ConstraintSystem,
        c: &Constraint,
        atom: &RelAtom,
        pending: &Binding,
    ) -> Option<(Binding, SigmaSeq)> {
        if atom.parent.is_var() || atom.parent.is_eps() {
            return None;
        }
        let theta = as_subst(pending);
        let mut leaf_binding = Binding::new();
        let mut var_order = Vec::new();
        let mut used = BTreeSet::from([c.id]);
        let mut open = Vec::new();
        let mut st = Subtree {
            sys,
            root: c.id,
            theta: &theta,
            pending,
            leaf_binding: &mut leaf_binding,
            var_order: &mut var_order,
            used: &mut used,
            open: &mut open,
        };
        let left = st.build(&atom.left)?;
        let right = st.build(&atom.right)?;
        let tree = Tree::node(atom.parent.clone(), left, right);
        if tree.width() < 3 || open.len() > 1 {
            return None;
        }
        let protect: BTreeSet<Label> = c.scope.iter().filter(|l| !l.is_var()).cloned().collect();
        // Identify labels, exchanging `(x,ε ▹ y)` so that it identifies too.
        let mut lhs = c.lhs.clone();
        let mut prefix = SigmaSeq::new();
        let mut rename = Substitution::identity();
        let eq = loop {
            let eq = normalize(&lhs, &self.opts.extras, &|l| protect.contains(l));
            let swaps: SigmaSeq = eq
                .normalized
                .iter()
                .filter(|a| a.right.is_eps() && !a.left.is_eps() && !eq.normalized.contains(&a.swapped()))
                .map(StructuralStep::e)
                .collect();
            if swaps.is_empty() {
                break eq;
            }
            lhs = eq.normalized.clone();
            rename = rename.then(&eq.subst);
            prefix.extend(eq.witness);
            for s in swaps {
                apply_step(&mut lhs, &s).expect("principal comes from the set");
                prefix.push(s);
            }
        };
        let rename = rename.then(&eq.subst);
        let rep = |l: &Label| rename.apply(l);
        // A single leaf without an equality is matched against the labels
        // its origin can see.
        let choices: Vec<Option<Label>> = match open.first() {
            None => vec![None],
            Some(v) => {
                let origin = sys.origin_of(v).and_then(|o| sys.get(o))?;
                origin.scope.iter().filter(|l| !l.is_var() && !l.is_eps()).cloned().map(Some).collect()
            }
        };
        let (sol, choice) = choices.into_iter().find_map(|choice| {
            let mapped = tree.map_labels(&|l: &Label| match (&choice, open.first()) {
                (Some(ch), Some(v)) if l == v => rep(ch),
                _ if l.is_var() => l.clone(),
                _ => rep(l),
            });
            let sol = heuristic_solve(&eq.normalized, &mapped, &var_order, &mut self.fresh).ok()?;
            Some((sol, choice))
        })?;
        let mut ext = leaf_binding;
        if let (Some(ch), Some(v)) = (choice, open.first()) {
            ext.insert(v.clone(), ch);
        }
        ext.extend(sol.assignment);
        let mut sigma = prefix;
        sigma.extend(eq.witness);
        sigma.extend(sol.sigma);
        Some((ext, sigma))
    }
}

/// Builds the pattern below a label: a known label is a leaf; an unknown is
/// an internal node if some constraint above `root` has it as parent, a leaf
/// bound from equalities if there are any, and an open leaf otherwise.
struct Subtree<'a> {
    sys: &'a ConstraintSystem,
    root: usize,
    theta: &'a Substitution,
    pending: &'a Binding,
    leaf_binding: &'a mut Binding,
    var_order: &'a mut Vec<Label>,
    used: &'a mut BTreeSet<usize>,
    open: &'a mut Vec<Label>,
}

impl Subtree<'_> {
    fn build(&mut self, label: &Label) -> Option<Tree> {
        if !label.is_var() {
            return (!label.is_eps()).then(|| Tree::leaf(label.clone()));
        }
        let below = self.sys.constraints.iter().find(|d| {
            !self.used.contains(&d.id)
                && self.sys.precedes(self.root, d.id)
                && matches!(goal_substitute(&d.rhs, self.theta), Goal::Rel(a) if a.parent == *label)
        });
        match below {
            Some(d) => {
                self.used.insert(d.id);
                let Goal::Rel(a) = goal_substitute(&d.rhs, self.theta) else {
                    unreachable!("matched above")
                };
                self.var_order.push(label.clone());
                let l = self.build(&a.left)?;
                let r = self.build(&a.right)?;
                Some(Tree::node(label.clone(), l, r))
            }
            None => match eq_candidates(self.sys, self.pending, label).into_iter().find(|l| !l.is_eps()) {
                Some(cand) => {
                    self.leaf_binding.insert(label.clone(), cand.clone());
                    Some(Tree::leaf(cand))
                }
                None => {
                    self.open.push(label.clone());
                    Some(Tree::leaf(label.clone()))
                }
            },
        }
    }
}

/// Known labels an unknown is equated with, through chains of equality
/// constraints.
fn eq_candidates(sys: &ConstraintSystem, pending: &Binding, v: &Label) -> Vec<Label> {
    let theta = as_subst(pending);
    let mut edges: Vec<(Label, Label)> = Vec::new();
    for c in &sys.constraints {
        if let Goal::Eq(a, b) = goal_substitute(&c.rhs, &theta) {
            edges.push((a, b));
        }
    }
    let mut seen = BTreeSet::from([v.clone()]);
    let mut todo = vec![v.clone()];
    while let Some(x) = todo.pop() {
        for (a, b) in &edges {
            let other = if *a == x {
                b
            } else if *b == x {
                a
            } else {
                continue;
            };
            if seen.insert(other.clone()) && other.is_var() {
                todo.push(other.clone());
            }
        }
    }
    seen.into_iter().filter(|l| !l.is_var()).collect()
}
