//! Relational constraints collected from symbolic derivations, their
//! well-formedness, restriction, replay and solving.

mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::kernel::{Extra, Label, RelAtom, Rule, Substitution};
use crate::relsolve::{eq_classes, s_apply, Goal, RelSet, SigmaSeq};
use crate::symbolic::{check_symbolic, SymNode, SymbolicError};

pub use solve::{solve, solve_with_stats, SolveError, SolveOptions, SolveStats};

/// `lhs ⊢ rhs`, generated at the node reached by `origin`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub id: usize,
    pub lhs: RelSet,
    pub rhs: Goal,
    pub origin: Vec<usize>,
    /// Labels of the originating sequent together with `ε`.
    pub scope: BTreeSet<Label>,
}

impl Constraint {
    pub fn is_simple(&self) -> bool {
        !self.lhs.iter().any(RelAtom::has_var)
    }

    pub fn rhs_vars(&self) -> BTreeSet<Label> {
        goal_labels(&self.rhs).into_iter().filter(Label::is_var).collect()
    }

    pub fn vars(&self) -> BTreeSet<Label> {
        let mut out = self.rhs_vars();
        for a in &self.lhs {
            out.extend(a.labels().into_iter().filter(|l| l.is_var()).cloned());
        }
        out
    }

    fn lhs_vars(&self) -> BTreeSet<Label> {
        self.lhs
            .iter()
            .flat_map(|a| a.labels())
            .filter(|l| l.is_var())
            .cloned()
            .collect()
    }

    fn substituted(&self, theta: &Substitution) -> Constraint {
        Constraint {
            id: self.id,
            lhs: self.lhs.iter().map(|a| a.substitute(theta)).collect(),
            rhs: goal_substitute(&self.rhs, theta),
            origin: self.origin.clone(),
            scope: self.scope.iter().map(|l| theta.apply(l)).collect(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.lhs.iter().map(|a| a.to_string()).collect();
        write!(f, "c{}: {} ⊢ {}", self.id, lhs.join(", "), self.rhs)
    }
}

pub(crate) fn goal_labels(g: &Goal) -> Vec<Label> {
    match g {
        Goal::Eq(u, v) => vec![u.clone(), v.clone()],
        Goal::Rel(a) => a.labels().into_iter().cloned().collect(),
    }
}

pub(crate) fn goal_substitute(g: &Goal, theta: &Substitution) -> Goal {
    match g {
        Goal::Eq(u, v) => Goal::Eq(theta.apply(u), theta.apply(v)),
        Goal::Rel(a) => Goal::Rel(a.substitute(theta)),
    }
}

/// Whether `set` entails `goal` up to the identifications it forces.
pub fn goal_holds_in(set: &RelSet, goal: &Goal) -> bool {
    let eq = eq_classes(set);
    match goal {
        Goal::Eq(u, v) => eq.same(u, v),
        Goal::Rel(g) => {
            let target = g.map(|l| eq.rep(l));
            eq.normalized.contains(&target)
        }
    }
}

/// A finite set of constraints partially ordered by derivation ancestry.
/// `covers` holds the pairs `(lower, upper)` of the covering relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub constraints: Vec<Constraint>,
    pub covers: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CollectError {
    #[error("symbolic derivation is malformed at {path:?}: {source}")]
    Malformed { path: Vec<usize>, source: SymbolicError },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormedError {
    #[error("c{lower} ⪯ c{upper} but the left-hand side shrinks")]
    NotMonotone { lower: usize, upper: usize },
    #[error("the order has a cycle through c{0}")]
    Cyclic(usize),
    #[error("variable {0} has no unique origin")]
    NoOrigin(Label),
    #[error("cover ({0}, {1}) mentions an unknown constraint")]
    UnknownConstraint(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictError {
    #[error("no constraint c{0}")]
    Unknown(usize),
    #[error("c{0} is not minimal")]
    NotMinimal(usize),
    #[error("c{0} has variables on its left-hand side")]
    NotSimple(usize),
    #[error("c{id}: variable {var} is unassigned")]
    Unassigned { id: usize, var: Label },
    #[error("c{id}: {reason}")]
    BadSigma { id: usize, reason: String },
    #[error("c{id}: goal {goal} does not hold after the steps")]
    NotSolved { id: usize, goal: Goal },
}

/// A candidate solution: a ground assignment of the variables and a
/// structural sequence per constraint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    pub theta: Substitution,
    pub sigmas: BTreeMap<usize, SigmaSeq>,
}

/// Gathers the constraints of a symbolic derivation.
pub fn collect(root: &SymNode) -> Result<ConstraintSystem, CollectError> {
    check_symbolic(root).map_err(|(path, source)| CollectError::Malformed { path, source })?;
    let mut sys = ConstraintSystem::default();
    let mut stack: Vec<(usize, Option<usize>)> = Vec::new();
    let mut failure = None;
    root.visit_paths(&mut |path, n| {
        if failure.is_some() {
            return;
        }
        while stack.last().is_some_and(|(depth, _)| *depth >= path.len()) {
            stack.pop();
        }
        let parent = stack.last().and_then(|(_, c)| *c);
        let here = match n.obligation() {
            Err(source) => {
                failure = Some(CollectError::Malformed {
                    path: path.to_vec(),
                    source,
                });
                return;
            }
            Ok(None) => parent,
            Ok(Some(rhs)) => {
                let id = sys.constraints.len();
                let mut scope = n.sequent.labels();
                scope.insert(Label::Eps);
                sys.constraints.push(Constraint {
                    id,
                    lhs: n.sequent.rels.iter().cloned().collect(),
                    rhs,
                    origin: path.to_vec(),
                    scope,
                });
                if let Some(p) = parent {
                    sys.covers.insert((p, id));
                }
                Some(id)
            }
        };
        stack.push((path.len(), here));
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(sys),
    }
}

impl ConstraintSystem {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// Strict order: `a` lies strictly below `b`.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        let mut seen = BTreeSet::new();
        let mut todo = vec![a];
        while let Some(x) = todo.pop() {
            for &(lo, hi) in self.covers.range((x, 0)..=(x, usize::MAX)) {
                debug_assert_eq!(lo, x);
                if hi == b {
                    return true;
                }
                if seen.insert(hi) {
                    todo.push(hi);
                }
            }
        }
        false
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        a == b || self.precedes(a, b)
    }

    /// Constraints with nothing below them, by id.
    pub fn minima(&self) -> Vec<usize> {
        let uppers: BTreeSet<usize> = self.covers.iter().map(|(_, hi)| *hi).collect();
        self.constraints
            .iter()
            .map(|c| c.id)
            .filter(|id| !uppers.contains(id))
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<Label> {
        self.constraints.iter().flat_map(Constraint::vars).collect()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for c in &self.constraints {
            out.extend(c.lhs.iter().flat_map(|a| a.labels()).cloned());
            out.extend(goal_labels(&c.rhs));
            out.extend(c.scope.iter().cloned());
        }
        out
    }

    /// The constraint where `x` first appears as an unknown.
    pub fn origin_of(&self, x: &Label) -> Option<usize> {
        let containing: Vec<usize> = self
            .constraints
            .iter()
            .filter(|c| c.vars().contains(x))
            .map(|c| c.id)
            .collect();
        let mut found = self.constraints.iter().filter(|c| {
            matches!(c.rhs, Goal::Rel(_))
                && c.rhs_vars().contains(x)
                && !c.lhs_vars().contains(x)
                && containing.iter().all(|&d| self.le(c.id, d))
        });
        let first = found.next()?;
        match found.next() {
            Some(_) => None,
            None => Some(first.id),
        }
    }

    /// Monotonicity, acyclicity and unique origins.
    pub fn well_formed(&self) -> Result<(), WellFormedError> {
        for &(lo, hi) in &self.covers {
            let (Some(a), Some(b)) = (self.get(lo), self.get(hi)) else {
                return Err(WellFormedError::UnknownConstraint(lo, hi));
            };
            if !a.lhs.is_subset(&b.lhs) {
                return Err(WellFormedError::NotMonotone { lower: lo, upper: hi });
            }
        }
        let mut indegree: BTreeMap<usize, usize> = self.constraints.iter().map(|c| (c.id, 0)).collect();
        for (_, hi) in &self.covers {
            *indegree.get_mut(hi).expect("checked above") += 1;
        }
        let mut ready: Vec<usize> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut done = 0;
        while let Some(x) = ready.pop() {
            done += 1;
            for &(_, hi) in self.covers.range((x, 0)..=(x, usize::MAX)) {
                let d = indegree.get_mut(&hi).expect("checked above");
                *d -= 1;
                if *d == 0 {
                    ready.push(hi);
                }
            }
        }
        if done != self.constraints.len() {
            let stuck = indegree.iter().find(|(_, d)| **d > 0).map(|(k, _)| *k).unwrap_or(0);
            return Err(WellFormedError::Cyclic(stuck));
        }
        for x in self.vars() {
            if self.origin_of(&x).is_none() {
                return Err(WellFormedError::NoOrigin(x));
            }
        }
        Ok(())
    }

    /// Discharges the minimal simple constraint `id` with `theta` and
    /// `sigma`: the constraint is removed, every constraint above it gets the
    /// atoms `S(lhs,σ)` and the renamings of `theta` and of the steps.
    pub fn restrict(&self, id: usize, theta: &Substitution, sigma: &[crate::relsolve::StructuralStep]) -> Result<ConstraintSystem, RestrictError> {
        let c = self.get(id).ok_or(RestrictError::Unknown(id))?;
        if self.covers.iter().any(|(_, hi)| *hi == id) {
            return Err(RestrictError::NotMinimal(id));
        }
        if !c.is_simple() {
            return Err(RestrictError::NotSimple(id));
        }
        let goal = goal_substitute(&c.rhs, theta);
        if let Some(var) = goal_labels(&goal).into_iter().find(Label::is_var) {
            return Err(RestrictError::Unassigned { id, var });
        }
        let (set, subst) = s_apply(&c.lhs, sigma).map_err(|e| RestrictError::BadSigma {
            id,
            reason: e.to_string(),
        })?;
        let goal = goal_substitute(&goal, &subst);
        if !goal_holds_in(&set, &goal) {
            return Err(RestrictError::NotSolved { id, goal });
        }
        let rename = theta.then(&subst);
        let mut out = ConstraintSystem::default();
        for d in &self.constraints {
            if d.id == id {
                continue;
            }
            if self.precedes(id, d.id) {
                let mut e = d.substituted(&rename);
                e.lhs.extend(set.iter().cloned());
                out.constraints.push(e);
            } else {
                out.constraints.push(d.clone());
            }
        }
        out.covers = self.covers.iter().filter(|(lo, _)| *lo != id).copied().collect();
        Ok(out)
    }

    /// Replays a solution: discharges minimal constraints in id order,
    /// checking each step sequence against the enabled extras and the
    /// labels available at its constraint.
    pub fn replay(&self, sol: &Solution, extras: &BTreeSet<Extra>) -> Result<(), RestrictError> {
        let mut sys = self.clone();
        let mut known = self.labels();
        while let Some(&id) = sys.minima().first() {
            let c = sys.get(id).expect("minimum exists").clone();
            let vars = c.rhs_vars();
            let theta = sol.theta.restricted(|l| vars.contains(l));
            let sigma = sol.sigmas.get(&id).cloned().unwrap_or_default();
            let mut set = c.lhs.clone();
            let mut here: BTreeSet<Label> = c.scope.iter().map(|l| theta.apply(l)).collect();
            here.extend(set.iter().flat_map(|a| a.labels()).cloned());
            for step in &sigma {
                let bad = |reason: String| RestrictError::BadSigma { id, reason };
                if let Some(x) = step.rule.extra() {
                    if !extras.contains(&x) {
                        return Err(bad(format!("{} is not enabled", step.rule)));
                    }
                }
                if matches!(step.rule, Rule::U | Rule::T) {
                    if let Some(l) = step.labels.iter().find(|l| !l.is_eps() && !here.contains(l)) {
                        return Err(bad(format!("{} uses {l}, which is not in scope", step.rule)));
                    }
                }
                if let Some(l) = step.introduced.iter().find(|l| known.contains(l) || l.is_eps() || l.is_var()) {
                    return Err(bad(format!("{} introduces {l}, which is not fresh", step.rule)));
                }
                crate::relsolve::apply_step(&mut set, step).map_err(bad)?;
                known.extend(step.introduced.iter().cloned());
                here = here.iter().map(|l| step.theta.apply(l)).collect();
                here.extend(step.introduced.iter().cloned());
            }
            sys = sys.restrict(id, &theta, &sigma)?;
        }
        Ok(())
    }

    /// Debug form.
    pub fn to_json(&self) -> Value {
        let cs: Vec<Value> = self
            .constraints
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "lhs": c.lhs.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "rhs": c.rhs.to_string(),
                    "origin": c.origin,
                    "scope": c.scope.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "constraints": cs,
            "covers": self.covers.iter().map(|(a, b)| vec![*a, *b]).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        for (a, b) in &self.covers {
            writeln!(f, "c{a} ⋖ c{b}")?;
        }
        Ok(())
    }
}

impl Solution {
    /// Debug form.
    pub fn to_json(&self) -> Value {
        let theta: BTreeMap<String, String> = self.theta.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let sigmas: BTreeMap<String, Vec<String>> = self
            .sigmas
            .iter()
            .map(|(k, s)| (format!("c{k}"), s.iter().map(|st| st.to_string()).collect()))
            .collect();
        json!({ "theta": theta, "sigmas": sigmas })
    }
}
