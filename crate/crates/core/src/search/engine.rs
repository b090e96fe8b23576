use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use super::{fresh_for, negative_choice, reconstruct, Outcome, Proof, SearchOptions, SearchStats, StopReason};
use crate::constraints::{collect, solve, SolveError, SolveOptions};
use crate::formula::Formula;
use crate::kernel::{check, CheckOptions, Extra, FreshLabels, Label, RelAtom, Rule, RuleParams, Sequent};
use crate::relsolve::{normalize, EqClasses, RelSet};
use crate::symbolic::{sym_premises, SymNode};

struct Node {
    rule: Option<Rule>,
    sequent: Sequent,
    params: RuleParams,
    vars: Vec<Label>,
    premises: Vec<usize>,
    parent: Option<usize>,
}

/// A principal occurrence: side (left is `true`), label and formula.
type Key = (bool, Label, Formula);

#[derive(Clone)]
struct Goal {
    node: usize,
    uses: BTreeMap<Key, usize>,
    t_uses: usize,
}

/// Why a subtree could not be completed. `Local(n)` means the goal at node
/// `n` cannot be closed whatever happens elsewhere in the tree.
#[derive(Clone, Copy, Debug)]
enum Fail {
    Local(usize),
    Global,
}

#[derive(Clone, Debug)]
enum Alt {
    Negative(Rule, RuleParams),
    Id(usize, usize),
    EmpR(usize),
    StarR(usize),
    WandL(usize),
    T(Label, Label),
}

enum Closing {
    Trivial,
    Possible,
    Impossible,
}

struct Engine<'a> {
    opts: &'a SearchOptions,
    deadline: Instant,
    nodes: Vec<Node>,
    fresh: FreshLabels,
    scopes: BTreeMap<Label, BTreeSet<Label>>,
    multiplicity: usize,
    stats: SearchStats,
    stop: bool,
    proof: Option<Proof>,
}

pub(super) fn run(f: &Formula, opts: &SearchOptions) -> Outcome {
    let start = Instant::now();
    let deadline = start + opts.timeout;
    let mut stats = SearchStats::default();
    for multiplicity in 1..=opts.multiplicity.max(1) {
        let mut fresh = FreshLabels::with_prefix("a");
        let root = fresh.fresh_where(|_| false);
        let mut e = Engine {
            opts,
            deadline,
            nodes: vec![Node {
                rule: None,
                sequent: Sequent::goal(root, f.clone()),
                params: RuleParams::default(),
                vars: Vec::new(),
                premises: Vec::new(),
                parent: None,
            }],
            fresh,
            scopes: BTreeMap::new(),
            multiplicity,
            stats,
            stop: false,
            proof: None,
        };
        let mut goals = vec![Goal {
            node: 0,
            uses: BTreeMap::new(),
            t_uses: 0,
        }];
        let _ = e.run(&mut goals);
        stats = e.stats;
        stats.multiplicity = multiplicity;
        stats.elapsed = start.elapsed();
        if let Some(p) = e.proof {
            return Outcome::Proved(Box::new(p), stats);
        }
        if e.stop {
            return Outcome::Unproved(StopReason::Timeout, stats);
        }
    }
    Outcome::Unproved(StopReason::Exhausted, stats)
}

/// Identifications forced by a variable-free atom set, closed under
/// exchange so that `(a,ε ▹ b)` counts like `(ε,a ▹ b)`.
fn branch_classes(s: &Sequent, opts: &SearchOptions) -> Option<EqClasses> {
    if s.rels.iter().any(RelAtom::has_var) {
        return None;
    }
    let set: RelSet = s.rels.iter().flat_map(|a| [a.clone(), a.swapped()]).collect();
    Some(normalize(&set, &opts.extras, &|_| false))
}

impl Engine<'_> {
    fn run(&mut self, goals: &mut Vec<Goal>) -> Result<(), Fail> {
        let Some(goal) = goals.pop() else {
            return self.finish();
        };
        let r = self.expand(&goal, goals);
        goals.push(goal);
        r
    }

    fn out_of_time(&mut self) -> bool {
        if !self.stop && Instant::now() >= self.deadline {
            self.stop = true;
        }
        self.stop
    }

    fn descends(&self, mut n: usize, ancestor: usize) -> bool {
        loop {
            if n == ancestor {
                return true;
            }
            match self.nodes[n].parent {
                Some(p) => n = p,
                None => return false,
            }
        }
    }

    fn expand(&mut self, goal: &Goal, goals: &mut Vec<Goal>) -> Result<(), Fail> {
        if self.out_of_time() {
            return Err(Fail::Global);
        }
        let seq = self.nodes[goal.node].sequent.clone();
        let (alts, commit) = match negative_choice(&seq) {
            Some((rule, params)) => (vec![Alt::Negative(rule, params)], false),
            None => self.leaf_alternatives(goal, &seq),
        };
        let saved_nodes = self.nodes.len();
        let saved_fresh = self.fresh.clone();
        let mut all_local = true;
        for alt in alts {
            let children = self.apply(goal, &seq, alt);
            let n = goals.len();
            goals.extend(children.into_iter().rev());
            let r = self.run(goals);
            goals.truncate(n);
            let r = match r {
                Ok(()) => return Ok(()),
                Err(Fail::Local(m)) if !self.descends(m, goal.node) => Err(Fail::Local(m)),
                Err(Fail::Local(_)) => Ok(()),
                Err(Fail::Global) => {
                    all_local = false;
                    Ok(())
                }
            };
            self.undo(goal.node, saved_nodes, &saved_fresh);
            self.stats.backtracks += 1;
            if self.stop {
                return Err(Fail::Global);
            }
            r?;
            if commit {
                break;
            }
        }
        if all_local {
            Err(Fail::Local(goal.node))
        } else {
            Err(Fail::Global)
        }
    }

    fn undo(&mut self, node: usize, saved_nodes: usize, saved_fresh: &FreshLabels) {
        for v in std::mem::take(&mut self.nodes[node].vars) {
            self.scopes.remove(&v);
        }
        self.nodes.truncate(saved_nodes);
        let n = &mut self.nodes[node];
        n.rule = None;
        n.params = RuleParams::default();
        n.premises.clear();
        self.fresh = saved_fresh.clone();
    }

    /// Applies an alternative at `goal`, returning the premise goals.
    fn apply(&mut self, goal: &Goal, seq: &Sequent, alt: Alt) -> Vec<Goal> {
        let mut key = None;
        let mut t_step = false;
        let mut vars = Vec::new();
        let (rule, params) = match alt {
            Alt::Negative(rule, params) => {
                let fresh = fresh_for(rule, seq, &mut self.fresh);
                (rule, params.with_fresh(fresh))
            }
            Alt::Id(i, j) => (
                Rule::Id,
                RuleParams {
                    left: Some(i),
                    right: Some(j),
                    ..Default::default()
                },
            ),
            Alt::EmpR(j) => (Rule::EmpR, RuleParams::right(j)),
            Alt::StarR(j) => {
                vars = vec![self.fresh.fresh_var(), self.fresh.fresh_var()];
                key = Some((false, seq.rhs[j].0.clone(), seq.rhs[j].1.clone()));
                (Rule::StarR, RuleParams::right(j))
            }
            Alt::WandL(i) => {
                vars = vec![self.fresh.fresh_var(), self.fresh.fresh_var()];
                key = Some((true, seq.lhs[i].0.clone(), seq.lhs[i].1.clone()));
                (Rule::WandL, RuleParams::left(i))
            }
            Alt::T(a, b) => {
                t_step = true;
                let c = self.fresh.fresh(&seq.labels());
                (Rule::T, RuleParams::default().with_labels(vec![a, b]).with_fresh(vec![c]))
            }
        };
        let prems = sym_premises(rule, seq, &params, &vars).expect("alternatives are applicable");
        if !vars.is_empty() {
            let mut scope = seq.labels();
            scope.insert(Label::Eps);
            for v in &vars {
                self.scopes.insert(v.clone(), scope.clone());
            }
        }
        if prems.is_empty() {
            self.stats.branches += 1;
        }
        let mut children = Vec::new();
        let mut ids = Vec::new();
        for p in prems {
            let id = self.nodes.len();
            self.nodes.push(Node {
                rule: None,
                sequent: p,
                params: RuleParams::default(),
                vars: Vec::new(),
                premises: Vec::new(),
                parent: Some(goal.node),
            });
            ids.push(id);
            let mut g = goal.clone();
            g.node = id;
            if let Some(k) = &key {
                *g.uses.entry(k.clone()).or_insert(0) += 1;
            }
            if t_step {
                g.t_uses += 1;
            }
            children.push(g);
        }
        let n = &mut self.nodes[goal.node];
        n.rule = Some(rule);
        n.params = params;
        n.vars = vars;
        n.premises = ids;
        children
    }

    fn closing(&self, a: &Label, b: &Label, eq: &Option<EqClasses>) -> Closing {
        if a == b {
            return Closing::Trivial;
        }
        match (a.is_var(), b.is_var()) {
            (false, false) => match eq {
                Some(e) if e.same(a, b) => Closing::Trivial,
                Some(_) => Closing::Impossible,
                None => Closing::Possible,
            },
            (true, true) => Closing::Possible,
            (true, false) | (false, true) => {
                let (x, l) = if a.is_var() { (a, b) } else { (b, a) };
                let Some(e) = eq else {
                    return Closing::Possible;
                };
                let scope = &self.scopes[x];
                if scope.contains(l) || scope.iter().any(|s| !s.is_var() && e.same(s, l)) {
                    Closing::Possible
                } else {
                    Closing::Impossible
                }
            }
        }
    }

    /// Alternatives at a saturated sequent; the flag is set when the first
    /// one closes the branch unconditionally.
    fn leaf_alternatives(&self, goal: &Goal, seq: &Sequent) -> (Vec<Alt>, bool) {
        let eq = branch_classes(seq, self.opts);
        let mut alts = Vec::new();
        for (i, (w1, p)) in seq.lhs.iter().enumerate() {
            if !p.is_atom() {
                continue;
            }
            for (j, (w2, q)) in seq.rhs.iter().enumerate() {
                if p != q {
                    continue;
                }
                match self.closing(w1, w2, &eq) {
                    Closing::Trivial => return (vec![Alt::Id(i, j)], true),
                    Closing::Possible => alts.push(Alt::Id(i, j)),
                    Closing::Impossible => {}
                }
            }
        }
        // Pairs needing fewer assignments first: a variable against a known
        // label before two distinct known labels.
        alts.sort_by_key(|alt| match alt {
            Alt::Id(i, j) => usize::from(!seq.lhs[*i].0.is_var() && !seq.rhs[*j].0.is_var()),
            _ => 0,
        });
        for (j, (w, f)) in seq.rhs.iter().enumerate() {
            if *f == Formula::MEmp {
                match self.closing(w, &Label::Eps, &eq) {
                    Closing::Trivial => return (vec![Alt::EmpR(j)], true),
                    Closing::Possible => alts.push(Alt::EmpR(j)),
                    Closing::Impossible => {}
                }
            }
        }
        let fresh_use = |k: Key| goal.uses.get(&k).copied().unwrap_or(0) < self.multiplicity;
        for (j, (w, f)) in seq.rhs.iter().enumerate() {
            if matches!(f, Formula::Star(..)) && fresh_use((false, w.clone(), f.clone())) {
                alts.push(Alt::StarR(j));
            }
        }
        for (i, (w, f)) in seq.lhs.iter().enumerate() {
            if matches!(f, Formula::Wand(..)) && fresh_use((true, w.clone(), f.clone())) {
                alts.push(Alt::WandL(i));
            }
        }
        if self.opts.extras.contains(&Extra::T) && goal.t_uses < self.multiplicity {
            let labels: Vec<Label> = seq.labels().into_iter().filter(|l| !l.is_eps() && !l.is_var()).collect();
            for (k, a) in labels.iter().enumerate() {
                for b in &labels[k..] {
                    alts.push(Alt::T(a.clone(), b.clone()));
                }
            }
        }
        (alts, false)
    }

    fn build(&self, n: usize) -> SymNode {
        let node = &self.nodes[n];
        SymNode {
            rule: node.rule.expect("closed tree"),
            sequent: node.sequent.clone(),
            params: node.params.clone(),
            vars: node.vars.clone(),
            premises: node.premises.iter().map(|&p| self.build(p)).collect(),
        }
    }

    /// Solves and reconstructs a closed symbolic tree.
    fn finish(&mut self) -> Result<(), Fail> {
        self.stats.solver_calls += 1;
        let root = self.build(0);
        let Ok(sys) = collect(&root) else {
            return Err(Fail::Global);
        };
        self.stats.constraints = sys.len();
        let sopts = SolveOptions {
            budget: self.opts.r_budget,
            extras: self.opts.extras.iter().copied().filter(|e| *e != Extra::T).collect(),
            match_limit: self.opts.match_limit,
            deadline: Some(self.deadline),
            ..Default::default()
        };
        let solution = match solve(&sys, &sopts) {
            Ok(s) => s,
            Err(SolveError::Timeout) => {
                self.stop = true;
                return Err(Fail::Global);
            }
            Err(_) => return Err(Fail::Global),
        };
        if sys.replay(&solution, &self.opts.extras).is_err() {
            return Err(Fail::Global);
        }
        let Ok(derivation) = reconstruct(&root, &solution, &self.opts.extras) else {
            return Err(Fail::Global);
        };
        let report = check(
            &derivation,
            &CheckOptions {
                allow_cut: false,
                extras: self.opts.extras.clone(),
            },
        );
        if !report.accepted {
            return Err(Fail::Global);
        }
        self.proof = Some(Proof {
            symbolic: root,
            constraints: sys,
            solution,
            derivation,
        });
        Ok(())
    }
}
