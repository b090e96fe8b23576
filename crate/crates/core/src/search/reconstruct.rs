//! Ground derivations from solved symbolic trees.
//!
//! Walking the symbolic tree, two renamings are maintained: `sn` sends
//! symbolic labels to the solver's naming (variable assignments and the
//! renamings of earlier steps), `pi` sends the solver's naming to the ground
//! derivation's (where the unit on the left and merges may identify labels
//! the solver kept apart). Structural steps are inserted right above the
//! rule whose constraint they discharge.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constraints::{collect, CollectError, Solution};
use crate::formula::Formula;
use crate::kernel::{rule_premises, Derivation, Extra, Label, RelAtom, Rule, RuleParams, Sequent, Substitution};
use crate::relsolve::{normalize, Goal, RelSet, StepError, StructuralStep};
use crate::symbolic::SymNode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Collect(#[from] CollectError),
    #[error("no assignment for {0}")]
    Unassigned(Label),
    #[error("node {path:?} ({rule}): {message}")]
    Node { path: Vec<usize>, rule: Rule, message: String },
}

fn node_error(path: &[usize], rule: Rule, message: impl Into<String>) -> ReconstructError {
    ReconstructError::Node {
        path: path.to_vec(),
        rule,
        message: message.into(),
    }
}

/// Builds the ground derivation for a solved symbolic tree.
pub fn reconstruct(root: &SymNode, sol: &Solution, extras: &BTreeSet<Extra>) -> Result<Derivation, ReconstructError> {
    let sys = collect(root)?;
    let ids = sys.constraints.iter().map(|c| (c.origin.clone(), c.id)).collect();
    let ctx = Ctx { sol, ids, extras };
    ctx.node(
        root,
        &mut Vec::new(),
        root.sequent.clone(),
        Substitution::identity(),
        Substitution::identity(),
    )
}

struct Ctx<'a> {
    sol: &'a Solution,
    ids: BTreeMap<Vec<usize>, usize>,
    extras: &'a BTreeSet<Extra>,
}

/// Structural steps stacked above a rule instance.
struct Chain {
    path: Vec<usize>,
    steps: Vec<(Rule, RuleParams, Sequent)>,
    cur: Sequent,
}

impl Chain {
    fn new(path: Vec<usize>, s: Sequent) -> Self {
        Chain {
            path,
            steps: Vec::new(),
            cur: s,
        }
    }

    /// Applies a ground step, returning its renaming.
    fn push(&mut self, step: &StructuralStep) -> Result<Substitution, ReconstructError> {
        let mut atoms = Vec::new();
        for a in &step.principal {
            let k = match self.cur.rels.iter().position(|b| b == a) {
                Some(k) => k,
                None if *a == RelAtom::new(Label::Eps, Label::Eps, Label::Eps) => {
                    self.push(&StructuralStep::u(Label::Eps))?;
                    self.cur.rels.len() - 1
                }
                None => return Err(node_error(&self.path, step.rule, format!("{a} is not available"))),
            };
            atoms.push(k);
        }
        let params = RuleParams::atoms(atoms)
            .with_fresh(step.introduced.clone())
            .with_labels(step.labels.clone());
        let mut prems =
            rule_premises(step.rule, &self.cur, &params).map_err(|e| node_error(&self.path, step.rule, e.to_string()))?;
        let next = prems.pop().expect("structural rules have one premise");
        let prev = std::mem::replace(&mut self.cur, next);
        self.steps.push((step.rule, params, prev));
        Ok(step.theta.clone())
    }

    fn finish(self, top: Derivation) -> Derivation {
        self.steps.into_iter().rev().fold(top, |d, (rule, params, conclusion)| Derivation {
            rule,
            conclusion,
            params,
            premises: vec![d],
        })
    }
}

/// The ground counterpart of a solver step under `pi`, or `None` when the
/// step has become trivial.
fn ground_step(s: &StructuralStep, pi: &Substitution) -> Result<Option<StructuralStep>, StepError> {
    let g = |k: usize| s.principal[k].substitute(pi);
    let fresh = || s.introduced[0].clone();
    Ok(Some(match s.rule {
        Rule::E => StructuralStep::e(&g(0)),
        Rule::A => StructuralStep::a(&g(0), &g(1), fresh())?,
        Rule::AC => StructuralStep::ac(&g(0), fresh())?,
        Rule::U => StructuralStep::u(pi.apply(&s.labels[0])),
        Rule::T => StructuralStep::t(pi.apply(&s.labels[0]), pi.apply(&s.labels[1]), fresh()),
        Rule::Eq1 | Rule::Eq2 => {
            let a = g(0);
            if a.right == a.parent {
                return Ok(None);
            }
            if a.right.is_eps() {
                StructuralStep::eq2(&a)?
            } else {
                StructuralStep::eq1(&a)?
            }
        }
        Rule::P => {
            let (k, m) = (g(0), g(1));
            if k == m {
                return Ok(None);
            }
            if m.parent.is_eps() {
                StructuralStep::p(&m, &k)?
            } else {
                StructuralStep::p(&k, &m)?
            }
        }
        Rule::C => {
            let (k, m) = (g(0), g(1));
            if k == m {
                return Ok(None);
            }
            if m.right.is_eps() {
                StructuralStep::c(&m, &k)?
            } else {
                StructuralStep::c(&k, &m)?
            }
        }
        Rule::IU => {
            let a = g(0);
            if a.left.is_eps() && a.right.is_eps() {
                return Ok(None);
            }
            StructuralStep::iu(&a)?
        }
        other => return Err(StepError::NotStructural(other)),
    }))
}

fn holds(s: &Sequent, goal: &Goal) -> bool {
    match goal {
        Goal::Eq(a, b) => a == b,
        Goal::Rel(a) => s.rels.contains(a),
    }
}

fn find(side: &[(Label, Formula)], w: &Label, f: &Formula) -> Option<usize> {
    side.iter().position(|(l, g)| l == w && g == f)
}

impl Ctx<'_> {
    fn node(
        &self,
        n: &SymNode,
        path: &mut Vec<usize>,
        seq: Sequent,
        mut sn: Substitution,
        mut pi: Substitution,
    ) -> Result<Derivation, ReconstructError> {
        let rule = n.rule;
        let mut chain = Chain::new(path.clone(), seq);
        let left_of = |i: Option<usize>| i.and_then(|i| n.sequent.lhs.get(i)).ok_or_else(|| node_error(path, rule, "missing left principal"));
        let right_of = |j: Option<usize>| j.and_then(|j| n.sequent.rhs.get(j)).ok_or_else(|| node_error(path, rule, "missing right principal"));
        let mut params = RuleParams::default();
        let mut unit = None;
        match rule {
            Rule::Id | Rule::EmpR | Rule::StarR | Rule::WandL => {
                let id = *self
                    .ids
                    .get(path.as_slice())
                    .ok_or_else(|| node_error(path, rule, "no constraint recorded"))?;
                for v in &n.vars {
                    let t = self.sol.theta.get(v).ok_or_else(|| ReconstructError::Unassigned(v.clone()))?;
                    sn.insert(v.clone(), t.clone()).expect("variables are not eps");
                }
                for s in self.sol.sigmas.get(&id).into_iter().flatten() {
                    let g = ground_step(s, &pi).map_err(|e| node_error(path, s.rule, e.to_string()))?;
                    if let Some(g) = g {
                        let th = chain.push(&g)?;
                        pi = pi.then(&th);
                    }
                    sn = sn.then(&s.theta);
                }
                let gl = |l: &Label| pi.apply(&sn.apply(l));
                let obligation = n.obligation().map_err(|e| node_error(path, rule, e.to_string()))?;
                let mut goal = ground_goal(obligation.as_ref(), &gl);
                if !holds(&chain.cur, &goal) {
                    let set: RelSet = chain.cur.rels.iter().cloned().collect();
                    let eq = normalize(&set, self.extras, &|_| false);
                    for step in &eq.witness {
                        let th = chain.push(step)?;
                        pi = pi.then(&th);
                    }
                    let gl = |l: &Label| pi.apply(&sn.apply(l));
                    goal = ground_goal(obligation.as_ref(), &gl);
                    if !holds(&chain.cur, &goal) {
                        return Err(node_error(path, rule, format!("{goal} does not hold")));
                    }
                }
                let gl = |l: &Label| pi.apply(&sn.apply(l));
                let cur = &chain.cur;
                let missing = || node_error(path, rule, "principal not found");
                params = match rule {
                    Rule::Id => {
                        let (w, f) = left_of(n.params.left)?;
                        let (v, _) = right_of(n.params.right)?;
                        RuleParams {
                            left: Some(find(&cur.lhs, &gl(w), f).ok_or_else(missing)?),
                            right: Some(find(&cur.rhs, &gl(v), f).ok_or_else(missing)?),
                            ..Default::default()
                        }
                    }
                    Rule::EmpR => RuleParams::right(find(&cur.rhs, &Label::Eps, &Formula::MEmp).ok_or_else(missing)?),
                    Rule::StarR | Rule::WandL => {
                        let Goal::Rel(a) = &goal else {
                            return Err(missing());
                        };
                        let k = cur.rels.iter().position(|b| b == a).ok_or_else(missing)?;
                        let p = if rule == Rule::StarR {
                            let (w, f) = right_of(n.params.right)?;
                            RuleParams::right(find(&cur.rhs, &gl(w), f).ok_or_else(missing)?)
                        } else {
                            let (w, f) = left_of(n.params.left)?;
                            RuleParams::left(find(&cur.lhs, &gl(w), f).ok_or_else(missing)?)
                        };
                        p.with_atoms(vec![k])
                    }
                    _ => unreachable!(),
                };
            }
            Rule::Cut | Rule::E | Rule::A | Rule::U | Rule::AC | Rule::Eq1 | Rule::Eq2 | Rule::P | Rule::IU | Rule::C => {
                return Err(node_error(path, rule, "not a symbolic rule"));
            }
            _ => {
                let gl = |l: &Label| pi.apply(&sn.apply(l));
                let cur = &chain.cur;
                let missing = || node_error(path, rule, "principal not found");
                params.fresh = n.params.fresh.clone();
                params.labels = n.params.labels.iter().map(gl).collect();
                if n.params.left.is_some() {
                    let (w, f) = left_of(n.params.left)?;
                    let gw = gl(w);
                    if rule == Rule::EmpL && gw.is_eps() {
                        let [p] = n.premises.as_slice() else {
                            return Err(node_error(path, rule, "expects one premise"));
                        };
                        let cur = chain.cur.clone();
                        path.push(0);
                        let d = self.node(p, path, cur, sn, pi);
                        path.pop();
                        return Ok(chain.finish(d?));
                    }
                    params.left = Some(find(&cur.lhs, &gw, f).ok_or_else(missing)?);
                    if rule == Rule::EmpL {
                        unit = Some(Substitution::single(gw, Label::Eps).expect("label is not eps"));
                    }
                }
                if n.params.right.is_some() {
                    let (w, f) = right_of(n.params.right)?;
                    params.right = Some(find(&cur.rhs, &gl(w), f).ok_or_else(missing)?);
                }
            }
        }
        if let Some(u) = unit {
            pi = pi.then(&u);
        }
        let prems = rule_premises(rule, &chain.cur, &params).map_err(|e| node_error(path, rule, e.to_string()))?;
        if prems.len() != n.premises.len() {
            return Err(node_error(path, rule, "premise count differs"));
        }
        let conclusion = chain.cur.clone();
        let mut premises = Vec::new();
        for (i, (p, gp)) in n.premises.iter().zip(prems).enumerate() {
            path.push(i);
            let d = self.node(p, path, gp, sn.clone(), pi.clone());
            path.pop();
            premises.push(d?);
        }
        Ok(chain.finish(Derivation {
            rule,
            conclusion,
            params,
            premises,
        }))
    }
}

fn ground_goal(g: Option<&Goal>, gl: &impl Fn(&Label) -> Label) -> Goal {
    match g {
        Some(Goal::Eq(a, b)) => Goal::Eq(gl(a), gl(b)),
        Some(Goal::Rel(a)) => Goal::Rel(a.map(gl)),
        None => Goal::Eq(Label::Eps, Label::Eps),
    }
}
