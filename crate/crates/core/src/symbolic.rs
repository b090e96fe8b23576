//! Symbolic derivations: labelled sequents whose labels may be free
//! variables, built with the rule variants that defer relational side
//! conditions to constraints.

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::kernel::{rule_premises, KernelError, Label, RelAtom, Rule, RuleParams, Sequent};
use crate::relsolve::Goal;

/// Failures of symbolic rule application.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{rule}: {message}")]
    Shape { rule: Rule, message: String },
    #[error("rule {0} has no symbolic variant")]
    Unsupported(Rule),
}

fn shape(rule: Rule, message: impl Into<String>) -> SymbolicError {
    SymbolicError::Shape {
        rule,
        message: message.into(),
    }
}

/// A node of a symbolic derivation.
///
/// `vars` lists the free variables the rule creates: `starR` creates the two
/// children of the principal label, `wandL` the left child and the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymNode {
    pub rule: Rule,
    pub sequent: Sequent,
    pub params: RuleParams,
    pub vars: Vec<Label>,
    pub premises: Vec<SymNode>,
}

impl SymNode {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(SymNode::size).sum::<usize>()
    }

    /// Preorder visit with the premise-index path of every node.
    pub fn visit_paths<'a>(&'a self, f: &mut impl FnMut(&[usize], &'a SymNode)) {
        fn go<'a>(n: &'a SymNode, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize], &'a SymNode)) {
            f(path, n);
            for (i, p) in n.premises.iter().enumerate() {
                path.push(i);
                go(p, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// The relational obligation a leaf or positive rule leaves behind.
    pub fn obligation(&self) -> Result<Option<Goal>, SymbolicError> {
        let s = &self.sequent;
        let p = &self.params;
        let left = |rule| {
            p.left
                .and_then(|i| s.lhs.get(i))
                .ok_or_else(|| shape(rule, "missing left principal"))
        };
        let right = |rule| {
            p.right
                .and_then(|j| s.rhs.get(j))
                .ok_or_else(|| shape(rule, "missing right principal"))
        };
        let two_vars = |rule| {
            if self.vars.len() == 2 {
                Ok((self.vars[0].clone(), self.vars[1].clone()))
            } else {
                Err(shape(rule, "expects two variables"))
            }
        };
        Ok(match self.rule {
            Rule::Id => Some(Goal::Eq(left(Rule::Id)?.0.clone(), right(Rule::Id)?.0.clone())),
            Rule::EmpR => Some(Goal::Eq(right(Rule::EmpR)?.0.clone(), Label::Eps)),
            Rule::StarR => {
                let (x, y) = two_vars(Rule::StarR)?;
                Some(Goal::Rel(RelAtom::new(x, y, right(Rule::StarR)?.0.clone())))
            }
            Rule::WandL => {
                let (x, z) = two_vars(Rule::WandL)?;
                Some(Goal::Rel(RelAtom::new(x, left(Rule::WandL)?.0.clone(), z)))
            }
            _ => None,
        })
    }
}

/// Premises of a symbolic rule instance.
///
/// Rules shared with the ground calculus behave as there. The unit on the
/// left records `(ε,w ▹ ε)` instead of substituting; the axioms accept any
/// labels; `starR` and `wandL` take their unknown labels from `vars`, which
/// must be variables new to the sequent.
pub fn sym_premises(
    rule: Rule,
    c: &Sequent,
    params: &RuleParams,
    vars: &[Label],
) -> Result<Vec<Sequent>, SymbolicError> {
    let fresh_vars = |n: usize| -> Result<(), SymbolicError> {
        if vars.len() != n {
            return Err(shape(rule, format!("expects {n} variables")));
        }
        for (i, v) in vars.iter().enumerate() {
            if !v.is_var() || c.mentions(v) || vars[..i].contains(v) {
                return Err(shape(rule, format!("{v} is not a new variable")));
            }
        }
        Ok(())
    };
    match rule {
        Rule::Id => {
            let l = params.left.and_then(|i| c.lhs.get(i)).ok_or_else(|| shape(rule, "missing left principal"))?;
            let r = params.right.and_then(|j| c.rhs.get(j)).ok_or_else(|| shape(rule, "missing right principal"))?;
            if !l.1.is_atom() || l.1 != r.1 {
                return Err(shape(rule, format!("{} and {} are not the same atom", l.1, r.1)));
            }
            Ok(vec![])
        }
        Rule::EmpR => match params.right.and_then(|j| c.rhs.get(j)) {
            Some((_, Formula::MEmp)) => Ok(vec![]),
            _ => Err(shape(rule, "principal is not the unit")),
        },
        Rule::EmpL => {
            let i = params.left.ok_or_else(|| shape(rule, "missing left principal"))?;
            let (w, f) = c.lhs.get(i).ok_or_else(|| shape(rule, "missing left principal"))?;
            if *f != Formula::MEmp {
                return Err(shape(rule, "principal is not the unit"));
            }
            let mut prem = c.clone();
            prem.rels.push(RelAtom::new(Label::Eps, w.clone(), Label::Eps));
            prem.lhs.remove(i);
            Ok(vec![prem])
        }
        Rule::StarR => {
            fresh_vars(2)?;
            let j = params.right.ok_or_else(|| shape(rule, "missing right principal"))?;
            match c.rhs.get(j) {
                Some((_, Formula::Star(a, b))) => {
                    let mut s1 = c.clone();
                    s1.rhs.push((vars[0].clone(), (**a).clone()));
                    let mut s2 = c.clone();
                    s2.rhs.push((vars[1].clone(), (**b).clone()));
                    Ok(vec![s1, s2])
                }
                _ => Err(shape(rule, "principal is not a separating conjunction")),
            }
        }
        Rule::WandL => {
            fresh_vars(2)?;
            let i = params.left.ok_or_else(|| shape(rule, "missing left principal"))?;
            match c.lhs.get(i) {
                Some((_, Formula::Wand(a, b))) => {
                    let mut s1 = c.clone();
                    s1.rhs.push((vars[0].clone(), (**a).clone()));
                    let mut s2 = c.clone();
                    s2.lhs.push((vars[1].clone(), (**b).clone()));
                    Ok(vec![s1, s2])
                }
                _ => Err(shape(rule, "principal is not a magic wand")),
            }
        }
        Rule::Cut | Rule::E | Rule::A | Rule::U | Rule::AC | Rule::Eq1 | Rule::Eq2 | Rule::P | Rule::IU | Rule::C => {
            Err(SymbolicError::Unsupported(rule))
        }
        _ => {
            if !vars.is_empty() {
                return Err(shape(rule, "creates no variables"));
            }
            Ok(rule_premises(rule, c, params)?)
        }
    }
}

/// Checks that every node's premises are the ones its rule mandates.
pub fn check_symbolic(root: &SymNode) -> Result<(), (Vec<usize>, SymbolicError)> {
    let mut failure = None;
    root.visit_paths(&mut |path, n| {
        if failure.is_some() {
            return;
        }
        let result = sym_premises(n.rule, &n.sequent, &n.params, &n.vars).and_then(|prems| {
            let matches = prems.len() == n.premises.len()
                && prems.iter().zip(&n.premises).all(|(p, q)| p.same_as(&q.sequent));
            if matches {
                Ok(())
            } else {
                Err(shape(n.rule, "premises differ from the rule's"))
            }
        });
        if let Err(e) = result {
            failure = Some((path.to_vec(), e));
        }
    });
    failure.map_or(Ok(()), Err)
}

impl fmt::Display for SymNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &SymNode, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(f, "{:indent$}{} {}", "", n.rule, n.sequent, indent = depth * 2)?;
            for p in &n.premises {
                go(p, depth + 1, f)?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}
