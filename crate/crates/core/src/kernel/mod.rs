//! Ground labelled sequents, rule schemas, label substitution and the
//! trusted proof checker.

mod check;
mod json;
mod label;
mod rules;
mod sequent;

use thiserror::Error;

pub use check::{check, CheckOptions, CheckReport, Violation};
pub use json::{from_json, to_json, to_json_with_semantics, ProofFile, ProofFileError};
pub use label::{fresh_label, FreshLabels, Label, RelAtom, Substitution};
pub use rules::{rule_premises, CutParams, Extra, Rule, RuleParams, ALL_RULES};
pub use sequent::{substitute, Labelled, Sequent};

/// Failures of rule application and substitution construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("eps cannot be the source of a substitution")]
    EpsInDomain,
    #[error("{rule}: missing principal {what}")]
    MissingPrincipal { rule: Rule, what: String },
    #[error("{rule}: label {label} is not fresh")]
    Freshness { rule: Rule, label: Label },
    #[error("{rule}: {message}")]
    SideCondition { rule: Rule, message: String },
    #[error("malformed label {0:?}")]
    BadLabel(String),
}

/// A rule-instance tree over ground sequents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Sequent,
    pub params: RuleParams,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn leaf(rule: Rule, conclusion: Sequent, params: RuleParams) -> Derivation {
        Derivation {
            rule,
            conclusion,
            params,
            premises: Vec::new(),
        }
    }

    /// Number of rule instances on the longest branch.
    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Rules in preorder.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = Vec::new();
        self.visit(&mut |d| out.push(d.rule));
        out
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.rules().into_iter().filter(|r| *r == rule).count()
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Derivation)) {
        f(self);
        for p in &self.premises {
            p.visit(f);
        }
    }

    /// The node reached by following premise indices from the root.
    pub fn at(&self, path: &[usize]) -> Option<&Derivation> {
        let mut d = self;
        for &i in path {
            d = d.premises.get(i)?;
        }
        Some(d)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Derivation> {
        let mut d = self;
        for &i in path {
            d = d.premises.get_mut(i)?;
        }
        Some(d)
    }

    /// Paths of every node in preorder.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        fn go(d: &Derivation, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(cur.clone());
            for (i, p) in d.premises.iter().enumerate() {
                cur.push(i);
                go(p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}
