use std::collections::BTreeSet;
use std::fmt;

use super::label::{Label, RelAtom, Substitution};
use crate::formula::Formula;

/// A labelled formula `w : A`.
pub type Labelled = (Label, Formula);

/// `rels ; lhs ⊢ rhs`, each side a multiset stored as a vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub rels: Vec<RelAtom>,
    pub lhs: Vec<Labelled>,
    pub rhs: Vec<Labelled>,
}

impl Sequent {
    /// `⊢ w : f`
    pub fn goal(w: Label, f: Formula) -> Sequent {
        Sequent {
            rels: Vec::new(),
            lhs: Vec::new(),
            rhs: vec![(w, f)],
        }
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for r in &self.rels {
            for l in r.labels() {
                out.insert(l.clone());
            }
        }
        for (l, _) in self.lhs.iter().chain(&self.rhs) {
            out.insert(l.clone());
        }
        out
    }

    pub fn mentions(&self, l: &Label) -> bool {
        self.rels.iter().any(|r| r.labels().contains(&l))
            || self.lhs.iter().chain(&self.rhs).any(|(w, _)| w == l)
    }

    pub fn is_ground(&self) -> bool {
        !self.rels.iter().any(RelAtom::has_var)
            && !self.lhs.iter().chain(&self.rhs).any(|(w, _)| w.is_var())
    }

    /// Every label occurrence rewritten through `theta` in one pass.
    pub fn substitute(&self, theta: &Substitution) -> Sequent {
        self.map_labels(|l| theta.apply(l))
    }

    pub fn map_labels(&self, f: impl Fn(&Label) -> Label) -> Sequent {
        Sequent {
            rels: self.rels.iter().map(|r| r.map(&f)).collect(),
            lhs: self.lhs.iter().map(|(w, a)| (f(w), a.clone())).collect(),
            rhs: self.rhs.iter().map(|(w, a)| (f(w), a.clone())).collect(),
        }
    }

    /// The same multisets in sorted order.
    pub fn canonical(&self) -> Sequent {
        let mut s = self.clone();
        s.rels.sort();
        s.lhs.sort();
        s.rhs.sort();
        s
    }

    /// Equality as multisets; storage order is ignored.
    pub fn same_as(&self, other: &Sequent) -> bool {
        self.rels.len() == other.rels.len()
            && self.lhs.len() == other.lhs.len()
            && self.rhs.len() == other.rhs.len()
            && self.canonical() == other.canonical()
    }
}

/// Applies `theta` to a sequent.
pub fn substitute(s: &Sequent, theta: &Substitution) -> Sequent {
    s.substitute(theta)
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.rels.iter().map(|r| r.to_string()).collect();
        parts.extend(self.lhs.iter().map(|(w, a)| format!("{w}:{a}")));
        write!(f, "{} ⊢ ", parts.join("; "))?;
        let rhs: Vec<String> = self.rhs.iter().map(|(w, a)| format!("{w}:{a}")).collect();
        f.write_str(&rhs.join("; "))
    }
}
