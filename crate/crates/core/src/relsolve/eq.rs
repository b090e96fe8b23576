use std::collections::{BTreeMap, BTreeSet};

use super::sigma::{apply_step, RelSet, SigmaSeq, StructuralStep};
use crate::kernel::{Extra, Label, Substitution};

/// Label identifications derivable from a set of atoms, with the sequence of
/// substituting steps that realizes them.
#[derive(Clone, Debug)]
pub struct EqClasses {
    /// The substituting steps, in application order.
    pub witness: SigmaSeq,
    /// Composite substitution of the witness.
    pub subst: Substitution,
    /// The atom set after the witness has been applied.
    pub normalized: RelSet,
    labels: BTreeSet<Label>,
}

impl EqClasses {
    /// The surviving representative of `l`'s class.
    pub fn rep(&self, l: &Label) -> Label {
        self.subst.apply(l)
    }

    pub fn same(&self, u: &Label, v: &Label) -> bool {
        self.rep(u) == self.rep(v)
    }

    /// The partition of the labels of the input set together with `ε`.
    pub fn classes(&self) -> Vec<BTreeSet<Label>> {
        let mut by_rep: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
        for l in &self.labels {
            by_rep.entry(self.rep(l)).or_default().insert(l.clone());
        }
        by_rep.into_values().collect()
    }
}

/// Label equalities derivable with `Eq1`/`Eq2` alone.
pub fn eq_classes(g: &RelSet) -> EqClasses {
    normalize(g, &BTreeSet::new(), &|_| false)
}

/// Chooses which of two labels survives a merge: `ε` first, then labels the
/// caller protects, then the smaller one.
fn survivor<'a>(x: &'a Label, y: &'a Label, protect: &dyn Fn(&Label) -> bool) -> &'a Label {
    if x.is_eps() {
        return x;
    }
    if y.is_eps() {
        return y;
    }
    match (protect(x), protect(y)) {
        (true, false) => x,
        (false, true) => y,
        _ => x.min(y),
    }
}

/// The next identification available in `set`, if any.
pub(crate) fn next_merge(
    set: &RelSet,
    extras: &BTreeSet<Extra>,
    protect: &dyn Fn(&Label) -> bool,
) -> Option<StructuralStep> {
    for a in set {
        if a.left.is_eps() && a.right != a.parent {
            let keep = survivor(&a.right, &a.parent, protect);
            let step = if *keep == a.parent {
                StructuralStep::eq1(a)
            } else {
                StructuralStep::eq2(a)
            };
            return Some(step.expect("shape checked"));
        }
    }
    if extras.contains(&Extra::IU) {
        for a in set {
            if a.parent.is_eps() && !(a.left.is_eps() && a.right.is_eps()) {
                return Some(StructuralStep::iu(a).expect("shape checked"));
            }
        }
    }
    if extras.contains(&Extra::P) {
        let mut by_children: BTreeMap<(&Label, &Label), Vec<_>> = BTreeMap::new();
        for a in set {
            by_children.entry((&a.left, &a.right)).or_default().push(a);
        }
        for group in by_children.values() {
            if group.len() >= 2 {
                let (x, y) = (group[0], group[1]);
                let (keep, merge) = if survivor(&x.parent, &y.parent, protect) == &x.parent {
                    (x, y)
                } else {
                    (y, x)
                };
                return Some(StructuralStep::p(keep, merge).expect("shape checked"));
            }
        }
    }
    if extras.contains(&Extra::C) {
        let mut by_left_parent: BTreeMap<(&Label, &Label), Vec<_>> = BTreeMap::new();
        for a in set {
            by_left_parent.entry((&a.left, &a.parent)).or_default().push(a);
        }
        for group in by_left_parent.values() {
            if group.len() >= 2 {
                let (x, y) = (group[0], group[1]);
                let (keep, merge) = if survivor(&x.right, &y.right, protect) == &x.right {
                    (x, y)
                } else {
                    (y, x)
                };
                return Some(StructuralStep::c(keep, merge).expect("shape checked"));
            }
        }
    }
    None
}

/// Applies `Eq1`/`Eq2` (and the enabled substituting extras) to fixpoint.
pub fn normalize(g: &RelSet, extras: &BTreeSet<Extra>, protect: &dyn Fn(&Label) -> bool) -> EqClasses {
    let mut labels: BTreeSet<Label> = g.iter().flat_map(|a| a.labels().map(Clone::clone)).collect();
    labels.insert(Label::Eps);
    let mut set = g.clone();
    let mut witness = Vec::new();
    let mut subst = Substitution::identity();
    while let Some(step) = next_merge(&set, extras, protect) {
        apply_step(&mut set, &step).expect("merge principal comes from the set");
        subst = subst.then(&step.theta);
        witness.push(step);
    }
    EqClasses {
        witness,
        subst,
        normalized: set,
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RelAtom;
    use crate::relsolve::s_apply;

    fn lab(s: &str) -> Label {
        if s == "eps" {
            Label::Eps
        } else {
            Label::world(s)
        }
    }

    fn atom(a: &str, b: &str, c: &str) -> RelAtom {
        RelAtom::new(lab(a), lab(b), lab(c))
    }

    #[test]
    fn merges_unit_atoms() {
        let g: RelSet = [atom("eps", "a", "b")].into_iter().collect();
        let eq = eq_classes(&g);
        assert!(eq.same(&lab("a"), &lab("b")));

        let g: RelSet = [atom("a", "eps", "b")].into_iter().collect();
        let eq = eq_classes(&g);
        assert!(!eq.same(&lab("a"), &lab("b")));
    }

    #[test]
    fn merging_into_eps_exposes_new_atoms() {
        let g: RelSet = [atom("eps", "a", "eps"), atom("a", "c", "d")].into_iter().collect();
        let eq = eq_classes(&g);
        assert!(eq.same(&lab("a"), &Label::Eps));
        assert!(eq.same(&lab("c"), &lab("d")));
        assert!(!eq.same(&lab("c"), &Label::Eps));
        assert_eq!(eq.classes().len(), 2);
        let (replayed, subst) = s_apply(&g, &eq.witness).unwrap();
        assert_eq!(replayed, eq.normalized);
        assert_eq!(subst, eq.subst);
    }

    #[test]
    fn partial_determinism_merges_parents() {
        let g: RelSet = [atom("a", "b", "c"), atom("a", "b", "d")].into_iter().collect();
        assert!(!eq_classes(&g).same(&lab("c"), &lab("d")));
        let eq = normalize(&g, &[Extra::P].into_iter().collect(), &|_| false);
        assert!(eq.same(&lab("c"), &lab("d")));
    }
}
