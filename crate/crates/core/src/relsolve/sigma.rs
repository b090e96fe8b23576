use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::kernel::{Label, RelAtom, Rule, Substitution};

/// A set of relational atoms.
pub type RelSet = BTreeSet<RelAtom>;

/// One structural-rule application on a set of relational atoms.
///
/// `principal` is ordered: `A` lists the decomposed atom then the atom
/// decomposing its left child; `P` and `C` list the kept atom then the merged
/// one. `labels` carries the chosen label of `U` and the pair of `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralStep {
    pub rule: Rule,
    pub principal: Vec<RelAtom>,
    pub labels: Vec<Label>,
    pub theta: Substitution,
    pub produced: Vec<RelAtom>,
    pub introduced: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("{rule} does not apply to {atoms}")]
    Shape { rule: Rule, atoms: String },
    #[error("{0} is not a structural rule")]
    NotStructural(Rule),
}

fn shape(rule: Rule, atoms: &[&RelAtom]) -> StepError {
    let atoms: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
    StepError::Shape {
        rule,
        atoms: atoms.join(", "),
    }
}

fn plain(rule: Rule, principal: Vec<RelAtom>, produced: Vec<RelAtom>) -> StructuralStep {
    StructuralStep {
        rule,
        principal,
        labels: Vec::new(),
        theta: Substitution::identity(),
        produced,
        introduced: Vec::new(),
    }
}

impl StructuralStep {
    /// Exchange: adds `(y,x ▹ z)` for `(x,y ▹ z)`.
    pub fn e(atom: &RelAtom) -> StructuralStep {
        plain(Rule::E, vec![atom.clone()], vec![atom.swapped()])
    }

    /// Associativity on `(x,y ▹ z)` and `(u,v ▹ x)` with fresh `w`, adding
    /// `(u,w ▹ z)` and `(y,v ▹ w)`. Coinciding atoms give the contracted form.
    pub fn a(first: &RelAtom, second: &RelAtom, w: Label) -> Result<StructuralStep, StepError> {
        if second.parent != first.left {
            return Err(shape(Rule::A, &[first, second]));
        }
        if first == second {
            return StructuralStep::ac(first, w);
        }
        let mut s = plain(
            Rule::A,
            vec![first.clone(), second.clone()],
            vec![
                RelAtom::new(second.left.clone(), w.clone(), first.parent.clone()),
                RelAtom::new(first.right.clone(), second.right.clone(), w.clone()),
            ],
        );
        s.introduced = vec![w];
        Ok(s)
    }

    /// Contracted associativity on `(x,y ▹ x)` with fresh `w`.
    pub fn ac(atom: &RelAtom, w: Label) -> Result<StructuralStep, StepError> {
        if atom.parent != atom.left {
            return Err(shape(Rule::AC, &[atom]));
        }
        let mut s = plain(
            Rule::AC,
            vec![atom.clone()],
            vec![
                RelAtom::new(atom.left.clone(), w.clone(), atom.left.clone()),
                RelAtom::new(atom.right.clone(), atom.right.clone(), w.clone()),
            ],
        );
        s.introduced = vec![w];
        Ok(s)
    }

    /// Unit: adds `(x,ε ▹ x)`.
    pub fn u(x: Label) -> StructuralStep {
        let mut s = plain(
            Rule::U,
            vec![],
            vec![RelAtom::new(x.clone(), Label::Eps, x.clone())],
        );
        s.labels = vec![x];
        s
    }

    /// `Eq1` on `(ε,w ▹ w')` replaces `w` by `w'`.
    pub fn eq1(atom: &RelAtom) -> Result<StructuralStep, StepError> {
        if !atom.left.is_eps() || atom.right.is_eps() {
            return Err(shape(Rule::Eq1, &[atom]));
        }
        Ok(substituting(Rule::Eq1, vec![atom.clone()], &[(&atom.right, &atom.parent)]))
    }

    /// `Eq2` on `(ε,w' ▹ w)` replaces `w` by `w'`.
    pub fn eq2(atom: &RelAtom) -> Result<StructuralStep, StepError> {
        if !atom.left.is_eps() || atom.parent.is_eps() {
            return Err(shape(Rule::Eq2, &[atom]));
        }
        Ok(substituting(Rule::Eq2, vec![atom.clone()], &[(&atom.parent, &atom.right)]))
    }

    /// Partial determinism: `(a,b ▹ c)` and `(a,b ▹ d)` identify `d` with `c`.
    pub fn p(keep: &RelAtom, merge: &RelAtom) -> Result<StructuralStep, StepError> {
        if keep.left != merge.left || keep.right != merge.right || merge.parent.is_eps() || keep == merge {
            return Err(shape(Rule::P, &[keep, merge]));
        }
        Ok(substituting(
            Rule::P,
            vec![keep.clone(), merge.clone()],
            &[(&merge.parent, &keep.parent)],
        ))
    }

    /// Cancellativity: `(a,b ▹ c)` and `(a,d ▹ c)` identify `d` with `b`.
    pub fn c(keep: &RelAtom, merge: &RelAtom) -> Result<StructuralStep, StepError> {
        if keep.left != merge.left || keep.parent != merge.parent || merge.right.is_eps() || keep == merge {
            return Err(shape(Rule::C, &[keep, merge]));
        }
        Ok(substituting(
            Rule::C,
            vec![keep.clone(), merge.clone()],
            &[(&merge.right, &keep.right)],
        ))
    }

    /// Indivisible unit: `(a,b ▹ ε)` sends `a` and `b` to `ε`.
    pub fn iu(atom: &RelAtom) -> Result<StructuralStep, StepError> {
        if !atom.parent.is_eps() || (atom.left.is_eps() && atom.right.is_eps()) {
            return Err(shape(Rule::IU, &[atom]));
        }
        Ok(substituting(
            Rule::IU,
            vec![atom.clone()],
            &[(&atom.left, &Label::Eps), (&atom.right, &Label::Eps)],
        ))
    }

    /// Totality: adds `(a,b ▹ c)` with fresh `c`.
    pub fn t(a: Label, b: Label, c: Label) -> StructuralStep {
        let mut s = plain(Rule::T, vec![], vec![RelAtom::new(a.clone(), b.clone(), c.clone())]);
        s.labels = vec![a, b];
        s.introduced = vec![c];
        s
    }

    /// Whether applying the step renames labels.
    pub fn substitutes(&self) -> bool {
        !self.theta.is_identity()
    }
}

fn substituting(rule: Rule, principal: Vec<RelAtom>, pairs: &[(&Label, &Label)]) -> StructuralStep {
    let mut theta = Substitution::identity();
    for (from, to) in pairs {
        if !from.is_eps() {
            theta
                .insert((*from).clone(), (*to).clone())
                .expect("source is not eps");
        }
    }
    let produced = principal.iter().take(1).map(|a| a.substitute(&theta)).collect();
    StructuralStep {
        rule,
        principal,
        labels: Vec::new(),
        theta,
        produced,
        introduced: Vec::new(),
    }
}

impl fmt::Display for StructuralStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        let mut args: Vec<String> = self.principal.iter().map(|a| a.to_string()).collect();
        args.extend(self.labels.iter().map(|l| l.to_string()));
        if !self.introduced.is_empty() {
            let fresh: Vec<String> = self.introduced.iter().map(|l| l.to_string()).collect();
            args.push(format!("fresh {}", fresh.join(",")));
        }
        write!(f, "[{}]", args.join(", "))
    }
}

/// An ordered sequence of structural steps.
pub type SigmaSeq = Vec<StructuralStep>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index} ({step}) is undefined: {reason}")]
pub struct SApplyError {
    pub index: usize,
    pub step: String,
    pub reason: String,
}

/// Applies one step to `set` in place, returning its substitution.
pub fn apply_step(set: &mut RelSet, step: &StructuralStep) -> Result<(), String> {
    for a in &step.principal {
        if !set.contains(a) {
            return Err(format!("principal atom {a} is absent"));
        }
    }
    if !step.theta.is_identity() {
        let mapped: RelSet = set.iter().map(|a| a.substitute(&step.theta)).collect();
        *set = mapped;
    }
    for a in &step.produced {
        set.insert(a.clone());
    }
    Ok(())
}

/// `S(G,σ)` together with `subst(σ)`.
pub fn s_apply(g: &RelSet, sigma: &[StructuralStep]) -> Result<(RelSet, Substitution), SApplyError> {
    let mut set = g.clone();
    let mut subst = Substitution::identity();
    for (index, step) in sigma.iter().enumerate() {
        apply_step(&mut set, step).map_err(|reason| SApplyError {
            index,
            step: step.to_string(),
            reason,
        })?;
        subst = subst.then(&step.theta);
    }
    Ok((set, subst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: &str) -> Label {
        Label::world(n)
    }

    fn atom(a: &str, b: &str, c: &str) -> RelAtom {
        let lab = |s: &str| if s == "eps" { Label::Eps } else { l(s) };
        RelAtom::new(lab(a), lab(b), lab(c))
    }

    #[test]
    fn s_apply_examples() {
        let g: RelSet = [atom("a", "b", "c")].into_iter().collect();
        let (s, th) = s_apply(&g, &[StructuralStep::e(&atom("a", "b", "c"))]).unwrap();
        assert!(s.contains(&atom("b", "a", "c")) && s.contains(&atom("a", "b", "c")));
        assert!(th.is_identity());
        let (s, th) = s_apply(&g, &[]).unwrap();
        assert_eq!(s, g);
        assert!(th.is_identity());
        let err = s_apply(&RelSet::new(), &[StructuralStep::e(&atom("a", "b", "c"))]).unwrap_err();
        assert_eq!(err.index, 0);
    }

    #[test]
    fn exchange_twice_adds_nothing_new() {
        let a = atom("a", "b", "c");
        let g: RelSet = [a.clone()].into_iter().collect();
        let (once, _) = s_apply(&g, &[StructuralStep::e(&a)]).unwrap();
        let (twice, _) = s_apply(&g, &[StructuralStep::e(&a), StructuralStep::e(&a.swapped())]).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn eq_steps_compose_substitutions() {
        let g: RelSet = [atom("eps", "a", "b"), atom("b", "c", "d")].into_iter().collect();
        let step = StructuralStep::eq2(&atom("eps", "a", "b")).unwrap();
        let (s, th) = s_apply(&g, &[step]).unwrap();
        assert_eq!(th.apply(&l("b")), l("a"));
        assert!(s.contains(&atom("a", "c", "d")));
        assert!(s.contains(&atom("eps", "a", "a")));
    }

    #[test]
    fn associativity_with_equal_atoms_is_contracted() {
        let x = atom("x", "y", "x");
        let s = StructuralStep::a(&x, &x, l("w")).unwrap();
        assert_eq!(s.rule, Rule::AC);
        assert!(s.produced.contains(&atom("x", "w", "x")));
        assert!(s.produced.contains(&atom("y", "y", "w")));
    }
}
