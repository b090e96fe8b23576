use std::collections::BTreeSet;
use std::fmt;

use super::label::{Label, RelAtom, Substitution};
use super::sequent::{Labelled, Sequent};
use super::KernelError;
use crate::formula::Formula;

/// Rule identifiers of the labelled calculus, including cut and the optional
/// structural rules for restricted semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Id,
    Cut,
    BotL,
    TopR,
    EmpL,
    EmpR,
    AndL,
    AndR,
    ImpL,
    ImpR,
    NotL,
    NotR,
    OrL,
    OrR,
    StarL,
    StarR,
    WandL,
    WandR,
    E,
    A,
    U,
    AC,
    Eq1,
    Eq2,
    P,
    T,
    IU,
    C,
}

pub const ALL_RULES: [Rule; 28] = [
    Rule::Id,
    Rule::Cut,
    Rule::BotL,
    Rule::TopR,
    Rule::EmpL,
    Rule::EmpR,
    Rule::AndL,
    Rule::AndR,
    Rule::ImpL,
    Rule::ImpR,
    Rule::NotL,
    Rule::NotR,
    Rule::OrL,
    Rule::OrR,
    Rule::StarL,
    Rule::StarR,
    Rule::WandL,
    Rule::WandR,
    Rule::E,
    Rule::A,
    Rule::U,
    Rule::AC,
    Rule::Eq1,
    Rule::Eq2,
    Rule::P,
    Rule::T,
    Rule::IU,
    Rule::C,
];

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Id => "id",
            Rule::Cut => "cut",
            Rule::BotL => "botL",
            Rule::TopR => "topR",
            Rule::EmpL => "empL",
            Rule::EmpR => "empR",
            Rule::AndL => "andL",
            Rule::AndR => "andR",
            Rule::ImpL => "impL",
            Rule::ImpR => "impR",
            Rule::NotL => "notL",
            Rule::NotR => "notR",
            Rule::OrL => "orL",
            Rule::OrR => "orR",
            Rule::StarL => "starL",
            Rule::StarR => "starR",
            Rule::WandL => "wandL",
            Rule::WandR => "wandR",
            Rule::E => "E",
            Rule::A => "A",
            Rule::U => "U",
            Rule::AC => "A_C",
            Rule::Eq1 => "Eq1",
            Rule::Eq2 => "Eq2",
            Rule::P => "P",
            Rule::T => "T",
            Rule::IU => "IU",
            Rule::C => "C",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        ALL_RULES.iter().copied().find(|r| r.name() == name)
    }

    /// Rules that only touch relational atoms (and possibly substitute).
    pub fn is_structural(self) -> bool {
        matches!(
            self,
            Rule::E
                | Rule::A
                | Rule::U
                | Rule::AC
                | Rule::Eq1
                | Rule::Eq2
                | Rule::P
                | Rule::T
                | Rule::IU
                | Rule::C
        )
    }

    /// The optional rule this identifier belongs to, if any.
    pub fn extra(self) -> Option<Extra> {
        match self {
            Rule::P => Some(Extra::P),
            Rule::T => Some(Extra::T),
            Rule::IU => Some(Extra::IU),
            Rule::C => Some(Extra::C),
            _ => None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional structural rules for partial determinism, totality,
/// indivisible unit and cancellativity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extra {
    P,
    T,
    IU,
    C,
}

impl Extra {
    pub fn name(self) -> &'static str {
        match self {
            Extra::P => "P",
            Extra::T => "T",
            Extra::IU => "IU",
            Extra::C => "C",
        }
    }

    pub fn from_name(name: &str) -> Option<Extra> {
        [Extra::P, Extra::T, Extra::IU, Extra::C]
            .into_iter()
            .find(|e| e.name() == name)
    }
}

/// Which parts of a cut's conclusion go to the left premise; the rest go to
/// the right premise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutParams {
    pub label: Label,
    pub formula: Formula,
    pub rels: Vec<usize>,
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

/// Rule-specific parameters. Each rule reads only the fields it needs:
///
/// * `left` / `right`: index of the principal formula in the conclusion's
///   `lhs` / `rhs` (`id` uses both);
/// * `atoms`: indices of principal relational atoms in `rels`;
/// * `fresh`: labels the rule introduces (`starL`: x,y; `wandR`: x,z;
///   `A`, `A_C`: w; `T`: c);
/// * `labels`: chosen existing labels (`U`: x; `T`: a,b);
/// * `cut`: the cut formula and context split.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleParams {
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub atoms: Vec<usize>,
    pub fresh: Vec<Label>,
    pub labels: Vec<Label>,
    pub cut: Option<CutParams>,
}

impl RuleParams {
    pub fn left(i: usize) -> RuleParams {
        RuleParams {
            left: Some(i),
            ..Default::default()
        }
    }

    pub fn right(j: usize) -> RuleParams {
        RuleParams {
            right: Some(j),
            ..Default::default()
        }
    }

    pub fn atoms(atoms: Vec<usize>) -> RuleParams {
        RuleParams {
            atoms,
            ..Default::default()
        }
    }

    pub fn with_fresh(mut self, fresh: Vec<Label>) -> RuleParams {
        self.fresh = fresh;
        self
    }

    pub fn with_atoms(mut self, atoms: Vec<usize>) -> RuleParams {
        self.atoms = atoms;
        self
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> RuleParams {
        self.labels = labels;
        self
    }

    /// Every label mentioned by the parameters.
    pub fn mentioned_labels(&self) -> Vec<&Label> {
        let mut out: Vec<&Label> = self.fresh.iter().chain(&self.labels).collect();
        if let Some(c) = &self.cut {
            out.push(&c.label);
        }
        out
    }
}

fn side_error(rule: Rule, msg: impl Into<String>) -> KernelError {
    KernelError::SideCondition {
        rule,
        message: msg.into(),
    }
}

fn principal_left(rule: Rule, c: &Sequent, p: &RuleParams) -> Result<usize, KernelError> {
    match p.left {
        Some(i) if i < c.lhs.len() => Ok(i),
        Some(i) => Err(KernelError::MissingPrincipal {
            rule,
            what: format!("lhs[{i}]"),
        }),
        None => Err(KernelError::MissingPrincipal {
            rule,
            what: "left principal index".into(),
        }),
    }
}

fn principal_right(rule: Rule, c: &Sequent, p: &RuleParams) -> Result<usize, KernelError> {
    match p.right {
        Some(j) if j < c.rhs.len() => Ok(j),
        Some(j) => Err(KernelError::MissingPrincipal {
            rule,
            what: format!("rhs[{j}]"),
        }),
        None => Err(KernelError::MissingPrincipal {
            rule,
            what: "right principal index".into(),
        }),
    }
}

fn principal_atoms(
    rule: Rule,
    c: &Sequent,
    p: &RuleParams,
    n: usize,
) -> Result<Vec<usize>, KernelError> {
    if p.atoms.len() != n {
        return Err(KernelError::MissingPrincipal {
            rule,
            what: format!("{n} principal relational atom(s)"),
        });
    }
    for &k in &p.atoms {
        if k >= c.rels.len() {
            return Err(KernelError::MissingPrincipal {
                rule,
                what: format!("rels[{k}]"),
            });
        }
    }
    if n == 2 && p.atoms[0] == p.atoms[1] {
        return Err(side_error(rule, "the two principal atoms must be distinct occurrences"));
    }
    Ok(p.atoms.clone())
}

fn fresh_labels(rule: Rule, c: &Sequent, p: &RuleParams, n: usize) -> Result<Vec<Label>, KernelError> {
    if p.fresh.len() != n {
        return Err(KernelError::MissingPrincipal {
            rule,
            what: format!("{n} fresh label(s)"),
        });
    }
    let present = c.labels();
    for (i, l) in p.fresh.iter().enumerate() {
        if !matches!(l, Label::World(_)) || present.contains(l) || p.fresh[..i].contains(l) {
            return Err(KernelError::Freshness {
                rule,
                label: l.clone(),
            });
        }
    }
    Ok(p.fresh.clone())
}

fn existing_labels(rule: Rule, c: &Sequent, p: &RuleParams, n: usize) -> Result<Vec<Label>, KernelError> {
    if p.labels.len() != n {
        return Err(KernelError::MissingPrincipal {
            rule,
            what: format!("{n} chosen label(s)"),
        });
    }
    for l in &p.labels {
        if !l.is_eps() && !c.mentions(l) {
            return Err(side_error(
                rule,
                format!("label {l} does not occur in the conclusion"),
            ));
        }
    }
    Ok(p.labels.clone())
}

fn without<T: Clone>(v: &[T], i: usize) -> Vec<T> {
    let mut out = v.to_vec();
    out.remove(i);
    out
}

fn pick<T: Clone>(v: &[T], idx: &BTreeSet<usize>, inside: bool) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| idx.contains(i) == inside)
        .map(|(_, x)| x.clone())
        .collect()
}

fn wrong_shape(rule: Rule, what: &str, found: &Labelled) -> KernelError {
    side_error(
        rule,
        format!("principal {}:{} is not {what}", found.0, found.1),
    )
}

/// The premises mandated by `rule` for `conclusion` under `params`.
pub fn rule_premises(
    rule: Rule,
    conclusion: &Sequent,
    params: &RuleParams,
) -> Result<Vec<Sequent>, KernelError> {
    let c = conclusion;
    let p = params;
    match rule {
        Rule::Id => {
            let i = principal_left(rule, c, p)?;
            let j = principal_right(rule, c, p)?;
            let (l, r) = (&c.lhs[i], &c.rhs[j]);
            if !l.1.is_atom() {
                return Err(wrong_shape(rule, "an atomic proposition", l));
            }
            if l != r {
                return Err(side_error(
                    rule,
                    format!("{}:{} does not match {}:{}", l.0, l.1, r.0, r.1),
                ));
            }
            Ok(vec![])
        }
        Rule::BotL => {
            let i = principal_left(rule, c, p)?;
            match &c.lhs[i].1 {
                Formula::Bot => Ok(vec![]),
                _ => Err(wrong_shape(rule, "bottom", &c.lhs[i])),
            }
        }
        Rule::TopR => {
            let j = principal_right(rule, c, p)?;
            match &c.rhs[j].1 {
                Formula::Top => Ok(vec![]),
                _ => Err(wrong_shape(rule, "top", &c.rhs[j])),
            }
        }
        Rule::EmpR => {
            let j = principal_right(rule, c, p)?;
            match &c.rhs[j] {
                (Label::Eps, Formula::MEmp) => Ok(vec![]),
                other => Err(wrong_shape(rule, "eps:T*", other)),
            }
        }
        Rule::EmpL => {
            let i = principal_left(rule, c, p)?;
            let (w, f) = &c.lhs[i];
            if *f != Formula::MEmp {
                return Err(wrong_shape(rule, "the unit", &c.lhs[i]));
            }
            if w.is_eps() {
                return Err(side_error(rule, "label must differ from eps"));
            }
            let mut prem = c.clone();
            prem.lhs.remove(i);
            let theta = Substitution::single(w.clone(), Label::Eps)?;
            Ok(vec![prem.substitute(&theta)])
        }
        Rule::AndL | Rule::OrL | Rule::ImpL | Rule::NotL | Rule::StarL | Rule::WandL => {
            let i = principal_left(rule, c, p)?;
            left_rule(rule, c, p, i)
        }
        Rule::AndR | Rule::OrR | Rule::ImpR | Rule::NotR | Rule::StarR | Rule::WandR => {
            let j = principal_right(rule, c, p)?;
            right_rule(rule, c, p, j)
        }
        Rule::Cut => {
            let cut = p.cut.as_ref().ok_or_else(|| KernelError::MissingPrincipal {
                rule,
                what: "cut formula".into(),
            })?;
            let rels: BTreeSet<usize> = cut.rels.iter().copied().collect();
            let lhs: BTreeSet<usize> = cut.lhs.iter().copied().collect();
            let rhs: BTreeSet<usize> = cut.rhs.iter().copied().collect();
            let bounded = rels.iter().all(|&k| k < c.rels.len())
                && lhs.iter().all(|&k| k < c.lhs.len())
                && rhs.iter().all(|&k| k < c.rhs.len());
            if !bounded || rels.len() != cut.rels.len() || lhs.len() != cut.lhs.len() || rhs.len() != cut.rhs.len() {
                return Err(side_error(rule, "malformed context split"));
            }
            let cf = (cut.label.clone(), cut.formula.clone());
            let mut left = Sequent {
                rels: pick(&c.rels, &rels, true),
                lhs: pick(&c.lhs, &lhs, true),
                rhs: pick(&c.rhs, &rhs, true),
            };
            left.rhs.push(cf.clone());
            let mut right = Sequent {
                rels: pick(&c.rels, &rels, false),
                lhs: pick(&c.lhs, &lhs, false),
                rhs: pick(&c.rhs, &rhs, false),
            };
            right.lhs.push(cf);
            Ok(vec![left, right])
        }
        Rule::E => {
            let k = principal_atoms(rule, c, p, 1)?[0];
            let mut prem = c.clone();
            prem.rels.push(c.rels[k].swapped());
            Ok(vec![prem])
        }
        Rule::A => {
            let ks = principal_atoms(rule, c, p, 2)?;
            let (first, second) = (&c.rels[ks[0]], &c.rels[ks[1]]);
            if second.parent != first.left {
                return Err(side_error(
                    rule,
                    format!("{second} does not decompose the left child of {first}"),
                ));
            }
            let w = fresh_labels(rule, c, p, 1)?.remove(0);
            let mut prem = c.clone();
            prem.rels.push(RelAtom::new(second.left.clone(), w.clone(), first.parent.clone()));
            prem.rels.push(RelAtom::new(first.right.clone(), second.right.clone(), w));
            Ok(vec![prem])
        }
        Rule::AC => {
            let k = principal_atoms(rule, c, p, 1)?[0];
            let atom = &c.rels[k];
            if atom.parent != atom.left {
                return Err(side_error(rule, format!("{atom} is not of the form (x,y ▹ x)")));
            }
            let w = fresh_labels(rule, c, p, 1)?.remove(0);
            let mut prem = c.clone();
            prem.rels.push(RelAtom::new(atom.left.clone(), w.clone(), atom.left.clone()));
            prem.rels.push(RelAtom::new(atom.right.clone(), atom.right.clone(), w));
            Ok(vec![prem])
        }
        Rule::U => {
            let x = existing_labels(rule, c, p, 1)?.remove(0);
            let mut prem = c.clone();
            prem.rels.push(RelAtom::new(x.clone(), Label::Eps, x));
            Ok(vec![prem])
        }
        Rule::Eq1 | Rule::Eq2 => {
            let k = principal_atoms(rule, c, p, 1)?[0];
            let atom = &c.rels[k];
            if !atom.left.is_eps() {
                return Err(side_error(rule, format!("{atom} does not start with eps")));
            }
            let (from, to) = if rule == Rule::Eq1 {
                (&atom.right, &atom.parent)
            } else {
                (&atom.parent, &atom.right)
            };
            if from.is_eps() {
                return Err(side_error(rule, "the replaced label must differ from eps"));
            }
            let theta = Substitution::single(from.clone(), to.clone())?;
            Ok(vec![c.substitute(&theta)])
        }
        Rule::P | Rule::C => {
            let ks = principal_atoms(rule, c, p, 2)?;
            let (keep, drop) = (&c.rels[ks[0]], &c.rels[ks[1]]);
            let (from, to) = if rule == Rule::P {
                if keep.left != drop.left || keep.right != drop.right {
                    return Err(side_error(rule, format!("{keep} and {drop} differ in their children")));
                }
                (&drop.parent, &keep.parent)
            } else {
                if keep.left != drop.left || keep.parent != drop.parent {
                    return Err(side_error(rule, format!("{keep} and {drop} differ in left child or parent")));
                }
                (&drop.right, &keep.right)
            };
            if from.is_eps() && from != to {
                return Err(side_error(rule, "the replaced label must differ from eps"));
            }
            let mut theta = Substitution::identity();
            if from != to {
                theta.insert(from.clone(), to.clone())?;
            }
            let mut prem = c.clone();
            prem.rels.remove(ks[1]);
            Ok(vec![prem.substitute(&theta)])
        }
        Rule::IU => {
            let k = principal_atoms(rule, c, p, 1)?[0];
            let atom = &c.rels[k];
            if !atom.parent.is_eps() {
                return Err(side_error(rule, format!("{atom} is not of the form (a,b ▹ eps)")));
            }
            let mut theta = Substitution::identity();
            for l in [&atom.left, &atom.right] {
                if !l.is_eps() {
                    theta.insert(l.clone(), Label::Eps)?;
                }
            }
            Ok(vec![c.substitute(&theta)])
        }
        Rule::T => {
            let ab = existing_labels(rule, c, p, 2)?;
            let w = fresh_labels(rule, c, p, 1)?.remove(0);
            let mut prem = c.clone();
            prem.rels.push(RelAtom::new(ab[0].clone(), ab[1].clone(), w));
            Ok(vec![prem])
        }
    }
}

fn left_rule(rule: Rule, c: &Sequent, p: &RuleParams, i: usize) -> Result<Vec<Sequent>, KernelError> {
    let (w, f) = &c.lhs[i];
    let rest = Sequent {
        rels: c.rels.clone(),
        lhs: without(&c.lhs, i),
        rhs: c.rhs.clone(),
    };
    match (rule, f) {
        (Rule::AndL, Formula::And(a, b)) => {
            let mut s = rest;
            s.lhs.push((w.clone(), (**a).clone()));
            s.lhs.push((w.clone(), (**b).clone()));
            Ok(vec![s])
        }
        (Rule::OrL, Formula::Or(a, b)) => {
            let mut s1 = rest.clone();
            s1.lhs.push((w.clone(), (**a).clone()));
            let mut s2 = rest;
            s2.lhs.push((w.clone(), (**b).clone()));
            Ok(vec![s1, s2])
        }
        (Rule::ImpL, Formula::Imp(a, b)) => {
            let mut s1 = rest.clone();
            s1.rhs.push((w.clone(), (**a).clone()));
            let mut s2 = rest;
            s2.lhs.push((w.clone(), (**b).clone()));
            Ok(vec![s1, s2])
        }
        (Rule::NotL, Formula::Not(a)) => {
            let mut s = rest;
            s.rhs.push((w.clone(), (**a).clone()));
            Ok(vec![s])
        }
        (Rule::StarL, Formula::Star(a, b)) => {
            let xy = fresh_labels(rule, c, p, 2)?;
            let mut s = rest;
            s.rels.push(RelAtom::new(xy[0].clone(), xy[1].clone(), w.clone()));
            s.lhs.push((xy[0].clone(), (**a).clone()));
            s.lhs.push((xy[1].clone(), (**b).clone()));
            Ok(vec![s])
        }
        (Rule::WandL, Formula::Wand(a, b)) => {
            let k = principal_atoms(rule, c, p, 1)?[0];
            let atom = &c.rels[k];
            if atom.right != *w {
                return Err(side_error(rule, format!("{atom} does not have {w} as right child")));
            }
            let mut s1 = c.clone();
            s1.rhs.push((atom.left.clone(), (**a).clone()));
            let mut s2 = c.clone();
            s2.lhs.push((atom.parent.clone(), (**b).clone()));
            Ok(vec![s1, s2])
        }
        _ => Err(wrong_shape(rule, "of the rule's connective", &c.lhs[i])),
    }
}

fn right_rule(rule: Rule, c: &Sequent, p: &RuleParams, j: usize) -> Result<Vec<Sequent>, KernelError> {
    let (w, f) = &c.rhs[j];
    let rest = Sequent {
        rels: c.rels.clone(),
        lhs: c.lhs.clone(),
        rhs: without(&c.rhs, j),
    };
    match (rule, f) {
        (Rule::AndR, Formula::And(a, b)) => {
            let mut s1 = rest.clone();
            s1.rhs.push((w.clone(), (**a).clone()));
            let mut s2 = rest;
            s2.rhs.push((w.clone(), (**b).clone()));
            Ok(vec![s1, s2])
        }
        (Rule::OrR, Formula::Or(a, b)) => {
            let mut s = rest;
            s.rhs.push((w.clone(), (**a).clone()));
            s.rhs.push((w.clone(), (**b).clone()));
            Ok(vec![s])
        }
        (Rule::ImpR, Formula::Imp(a, b)) => {
            let mut s = rest;
            s.lhs.push((w.clone(), (**a).clone()));
            s.rhs.push((w.clone(), (**b).clone()));
            Ok(vec![s])
        }
        (Rule::NotR, Formula::Not(a)) => {
            let mut s = rest;
            s.lhs.push((w.clone(), (**a).clone()));
            Ok(vec![s])
        }
        (Rule::WandR, Formula::Wand(a, b)) => {
            let xz = fresh_labels(rule, c, p, 2)?;
            let mut s = rest;
            s.rels.push(RelAtom::new(xz[0].clone(), w.clone(), xz[1].clone()));
            s.lhs.push((xz[0].clone(), (**a).clone()));
            s.rhs.push((xz[1].clone(), (**b).clone()));
            Ok(vec![s])
        }
        (Rule::StarR, Formula::Star(a, b)) => {
            let k = principal_atoms(rule, c, p, 1)?[0];
            let atom = &c.rels[k];
            if atom.parent != *w {
                return Err(side_error(rule, format!("{atom} does not have {w} as parent")));
            }
            let mut s1 = c.clone();
            s1.rhs.push((atom.left.clone(), (**a).clone()));
            let mut s2 = c.clone();
            s2.rhs.push((atom.right.clone(), (**b).clone()));
            Ok(vec![s1, s2])
        }
        _ => Err(wrong_shape(rule, "of the rule's connective", &c.rhs[j])),
    }
}
