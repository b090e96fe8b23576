use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::KernelError;

/// A label denoting a world of the monoid.
///
/// `Var` labels are free variables of symbolic sequents; the checker rejects
/// them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Eps,
    World(Arc<str>),
    Var(u32),
}

impl Label {
    pub fn world(name: &str) -> Label {
        Label::World(Arc::from(name))
    }

    pub fn is_eps(&self) -> bool {
        matches!(self, Label::Eps)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Label::Var(_))
    }

    /// Reads the serialized form produced by `Display`.
    pub fn parse(text: &str) -> Result<Label, KernelError> {
        if text == "eps" {
            return Ok(Label::Eps);
        }
        if let Some(rest) = text.strip_prefix("?x") {
            return rest
                .parse::<u32>()
                .map(Label::Var)
                .map_err(|_| KernelError::BadLabel(text.to_string()));
        }
        let valid = !text.is_empty()
            && text
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        if valid {
            Ok(Label::world(text))
        } else {
            Err(KernelError::BadLabel(text.to_string()))
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Eps => f.write_str("eps"),
            Label::World(n) => f.write_str(n),
            Label::Var(i) => write!(f, "?x{i}"),
        }
    }
}

/// The relational atom `(left, right ▹ parent)`: `parent` is in the
/// composition of `left` and `right`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelAtom {
    pub left: Label,
    pub right: Label,
    pub parent: Label,
}

impl RelAtom {
    pub fn new(left: Label, right: Label, parent: Label) -> RelAtom {
        RelAtom {
            left,
            right,
            parent,
        }
    }

    /// The atom with its two children exchanged.
    pub fn swapped(&self) -> RelAtom {
        RelAtom::new(self.right.clone(), self.left.clone(), self.parent.clone())
    }

    pub fn labels(&self) -> [&Label; 3] {
        [&self.left, &self.right, &self.parent]
    }

    pub fn map(&self, f: impl Fn(&Label) -> Label) -> RelAtom {
        RelAtom::new(f(&self.left), f(&self.right), f(&self.parent))
    }

    pub fn substitute(&self, theta: &Substitution) -> RelAtom {
        self.map(|l| theta.apply(l))
    }

    pub fn has_var(&self) -> bool {
        self.labels().iter().any(|l| l.is_var())
    }
}

impl fmt::Display for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{} ▹ {})", self.left, self.right, self.parent)
    }
}

/// A finite label renaming that never moves `ε`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Label, Label>,
}

impl Substitution {
    pub fn identity() -> Substitution {
        Substitution::default()
    }

    /// `[to/from]`: replaces `from` by `to`.
    pub fn single(from: Label, to: Label) -> Result<Substitution, KernelError> {
        let mut s = Substitution::identity();
        s.insert(from, to)?;
        Ok(s)
    }

    pub fn insert(&mut self, from: Label, to: Label) -> Result<(), KernelError> {
        if from.is_eps() {
            return Err(KernelError::EpsInDomain);
        }
        if from != to {
            self.map.insert(from, to);
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, l: &Label) -> Option<&Label> {
        self.map.get(l)
    }

    pub fn apply(&self, l: &Label) -> Label {
        self.map.get(l).cloned().unwrap_or_else(|| l.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Label)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Label> {
        self.map.keys()
    }

    /// The composite `self ∘ then`, meaning `t(self ∘ then) = (t self) then`.
    pub fn then(&self, then: &Substitution) -> Substitution {
        let mut map = BTreeMap::new();
        for (k, v) in &self.map {
            let image = then.apply(v);
            if *k != image {
                map.insert(k.clone(), image);
            }
        }
        for (k, v) in &then.map {
            if !self.map.contains_key(k) {
                map.insert(k.clone(), v.clone());
            }
        }
        Substitution { map }
    }

    /// Keeps only the entries whose source satisfies `keep`.
    pub fn restricted(&self, keep: impl Fn(&Label) -> bool) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}/{k}")?;
        }
        f.write_str("]")
    }
}

/// Deterministic supply of fresh labels `{prefix}{n}`.
///
/// The counter only moves forward, so one generator never hands out the same
/// name twice even when the caller's context is incomplete.
#[derive(Clone, Debug)]
pub struct FreshLabels {
    prefix: Arc<str>,
    next: u32,
}

impl Default for FreshLabels {
    fn default() -> Self {
        FreshLabels::new()
    }
}

impl FreshLabels {
    pub fn new() -> FreshLabels {
        FreshLabels::with_prefix("w")
    }

    pub fn with_prefix(prefix: &str) -> FreshLabels {
        FreshLabels {
            prefix: Arc::from(prefix),
            next: 0,
        }
    }

    /// Returns a world label that is not in `ctx`.
    pub fn fresh(&mut self, ctx: &BTreeSet<Label>) -> Label {
        self.fresh_where(|l| ctx.contains(l))
    }

    /// Returns a world label for which `taken` is false.
    pub fn fresh_where(&mut self, taken: impl Fn(&Label) -> bool) -> Label {
        loop {
            let l = Label::world(&format!("{}{}", self.prefix, self.next));
            self.next += 1;
            if !taken(&l) {
                return l;
            }
        }
    }

    /// Returns a free variable numbered from the same counter as labels.
    pub fn fresh_var(&mut self) -> Label {
        let v = Label::Var(self.next);
        self.next += 1;
        v
    }
}

/// One-shot form of [`FreshLabels::fresh`] with a new generator.
pub fn fresh_label(ctx: &BTreeSet<Label>) -> Label {
    FreshLabels::new().fresh(ctx)
}
