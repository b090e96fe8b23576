//! Finite commutative non-deterministic monoids, forcing, and an exhaustive
//! countermodel search over small models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::Formula;
use crate::kernel::Extra;

/// Largest carrier the enumerator accepts.
pub const MAX_MODEL_SIZE: usize = 4;
/// Most propositional atoms the countermodel search accepts.
pub const MAX_ATOMS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("model size {0} is out of range 1..={MAX_MODEL_SIZE}")]
    Size(usize),
    #[error("formula has {0} atoms; at most {MAX_ATOMS} are supported")]
    TooManyAtoms(usize),
    #[error("atom {0} has no valuation")]
    UnknownAtom(String),
    #[error("world {0} is outside the model")]
    NoSuchWorld(usize),
}

/// A set of worlds as a bit mask.
pub type Worlds = u64;

/// A commutative monoid on worlds `0..size` with unit `0`, where `table[a *
/// size + b]` is the set `a ∘ b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub size: usize,
    table: Vec<Worlds>,
}

impl Frame {
    pub fn compose(&self, a: usize, b: usize) -> Worlds {
        self.table[a * self.size + b]
    }

    pub fn all(&self) -> Worlds {
        (1u64 << self.size) - 1
    }

    /// Builds a frame from the compositions of non-unit pairs `a ≤ b`, in
    /// row-major order; returns `None` if the table is not a monoid.
    pub fn from_upper(size: usize, upper: &[Worlds]) -> Option<Frame> {
        let mut partial = Partial::new(size);
        if upper.len() != partial.entries.len() {
            return None;
        }
        for (k, m) in upper.iter().enumerate() {
            partial.set(k, Some(*m));
        }
        (partial.associative() && upper.iter().all(|m| *m <= partial.all)).then(|| partial.frame())
    }

    /// Whether the frame satisfies the conditions `extras` name.
    pub fn satisfies(&self, extras: &BTreeSet<Extra>) -> bool {
        let n = self.size;
        (0..n).all(|a| {
            (0..n).all(|b| {
                let m = self.compose(a, b);
                let count = m.count_ones();
                (!extras.contains(&Extra::P) || count <= 1)
                    && (!extras.contains(&Extra::T) || count >= 1)
                    && (!extras.contains(&Extra::IU) || m & 1 == 0 || (a == 0 && b == 0))
                    && (!extras.contains(&Extra::C)
                        || (0..n).all(|c| c == b || self.compose(a, c) & m == 0))
            })
        })
    }
}

/// A frame under construction: `entries` lists the pairs `1 ≤ a ≤ b`.
struct Partial {
    size: usize,
    all: Worlds,
    entries: Vec<(usize, usize)>,
    values: Vec<Option<Worlds>>,
}

impl Partial {
    fn new(size: usize) -> Partial {
        let mut entries = Vec::new();
        for a in 1..size {
            for b in a..size {
                entries.push((a, b));
            }
        }
        Partial {
            size,
            all: (1u64 << size) - 1,
            values: vec![None; entries.len()],
            entries,
        }
    }

    fn index(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.entries.iter().position(|e| *e == (a, b)).expect("pair exists")
    }

    fn set(&mut self, k: usize, v: Option<Worlds>) {
        self.values[k] = v;
    }

    fn get(&self, a: usize, b: usize) -> Option<Worlds> {
        if a == 0 {
            return Some(1 << b);
        }
        if b == 0 {
            return Some(1 << a);
        }
        self.values[self.index(a, b)]
    }

    /// `(m) ∘ c`, if every needed entry is known.
    fn lift(&self, m: Worlds, c: usize) -> Option<Worlds> {
        let mut out = 0;
        for x in 0..self.size {
            if m >> x & 1 == 1 {
                out |= self.get(x, c)?;
            }
        }
        Some(out)
    }

    /// No fully known triple violates associativity.
    fn associative(&self) -> bool {
        let n = self.size;
        for a in 1..n {
            for b in 1..n {
                for c in 1..n {
                    let left = self.get(a, b).and_then(|m| self.lift(m, c));
                    let right = self.get(b, c).and_then(|m| self.lift(m, a));
                    if let (Some(l), Some(r)) = (left, right) {
                        if l != r {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn frame(&self) -> Frame {
        let n = self.size;
        let mut table = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = self.get(a, b).expect("complete");
            }
        }
        Frame { size: n, table }
    }
}

/// Every frame of the given size satisfying `extras`, in a fixed order.
/// Isomorphic copies are not identified.
pub fn enumerate_frames(size: usize, extras: &BTreeSet<Extra>) -> Result<Vec<Frame>, SemanticsError> {
    if size == 0 || size > MAX_MODEL_SIZE {
        return Err(SemanticsError::Size(size));
    }
    let mut partial = Partial::new(size);
    let domain: Vec<Worlds> = (0..=partial.all)
        .filter(|m| {
            let count = m.count_ones();
            (!extras.contains(&Extra::P) || count <= 1)
                && (!extras.contains(&Extra::T) || count >= 1)
                && (!extras.contains(&Extra::IU) || m & 1 == 0)
        })
        .collect();
    let mut out = Vec::new();
    fill(&mut partial, 0, &domain, extras, &mut out);
    Ok(out)
}

fn fill(p: &mut Partial, k: usize, domain: &[Worlds], extras: &BTreeSet<Extra>, out: &mut Vec<Frame>) {
    if k == p.entries.len() {
        let f = p.frame();
        if f.satisfies(extras) {
            out.push(f);
        }
        return;
    }
    for &m in domain {
        p.set(k, Some(m));
        if p.associative() {
            fill(p, k + 1, domain, extras, out);
        }
    }
    p.set(k, None);
}

/// A frame with a valuation of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub frame: Frame,
    pub valuation: BTreeMap<Arc<str>, Worlds>,
}

impl Model {
    /// The worlds forcing `f`; atoms without a valuation hold nowhere.
    pub fn sat(&self, f: &Formula) -> Worlds {
        let fr = &self.frame;
        let all = fr.all();
        match f {
            Formula::Atom(p) => self.valuation.get(p).copied().unwrap_or(0),
            Formula::Top => all,
            Formula::Bot => 0,
            Formula::MEmp => 1,
            Formula::Not(a) => all & !self.sat(a),
            Formula::And(a, b) => self.sat(a) & self.sat(b),
            Formula::Or(a, b) => self.sat(a) | self.sat(b),
            Formula::Imp(a, b) => (all & !self.sat(a)) | self.sat(b),
            Formula::Star(a, b) => {
                let (sa, sb) = (self.sat(a), self.sat(b));
                let mut out = 0;
                for x in worlds(sa, fr.size) {
                    for y in worlds(sb, fr.size) {
                        out |= fr.compose(x, y);
                    }
                }
                out
            }
            Formula::Wand(a, b) => {
                let (sa, sb) = (self.sat(a), self.sat(b));
                let mut out = 0;
                for w in 0..fr.size {
                    if worlds(sa, fr.size).all(|x| fr.compose(w, x) & !sb == 0) {
                        out |= 1 << w;
                    }
                }
                out
            }
        }
    }

    fn check_atoms(&self, f: &Formula) -> Result<(), SemanticsError> {
        match f.atoms().into_iter().find(|p| !self.valuation.contains_key(p)) {
            Some(p) => Err(SemanticsError::UnknownAtom(p.to_string())),
            None => Ok(()),
        }
    }

    pub fn forces(&self, w: usize, f: &Formula) -> Result<bool, SemanticsError> {
        if w >= self.frame.size {
            return Err(SemanticsError::NoSuchWorld(w));
        }
        self.check_atoms(f)?;
        Ok(self.sat(f) >> w & 1 == 1)
    }

    pub fn valid_in(&self, f: &Formula) -> Result<bool, SemanticsError> {
        self.check_atoms(f)?;
        Ok(self.sat(f) == self.frame.all())
    }
}

fn worlds(m: Worlds, size: usize) -> impl Iterator<Item = usize> {
    (0..size).filter(move |x| m >> x & 1 == 1)
}

/// A model and world refuting a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub model: Model,
    pub world: usize,
}

/// Searches models of size `1..=max_size` satisfying `extras`, with every
/// valuation of the formula's atoms, for a world where `f` fails.
pub fn countermodel(
    f: &Formula,
    max_size: usize,
    extras: &BTreeSet<Extra>,
) -> Result<Option<Countermodel>, SemanticsError> {
    let atoms: Vec<Arc<str>> = f.atoms().into_iter().collect();
    if atoms.len() > MAX_ATOMS {
        return Err(SemanticsError::TooManyAtoms(atoms.len()));
    }
    if max_size == 0 || max_size > MAX_MODEL_SIZE {
        return Err(SemanticsError::Size(max_size));
    }
    for size in 1..=max_size {
        for frame in enumerate_frames(size, extras)? {
            let all = frame.all();
            let mut model = Model {
                frame,
                valuation: BTreeMap::new(),
            };
            let combos = 1u64 << (size * atoms.len());
            for code in 0..combos {
                for (i, p) in atoms.iter().enumerate() {
                    model.valuation.insert(p.clone(), (code >> (i * size)) & all);
                }
                let s = model.sat(f);
                if s != all {
                    let world = (!s & all).trailing_zeros() as usize;
                    return Ok(Some(Countermodel { model, world }));
                }
            }
        }
    }
    Ok(None)
}

fn show_worlds(m: Worlds, size: usize) -> String {
    let ws: Vec<String> = worlds(m, size).map(|w| w.to_string()).collect();
    format!("{{{}}}", ws.join(","))
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "worlds 0..{} (0 is the unit)", self.size - 1)?;
        for a in 1..self.size {
            for b in a..self.size {
                writeln!(f, "  {a} * {b} = {}", show_worlds(self.compose(a, b), self.size))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.frame)?;
        for (p, m) in &self.valuation {
            writeln!(f, "  {p} holds at {}", show_worlds(*m, self.frame.size))?;
        }
        Ok(())
    }
}

impl fmt::Display for Countermodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.model)?;
        writeln!(f, "fails at world {}", self.world)
    }
}
