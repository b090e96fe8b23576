//! Free-variable backward proof search: saturation with the invertible
//! rules, positive rules creating variables, constraint solving on closed
//! symbolic trees, and reconstruction of a ground derivation.

mod engine;
mod reconstruct;

use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use crate::constraints::{ConstraintSystem, Solution};
use crate::formula::Formula;
use crate::kernel::{Derivation, Extra, FreshLabels, Label, RuleParams, Rule, Sequent};
use crate::relsolve::Budget;
use crate::symbolic::{sym_premises, SymNode, SymbolicError};

pub use reconstruct::{reconstruct, ReconstructError};

/// Search parameters.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Expansions allowed per `starR`/`wandL` principal (and `T`) on one
    /// branch; searched iteratively from 1.
    pub multiplicity: usize,
    /// Limits of each relational entailment query.
    pub r_budget: Budget,
    pub extras: BTreeSet<Extra>,
    pub timeout: Duration,
    /// Candidate witnesses tried per constraint with unknowns.
    pub match_limit: usize,
    /// Whether the caller will write the proof out. The derivation is built
    /// and checked either way, since a proof is only reported once the
    /// kernel accepts it.
    pub emit_proof: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            multiplicity: 3,
            r_budget: Budget::default(),
            extras: BTreeSet::new(),
            timeout: Duration::from_millis(10_000),
            match_limit: 32,
            emit_proof: false,
        }
    }
}

/// Counters reported by a search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Symbolic branches closed.
    pub branches: usize,
    /// Constraints of the last system handed to the solver.
    pub constraints: usize,
    /// Rule alternatives undone.
    pub backtracks: usize,
    /// Closed symbolic trees handed to the solver.
    pub solver_calls: usize,
    /// Multiplicity of the last completed or interrupted round.
    pub multiplicity: usize,
    pub elapsed: Duration,
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "branches={} constraints={} backtracks={} solver_calls={} multiplicity={} time={:.3}s",
            self.branches,
            self.constraints,
            self.backtracks,
            self.solver_calls,
            self.multiplicity,
            self.elapsed.as_secs_f64()
        )
    }
}

/// A found proof with the artifacts that produced it.
#[derive(Clone, Debug)]
pub struct Proof {
    pub symbolic: SymNode,
    pub constraints: ConstraintSystem,
    pub solution: Solution,
    pub derivation: Derivation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Every alternative up to the multiplicity bound failed.
    Exhausted,
    Timeout,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Proved(Box<Proof>, SearchStats),
    Unproved(StopReason, SearchStats),
}

impl Outcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, Outcome::Proved(..))
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            Outcome::Proved(_, s) | Outcome::Unproved(_, s) => s,
        }
    }

    pub fn proof(&self) -> Option<&Proof> {
        match self {
            Outcome::Proved(p, _) => Some(p),
            Outcome::Unproved(..) => None,
        }
    }
}

/// Searches for a proof of `⊢ a0 : f`.
pub fn prove(f: &Formula, opts: &SearchOptions) -> Outcome {
    let f = f.clone();
    let opts = opts.clone();
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(move || engine::run(&f, &opts))
        .expect("spawn search thread")
        .join()
        .expect("search thread panicked")
}

/// A rule, whether its principal is on the left, and its principal shape.
type InvertibleRule = (Rule, bool, fn(&Formula) -> bool);

/// The invertible rule to apply next, if any: closing rules, then
/// non-branching ones, then branching ones.
pub(crate) fn negative_choice(s: &Sequent) -> Option<(Rule, RuleParams)> {
    use Formula as F;
    let left = |pred: &dyn Fn(&Formula) -> bool| s.lhs.iter().position(|(_, f)| pred(f));
    let right = |pred: &dyn Fn(&Formula) -> bool| s.rhs.iter().position(|(_, f)| pred(f));
    if let Some(i) = left(&|f| matches!(f, F::Bot)) {
        return Some((Rule::BotL, RuleParams::left(i)));
    }
    if let Some(j) = right(&|f| matches!(f, F::Top)) {
        return Some((Rule::TopR, RuleParams::right(j)));
    }
    let order: [InvertibleRule; 11] = [
        (Rule::AndL, true, |f| matches!(f, F::And(..))),
        (Rule::ImpR, false, |f| matches!(f, F::Imp(..))),
        (Rule::NotL, true, |f| matches!(f, F::Not(..))),
        (Rule::NotR, false, |f| matches!(f, F::Not(..))),
        (Rule::OrR, false, |f| matches!(f, F::Or(..))),
        (Rule::StarL, true, |f| matches!(f, F::Star(..))),
        (Rule::WandR, false, |f| matches!(f, F::Wand(..))),
        (Rule::EmpL, true, |f| matches!(f, F::MEmp)),
        (Rule::AndR, false, |f| matches!(f, F::And(..))),
        (Rule::OrL, true, |f| matches!(f, F::Or(..))),
        (Rule::ImpL, true, |f| matches!(f, F::Imp(..))),
    ];
    for (rule, on_left, pred) in order {
        if on_left {
            if let Some(i) = left(&pred) {
                return Some((rule, RuleParams::left(i)));
            }
        } else if let Some(j) = right(&pred) {
            return Some((rule, RuleParams::right(j)));
        }
    }
    None
}

/// Labels a negative rule introduces, drawn from `fresh`.
pub(crate) fn fresh_for(rule: Rule, s: &Sequent, fresh: &mut FreshLabels) -> Vec<Label> {
    match rule {
        Rule::StarL | Rule::WandR => {
            let taken = s.labels();
            let x = fresh.fresh(&taken);
            let y = fresh.fresh(&taken);
            vec![x, y]
        }
        _ => Vec::new(),
    }
}

/// Result of saturating a sequent with the invertible rules.
#[derive(Clone, Debug)]
pub struct Saturated {
    /// Open sequents no invertible rule applies to.
    pub leaves: Vec<Sequent>,
    /// Rule applications performed.
    pub steps: usize,
}

/// Applies the invertible rules to exhaustion. Branches closed by `⊥` on
/// the left or `⊤` on the right are dropped.
pub fn saturate(s: &Sequent, fresh: &mut FreshLabels) -> Result<Saturated, SymbolicError> {
    let mut out = Saturated {
        leaves: Vec::new(),
        steps: 0,
    };
    let mut todo = vec![s.clone()];
    while let Some(seq) = todo.pop() {
        match negative_choice(&seq) {
            None => out.leaves.push(seq),
            Some((rule, params)) => {
                let params = params.with_fresh(fresh_for(rule, &seq, fresh));
                let prems = sym_premises(rule, &seq, &params, &[])?;
                out.steps += 1;
                todo.extend(prems.into_iter().rev());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
