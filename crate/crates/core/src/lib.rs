//! Proof search and proof checking for Boolean BI in a labelled sequent
//! calculus.
//!
//! * [`formula`]: syntax, parser and printer.
//! * [`kernel`]: ground sequents, rule schemas and the trusted checker.
//! * [`relsolve`]: entailment between relational atoms and tree permutations.
//! * [`constraints`]: constraint systems collected from symbolic derivations.
//! * [`search`]: free-variable proof search and proof reconstruction.
//! * [`semantics`]: finite non-deterministic monoids and countermodel search.
//! * [`cli`]: the command-line front end.

pub mod formula;
pub mod kernel;
pub mod relsolve;
pub mod symbolic;
pub mod constraints;
pub mod semantics;
pub mod search;
pub mod cli;
