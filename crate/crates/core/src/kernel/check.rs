use std::collections::BTreeSet;

use super::rules::{rule_premises, Extra, Rule};
use super::Derivation;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub allow_cut: bool,
    pub extras: BTreeSet<Extra>,
}

impl CheckOptions {
    pub fn with_extras(extras: impl IntoIterator<Item = Extra>) -> CheckOptions {
        CheckOptions {
            allow_cut: false,
            extras: extras.into_iter().collect(),
        }
    }
}

/// The first rejected node, addressed by premise indices from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: Vec<usize>,
    pub rule: Rule,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub accepted: bool,
    pub violation: Option<Violation>,
    pub cuts: usize,
    pub extras_used: BTreeSet<Extra>,
    pub nodes: usize,
    pub height: usize,
}

/// Validates every node of `d` against its rule schema.
pub fn check(d: &Derivation, opts: &CheckOptions) -> CheckReport {
    let mut report = CheckReport {
        accepted: true,
        violation: None,
        cuts: 0,
        extras_used: BTreeSet::new(),
        nodes: d.size(),
        height: d.height(),
    };
    let mut path = Vec::new();
    walk(d, opts, &mut path, &mut report);
    report.accepted = report.violation.is_none();
    report
}

fn walk(d: &Derivation, opts: &CheckOptions, path: &mut Vec<usize>, report: &mut CheckReport) {
    if d.rule == Rule::Cut {
        report.cuts += 1;
    }
    if let Some(e) = d.rule.extra() {
        report.extras_used.insert(e);
    }
    if report.violation.is_none() {
        if let Err(reason) = check_node(d, opts) {
            report.violation = Some(Violation {
                path: path.clone(),
                rule: d.rule,
                reason,
            });
        }
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        walk(p, opts, path, report);
        path.pop();
    }
}

fn check_node(d: &Derivation, opts: &CheckOptions) -> Result<(), String> {
    if !d.conclusion.is_ground() || d.params.mentioned_labels().iter().any(|l| l.is_var()) {
        return Err("free variable in a ground derivation".into());
    }
    if d.rule == Rule::Cut && !opts.allow_cut {
        return Err("cut is not allowed".into());
    }
    if let Some(e) = d.rule.extra() {
        if !opts.extras.contains(&e) {
            return Err(format!("rule {} is not enabled", e.name()));
        }
    }
    let expected = rule_premises(d.rule, &d.conclusion, &d.params).map_err(|e| e.to_string())?;
    if expected.len() != d.premises.len() {
        return Err(format!(
            "expected {} premise(s), found {}",
            expected.len(),
            d.premises.len()
        ));
    }
    for (i, (want, got)) in expected.iter().zip(&d.premises).enumerate() {
        if !want.same_as(&got.conclusion) {
            return Err(format!(
                "premise {i} does not match the schema: expected {want}, found {}",
                got.conclusion
            ));
        }
    }
    Ok(())
}
