use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::label::{Label, RelAtom};
use super::rules::{CutParams, Extra, Rule, RuleParams};
use super::sequent::{Labelled, Sequent};
use super::{Derivation, KernelError};
use crate::formula::{self, ParseError};

/// Deepest bracket nesting accepted in a proof file.
pub const MAX_NESTING: usize = 1024;

#[derive(Debug, Error)]
pub enum ProofFileError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("proof file nests deeper than {MAX_NESTING} levels")]
    TooDeep,
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
    #[error("unknown semantic extra {0:?}")]
    UnknownExtra(String),
    #[error("bad formula {text:?}: {source}")]
    Formula {
        text: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Label(#[from] KernelError),
}

/// A decoded proof file: the derivation plus the optional rules it declares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofFile {
    pub root: Derivation,
    pub semantics: BTreeSet<Extra>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    rule: String,
    sequent: SequentDoc,
    #[serde(default)]
    params: ParamsDoc,
    #[serde(default)]
    premises: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    semantics: Vec<String>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SequentDoc {
    #[serde(default)]
    rels: Vec<[String; 3]>,
    #[serde(default)]
    lhs: Vec<(String, String)>,
    #[serde(default)]
    rhs: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fresh: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cut: Option<CutDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutDoc {
    label: String,
    formula: String,
    #[serde(default)]
    rels: Vec<usize>,
    #[serde(default)]
    lhs: Vec<usize>,
    #[serde(default)]
    rhs: Vec<usize>,
}

fn encode_labelled(items: &[Labelled]) -> Vec<(String, String)> {
    items
        .iter()
        .map(|(w, f)| (w.to_string(), formula::print(f)))
        .collect()
}

fn encode(d: &Derivation) -> NodeDoc {
    let c = &d.conclusion;
    let p = &d.params;
    NodeDoc {
        rule: d.rule.name().to_string(),
        sequent: SequentDoc {
            rels: c
                .rels
                .iter()
                .map(|r| [r.left.to_string(), r.right.to_string(), r.parent.to_string()])
                .collect(),
            lhs: encode_labelled(&c.lhs),
            rhs: encode_labelled(&c.rhs),
        },
        params: ParamsDoc {
            left: p.left,
            right: p.right,
            atoms: p.atoms.clone(),
            fresh: p.fresh.iter().map(|l| l.to_string()).collect(),
            labels: p.labels.iter().map(|l| l.to_string()).collect(),
            cut: p.cut.as_ref().map(|c| CutDoc {
                label: c.label.to_string(),
                formula: formula::print(&c.formula),
                rels: c.rels.clone(),
                lhs: c.lhs.clone(),
                rhs: c.rhs.clone(),
            }),
        },
        premises: d.premises.iter().map(encode).collect(),
        semantics: Vec::new(),
    }
}

/// Serializes a derivation as a proof file.
pub fn to_json(d: &Derivation) -> String {
    to_json_with_semantics(d, &BTreeSet::new())
}

/// Serializes a derivation, declaring the optional rules it relies on.
pub fn to_json_with_semantics(d: &Derivation, semantics: &BTreeSet<Extra>) -> String {
    let mut doc = encode(d);
    doc.semantics = semantics.iter().map(|e| e.name().to_string()).collect();
    serde_json::to_string_pretty(&doc).expect("proof documents always serialize")
}

fn parse_formula(text: &str) -> Result<crate::formula::Formula, ProofFileError> {
    formula::parse(text).map_err(|source| ProofFileError::Formula {
        text: text.to_string(),
        source,
    })
}

fn decode_labelled(items: &[(String, String)]) -> Result<Vec<Labelled>, ProofFileError> {
    items
        .iter()
        .map(|(w, f)| Ok((Label::parse(w)?, parse_formula(f)?)))
        .collect()
}

fn decode_labels(items: &[String]) -> Result<Vec<Label>, ProofFileError> {
    items.iter().map(|l| Ok(Label::parse(l)?)).collect()
}

fn decode(doc: &NodeDoc) -> Result<Derivation, ProofFileError> {
    let rule = Rule::from_name(&doc.rule).ok_or_else(|| ProofFileError::UnknownRule(doc.rule.clone()))?;
    let rels = doc
        .sequent
        .rels
        .iter()
        .map(|[l, r, p]| Ok(RelAtom::new(Label::parse(l)?, Label::parse(r)?, Label::parse(p)?)))
        .collect::<Result<Vec<_>, ProofFileError>>()?;
    let conclusion = Sequent {
        rels,
        lhs: decode_labelled(&doc.sequent.lhs)?,
        rhs: decode_labelled(&doc.sequent.rhs)?,
    };
    let p = &doc.params;
    let cut = match &p.cut {
        None => None,
        Some(c) => Some(CutParams {
            label: Label::parse(&c.label)?,
            formula: parse_formula(&c.formula)?,
            rels: c.rels.clone(),
            lhs: c.lhs.clone(),
            rhs: c.rhs.clone(),
        }),
    };
    let params = RuleParams {
        left: p.left,
        right: p.right,
        atoms: p.atoms.clone(),
        fresh: decode_labels(&p.fresh)?,
        labels: decode_labels(&p.labels)?,
        cut,
    };
    let premises = doc.premises.iter().map(decode).collect::<Result<Vec<_>, _>>()?;
    Ok(Derivation {
        rule,
        conclusion,
        params,
        premises,
    })
}

fn nesting_depth(text: &str) -> usize {
    let (mut depth, mut max, mut in_string, mut escaped) = (0usize, 0usize, false, false);
    for b in text.bytes() {
        if in_string {
            match (escaped, b) {
                (true, _) => escaped = false,
                (false, b'\\') => escaped = true,
                (false, b'"') => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'[' | b'{' => {
                depth += 1;
                max = max.max(depth);
            }
            b']' | b'}' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    max
}

/// Decodes a proof file.
pub fn from_json(text: &str) -> Result<ProofFile, ProofFileError> {
    if nesting_depth(text) > MAX_NESTING {
        return Err(ProofFileError::TooDeep);
    }
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let doc = NodeDoc::deserialize(&mut de)?;
    de.end()?;
    let semantics = doc
        .semantics
        .iter()
        .map(|s| Extra::from_name(s).ok_or_else(|| ProofFileError::UnknownExtra(s.clone())))
        .collect::<Result<BTreeSet<_>, _>>()?;
    Ok(ProofFile {
        root: decode(&doc)?,
        semantics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn round_trips_a_small_derivation() {
        let w = Label::world("w");
        let p = parse("p").unwrap();
        let d = Derivation::leaf(
            Rule::Id,
            Sequent {
                rels: vec![RelAtom::new(Label::Eps, w.clone(), w.clone())],
                lhs: vec![(w.clone(), p.clone())],
                rhs: vec![(w, p)],
            },
            RuleParams {
                left: Some(0),
                right: Some(0),
                ..Default::default()
            },
        );
        let text = to_json(&d);
        let back = from_json(&text).unwrap();
        assert_eq!(back.root, d);
        assert!(back.semantics.is_empty());
        let text = to_json_with_semantics(&d, &[Extra::P].into_iter().collect());
        assert!(from_json(&text).unwrap().semantics.contains(&Extra::P));
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(from_json("{").is_err());
        assert!(from_json(r#"{"rule":"nope","sequent":{}}"#).is_err());
        assert!(from_json(r#"{"rule":"id","sequent":{"lhs":[["a","p &"]]}}"#).is_err());
        assert!(from_json(r#"{"rule":"id","sequent":{"lhs":[["a b","p"]]}}"#).is_err());
        let deep = "[".repeat(MAX_NESTING + 1);
        assert!(matches!(from_json(&deep), Err(ProofFileError::TooDeep)));
    }
}
