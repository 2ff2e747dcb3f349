//! JSON and Graphviz serialisation.

use super::{ElemId, PosetError, RankedPoset};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub id: ElemId,
    pub rank: i64,
    pub label: String,
}

/// On-disk form of a poset: elements plus Hasse covers `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetDocument {
    pub elements: Vec<ElementDoc>,
    pub covers: Vec<[ElemId; 2]>,
}

impl PosetDocument {
    pub fn of(p: &RankedPoset) -> Self {
        PosetDocument {
            elements: (0..p.len())
                .map(|id| ElementDoc {
                    id,
                    rank: p.rank(id),
                    label: p.label(id).to_string(),
                })
                .collect(),
            covers: p.covers().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn into_poset(self) -> Result<RankedPoset, PosetError> {
        let n = self.elements.len();
        let mut ranks = vec![0; n];
        let mut labels = vec![String::new(); n];
        let mut seen = vec![false; n];
        for e in self.elements {
            if e.id >= n || seen[e.id] {
                return Err(PosetError::Format(format!(
                    "element ids must be exactly 0..{n}, got {}",
                    e.id
                )));
            }
            seen[e.id] = true;
            ranks[e.id] = e.rank;
            labels[e.id] = e.label;
        }
        let covers: Vec<_> = self.covers.into_iter().map(|[a, b]| (a, b)).collect();
        RankedPoset::from_covers(ranks, labels, covers)
    }
}

pub(super) fn to_json(p: &RankedPoset) -> String {
    serde_json::to_string_pretty(&PosetDocument::of(p)).expect("poset documents always serialise")
}

pub(super) fn from_json(text: &str) -> Result<RankedPoset, PosetError> {
    let doc: PosetDocument =
        serde_json::from_str(text).map_err(|e| PosetError::Format(e.to_string()))?;
    doc.into_poset()
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(super) fn to_dot(p: &RankedPoset) -> String {
    let mut out = String::from("digraph poset {\n  rankdir=BT;\n  node [shape=box];\n");
    for x in 0..p.len() {
        let _ = writeln!(out, "  n{x} [label=\"{}\"];", escape(p.label(x)));
    }
    for (_, members) in p.rank_levels() {
        let ids: Vec<String> = members.iter().map(|x| format!("n{x};")).collect();
        let _ = writeln!(out, "  {{ rank=same; {} }}", ids.join(" "));
    }
    for &(a, b) in p.covers() {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}
