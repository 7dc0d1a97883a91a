//! Subject and object phrases from dependency arcs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// One arc `[head, dependent, relation, token]`, 1-based token positions with
/// head 0 for the root. `token` is the dependent's surface form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepArc(pub u32, pub u32, pub String, pub String);

impl DepArc {
    pub fn head(&self) -> u32 {
        self.0
    }
    pub fn dependent(&self) -> u32 {
        self.1
    }
    pub fn relation(&self) -> &str {
        &self.2
    }
    pub fn token(&self) -> &str {
        &self.3
    }
}

fn is_argument(rel: &str) -> bool {
    let base = rel.split(':').next().unwrap_or(rel);
    matches!(base, "nsubj" | "nsubjpass" | "dobj" | "iobj" | "obj")
}

/// Yield of every subject/object subtree, ordered by the argument's position.
pub fn argument_phrases(arcs: &[DepArc]) -> Vec<String> {
    let tokens: BTreeMap<u32, &str> = arcs.iter().map(|a| (a.dependent(), a.token())).collect();
    let mut children: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for a in arcs {
        if a.relation() != "punct" {
            children.entry(a.head()).or_default().push(a.dependent());
        }
    }
    let mut heads: Vec<u32> = arcs
        .iter()
        .filter(|a| is_argument(a.relation()))
        .map(DepArc::dependent)
        .collect();
    heads.sort_unstable();
    heads.dedup();
    heads
        .into_iter()
        .filter_map(|h| {
            let mut span = BTreeSet::new();
            let mut stack = vec![h];
            while let Some(n) = stack.pop() {
                // guards against cyclic input
                if span.insert(n) {
                    stack.extend(children.get(&n).into_iter().flatten());
                }
            }
            let phrase = span
                .iter()
                .filter_map(|i| tokens.get(i))
                .copied()
                .collect::<Vec<_>>()
                .join(" ");
            (!phrase.is_empty()).then_some(phrase)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(h: u32, d: u32, r: &str, t: &str) -> DepArc {
        DepArc(h, d, r.into(), t.into())
    }

    pub(crate) fn claim2_arcs() -> Vec<DepArc> {
        vec![
            arc(2, 1, "amod", "Artificial"),
            arc(3, 2, "nsubj", "intelligence"),
            arc(0, 3, "root", "raises"),
            arc(3, 4, "dobj", "concern"),
            arc(3, 5, "punct", "."),
        ]
    }

    #[test]
    fn subject_and_object() {
        assert_eq!(argument_phrases(&claim2_arcs()), vec!["Artificial intelligence", "concern"]);
    }

    #[test]
    fn no_arguments() {
        // parser output for claim 3 carried no subject/object relations
        let arcs = vec![
            arc(0, 1, "root", "Walk"),
            arc(1, 2, "prep", "of"),
            arc(2, 3, "pobj", "Life"),
            arc(1, 4, "dep", "album"),
        ];
        assert!(argument_phrases(&arcs).is_empty());
        assert!(argument_phrases(&[arc(0, 1, "root", "Hi")]).is_empty());
    }

    #[test]
    fn passive_and_ud_relations() {
        let arcs = vec![
            arc(3, 1, "nsubj:pass", "Rome"),
            arc(3, 2, "aux:pass", "was"),
            arc(0, 3, "root", "built"),
        ];
        assert_eq!(argument_phrases(&arcs), vec!["Rome"]);
    }

    #[test]
    fn deserializes_from_array() {
        let a: DepArc = serde_json::from_str(r#"[3, 2, "nsubj", "intelligence"]"#).unwrap();
        assert_eq!(a, arc(3, 2, "nsubj", "intelligence"));
    }
}
