//! Keyword phrases for a claim from named entities, constituency noun phrases
//! and dependency arguments.
//!
//! Each source is read from an annotation sidecar when one is available for
//! the claim. A source missing from the sidecar (or a constituency tree that
//! fails to parse) falls back to a heuristic over the built-in POS tags.

mod constituency;
mod dependency;
mod heuristics;

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pos::{self, TaggedText};

pub use constituency::{noun_phrases, Tree};
pub use dependency::{argument_phrases, DepArc};
pub use heuristics::{capitalized_runs, edge_chunks, last_resort, noun_chunks};

/// Depth below the clause node searched for NP phrases.
pub const NP_MAX_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KeywordSource {
    Ner,
    Np,
    Dep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    pub phrase: String,
    pub source: KeywordSource,
}

/// Ordered keyword phrases, unique under case folding. The first insertion of
/// a phrase keeps its source.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KeywordSet {
    keywords: Vec<Keyword>,
}

impl KeywordSet {
    pub fn from_keywords(it: impl IntoIterator<Item = Keyword>) -> Self {
        let mut set = KeywordSet::default();
        for k in it {
            set.push(k.phrase, k.source);
        }
        set
    }

    /// Returns false when the phrase is empty or already present.
    pub fn push(&mut self, phrase: impl Into<String>, source: KeywordSource) -> bool {
        let phrase = phrase.into().trim().to_string();
        if phrase.is_empty() {
            return false;
        }
        let folded = phrase.to_lowercase();
        if self.keywords.iter().any(|k| k.phrase.to_lowercase() == folded) {
            return false;
        }
        self.keywords.push(Keyword { phrase, source });
        true
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Keyword> {
        self.keywords.iter()
    }

    pub fn phrases(&self) -> Vec<&str> {
        self.keywords.iter().map(|k| k.phrase.as_str()).collect()
    }
}

/// Sidecar annotations for one claim. `None` for a source means "not
/// annotated"; an empty list means the annotator found nothing.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClaimAnnotations {
    #[serde(default)]
    pub ner: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub constituency: Option<String>,
    #[serde(default)]
    pub dependency: Option<Vec<DepArc>>,
}

#[derive(Debug, Clone, Deserialize)]
struct AnnotationRecord {
    id: u64,
    #[serde(flatten)]
    annotations: ClaimAnnotations,
}

pub fn read_annotations<R: BufRead>(reader: R) -> Result<HashMap<u64, ClaimAnnotations>> {
    let mut out = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(&line).map_err(|e| Error::Ingest {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.insert(rec.id, rec.annotations);
    }
    Ok(out)
}

pub fn keywords_from_ner(spans: &[(String, String)]) -> Vec<String> {
    spans.iter().map(|(p, _)| p.clone()).collect()
}

pub fn keywords_from_constituency(tree: &str) -> Result<Vec<String>> {
    Ok(noun_phrases(&Tree::parse(tree)?, NP_MAX_DEPTH))
}

pub fn keywords_from_dependency(arcs: &[DepArc]) -> Vec<String> {
    argument_phrases(arcs)
}

/// Per-source phrases before merging, exposed for inspection and testing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourcePhrases {
    pub ner: Vec<String>,
    pub np: Vec<String>,
    pub dep: Vec<String>,
}

impl SourcePhrases {
    pub fn gather(annotations: Option<&ClaimAnnotations>, tags: &TaggedText) -> Self {
        let ann = annotations.cloned().unwrap_or_default();
        let ner = match &ann.ner {
            Some(spans) => keywords_from_ner(spans),
            None => capitalized_runs(tags),
        };
        let np = ann
            .constituency
            .as_deref()
            .and_then(|t| keywords_from_constituency(t).ok())
            .unwrap_or_else(|| noun_chunks(tags));
        let dep = match &ann.dependency {
            Some(arcs) => keywords_from_dependency(arcs),
            None => edge_chunks(tags),
        };
        SourcePhrases { ner, np, dep }
    }

    pub fn merge(&self) -> KeywordSet {
        let mut set = KeywordSet::default();
        for (phrases, source) in [
            (&self.ner, KeywordSource::Ner),
            (&self.np, KeywordSource::Np),
            (&self.dep, KeywordSource::Dep),
        ] {
            for p in phrases {
                set.push(p.as_str(), source);
            }
        }
        set
    }
}

pub fn extract(claim: &str, annotations: Option<&ClaimAnnotations>) -> Result<KeywordSet> {
    extract_with_tags(claim, annotations, &pos::tag(claim, None))
}

pub fn extract_with_tags(
    claim: &str,
    annotations: Option<&ClaimAnnotations>,
    tags: &TaggedText,
) -> Result<KeywordSet> {
    if claim.trim().is_empty() {
        return Err(Error::Input("empty claim".into()));
    }
    let mut set = SourcePhrases::gather(annotations, tags).merge();
    if set.is_empty() {
        if let Some(p) = last_resort(tags) {
            let source = if p.chars().next().is_some_and(char::is_uppercase) {
                KeywordSource::Ner
            } else {
                KeywordSource::Np
            };
            set.push(p, source);
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn claim1_annotations() -> ClaimAnnotations {
        ClaimAnnotations {
            ner: Some(vec![
                ("Northern Isles".into(), "LOC".into()),
                ("Scotland".into(), "LOC".into()),
            ]),
            constituency: Some(
                "(ROOT (S (NP (DT The) (NNP Northern) (NNP Isles)) (VP (VBP belong) (PP (TO to) (NP (NNP Scotland)))) (. .)))"
                    .into(),
            ),
            dependency: Some(vec![
                DepArc(3, 1, "det".into(), "The".into()),
                DepArc(3, 2, "amod".into(), "Northern".into()),
                DepArc(4, 3, "nsubj".into(), "Isles".into()),
                DepArc(0, 4, "root".into(), "belong".into()),
                DepArc(6, 5, "case".into(), "to".into()),
                DepArc(4, 6, "obl".into(), "Scotland".into()),
            ]),
        }
    }

    fn claim2_annotations() -> ClaimAnnotations {
        ClaimAnnotations {
            ner: Some(vec![]),
            constituency: Some(
                "(ROOT (S (NP (JJ Artificial) (NN intelligence)) (VP (VBZ raises) (NP (NN concern))) (. .)))".into(),
            ),
            dependency: Some(vec![
                DepArc(2, 1, "amod".into(), "Artificial".into()),
                DepArc(3, 2, "nsubj".into(), "intelligence".into()),
                DepArc(0, 3, "root".into(), "raises".into()),
                DepArc(3, 4, "dobj".into(), "concern".into()),
                DepArc(3, 5, "punct".into(), ".".into()),
            ]),
        }
    }

    #[test]
    fn ner_source() {
        let a = claim1_annotations();
        assert_eq!(keywords_from_ner(a.ner.as_ref().unwrap()), vec!["Northern Isles", "Scotland"]);
        assert!(keywords_from_ner(&[]).is_empty());
        assert_eq!(keywords_from_ner(&[("Walk of Life".into(), "MISC".into())]), vec!["Walk of Life"]);
    }

    #[test]
    fn claim1_full_annotations() {
        let set = extract("The Northern Isles belong to Scotland.", Some(&claim1_annotations())).unwrap();
        assert_eq!(set.phrases(), vec!["Northern Isles", "Scotland", "The Northern Isles"]);
        let sources: Vec<_> = set.iter().map(|k| k.source).collect();
        assert_eq!(sources, vec![KeywordSource::Ner, KeywordSource::Ner, KeywordSource::Np]);
    }

    #[test]
    fn duplicate_goes_to_first_source() {
        let set = extract("Artificial intelligence raises concern.", Some(&claim2_annotations())).unwrap();
        assert_eq!(set.phrases(), vec!["Artificial intelligence", "concern"]);
        assert!(set.iter().all(|k| k.source == KeywordSource::Np));
    }

    #[test]
    fn heuristic_single_entity() {
        let set = extract("Scotland.", None).unwrap();
        assert_eq!(set.phrases(), vec!["Scotland"]);
        assert_eq!(set.iter().next().unwrap().source, KeywordSource::Ner);
    }

    #[test]
    fn malformed_tree_falls_back() {
        let mut a = claim2_annotations();
        a.constituency = Some("(S (NP".into());
        assert!(keywords_from_constituency("(S (NP").is_err());
        let set = extract("Artificial intelligence raises concern.", Some(&a)).unwrap();
        assert_eq!(set.phrases(), vec!["Artificial intelligence", "concern"]);
    }

    #[test]
    fn empty_claim_is_an_error() {
        assert!(matches!(extract("  ", None), Err(Error::Input(_))));
    }

    #[test]
    fn dedup_is_case_insensitive() {
        let mut set = KeywordSet::default();
        assert!(set.push("Scotland", KeywordSource::Ner));
        assert!(!set.push("SCOTLAND", KeywordSource::Dep));
        assert!(!set.push("  ", KeywordSource::Dep));
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn all_sources_empty_uses_last_resort() {
        let a = ClaimAnnotations {
            ner: Some(vec![]),
            constituency: Some("(ROOT (S (VP (VB go))))".into()),
            dependency: Some(vec![]),
        };
        let set = extract("go home quickly", Some(&a)).unwrap();
        assert_eq!(set.phrases(), vec!["go home quickly"]);
        let none = extract("...", Some(&a)).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn sidecar_parsing() {
        let input = concat!(
            r#"{"id": 2, "ner": [], "constituency": "(S (NP (NN x)))", "dependency": [[0, 1, "root", "x"]]}"#,
            "\n\n",
            r#"{"id": 5, "ner": [["Scotland", "LOC"]]}"#,
            "\n"
        );
        let m = read_annotations(input.as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[&5].ner.as_ref().unwrap()[0].0, "Scotland");
        assert!(m[&5].constituency.is_none());
        assert_eq!(m[&2].dependency.as_ref().unwrap().len(), 1);
        assert!(matches!(read_annotations("{\"id\":".as_bytes()), Err(Error::Ingest { line: 1, .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn claim() -> impl Strategy<Value = String> {
            proptest::collection::vec(
                prop_oneof!["[A-Z][a-z]{1,6}", "[a-z]{1,8}", Just("the".to_string()), Just(",".to_string())],
                1..10,
            )
            .prop_map(|w| w.join(" "))
        }

        proptest! {
            #[test]
            fn keywords_unique_under_case_folding(c in claim()) {
                let set = extract(&c, None).unwrap();
                let mut seen = std::collections::HashSet::new();
                for k in set.iter() {
                    prop_assert!(seen.insert(k.phrase.to_lowercase()));
                    prop_assert!(!k.phrase.is_empty());
                }
            }

            #[test]
            fn nonempty_for_alphabetic_claims(c in claim()) {
                prop_assume!(c.chars().any(char::is_alphabetic));
                prop_assert!(!extract(&c, None).unwrap().is_empty());
            }

            #[test]
            fn dropping_a_source_never_adds(c in claim(), which in 0usize..3) {
                let tags = pos::tag(&c, None);
                let full = SourcePhrases::gather(None, &tags);
                let mut reduced = full.clone();
                match which {
                    0 => reduced.ner.clear(),
                    1 => reduced.np.clear(),
                    _ => reduced.dep.clear(),
                }
                let full_set: std::collections::HashSet<String> =
                    full.merge().iter().map(|k| k.phrase.to_lowercase()).collect();
                for k in reduced.merge().iter() {
                    prop_assert!(full_set.contains(&k.phrase.to_lowercase()));
                }
            }
        }
    }
}
