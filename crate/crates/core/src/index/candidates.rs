use std::collections::{BTreeSet, HashMap};

use super::{DocId, IndexedCorpus, Query, QueryType};
use crate::corpus::SentenceDoc;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub doc: DocId,
    /// Contextualized sentence, prefixed with the page title unless it
    /// already mentions it.
    pub presented_text: String,
    /// Score from the first query that retrieved this sentence.
    pub retrieval_score: f64,
    pub sources: BTreeSet<QueryType>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Candidate> {
        self.candidates.iter()
    }
}

/// Title containment is tested case-insensitively.
pub fn presented_text(doc: &SentenceDoc) -> String {
    let ctx = &doc.contextualized_text;
    if ctx
        .to_lowercase()
        .contains(&doc.page_title_display.to_lowercase())
    {
        ctx.clone()
    } else {
        format!("{} {}", doc.page_title_display, ctx)
    }
}

/// Union of all query hits in Type1, Type2, Type3 order, first occurrence wins.
pub fn collect_candidates(queries: &[Query], index: &IndexedCorpus) -> CandidateSet {
    let mut ordered: Vec<&Query> = queries.iter().collect();
    ordered.sort_by_key(|q| q.qtype);
    let mut seen: HashMap<DocId, usize> = HashMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    for q in ordered {
        for hit in index.execute(q) {
            match seen.get(&hit.doc) {
                Some(&i) => {
                    candidates[i].sources.insert(q.qtype);
                }
                None => {
                    seen.insert(hit.doc, candidates.len());
                    candidates.push(Candidate {
                        doc: hit.doc,
                        presented_text: presented_text(index.doc(hit.doc)),
                        retrieval_score: hit.score,
                        sources: BTreeSet::from([q.qtype]),
                    });
                }
            }
        }
    }
    CandidateSet { candidates }
}
