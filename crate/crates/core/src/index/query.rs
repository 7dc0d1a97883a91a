use std::collections::HashMap;

use super::{DocId, Field, IndexedCorpus};
use crate::error::{Error, Result};
use crate::keywords::KeywordSet;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryType {
    /// One keyword's words, all required in the title.
    Type1,
    /// All keyword words, as many as possible in the title.
    Type2,
    /// All keyword phrases, as many as possible in the sentence body.
    Type3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occur {
    Must,
    Should,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clause {
    Term(String),
    Phrase(Vec<String>),
}

impl Clause {
    fn terms(&self) -> &[String] {
        match self {
            Clause::Term(t) => std::slice::from_ref(t),
            Clause::Phrase(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub qtype: QueryType,
    pub field: Field,
    pub occur: Occur,
    pub clauses: Vec<Clause>,
    pub limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryLimits {
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
}

impl Default for QueryLimits {
    fn default() -> Self {
        QueryLimits {
            type1: 2,
            type2: 20,
            type3: 20,
        }
    }
}

impl QueryLimits {
    pub fn max_candidates(&self, keywords: usize) -> usize {
        self.type1 * keywords + self.type2 + self.type3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub doc: DocId,
    pub matched: usize,
    pub score: f64,
}

pub fn make_queries(keywords: &KeywordSet) -> Result<Vec<Query>> {
    make_queries_with(keywords, &QueryLimits::default())
}

/// Builds the Type1 queries (one per keyword) followed by one Type2 and one
/// Type3 query. Keywords that analyze to no tokens contribute nothing.
pub fn make_queries_with(keywords: &KeywordSet, limits: &QueryLimits) -> Result<Vec<Query>> {
    if keywords.is_empty() {
        return Err(Error::NoKeywords);
    }
    let analyzed: Vec<Vec<String>> = keywords
        .iter()
        .map(|k| tokenize(&k.phrase))
        .filter(|t| !t.is_empty())
        .collect();
    let mut queries = Vec::new();
    for words in &analyzed {
        queries.push(Query {
            qtype: QueryType::Type1,
            field: Field::Title,
            occur: Occur::Must,
            clauses: dedup(words.iter().cloned().map(Clause::Term)),
            limit: limits.type1,
        });
    }
    if !analyzed.is_empty() {
        queries.push(Query {
            qtype: QueryType::Type2,
            field: Field::Title,
            occur: Occur::Should,
            clauses: dedup(analyzed.iter().flatten().cloned().map(Clause::Term)),
            limit: limits.type2,
        });
        queries.push(Query {
            qtype: QueryType::Type3,
            field: Field::Body,
            occur: Occur::Should,
            clauses: dedup(analyzed.iter().cloned().map(Clause::Phrase)),
            limit: limits.type3,
        });
    }
    Ok(queries)
}

fn dedup(clauses: impl Iterator<Item = Clause>) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    for c in clauses {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn count_phrase(tokens: &[String], phrase: &[String]) -> u32 {
    if phrase.is_empty() || tokens.len() < phrase.len() {
        return 0;
    }
    tokens.windows(phrase.len()).filter(|w| *w == phrase).count() as u32
}

impl IndexedCorpus {
    /// Documents matching one clause with their clause frequency.
    fn clause_matches(&self, field: Field, clause: &Clause) -> Vec<(DocId, u32)> {
        let fi = self.field(field);
        match clause {
            Clause::Term(t) => fi.postings(t).iter().map(|p| (p.doc, p.tf)).collect(),
            Clause::Phrase(words) => {
                // drive from the rarest term, verify the consecutive sequence per doc
                let Some(rarest) = words.iter().min_by_key(|w| fi.doc_freq(w)) else {
                    return Vec::new();
                };
                fi.postings(rarest)
                    .iter()
                    .filter_map(|p| {
                        let n = count_phrase(self.field_tokens(field, p.doc), words);
                        (n > 0).then_some((p.doc, n))
                    })
                    .collect()
            }
        }
    }

    /// Must queries keep documents matching every clause; should queries keep
    /// any match. Hits rank by matched clause count, then BM25, then doc id.
    pub fn execute(&self, query: &Query) -> Vec<Hit> {
        if query.clauses.is_empty() || query.limit == 0 {
            return Vec::new();
        }
        let mut acc: HashMap<DocId, (usize, f64)> = HashMap::new();
        for clause in &query.clauses {
            let idf: f64 = clause.terms().iter().map(|t| self.idf(query.field, t)).sum();
            for (doc, freq) in self.clause_matches(query.field, clause) {
                let e = acc.entry(doc).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += self.bm25(query.field, doc, freq, idf);
            }
        }
        let need = match query.occur {
            Occur::Must => query.clauses.len(),
            Occur::Should => 1,
        };
        let mut hits: Vec<Hit> = acc
            .into_iter()
            .filter(|(_, (m, _))| *m >= need)
            .map(|(doc, (matched, score))| Hit { doc, matched, score })
            .collect();
        hits.sort_by(|a, b| {
            b.matched
                .cmp(&a.matched)
                .then(b.score.total_cmp(&a.score))
                .then(a.doc.cmp(&b.doc))
        });
        hits.truncate(query.limit);
        hits
    }
}
