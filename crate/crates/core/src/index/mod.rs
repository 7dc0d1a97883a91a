//! Sentence-level inverted index with separate title and body fields.

mod candidates;
mod persist;
mod query;

use std::collections::BTreeMap;

use crate::corpus::SentenceDoc;
use crate::error::{Error, Result};

pub use candidates::{collect_candidates, presented_text, Candidate, CandidateSet};
pub use persist::{INDEX_FORMAT_VERSION, INDEX_MAGIC};
pub use query::{make_queries, make_queries_with, Clause, Hit, Occur, Query, QueryLimits, QueryType};

pub type DocId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Title,
    Body,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocId,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    total_length: u64,
}

impl FieldIndex {
    fn add(&mut self, doc: DocId, tokens: &[String]) {
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t).or_default() += 1;
        }
        for (term, count) in tf {
            self.postings
                .entry(term.to_string())
                .or_default()
                .push(Posting { doc, tf: count });
        }
        self.doc_lengths.push(tokens.len() as u32);
        self.total_length += tokens.len() as u64;
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn doc_length(&self, doc: DocId) -> u32 {
        self.doc_lengths[doc as usize]
    }

    pub fn avg_length(&self) -> f64 {
        if self.doc_lengths.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.doc_lengths.len() as f64
        }
    }
}

/// Contiguous run of documents belonging to one page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageSpan {
    pub title_display: String,
    pub docs: std::ops::Range<DocId>,
}

/// Immutable after [`IndexedCorpus::build`]. Documents are ordered by
/// (title, sentence index), so doc ids double as the deterministic tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedCorpus {
    docs: Vec<SentenceDoc>,
    title: FieldIndex,
    body: FieldIndex,
    bm25: Bm25Params,
    pages: Vec<PageSpan>,
    page_of: Vec<u32>,
}

impl IndexedCorpus {
    pub fn build(docs: impl IntoIterator<Item = SentenceDoc>) -> Result<Self> {
        Self::build_with(docs, Bm25Params::default())
    }

    pub fn build_with(docs: impl IntoIterator<Item = SentenceDoc>, bm25: Bm25Params) -> Result<Self> {
        let mut docs: Vec<SentenceDoc> = docs.into_iter().collect();
        docs.sort_by(|a, b| {
            (&a.page_title_display, a.sentence_index).cmp(&(&b.page_title_display, b.sentence_index))
        });
        if let Some(w) = docs.windows(2).find(|w| {
            w[0].page_title_display == w[1].page_title_display
                && w[0].sentence_index == w[1].sentence_index
        }) {
            return Err(Error::DuplicateDoc {
                title: w[0].page_title_display.clone(),
                index: w[0].sentence_index,
            });
        }
        let mut title = FieldIndex::default();
        let mut body = FieldIndex::default();
        for (i, d) in docs.iter().enumerate() {
            title.add(i as DocId, &d.title_tokens);
            body.add(i as DocId, &d.body_tokens);
        }
        Ok(Self::assemble(docs, title, body, bm25))
    }

    fn assemble(docs: Vec<SentenceDoc>, title: FieldIndex, body: FieldIndex, bm25: Bm25Params) -> Self {
        let mut pages: Vec<PageSpan> = Vec::new();
        let mut page_of = Vec::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            let i = i as DocId;
            match pages.last_mut() {
                Some(p) if p.title_display == d.page_title_display => p.docs.end = i + 1,
                _ => pages.push(PageSpan {
                    title_display: d.page_title_display.clone(),
                    docs: i..i + 1,
                }),
            }
            page_of.push((pages.len() - 1) as u32);
        }
        IndexedCorpus {
            docs,
            title,
            body,
            bm25,
            pages,
            page_of,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc(&self, id: DocId) -> &SentenceDoc {
        &self.docs[id as usize]
    }

    pub fn docs(&self) -> &[SentenceDoc] {
        &self.docs
    }

    pub fn field(&self, field: Field) -> &FieldIndex {
        match field {
            Field::Title => &self.title,
            Field::Body => &self.body,
        }
    }

    pub fn field_tokens(&self, field: Field, doc: DocId) -> &[String] {
        let d = self.doc(doc);
        match field {
            Field::Title => &d.title_tokens,
            Field::Body => &d.body_tokens,
        }
    }

    pub fn bm25_params(&self) -> Bm25Params {
        self.bm25
    }

    pub fn pages(&self) -> &[PageSpan] {
        &self.pages
    }

    pub fn page_of(&self, doc: DocId) -> usize {
        self.page_of[doc as usize] as usize
    }

    /// Looks up a document by display title and sentence index.
    pub fn find(&self, title_display: &str, sentence_index: u32) -> Option<DocId> {
        self.docs
            .binary_search_by(|d| {
                (d.page_title_display.as_str(), d.sentence_index).cmp(&(title_display, sentence_index))
            })
            .ok()
            .map(|i| i as DocId)
    }

    /// Lucene-style idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    pub fn idf(&self, field: Field, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.field(field).doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// BM25 contribution of a clause with summed idf `idf` occurring `freq`
    /// times in `doc`.
    pub fn bm25(&self, field: Field, doc: DocId, freq: u32, idf: f64) -> f64 {
        let fi = self.field(field);
        let Bm25Params { k1, b } = self.bm25;
        let avg = fi.avg_length();
        let norm = if avg > 0.0 {
            1.0 - b + b * f64::from(fi.doc_length(doc)) / avg
        } else {
            1.0
        };
        let tf = f64::from(freq);
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }
}
