//! Training pairs: file format, synthetic data and generation from a corpus.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::normalize_title;
use crate::error::{Error, Result};
use crate::index::{presented_text, DocId, Field, IndexedCorpus};
use crate::io::ClaimRecord;
use crate::label::Label;
use crate::text::{is_stopword, tokenize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    pub premise: Vec<String>,
    pub hypothesis: Vec<String>,
    pub label: Label,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    premise: String,
    hypothesis: String,
    label: Label,
}

impl TrainingPair {
    pub fn from_text(premise: &str, hypothesis: &str, label: Label) -> Self {
        TrainingPair {
            premise: tokenize(premise),
            hypothesis: tokenize(hypothesis),
            label,
        }
    }
}

/// Reads `{"premise", "hypothesis", "label"}` lines. Pairs whose text has no
/// tokens are skipped and counted.
pub fn read_pairs<R: BufRead>(reader: R) -> Result<(Vec<TrainingPair>, usize)> {
    let mut out = Vec::new();
    let mut skipped = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PairRecord = serde_json::from_str(&line).map_err(|e| Error::Ingest {
            line: i + 1,
            message: e.to_string(),
        })?;
        let pair = TrainingPair::from_text(&rec.premise, &rec.hypothesis, rec.label);
        if pair.premise.is_empty() || pair.hypothesis.is_empty() {
            skipped += 1;
        } else {
            out.push(pair);
        }
    }
    Ok((out, skipped))
}

pub fn write_pairs<W: Write>(mut w: W, pairs: &[TrainingPair]) -> Result<()> {
    for p in pairs {
        let rec = PairRecord {
            premise: p.premise.join(" "),
            hypothesis: p.hypothesis.join(" "),
            label: p.label,
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::format("pairs", e.to_string()))?;
        writeln!(w)?;
    }
    Ok(())
}

/// Separable synthetic pairs. The label is a function of how many of the
/// three hypothesis words occur in the premise: all → SUPPORTS, two →
/// REFUTES, none → NOT ENOUGH INFO. Labels cycle so classes are balanced.
pub fn synthetic_pairs(n: usize, seed: u64) -> Vec<TrainingPair> {
    let vocab: Vec<String> = (0..40).map(|i| format!("tok{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = Label::ALL[i % 3];
            let mut words: Vec<&String> = vocab.iter().collect();
            words.shuffle(&mut rng);
            let plen = rng.gen_range(5..=8);
            let (premise, outside) = words.split_at(plen);
            let mut inside: Vec<&String> = premise.to_vec();
            inside.shuffle(&mut rng);
            let hyp: Vec<&String> = match label {
                Label::Supports => inside[..3].to_vec(),
                Label::Refutes => vec![inside[0], inside[1], outside[0]],
                Label::NotEnoughInfo => outside[..3].to_vec(),
            };
            let mut hyp: Vec<String> = hyp.into_iter().cloned().collect();
            hyp.shuffle(&mut rng);
            TrainingPair {
                premise: premise.iter().map(|s| s.to_string()).collect(),
                hypothesis: hyp,
                label,
            }
        })
        .collect()
}

fn claim_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// NOT ENOUGH INFO pairs: the premise is a random sentence from a page whose
/// title shares a (non-stopword) word with the claim, or a uniformly random
/// sentence when no title matches. Each claim draws from its own seeded
/// stream, so the output does not depend on scheduling.
pub fn generate_nei_pairs<S: AsRef<str> + Sync>(claims: &[S], corpus: &IndexedCorpus, seed: u64) -> Result<Vec<TrainingPair>> {
    if corpus.is_empty() {
        return Err(Error::Input("corpus is empty".into()));
    }
    let pairs: Vec<Option<TrainingPair>> = claims
        .par_iter()
        .enumerate()
        .map(|(i, claim)| {
            let hypothesis = tokenize(claim.as_ref());
            if hypothesis.is_empty() {
                return None;
            }
            let mut rng = claim_rng(seed, i);
            let doc = pick_premise(&hypothesis, corpus, &mut rng);
            Some(TrainingPair {
                premise: tokenize(&presented_text(corpus.doc(doc))),
                hypothesis,
                label: Label::NotEnoughInfo,
            })
        })
        .collect();
    Ok(pairs.into_iter().flatten().collect())
}

/// Pages whose title contains one of the claim's content words.
pub fn matching_pages(words: &[String], corpus: &IndexedCorpus) -> BTreeSet<usize> {
    let title = corpus.field(Field::Title);
    words
        .iter()
        .filter(|w| !is_stopword(w))
        .flat_map(|w| title.postings(w).iter().map(|p| corpus.page_of(p.doc)))
        .collect()
}

fn pick_premise(words: &[String], corpus: &IndexedCorpus, rng: &mut ChaCha8Rng) -> DocId {
    let pages: Vec<usize> = matching_pages(words, corpus).into_iter().collect();
    match pages.choose(rng) {
        Some(&p) => {
            let span = corpus.pages()[p].docs.clone();
            rng.gen_range(span)
        }
        None => rng.gen_range(0..corpus.len() as DocId),
    }
}

/// SUPPORTS/REFUTES pairs from gold evidence: one pair per distinct evidence
/// group, premise = the group's sentences joined. Groups referencing
/// sentences absent from the corpus are skipped.
pub fn evidence_pairs(claims: &[ClaimRecord], corpus: &IndexedCorpus) -> Vec<TrainingPair> {
    let mut out = Vec::new();
    for c in claims {
        let Some(label) = c.label.filter(|l| l.is_verifiable()) else {
            continue;
        };
        let hypothesis = tokenize(&c.claim);
        if hypothesis.is_empty() {
            continue;
        }
        let mut seen = BTreeSet::new();
        for group in c.evidence_groups() {
            if group.is_empty() || !seen.insert(group.clone()) {
                continue;
            }
            let docs: Option<Vec<DocId>> = group
                .iter()
                .map(|(page, idx)| corpus.find(&normalize_title(page), *idx))
                .collect();
            let Some(docs) = docs else { continue };
            let text: Vec<String> = docs.iter().map(|&d| presented_text(corpus.doc(d))).collect();
            out.push(TrainingPair {
                premise: tokenize(&text.join(" ")),
                hypothesis: hypothesis.clone(),
                label,
            });
        }
    }
    out
}
