//! Per-claim decision: entailment matrix, point dampening, the REFUTES merge
//! override and evidence selection.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::index::{collect_candidates, make_queries_with, CandidateSet, DocId, IndexedCorpus};
use crate::io::ClaimRecord;
use crate::keywords::{extract_with_tags, ClaimAnnotations};
use crate::label::Label;
use crate::nn::{ConvGate, EntailmentDistribution, EntailmentModel};
use crate::pos::{self, PointScore, TaggedText};
use crate::scalar::Scalar;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow<T> {
    /// (SUPPORTS, REFUTES, NOT ENOUGH INFO)
    pub values: [T; 3],
    pub doc: DocId,
    pub points: PointScore,
    pub dampened: bool,
}

impl<T: Scalar> MatrixRow<T> {
    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// One row per candidate, in retrieval order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbabilityMatrix<T> {
    pub rows: Vec<MatrixRow<T>>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, dist: &EntailmentDistribution, doc: DocId, points: PointScore) {
        self.rows.push(MatrixRow {
            values: dist.0.map(T::of),
            doc,
            points,
            dampened: false,
        });
    }

    /// Column maxima, in label order.
    pub fn column_max(&self) -> [T; 3] {
        let mut out = [T::neg_infinity(); 3];
        for r in &self.rows {
            for (o, &v) in out.iter_mut().zip(&r.values) {
                *o = o.max(v);
            }
        }
        out
    }
}

/// Candidate texts joined with single spaces.
pub fn merge_candidates(candidates: &CandidateSet) -> String {
    candidates
        .iter()
        .map(|c| c.presented_text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Multiplies every row with `threshold` points or fewer by `factor`.
pub fn dampen<T: Scalar>(matrix: &ProbabilityMatrix<T>, threshold: u32, factor: f64) -> ProbabilityMatrix<T> {
    let f = T::of(factor);
    let rows = matrix
        .rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.points.total <= threshold {
                r.values = r.values.map(|v| v * f);
                r.dampened = true;
            }
            r
        })
        .collect();
    ProbabilityMatrix { rows }
}

/// Label and evidence row indices. A merge distribution whose argmax is
/// REFUTES forces REFUTES. Otherwise the label is the column holding the
/// global maximum, with ties going to the earlier label. Evidence is the
/// `max_evidence` rows with the largest value in the label's column, ties
/// to the earlier row.
pub fn decide<T: Scalar>(
    matrix: &ProbabilityMatrix<T>,
    merge: Option<&EntailmentDistribution>,
    max_evidence: usize,
) -> (Label, Vec<usize>) {
    if matrix.is_empty() {
        return (Label::NotEnoughInfo, Vec::new());
    }
    let label = match merge {
        Some(d) if d.argmax() == Label::Refutes => Label::Refutes,
        _ => {
            let cols = matrix.column_max();
            let top = cols.iter().copied().fold(T::neg_infinity(), T::max);
            let col = cols.iter().position(|&v| v == top).unwrap_or(0);
            Label::from_index(col).expect("three columns")
        }
    };
    let c = label.index();
    let mut order: Vec<usize> = (0..matrix.len()).collect();
    order.sort_by(|&i, &j| {
        matrix.rows[j].values[c]
            .partial_cmp(&matrix.rows[i].values[c])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    order.truncate(max_evidence);
    (label, order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_distribution: Option<[f64; 3]>,
    /// Column maxima of the final matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_max: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub id: u64,
    pub predicted_label: Label,
    pub predicted_evidence: Vec<(String, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

/// Everything about one claim the pipeline looks at.
#[derive(Debug, Clone, Copy)]
pub struct ClaimInput<'a> {
    pub id: u64,
    pub text: &'a str,
    pub annotations: Option<&'a ClaimAnnotations>,
    pub tags: Option<&'a TaggedText>,
}

/// Intermediate results of a single claim, kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct ClaimTrace<T> {
    pub candidates: CandidateSet,
    pub matrix: ProbabilityMatrix<T>,
    pub merge: Option<EntailmentDistribution>,
    pub verdict: VerdictRecord,
}

fn nei(id: u64) -> VerdictRecord {
    VerdictRecord {
        id,
        predicted_label: Label::NotEnoughInfo,
        predicted_evidence: Vec::new(),
        diagnostics: Some(Diagnostics {
            candidates: 0,
            merge_distribution: None,
            matrix_max: None,
        }),
    }
}

pub fn verify_claim<T: Scalar>(
    claim: ClaimInput<'_>,
    corpus: &IndexedCorpus,
    model: &EntailmentModel<T>,
    config: &PipelineConfig,
) -> Result<VerdictRecord> {
    trace_claim(claim, corpus, model, config).map(|t| t.verdict)
}

/// Runs one claim end to end. Claims that yield no keywords or no
/// candidates get NOT ENOUGH INFO with no evidence.
pub fn trace_claim<T: Scalar>(
    claim: ClaimInput<'_>,
    corpus: &IndexedCorpus,
    model: &EntailmentModel<T>,
    config: &PipelineConfig,
) -> Result<ClaimTrace<T>> {
    let empty = |id| ClaimTrace {
        candidates: CandidateSet::default(),
        matrix: ProbabilityMatrix::default(),
        merge: None,
        verdict: nei(id),
    };
    let hypothesis = tokenize(claim.text);
    if hypothesis.is_empty() {
        return Ok(empty(claim.id));
    }
    let annotate = |e: Error| Error::Claim {
        id: claim.id,
        source: Box::new(e),
    };
    let claim_tags = pos::tag(claim.text, claim.tags);
    let keywords = extract_with_tags(claim.text, claim.annotations, &claim_tags).map_err(annotate)?;
    let queries = match make_queries_with(&keywords, &config.limits) {
        Ok(q) => q,
        Err(Error::NoKeywords) => return Ok(empty(claim.id)),
        Err(e) => return Err(annotate(e)),
    };
    let candidates = collect_candidates(&queries, corpus);
    if candidates.is_empty() {
        return Ok(empty(claim.id));
    }
    let gate = if config.use_conv { ConvGate::Auto } else { ConvGate::Off };

    let scored: Vec<(EntailmentDistribution, PointScore)> = candidates
        .candidates
        .par_iter()
        .map(|c| {
            let premise = tokenize(&c.presented_text);
            let dist = model.predict_gated(&premise, &hypothesis, gate)?;
            let points = pos::score(&claim_tags, &pos::tag(&c.presented_text, None));
            Ok((dist, points))
        })
        .collect::<Result<_>>()
        .map_err(annotate)?;
    let mut matrix = ProbabilityMatrix::default();
    for (c, (dist, points)) in candidates.iter().zip(&scored) {
        matrix.push(dist, c.doc, *points);
    }
    if config.use_points {
        matrix = dampen(&matrix, config.point_threshold, config.dampen_factor);
    }
    let merge = if config.use_merge {
        let premise = tokenize(&merge_candidates(&candidates));
        Some(model.predict_gated(&premise, &hypothesis, gate).map_err(annotate)?)
    } else {
        None
    };
    let (label, rows) = decide(&matrix, merge.as_ref(), config.max_evidence);
    let predicted_evidence = rows
        .iter()
        .map(|&r| {
            let d = corpus.doc(matrix.rows[r].doc);
            (d.page_title_raw.clone(), d.sentence_index)
        })
        .collect();
    let verdict = VerdictRecord {
        id: claim.id,
        predicted_label: label,
        predicted_evidence,
        diagnostics: Some(Diagnostics {
            candidates: candidates.len(),
            merge_distribution: merge.map(|d| d.0),
            matrix_max: Some(matrix.column_max().map(Scalar::as_f64)),
        }),
    };
    Ok(ClaimTrace {
        candidates,
        matrix,
        merge,
        verdict,
    })
}

/// Verifies every claim on a pool of `workers` threads. Output order and
/// content do not depend on the worker count. `tags`, when given, is aligned
/// positionally with `claims`.
pub fn verify_all<T: Scalar>(
    claims: &[ClaimRecord],
    annotations: &HashMap<u64, ClaimAnnotations>,
    tags: Option<&[TaggedText]>,
    corpus: &IndexedCorpus,
    model: &EntailmentModel<T>,
    config: &PipelineConfig,
    workers: usize,
) -> Result<Vec<VerdictRecord>> {
    if let Some(t) = tags {
        if t.len() != claims.len() {
            return Err(Error::Input(format!(
                "tag file has {} lines for {} claims",
                t.len(),
                claims.len()
            )));
        }
    }
    let run = || {
        claims
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let input = ClaimInput {
                    id: c.id,
                    text: &c.claim,
                    annotations: annotations.get(&c.id),
                    tags: tags.map(|t| &t[i]),
                };
                verify_claim(input, corpus, model, config)
            })
            .collect::<Result<Vec<_>>>()
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?
        .install(run)
}
