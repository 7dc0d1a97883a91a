//! Label accuracy, evidence recall, FEVER score and the confusion matrix.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ClaimRecord, EvidenceGroup};
use crate::label::Label;
use crate::pipeline::VerdictRecord;

/// Only the first five predicted evidence entries are scored.
pub const MAX_SCORED_EVIDENCE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct GoldClaim {
    pub id: u64,
    pub label: Label,
    pub groups: Vec<EvidenceGroup>,
}

impl GoldClaim {
    pub fn from_record(r: &ClaimRecord) -> Result<Self> {
        let label = r
            .label
            .ok_or_else(|| Error::Input(format!("claim {} has no gold label", r.id)))?;
        Ok(GoldClaim {
            id: r.id,
            label,
            groups: r.evidence_groups(),
        })
    }
}

pub fn gold_from_records(records: &[ClaimRecord]) -> Result<Vec<GoldClaim>> {
    records.iter().map(GoldClaim::from_record).collect()
}

/// Pairs each gold claim with its prediction. Predictions for ids that are
/// not in the gold set are ignored.
pub fn align<'a>(preds: &'a [VerdictRecord], gold: &'a [GoldClaim]) -> Result<Vec<(&'a GoldClaim, &'a VerdictRecord)>> {
    let mut by_id: HashMap<u64, &VerdictRecord> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.id, p).is_some() {
            return Err(Error::Input(format!("duplicate prediction for claim {}", p.id)));
        }
    }
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(gold.len());
    for g in gold {
        match by_id.get(&g.id) {
            Some(p) => out.push((g, *p)),
            None => missing.push(g.id),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(Error::MissingPredictions(missing))
    }
}

/// True when the first five predicted pairs contain some full gold group.
pub fn covers_group(predicted: &[(String, u32)], groups: &[EvidenceGroup]) -> bool {
    let top: BTreeSet<&(String, u32)> = predicted.iter().take(MAX_SCORED_EVIDENCE).collect();
    groups
        .iter()
        .any(|g| !g.is_empty() && g.iter().all(|pair| top.contains(pair)))
}

fn label_correct(g: &GoldClaim, p: &VerdictRecord) -> bool {
    g.label == p.predicted_label
}

fn fever_correct(g: &GoldClaim, p: &VerdictRecord) -> bool {
    label_correct(g, p) && (g.label == Label::NotEnoughInfo || covers_group(&p.predicted_evidence, &g.groups))
}

fn fraction(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

pub fn label_accuracy(preds: &[VerdictRecord], gold: &[GoldClaim]) -> Result<f64> {
    let pairs = align(preds, gold)?;
    Ok(fraction(pairs.iter().filter(|(g, p)| label_correct(g, p)).count(), pairs.len()))
}

/// Over verifiable gold claims only; 0 when there are none.
pub fn evidence_recall(preds: &[VerdictRecord], gold: &[GoldClaim]) -> Result<f64> {
    let pairs = align(preds, gold)?;
    let verifiable: Vec<_> = pairs.iter().filter(|(g, _)| g.label.is_verifiable()).collect();
    let hits = verifiable
        .iter()
        .filter(|(g, p)| covers_group(&p.predicted_evidence, &g.groups))
        .count();
    Ok(fraction(hits, verifiable.len()))
}

pub fn fever_score(preds: &[VerdictRecord], gold: &[GoldClaim]) -> Result<f64> {
    let pairs = align(preds, gold)?;
    Ok(fraction(pairs.iter().filter(|(g, p)| fever_correct(g, p)).count(), pairs.len()))
}

/// Rows are gold labels, columns predictions, both in label order.
pub fn confusion_matrix(preds: &[VerdictRecord], gold: &[GoldClaim]) -> Result<[[u64; 3]; 3]> {
    let mut m = [[0u64; 3]; 3];
    for (g, p) in align(preds, gold)? {
        m[g.label.index()][p.predicted_label.index()] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_claims: usize,
    pub label_accuracy: f64,
    pub evidence_recall: f64,
    pub fever_score: f64,
    pub confusion: [[u64; 3]; 3],
}

pub fn evaluate(preds: &[VerdictRecord], gold: &[GoldClaim]) -> Result<EvalReport> {
    Ok(EvalReport {
        n_claims: gold.len(),
        label_accuracy: label_accuracy(preds, gold)?,
        evidence_recall: evidence_recall(preds, gold)?,
        fever_score: fever_score(preds, gold)?,
        confusion: confusion_matrix(preds, gold)?,
    })
}

impl EvalReport {
    /// `Label  Recall  Score` row with four decimals.
    pub fn summary_line(&self) -> String {
        format!(
            "{:>8.4} {:>8.4} {:>8.4}",
            self.label_accuracy, self.evidence_recall, self.fever_score
        )
    }
}

/// One row of an ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub report: EvalReport,
}

/// Column-aligned table with Label, Recall and Score columns.
pub fn ablation_table(rows: &[AblationRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<width$} {:>8} {:>8} {:>8}\n", "System", "Label", "Recall", "Score");
    for r in rows {
        out.push_str(&format!("{:<width$} {}\n", r.name, r.report.summary_line()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(pairs: &[(&str, u32)]) -> EvidenceGroup {
        pairs.iter().map(|(p, i)| (p.to_string(), *i)).collect()
    }

    fn gold(id: u64, label: Label, groups: Vec<EvidenceGroup>) -> GoldClaim {
        GoldClaim { id, label, groups }
    }

    fn pred(id: u64, label: Label, ev: &[(&str, u32)]) -> VerdictRecord {
        VerdictRecord {
            id,
            predicted_label: label,
            predicted_evidence: ev.iter().map(|(p, i)| (p.to_string(), *i)).collect(),
            diagnostics: None,
        }
    }

    #[test]
    fn superset_and_group_atomicity() {
        let groups = vec![group(&[("A", 0), ("B", 1)]), group(&[("C", 2), ("D", 3)])];
        let ev = |v: &[(&str, u32)]| v.iter().map(|(p, i)| (p.to_string(), *i)).collect::<Vec<_>>();
        assert!(covers_group(&ev(&[("X", 9), ("B", 1), ("A", 0)]), &groups));
        assert!(!covers_group(&ev(&[("A", 0), ("C", 2)]), &groups));
        // a sixth entry is never scored
        let six = ev(&[("Q", 0), ("Q", 1), ("Q", 2), ("Q", 3), ("A", 0), ("B", 1)]);
        assert!(!covers_group(&six, &groups));
        // title match is exact on the raw form
        assert!(!covers_group(&ev(&[("a", 0), ("B", 1)]), &groups));
    }

    #[test]
    fn three_claim_fixture() {
        let g = vec![
            gold(1, Label::Supports, vec![group(&[("A", 0)])]),
            gold(2, Label::Refutes, vec![group(&[("B", 1)])]),
            gold(3, Label::Supports, vec![group(&[("C", 2)])]),
        ];
        let p = vec![
            pred(1, Label::Supports, &[("A", 0)]),
            pred(2, Label::Supports, &[("B", 1)]),
            pred(3, Label::Supports, &[("Z", 2)]),
        ];
        assert!((label_accuracy(&p, &g).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!((evidence_recall(&p, &g).unwrap() - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn missing_predictions_listed() {
        let g = vec![gold(1, Label::NotEnoughInfo, vec![]), gold(2, Label::NotEnoughInfo, vec![])];
        match fever_score(&[pred(2, Label::Supports, &[])], &g) {
            Err(Error::MissingPredictions(ids)) => assert_eq!(ids, vec![1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn confusion_placement() {
        let g = vec![gold(1, Label::Supports, vec![])];
        let m = confusion_matrix(&[pred(1, Label::NotEnoughInfo, &[])], &g).unwrap();
        assert_eq!(m, [[0, 0, 1], [0, 0, 0], [0, 0, 0]]);
    }

    #[test]
    fn nine_claim_confusion_matches_tally() {
        use Label::*;
        let pairs = [
            (Supports, Supports),
            (Supports, Refutes),
            (Supports, NotEnoughInfo),
            (Refutes, Refutes),
            (Refutes, Refutes),
            (Refutes, Supports),
            (NotEnoughInfo, NotEnoughInfo),
            (NotEnoughInfo, Supports),
            (NotEnoughInfo, Supports),
        ];
        let g: Vec<_> = pairs.iter().enumerate().map(|(i, (t, _))| gold(i as u64, *t, vec![])).collect();
        let p: Vec<_> = pairs.iter().enumerate().map(|(i, (_, q))| pred(i as u64, *q, &[])).collect();
        let m = confusion_matrix(&p, &g).unwrap();
        for (ti, t) in Label::ALL.iter().enumerate() {
            for (qi, q) in Label::ALL.iter().enumerate() {
                let tally = pairs.iter().filter(|(a, b)| a == t && b == q).count() as u64;
                assert_eq!(m[ti][qi], tally);
            }
        }
        assert_eq!(m, [[1, 1, 1], [1, 2, 0], [2, 0, 1]]);
    }

    #[test]
    fn nei_is_exempt_from_evidence() {
        let g = vec![gold(1, Label::NotEnoughInfo, vec![])];
        assert_eq!(fever_score(&[pred(1, Label::NotEnoughInfo, &[])], &g).unwrap(), 1.0);
        assert_eq!(evidence_recall(&[pred(1, Label::NotEnoughInfo, &[])], &g).unwrap(), 0.0);
    }

    #[test]
    fn table_layout() {
        let report = EvalReport {
            n_claims: 2,
            label_accuracy: 0.5,
            evidence_recall: 1.0,
            fever_score: 0.25,
            confusion: [[1, 0, 0], [0, 0, 1], [0, 0, 0]],
        };
        let t = ablation_table(&[AblationRow { name: "Full".into(), report }]);
        assert_eq!(t, "System    Label   Recall    Score\nFull     0.5000   1.0000   0.2500\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn label() -> impl Strategy<Value = Label> {
            (0usize..3).prop_map(|i| Label::ALL[i])
        }

        fn pair() -> impl Strategy<Value = (String, u32)> {
            ("[AB]", 0u32..3)
        }

        fn case() -> impl Strategy<Value = (GoldClaim, VerdictRecord)> {
            (
                label(),
                proptest::collection::vec(proptest::collection::btree_set(pair(), 1..3), 0..3),
                label(),
                proptest::collection::vec(pair(), 0..7),
            )
                .prop_map(|(gl, groups, pl, ev)| {
                    (
                        GoldClaim { id: 0, label: gl, groups },
                        VerdictRecord { id: 0, predicted_label: pl, predicted_evidence: ev, diagnostics: None },
                    )
                })
        }

        fn numbered(cases: Vec<(GoldClaim, VerdictRecord)>) -> (Vec<GoldClaim>, Vec<VerdictRecord>) {
            cases
                .into_iter()
                .enumerate()
                .map(|(i, (mut g, mut p))| {
                    g.id = i as u64;
                    p.id = i as u64;
                    (g, p)
                })
                .unzip()
        }

        proptest! {
            #[test]
            fn fever_never_exceeds_accuracy(cases in proptest::collection::vec(case(), 1..30)) {
                let (g, p) = numbered(cases);
                prop_assert!(fever_score(&p, &g).unwrap() <= label_accuracy(&p, &g).unwrap());
            }

            #[test]
            fn order_is_irrelevant(cases in proptest::collection::vec(case(), 1..30), rot in 0usize..30) {
                let (g, p) = numbered(cases);
                let mut p2 = p.clone();
                p2.reverse();
                let mut g2 = g.clone();
                let r = rot % g2.len();
                g2.rotate_left(r);
                prop_assert_eq!(evaluate(&p, &g).unwrap(), evaluate(&p2, &g2).unwrap());
            }

            #[test]
            fn confusion_margins(cases in proptest::collection::vec(case(), 0..30)) {
                let (g, p) = numbered(cases);
                let m = confusion_matrix(&p, &g).unwrap();
                for l in Label::ALL {
                    let row: u64 = m[l.index()].iter().sum();
                    let col: u64 = m.iter().map(|r| r[l.index()]).sum();
                    prop_assert_eq!(row as usize, g.iter().filter(|x| x.label == l).count());
                    prop_assert_eq!(col as usize, p.iter().filter(|x| x.predicted_label == l).count());
                }
                prop_assert_eq!(m.iter().flatten().sum::<u64>() as usize, g.len());
            }
        }
    }
}
