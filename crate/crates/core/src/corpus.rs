//! Dump ingestion: one JSON record per page, one document per sentence.

use std::io::BufRead;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::tokenize;

pub const MAX_SENTENCE_CHARS: usize = 2000;

const PRONOUNS: [&str; 4] = ["He", "She", "It", "They"];
const PRONOUNS_LOWER: [&str; 4] = ["he", "she", "it", "they"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub title_raw: String,
    pub title_display: String,
    /// Retained sentences, indices strictly increasing.
    pub sentences: Vec<(u32, String)>,
}

/// One indexed sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceDoc {
    pub page_title_raw: String,
    pub page_title_display: String,
    pub sentence_index: u32,
    pub raw_text: String,
    pub contextualized_text: String,
    pub title_tokens: Vec<String>,
    pub body_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub max_sentence_chars: usize,
    /// Also replace lowercase he/she/it/they.
    pub lowercase_pronouns: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            max_sentence_chars: MAX_SENTENCE_CHARS,
            lowercase_pronouns: false,
        }
    }
}

/// Result of parsing one dump record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPage {
    pub page: Page,
    /// Sentence rows that could not be parsed (no tab, bad index, index out of order).
    pub malformed_rows: usize,
}

#[derive(Deserialize)]
struct DumpRecord {
    id: String,
    #[serde(default)]
    lines: String,
}

pub fn normalize_title(title_raw: &str) -> String {
    title_raw.replace('_', " ")
}

pub fn keep_sentence(sentence: &str) -> bool {
    keep_sentence_with(sentence, MAX_SENTENCE_CHARS)
}

/// Length is counted in Unicode scalar values.
pub fn keep_sentence_with(sentence: &str, max_chars: usize) -> bool {
    !sentence.trim().is_empty() && sentence.chars().count() <= max_chars
}

pub fn contextualize(sentence: &str, title_display: &str) -> String {
    contextualize_with(sentence, title_display, false)
}

/// Replaces whole-word, case-exact pronouns with the page title.
pub fn contextualize_with(sentence: &str, title_display: &str, lowercase: bool) -> String {
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    let mut out = String::with_capacity(sentence.len());
    let mut rest = sentence;
    let mut prev: Option<char> = None;
    while let Some(c) = rest.chars().next() {
        if is_word(c) && !prev.is_some_and(is_word) {
            let end = rest.find(|ch: char| !is_word(ch)).unwrap_or(rest.len());
            let word = &rest[..end];
            let hit = PRONOUNS.contains(&word) || (lowercase && PRONOUNS_LOWER.contains(&word));
            out.push_str(if hit { title_display } else { word });
            prev = word.chars().last();
            rest = &rest[end..];
        } else {
            out.push(c);
            prev = Some(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

pub fn parse_wiki_record(record: &str, line_no: usize) -> Result<ParsedPage> {
    parse_wiki_record_with(record, line_no, &IngestOptions::default())
}

pub fn parse_wiki_record_with(
    record: &str,
    line_no: usize,
    opts: &IngestOptions,
) -> Result<ParsedPage> {
    let rec: DumpRecord = serde_json::from_str(record).map_err(|e| Error::Ingest {
        line: line_no,
        message: e.to_string(),
    })?;
    let mut sentences = Vec::new();
    let mut malformed_rows = 0;
    let mut last: Option<u32> = None;
    for row in rec.lines.split('\n') {
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split('\t');
        let index = fields.next().and_then(|s| s.trim().parse::<u32>().ok());
        let text = fields.next();
        let (Some(index), Some(text)) = (index, text) else {
            malformed_rows += 1;
            continue;
        };
        if last.is_some_and(|l| index <= l) {
            malformed_rows += 1;
            continue;
        }
        last = Some(index);
        if keep_sentence_with(text, opts.max_sentence_chars) {
            sentences.push((index, text.to_string()));
        }
    }
    Ok(ParsedPage {
        page: Page {
            title_display: normalize_title(&rec.id),
            title_raw: rec.id,
            sentences,
        },
        malformed_rows,
    })
}

impl Page {
    pub fn into_docs(self, opts: &IngestOptions) -> Vec<SentenceDoc> {
        let title_tokens = tokenize(&self.title_display);
        self.sentences
            .into_iter()
            .map(|(index, raw)| {
                let ctx = contextualize_with(&raw, &self.title_display, opts.lowercase_pronouns);
                SentenceDoc {
                    page_title_raw: self.title_raw.clone(),
                    page_title_display: self.title_display.clone(),
                    sentence_index: index,
                    body_tokens: tokenize(&ctx),
                    title_tokens: title_tokens.clone(),
                    raw_text: raw,
                    contextualized_text: ctx,
                }
            })
            .collect()
    }
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub docs: Vec<SentenceDoc>,
    pub pages: usize,
    /// Records that failed to parse, with their line numbers.
    pub bad_records: Vec<Error>,
    pub malformed_rows: usize,
}

impl Ingested {
    pub fn warnings(&self) -> usize {
        self.bad_records.len() + self.malformed_rows
    }
}

/// Reads a whole dump. Bad records are collected, not fatal; only reader
/// failures abort.
pub fn read_dump<R: BufRead>(reader: R, opts: &IngestOptions) -> Result<Ingested> {
    let lines = reader.lines().collect::<std::io::Result<Vec<_>>>()?;
    let parsed: Vec<_> = lines
        .par_iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_wiki_record_with(l, i + 1, opts))
        .collect();
    let mut out = Ingested::default();
    for p in parsed {
        match p {
            Ok(p) => {
                out.pages += 1;
                out.malformed_rows += p.malformed_rows;
                out.docs.extend(p.page.into_docs(opts));
            }
            Err(e) => out.bad_records.push(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, lines: &str) -> String {
        serde_json::json!({ "id": id, "text": "", "lines": lines }).to_string()
    }

    #[test]
    fn parses_two_sentence_page() {
        let r = record(
            "Walk_of_Life_(album)",
            "0\tWalk of Life is an album.\tWalk of Life\n1\tIt sold well.",
        );
        let p = parse_wiki_record(&r, 1).unwrap();
        assert_eq!(p.page.title_display, "Walk of Life (album)");
        assert_eq!(p.page.title_raw, "Walk_of_Life_(album)");
        assert_eq!(p.page.sentences.len(), 2);
        assert_eq!(p.page.sentences[0], (0, "Walk of Life is an album.".into()));
        assert_eq!(p.malformed_rows, 0);
    }

    #[test]
    fn empty_lines_field_gives_empty_page() {
        let p = parse_wiki_record(&record("AI", ""), 1).unwrap();
        assert!(p.page.sentences.is_empty());
    }

    #[test]
    fn overlong_sentence_is_dropped() {
        let long = "x".repeat(2500);
        let p = parse_wiki_record(&record("A", &format!("0\tShort one.\n1\t{long}")), 1).unwrap();
        assert_eq!(p.page.sentences, vec![(0, "Short one.".into())]);
        assert_eq!(p.malformed_rows, 0);
    }

    #[test]
    fn malformed_rows_are_counted() {
        let p = parse_wiki_record(&record("A", "0\tOk.\nnotab\nx\tbad index\n0\tout of order\n2\t"), 1)
            .unwrap();
        assert_eq!(p.page.sentences, vec![(0, "Ok.".into())]);
        assert_eq!(p.malformed_rows, 3);
    }

    #[test]
    fn bad_record_reports_line() {
        match parse_wiki_record("{not json", 7) {
            Err(Error::Ingest { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn title_normalization() {
        assert_eq!(normalize_title("Northern_Isles"), "Northern Isles");
        assert_eq!(normalize_title("Walk_of_Life_(album)"), "Walk of Life (album)");
        assert_eq!(normalize_title("AI"), "AI");
    }

    #[test]
    fn pronoun_replacement() {
        assert_eq!(
            contextualize("He was a painter.", "Claude Monet"),
            "Claude Monet was a painter."
        );
        assert_eq!(contextualize("The cat ate. It slept.", "Felix"), "The cat ate. Felix slept.");
        assert_eq!(contextualize("Items hit the shelf.", "X"), "Items hit the shelf.");
        assert_eq!(contextualize("They, She and he", "T"), "T, T and he");
        assert_eq!(contextualize_with("they left", "T", true), "T left");
        assert_eq!(contextualize("Hello Shell Iteration", "T"), "Hello Shell Iteration");
    }

    #[test]
    fn keep_sentence_rules() {
        assert!(!keep_sentence(""));
        assert!(!keep_sentence("   "));
        assert!(!keep_sentence(&"a".repeat(2001)));
        assert!(keep_sentence(&"a".repeat(2000)));
        assert!(keep_sentence(&"é".repeat(2000)));
        assert!(keep_sentence("Scotland is a country."));
    }

    #[test]
    fn read_dump_collects_warnings() {
        let dump = format!(
            "{}\n{{broken\n\n{}\n",
            record("A", "0\tFirst.\n1\tSecond."),
            record("B_c", "0\tHe is B.\nbad")
        );
        let ing = read_dump(dump.as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(ing.pages, 2);
        assert_eq!(ing.docs.len(), 3);
        assert_eq!(ing.bad_records.len(), 1);
        assert_eq!(ing.malformed_rows, 1);
        assert_eq!(ing.docs[2].contextualized_text, "B c is B.");
        assert_eq!(ing.docs[2].title_tokens, vec!["b", "c"]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn retained_sentences_pass_filter(rows in proptest::collection::vec(("[ a-z]{0,12}", 0usize..3), 0..12)) {
                let lines: Vec<String> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, (s, rep))| format!("{i}\t{}", s.repeat(*rep * 100)))
                    .collect();
                let opts = IngestOptions { max_sentence_chars: 300, ..Default::default() };
                let p = parse_wiki_record_with(&record("P", &lines.join("\n")), 1, &opts).unwrap();
                for (_, s) in &p.page.sentences {
                    prop_assert!(keep_sentence_with(s, 300));
                }
                prop_assert!(p.page.sentences.windows(2).all(|w| w[0].0 < w[1].0));
            }

            #[test]
            fn contextualize_idempotent(s in "[A-Za-z ,.]{0,60}", title in "[a-z][a-z ]{0,10}") {
                let once = contextualize(&s, &title);
                prop_assert_eq!(contextualize(&once, &title), once);
            }

            #[test]
            fn contextualize_only_touches_pronouns(s in "[a-z ,.]{0,60}") {
                // no capitalized words means nothing to replace
                prop_assert_eq!(contextualize(&s, "Title"), s);
            }
        }
    }
}
