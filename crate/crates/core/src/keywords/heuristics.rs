//! Annotation-free keyword sources driven by capitalization and POS tags.

use crate::pos::TaggedText;
use crate::text::is_stopword;

fn is_capitalized(w: &str) -> bool {
    w.chars().next().is_some_and(char::is_uppercase)
}

/// Maximal runs of capitalized tokens, skipping a sentence-initial stopword.
pub fn capitalized_runs(tagged: &TaggedText) -> Vec<String> {
    let mut runs = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for (i, w) in tagged.words().enumerate() {
        let cap = is_capitalized(w) && !(i == 0 && is_stopword(w));
        if cap {
            cur.push(w);
        } else if !cur.is_empty() {
            runs.push(cur.join(" "));
            cur.clear();
        }
    }
    if !cur.is_empty() {
        runs.push(cur.join(" "));
    }
    runs
}

/// Optional determiner, any adjectives, then one or more nouns.
pub fn noun_chunks(tagged: &TaggedText) -> Vec<String> {
    let toks = &tagged.tokens;
    let is = |i: usize, f: fn(&str) -> bool| toks.get(i).is_some_and(|(_, t)| f(t));
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let start = i;
        let mut j = i;
        if is(j, |t| t == "DT") {
            j += 1;
        }
        while is(j, |t| t.starts_with("JJ")) {
            j += 1;
        }
        let nouns = j;
        while is(j, |t| t.starts_with("NN")) {
            j += 1;
        }
        if j > nouns {
            out.push(toks[start..j].iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>().join(" "));
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// First and last noun chunk, standing in for subject and object.
pub fn edge_chunks(tagged: &TaggedText) -> Vec<String> {
    let chunks = noun_chunks(tagged);
    match chunks.len() {
        0 => Vec::new(),
        1 => chunks,
        n => vec![chunks[0].clone(), chunks[n - 1].clone()],
    }
}

/// Used when every source came back empty.
pub fn last_resort(tagged: &TaggedText) -> Option<String> {
    let runs = capitalized_runs_all(tagged);
    if let Some(best) = runs.iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))) {
        return Some(best.2.clone());
    }
    let alpha: Vec<&str> = tagged
        .words()
        .filter(|w| w.chars().any(char::is_alphabetic))
        .collect();
    let content: Vec<&str> = alpha.iter().copied().filter(|w| !is_stopword(w)).collect();
    let pick = if content.is_empty() { alpha } else { content };
    (!pick.is_empty()).then(|| pick.join(" "))
}

/// (start, length, phrase) of every capitalized run, stopwords included.
fn capitalized_runs_all(tagged: &TaggedText) -> Vec<(usize, usize, String)> {
    let words: Vec<&str> = tagged.words().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < words.len() {
        if is_capitalized(words[i]) {
            let start = i;
            while i < words.len() && is_capitalized(words[i]) {
                i += 1;
            }
            out.push((start, i - start, words[start..i].join(" ")));
        } else {
            i += 1;
        }
    }
    out
}
