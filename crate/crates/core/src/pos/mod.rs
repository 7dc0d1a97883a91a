//! Part-of-speech tagging and the five-category point score.

mod tagger;

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use tagger::{split_tokens, tag_tokens};

pub const MAX_CATEGORY_POINTS: u32 = 3;
pub const MAX_POINTS: u32 = MAX_CATEGORY_POINTS * 5;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedText {
    pub tokens: Vec<(String, String)>,
}

impl TaggedText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|(w, _)| w.as_str())
    }

    /// Parses the `word_TAG word_TAG` line format. The tag follows the last
    /// underscore so words may themselves contain underscores.
    pub fn parse_line(line: &str) -> Result<Self> {
        let tokens = line
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.rsplit_once('_')
                    .filter(|(w, tag)| !w.is_empty() && !tag.is_empty())
                    .map(|(w, tag)| (w.to_string(), tag.to_string()))
                    .ok_or_else(|| Error::format("tag", format!("token {t:?} has no _TAG suffix")))
            })
            .collect::<Result<_>>()?;
        Ok(TaggedText { tokens })
    }

    pub fn to_line(&self) -> String {
        self.tokens
            .iter()
            .map(|(w, t)| format!("{w}_{t}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Verb,
    Noun,
    Adjective,
    Adverb,
    Number,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Verb,
        Category::Noun,
        Category::Adjective,
        Category::Adverb,
        Category::Number,
    ];

    pub fn of(tag: &str) -> Option<Category> {
        if tag.starts_with("VB") {
            Some(Category::Verb)
        } else if tag.starts_with("NN") {
            Some(Category::Noun)
        } else if tag.starts_with("JJ") {
            Some(Category::Adjective)
        } else if tag.starts_with("RB") {
            Some(Category::Adverb)
        } else if tag == "CD" {
            Some(Category::Number)
        } else {
            None
        }
    }
}

pub fn category_of(tag: &str) -> Option<Category> {
    Category::of(tag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointScore {
    /// Indexed in [`Category::ALL`] order.
    pub per_category: [u32; 5],
    pub total: u32,
}

impl PointScore {
    pub fn get(&self, c: Category) -> u32 {
        self.per_category[c as usize]
    }
}

pub fn tag(text: &str, precomputed: Option<&TaggedText>) -> TaggedText {
    if let Some(p) = precomputed {
        return p.clone();
    }
    let words = split_tokens(text);
    let tags = tag_tokens(&words);
    TaggedText {
        tokens: words.into_iter().zip(tags).collect(),
    }
}

/// Each category starts at 3 and loses a point per distinct claim word of that
/// category missing from the candidate, floored at 0. Words compare
/// case-folded and the candidate side ignores tags.
pub fn score(claim: &TaggedText, candidate: &TaggedText) -> PointScore {
    let present: HashSet<String> = candidate.words().map(str::to_lowercase).collect();
    let mut wanted: [HashSet<String>; 5] = Default::default();
    for (w, t) in &claim.tokens {
        if let Some(c) = Category::of(t) {
            wanted[c as usize].insert(w.to_lowercase());
        }
    }
    let mut per_category = [0; 5];
    for (slot, words) in per_category.iter_mut().zip(&wanted) {
        let missing = words.iter().filter(|w| !present.contains(*w)).count() as u32;
        *slot = MAX_CATEGORY_POINTS.saturating_sub(missing);
    }
    PointScore {
        total: per_category.iter().sum(),
        per_category,
    }
}

/// Tags texts on `workers` threads; output order matches input order.
pub fn batch_tag<S: AsRef<str> + Sync>(texts: &[S], workers: usize) -> Vec<TaggedText> {
    let run = || texts.par_iter().map(|t| tag(t.as_ref(), None)).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => texts.iter().map(|t| tag(t.as_ref(), None)).collect(),
    }
}

pub fn read_tag_file<R: BufRead>(reader: R) -> Result<Vec<TaggedText>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| {
            TaggedText::parse_line(&l?).map_err(|e| Error::Ingest {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_tag_file<W: Write>(mut w: W, tagged: &[TaggedText]) -> Result<()> {
    for t in tagged {
        writeln!(w, "{}", t.to_line())?;
    }
    Ok(())
}
