//! Bracketed constituency trees and noun-phrase extraction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Node { label: String, children: Vec<Tree> },
    Leaf(String),
}

const PUNCT_TAGS: &[&str] = &[".", ",", ":", "``", "''", "-NONE-", "HYPH", "NFP"];

impl Tree {
    pub fn parse(s: &str) -> Result<Tree> {
        let tokens = lex(s);
        let mut pos = 0;
        let tree = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Annotation("trailing input after tree".into()));
        }
        match tree {
            Tree::Leaf(_) => Err(Error::Annotation("tree has no brackets".into())),
            t => Ok(t),
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Tree::Node { label, .. } => Some(label),
            Tree::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Node { children, .. } => children,
            Tree::Leaf(_) => &[],
        }
    }

    /// Leaf words, skipping punctuation preterminals and restoring bracket
    /// escapes.
    pub fn surface(&self) -> String {
        let mut words = Vec::new();
        self.collect_words(&mut words);
        words.join(" ")
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tree::Leaf(w) => out.push(unescape(w)),
            Tree::Node { label, children } => {
                if PUNCT_TAGS.contains(&label.as_str()) {
                    return;
                }
                children.iter().for_each(|c| c.collect_words(out));
            }
        }
    }
}

fn unescape(w: &str) -> &str {
    match w {
        "-LRB-" => "(",
        "-RRB-" => ")",
        "-LSB-" => "[",
        "-RSB-" => "]",
        "-LCB-" => "{",
        "-RCB-" => "}",
        other => other,
    }
}

fn lex(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in s.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(&s[st..i]);
            }
            if !c.is_whitespace() {
                out.push(&s[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(&s[st..]);
    }
    out
}

fn parse_node(tokens: &[&str], pos: &mut usize) -> Result<Tree> {
    let Some(&tok) = tokens.get(*pos) else {
        return Err(Error::Annotation("unexpected end of tree".into()));
    };
    *pos += 1;
    match tok {
        ")" => Err(Error::Annotation("unbalanced ')'".into())),
        "(" => {
            // PTB files sometimes open with an unlabeled bracket
            let label = match tokens.get(*pos) {
                Some(&t) if t != "(" && t != ")" => {
                    *pos += 1;
                    t.to_string()
                }
                _ => String::new(),
            };
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(Error::Annotation("missing ')'".into())),
                    Some(&")") => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_node(tokens, pos)?),
                }
            }
            if children.is_empty() {
                return Err(Error::Annotation(format!("empty node {label:?}")));
            }
            Ok(Tree::Node { label, children })
        }
        word => Ok(Tree::Leaf(word.to_string())),
    }
}

fn is_np(label: &str) -> bool {
    label == "NP" || label.starts_with("NP-")
}

/// NP phrases in document order within `max_depth` levels below the clause
/// node (the root after unwrapping ROOT or unlabeled wrappers).
pub fn noun_phrases(tree: &Tree, max_depth: usize) -> Vec<String> {
    let mut root = tree;
    while matches!(root.label(), Some("ROOT") | Some("TOP") | Some("")) && root.children().len() == 1 {
        root = &root.children()[0];
    }
    let mut out = Vec::new();
    walk(root, 0, max_depth, &mut out);
    out
}

fn walk(node: &Tree, depth: usize, max_depth: usize, out: &mut Vec<String>) {
    let Tree::Node { label, children } = node else {
        return;
    };
    if is_np(label) {
        let s = node.surface();
        if !s.is_empty() {
            out.push(s);
        }
    }
    if depth < max_depth {
        children.iter().for_each(|c| walk(c, depth + 1, max_depth, out));
    }
}
