//! Deterministic lexicon + suffix-rule tagger producing Penn Treebank tags.

/// Splits text into word, number and punctuation tokens. Possessive and
/// contraction clitics ("'s", "'re", ...) become their own tokens.
pub fn split_tokens(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let start = i;
            i += 1;
            while i < chars.len() {
                let ch = chars[i];
                let joins = |prev: char, next: Option<&char>| {
                    let next_ok = next.is_some_and(|n| n.is_alphanumeric());
                    match ch {
                        '-' => next_ok && prev.is_alphanumeric(),
                        '.' | ',' => prev.is_ascii_digit() && next.is_some_and(|n| n.is_ascii_digit()),
                        _ => false,
                    }
                };
                if ch.is_alphanumeric() || joins(chars[i - 1], chars.get(i + 1)) {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(chars[start..i].iter().collect());
        } else if (c == '\'' || c == '’')
            && !out.is_empty()
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
    out
}

const LEXICON: &[(&str, &str)] = &[
    ("'d", "MD"),
    ("'ll", "MD"),
    ("'m", "VBP"),
    ("'re", "VBP"),
    ("'s", "POS"),
    ("'ve", "VBP"),
    ("a", "DT"),
    ("about", "IN"),
    ("above", "IN"),
    ("across", "IN"),
    ("after", "IN"),
    ("against", "IN"),
    ("all", "DT"),
    ("almost", "RB"),
    ("also", "RB"),
    ("although", "IN"),
    ("always", "RB"),
    ("am", "VBP"),
    ("among", "IN"),
    ("an", "DT"),
    ("and", "CC"),
    ("another", "DT"),
    ("any", "DT"),
    ("are", "VBP"),
    ("around", "IN"),
    ("as", "IN"),
    ("at", "IN"),
    ("away", "RB"),
    ("be", "VB"),
    ("became", "VBD"),
    ("because", "IN"),
    ("become", "VB"),
    ("been", "VBN"),
    ("before", "IN"),
    ("began", "VBD"),
    ("being", "VBG"),
    ("belong", "VBP"),
    ("below", "IN"),
    ("best", "JJS"),
    ("better", "JJR"),
    ("between", "IN"),
    ("billion", "CD"),
    ("born", "VBN"),
    ("both", "DT"),
    ("but", "CC"),
    ("by", "IN"),
    ("came", "VBD"),
    ("can", "MD"),
    ("cannot", "MD"),
    ("could", "MD"),
    ("did", "VBD"),
    ("do", "VBP"),
    ("does", "VBZ"),
    ("down", "RB"),
    ("during", "IN"),
    ("each", "DT"),
    ("eight", "CD"),
    ("either", "DT"),
    ("eleven", "CD"),
    ("even", "RB"),
    ("ever", "RB"),
    ("every", "DT"),
    ("few", "JJ"),
    ("first", "JJ"),
    ("five", "CD"),
    ("for", "IN"),
    ("found", "VBD"),
    ("four", "CD"),
    ("from", "IN"),
    ("gave", "VBD"),
    ("good", "JJ"),
    ("got", "VBD"),
    ("great", "JJ"),
    ("had", "VBD"),
    ("has", "VBZ"),
    ("have", "VBP"),
    ("he", "PRP"),
    ("her", "PRP$"),
    ("here", "RB"),
    ("him", "PRP"),
    ("his", "PRP$"),
    ("how", "WRB"),
    ("however", "RB"),
    ("hundred", "CD"),
    ("i", "PRP"),
    ("if", "IN"),
    ("in", "IN"),
    ("into", "IN"),
    ("is", "VBZ"),
    ("it", "PRP"),
    ("its", "PRP$"),
    ("just", "RB"),
    ("knew", "VBD"),
    ("last", "JJ"),
    ("least", "JJS"),
    ("left", "VBD"),
    ("less", "JJR"),
    ("made", "VBD"),
    ("many", "JJ"),
    ("may", "MD"),
    ("me", "PRP"),
    ("might", "MD"),
    ("million", "CD"),
    ("more", "JJR"),
    ("most", "JJS"),
    ("much", "JJ"),
    ("must", "MD"),
    ("my", "PRP$"),
    ("n't", "RB"),
    ("near", "IN"),
    ("never", "RB"),
    ("new", "JJ"),
    ("nine", "CD"),
    ("no", "DT"),
    ("nor", "CC"),
    ("not", "RB"),
    ("now", "RB"),
    ("of", "IN"),
    ("off", "RP"),
    ("often", "RB"),
    ("old", "JJ"),
    ("on", "IN"),
    ("once", "RB"),
    ("one", "CD"),
    ("only", "RB"),
    ("onto", "IN"),
    ("or", "CC"),
    ("other", "JJ"),
    ("our", "PRP$"),
    ("out", "RP"),
    ("over", "IN"),
    ("own", "JJ"),
    ("ran", "VBD"),
    ("said", "VBD"),
    ("saw", "VBD"),
    ("seven", "CD"),
    ("shall", "MD"),
    ("she", "PRP"),
    ("should", "MD"),
    ("since", "IN"),
    ("six", "CD"),
    ("so", "RB"),
    ("some", "DT"),
    ("soon", "RB"),
    ("still", "RB"),
    ("such", "JJ"),
    ("ten", "CD"),
    ("than", "IN"),
    ("that", "IN"),
    ("the", "DT"),
    ("their", "PRP$"),
    ("them", "PRP"),
    ("then", "RB"),
    ("there", "EX"),
    ("these", "DT"),
    ("they", "PRP"),
    ("this", "DT"),
    ("those", "DT"),
    ("thousand", "CD"),
    ("three", "CD"),
    ("through", "IN"),
    ("to", "TO"),
    ("together", "RB"),
    ("too", "RB"),
    ("took", "VBD"),
    ("twelve", "CD"),
    ("twenty", "CD"),
    ("two", "CD"),
    ("under", "IN"),
    ("until", "IN"),
    ("up", "RP"),
    ("upon", "IN"),
    ("us", "PRP"),
    ("very", "RB"),
    ("was", "VBD"),
    ("we", "PRP"),
    ("went", "VBD"),
    ("were", "VBD"),
    ("what", "WP"),
    ("when", "WRB"),
    ("where", "WRB"),
    ("whether", "IN"),
    ("which", "WDT"),
    ("while", "IN"),
    ("who", "WP"),
    ("whom", "WP"),
    ("whose", "WP$"),
    ("why", "WRB"),
    ("will", "MD"),
    ("with", "IN"),
    ("within", "IN"),
    ("without", "IN"),
    ("won", "VBD"),
    ("would", "MD"),
    ("wrote", "VBD"),
    ("yet", "RB"),
    ("you", "PRP"),
    ("your", "PRP$"),
];

fn lexicon(word: &str) -> Option<&'static str> {
    LEXICON
        .binary_search_by(|(w, _)| w.cmp(&word))
        .ok()
        .map(|i| LEXICON[i].1)
}

fn punct_tag(tok: &str) -> Option<&'static str> {
    let mut chars = tok.chars();
    let c = chars.next()?;
    if chars.next().is_some() || c.is_alphanumeric() {
        return None;
    }
    Some(match c {
        '.' | '!' | '?' => ".",
        ',' => ",",
        ':' | ';' | '-' | '\u{2013}' | '\u{2014}' => ":",
        '(' | '[' | '{' => "-LRB-",
        ')' | ']' | '}' => "-RRB-",
        '"' | '“' | '”' | '\'' | '`' | '‘' | '’' => "''",
        '$' | '€' | '£' => "$",
        '#' => "#",
        _ => "SYM",
    })
}

fn is_number(tok: &str) -> bool {
    tok.chars().any(|c| c.is_ascii_digit())
        && tok
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-'))
}

fn suffix_tag(lower: &str) -> &'static str {
    const RULES: &[(&str, &str)] = &[
        ("ness", "NN"),
        ("ment", "NN"),
        ("tion", "NN"),
        ("sion", "NN"),
        ("ship", "NN"),
        ("ence", "NN"),
        ("ance", "NN"),
        ("ity", "NN"),
        ("ism", "NN"),
        ("ist", "NN"),
        ("ous", "JJ"),
        ("ful", "JJ"),
        ("ive", "JJ"),
        ("able", "JJ"),
        ("ible", "JJ"),
        ("less", "JJ"),
        ("ical", "JJ"),
        ("ial", "JJ"),
        ("al", "JJ"),
        ("ic", "JJ"),
        ("ish", "JJ"),
        ("est", "JJS"),
        ("ly", "RB"),
        ("ing", "VBG"),
        ("ed", "VBD"),
    ];
    for (suffix, tag) in RULES {
        if lower.len() > suffix.len() + 2 && lower.ends_with(suffix) {
            return tag;
        }
    }
    if lower.len() > 3 && lower.ends_with('s') && !lower.ends_with("ss") && !lower.ends_with("us") {
        return "NNS";
    }
    "NN"
}

fn is_capitalized(tok: &str) -> bool {
    tok.chars().next().is_some_and(char::is_uppercase)
}

fn initial_tag(tok: &str, sentence_start: bool) -> &'static str {
    if let Some(t) = punct_tag(tok) {
        return t;
    }
    if is_number(tok) {
        return "CD";
    }
    let lower = tok.to_lowercase();
    if let Some(t) = lexicon(&lower) {
        // mid-sentence capitals on closed-class words still read as names ("The Who")
        if !is_capitalized(tok) || sentence_start || t == "CD" {
            return t;
        }
    }
    if is_capitalized(tok) {
        if sentence_start {
            let t = suffix_tag(&lower);
            return if matches!(t, "NN" | "NNS") { "NNP" } else { t };
        }
        return if lower.ends_with('s') && lower.len() > 3 && tok.chars().all(char::is_uppercase) {
            "NNPS"
        } else {
            "NNP"
        };
    }
    suffix_tag(&lower)
}

fn is_noun(t: &str) -> bool {
    t.starts_with("NN") || t == "PRP" || t == "CD"
}

/// Tags pre-split tokens. The first token and tokens after sentence-final
/// punctuation count as sentence-initial.
pub fn tag_tokens(tokens: &[String]) -> Vec<String> {
    let mut tags: Vec<&'static str> = Vec::with_capacity(tokens.len());
    for (i, tok) in tokens.iter().enumerate() {
        let start = i == 0 || matches!(tags[i - 1], "." | "``");
        tags.push(initial_tag(tok, start));
    }
    // contextual fix-ups, left to right
    for i in 0..tokens.len() {
        let prev = if i > 0 { Some(tags[i - 1]) } else { None };
        let next = tags.get(i + 1).copied();
        let lower = tokens[i].to_lowercase();
        let t = tags[i];
        tags[i] = match (prev, t) {
            (Some("TO") | Some("MD"), "NN" | "VBP") => "VB",
            (Some(p), "VBD") if lexicon(&lower).is_none() && is_have_or_be(&tokens[i - 1], p) => "VBN",
            (Some(p), "NNS") if is_noun(p) && p != "CD" && !matches!(next, Some("VBZ" | "VBP" | "VBD" | "MD")) => {
                "VBZ"
            }
            (Some("NNS" | "NNPS" | "PRP"), "NN")
                if matches!(next, Some("DT" | "IN" | "TO" | "PRP$" | "JJ" | "RB" | "NNP")) =>
            {
                "VBP"
            }
            (Some("DT" | "PRP$" | "JJ" | "POS"), "VBZ") if lexicon(&lower).is_none() => "NNS",
            _ => t,
        };
    }
    tags.into_iter().map(String::from).collect()
}

fn is_have_or_be(word: &str, tag: &str) -> bool {
    tag.starts_with("VB")
        && matches!(
            word.to_lowercase().as_str(),
            "is" | "was" | "were" | "are" | "be" | "been" | "being" | "has" | "have" | "had" | "am"
        )
}
