//! Keyword search over indexed definitions.
//!
//! A definition matches when every keyword occurs — whole-word, case
//! insensitive — in its body text or among the symbol names it is for.
//! Titles are display metadata and deliberately not searched. Hits are
//! scored by total occurrence count.

use serde::Serialize;

use crate::index::{ns, Object, TripleStore};

#[derive(Clone, Debug, Serialize)]
pub struct SearchHit {
    pub file: String,
    pub start: i64,
    pub end: i64,
    pub title: Option<String>,
    pub for_symbols: Vec<String>,
    pub score: usize,
    pub snippet: String,
}

/// Lowercased alphanumeric runs with their byte offsets.
fn tokenize(text: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                start = i;
            }
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            out.push((std::mem::take(&mut current), start));
        }
    }
    if !current.is_empty() {
        out.push((current, start));
    }
    out
}

fn clamp_to_char_boundary(text: &str, mut i: usize) -> usize {
    while i < text.len() && !text.is_char_boundary(i) {
        i += 1;
    }
    i.min(text.len())
}

/// A short window of the body text around the first keyword occurrence.
fn snippet(text: &str, tokens: &[(String, usize)], keywords: &[String]) -> String {
    let hit = tokens
        .iter()
        .find(|(tok, _)| keywords.iter().any(|k| k == tok));
    let Some((tok, at)) = hit else {
        return text.chars().take(60).collect();
    };
    let start = at.saturating_sub(30);
    let start = clamp_to_char_boundary(text, start);
    let end = clamp_to_char_boundary(text, at + tok.len() + 30);
    let mut out = String::new();
    if start > 0 {
        out.push('…');
    }
    out.push_str(&text[start..end]);
    if end < text.len() {
        out.push('…');
    }
    out
}

/// Searches every indexed definition; results sorted by descending
/// score, then file, then position.
pub fn search(store: &TripleStore, keywords: &[String]) -> Vec<SearchHit> {
    let keywords: Vec<String> = keywords
        .iter()
        .map(|k| k.to_lowercase())
        .filter(|k| !k.is_empty())
        .collect();
    if keywords.is_empty() {
        return Vec::new();
    }
    let mut hits = Vec::new();
    for def in store.subjects_with(&ns::rdf_type(), &Object::Iri(ns::oo("Definition"))) {
        let text = store.str_object(def, &ns::ide("text")).unwrap_or("");
        let tokens = tokenize(text);
        let for_symbols: Vec<String> = store
            .objects(def, &ns::ide("for"))
            .into_iter()
            .filter_map(Object::as_str)
            .map(str::to_string)
            .collect();
        let for_lower: Vec<String> = for_symbols.iter().map(|s| s.to_lowercase()).collect();
        let mut score = 0;
        let mut all_present = true;
        for kw in &keywords {
            let occurrences = tokens.iter().filter(|(tok, _)| tok == kw).count()
                + for_lower.iter().filter(|name| *name == kw).count();
            if occurrences == 0 {
                all_present = false;
                break;
            }
            score += occurrences;
        }
        if !all_present {
            continue;
        }
        hits.push(SearchHit {
            file: store.str_object(def, &ns::ide("file")).unwrap_or("").to_string(),
            start: store.int_object(def, &ns::ide("start")).unwrap_or(0),
            end: store.int_object(def, &ns::ide("end")).unwrap_or(0),
            title: store.str_object(def, &ns::ide("title")).map(str::to_string),
            for_symbols,
            score,
            snippet: snippet(text, &tokens, &keywords),
        });
    }
    hits.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.file.cmp(&b.file))
            .then_with(|| a.start.cmp(&b.start))
    });
    hits
}
