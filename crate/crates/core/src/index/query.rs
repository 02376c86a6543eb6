//! Conjunctive queries over the triple store.
//!
//! A query is a whitespace-separated sequence of triple patterns, three
//! terms each, optionally separated by free-standing `.` tokens:
//!
//! ```text
//! ?m rdf:type oo:Theory . ?m rdf:id ?id
//! ```
//!
//! Terms are variables (`?name`), full IRIs (`<…>`), prefixed names
//! (`rdf:`, `IDE:`, `oo:`), string literals (`"…"`), integers, or the
//! bare `a` shorthand for `rdf:type`. Results are the distinct variable
//! bindings satisfying every pattern, in sorted order.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::index::ns;
use crate::index::store::{Object, TripleStore};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Iri(String),
    Str(String),
    Int(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

pub type Binding = BTreeMap<String, Object>;

fn expand_prefixed(token: &str) -> Result<Term> {
    let Some((prefix, name)) = token.split_once(':') else {
        return Err(Error::Query(format!(
            "`{token}` is not a variable, IRI, prefixed name, or literal"
        )));
    };
    for (known, base) in ns::PREFIXES {
        if *known == prefix {
            return Ok(Term::Iri(format!("{base}{name}")));
        }
    }
    Err(Error::UnknownPrefix(prefix.to_string()))
}

fn lex(text: &str) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '.' && rest[1..].chars().next().map_or(true, |n| n.is_whitespace()) {
            // Statement separator; patterns are groups of three anyway.
            i += 1;
            continue;
        }
        let token_len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        match c {
            '?' => {
                let name = &rest[1..token_len];
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(Error::Query(format!("bad variable `{}`", &rest[..token_len])));
                }
                terms.push(Term::Var(name.to_string()));
                i += token_len;
            }
            '<' => {
                let Some(close) = rest.find('>') else {
                    return Err(Error::Query("unterminated IRI".into()));
                };
                terms.push(Term::Iri(rest[1..close].to_string()));
                i += close + 1;
            }
            '"' => {
                let mut j = 1;
                let rb = rest.as_bytes();
                loop {
                    if j >= rb.len() {
                        return Err(Error::Query("unterminated string literal".into()));
                    }
                    match rb[j] {
                        b'\\' => j += 2,
                        b'"' => break,
                        _ => j += 1,
                    }
                }
                let body = &rest[1..j];
                let unescaped = body
                    .replace("\\\"", "\"")
                    .replace("\\n", "\n")
                    .replace("\\t", "\t")
                    .replace("\\\\", "\\");
                terms.push(Term::Str(unescaped));
                i += j + 1;
            }
            c if c == '-' || c.is_ascii_digit() => {
                let token = &rest[..token_len];
                let value: i64 = token
                    .parse()
                    .map_err(|_| Error::Query(format!("bad integer `{token}`")))?;
                terms.push(Term::Int(value));
                i += token_len;
            }
            _ => {
                let token = &rest[..token_len];
                if token == "a" {
                    terms.push(Term::Iri(ns::rdf_type()));
                } else {
                    terms.push(expand_prefixed(token)?);
                }
                i += token_len;
            }
        }
    }
    Ok(terms)
}

pub fn parse_query(text: &str) -> Result<Vec<Pattern>> {
    let terms = lex(text)?;
    if terms.len() % 3 != 0 {
        return Err(Error::Query(format!(
            "expected triple patterns (groups of three terms), got {} terms",
            terms.len()
        )));
    }
    let mut patterns = Vec::new();
    let mut it = terms.into_iter();
    while let (Some(s), Some(p), Some(o)) = (it.next(), it.next(), it.next()) {
        if matches!(s, Term::Str(_) | Term::Int(_)) {
            return Err(Error::Query("literals cannot appear as subjects".into()));
        }
        if matches!(p, Term::Str(_) | Term::Int(_)) {
            return Err(Error::Query("literals cannot appear as predicates".into()));
        }
        patterns.push(Pattern { s, p, o });
    }
    Ok(patterns)
}

/// Resolves an IRI-position term against a row: a constant to match, a
/// variable name to capture, or `None` when the row already binds the
/// variable to a non-IRI (which nothing in that position can match).
fn resolve_iri_slot<'t>(row: &Binding, term: &'t Term) -> Option<(Option<String>, Option<&'t str>)> {
    match term {
        Term::Iri(iri) => Some((Some(iri.clone()), None)),
        Term::Var(name) => match row.get(name) {
            Some(Object::Iri(iri)) => Some((Some(iri.clone()), None)),
            Some(_) => None,
            None => Some((None, Some(name.as_str()))),
        },
        _ => unreachable!("checked at parse time"),
    }
}

fn bind(binding: &mut Binding, var: Option<&str>, value: Object) -> bool {
    match var {
        None => true,
        Some(name) => match binding.get(name) {
            Some(existing) => *existing == value,
            None => {
                binding.insert(name.to_string(), value);
                true
            }
        },
    }
}

/// Evaluates patterns left to right, extending bindings against the
/// store. The empty query has exactly one solution: the empty binding.
pub fn solve(store: &TripleStore, patterns: &[Pattern]) -> Vec<Binding> {
    let mut rows: Vec<Binding> = vec![Binding::new()];
    for pattern in patterns {
        let mut next: BTreeSet<Binding> = BTreeSet::new();
        for row in &rows {
            // A term is either a constant to match on or a variable to
            // capture; a variable already bound to an incompatible kind
            // (a literal in subject position) kills the row.
            let (Some((s_const, s_var)), Some((p_const, p_var))) =
                (resolve_iri_slot(row, &pattern.s), resolve_iri_slot(row, &pattern.p))
            else {
                continue;
            };
            let (o_const, o_var): (Option<Object>, Option<&str>) = match &pattern.o {
                Term::Iri(iri) => (Some(Object::Iri(iri.clone())), None),
                Term::Str(s) => (Some(Object::Str(s.clone())), None),
                Term::Int(i) => (Some(Object::Int(*i)), None),
                Term::Var(name) => match row.get(name) {
                    Some(obj) => (Some(obj.clone()), None),
                    None => (None, Some(name.as_str())),
                },
            };
            for triple in store.matching(s_const.as_deref(), p_const.as_deref(), o_const.as_ref())
            {
                let mut extended = row.clone();
                if bind(&mut extended, s_var, Object::Iri(triple.s.clone()))
                    && bind(&mut extended, p_var, Object::Iri(triple.p.clone()))
                    && bind(&mut extended, o_var, triple.o.clone())
                {
                    next.insert(extended);
                }
            }
        }
        rows = next.into_iter().collect();
        if rows.is_empty() {
            break;
        }
    }
    rows
}

/// Parses and evaluates in one step.
pub fn query(store: &TripleStore, text: &str) -> Result<Vec<Binding>> {
    Ok(solve(store, &parse_query(text)?))
}
