//! N-Triples export and a strict parser for the subset we emit.

use crate::error::{Error, Result};
use crate::index::ns::XSD_INTEGER;
use crate::index::store::{Object, Triple};

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn unescape(text: &str) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('"') => out.push('"'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('u') => out.push(read_codepoint(&mut chars, 4)?),
            Some('U') => out.push(read_codepoint(&mut chars, 8)?),
            other => {
                return Err(Error::Triples(format!("bad escape \\{}", other.unwrap_or(' '))))
            }
        }
    }
    Ok(out)
}

fn read_codepoint(chars: &mut std::str::Chars, digits: usize) -> Result<char> {
    let hex: String = chars.take(digits).collect();
    if hex.len() != digits {
        return Err(Error::Triples("truncated \\u escape".into()));
    }
    let value = u32::from_str_radix(&hex, 16)
        .map_err(|_| Error::Triples(format!("bad \\u escape {hex}")))?;
    char::from_u32(value).ok_or_else(|| Error::Triples(format!("invalid codepoint {value:#x}")))
}

fn write_object(out: &mut String, o: &Object) {
    match o {
        Object::Iri(iri) => {
            out.push('<');
            out.push_str(iri);
            out.push('>');
        }
        Object::Str(s) => {
            out.push('"');
            out.push_str(&escape(s));
            out.push('"');
        }
        Object::Int(i) => {
            out.push('"');
            out.push_str(&i.to_string());
            out.push_str("\"^^<");
            out.push_str(XSD_INTEGER);
            out.push('>');
        }
    }
}

/// Serializes triples in their given order, one statement per line.
pub fn export<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        out.push('<');
        out.push_str(&t.s);
        out.push_str("> <");
        out.push_str(&t.p);
        out.push_str("> ");
        write_object(&mut out, &t.o);
        out.push_str(" .\n");
    }
    out
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(Error::Triples(format!("expected `{c}` in: {}", self.text)))
        }
    }

    fn until(&mut self, stop: char) -> Result<&'a str> {
        let rest = &self.text[self.pos..];
        match rest.find(stop) {
            Some(i) => {
                let found = &rest[..i];
                self.pos += i + stop.len_utf8();
                Ok(found)
            }
            None => Err(Error::Triples(format!("unterminated term in: {}", self.text))),
        }
    }

    /// Literal body up to the closing unescaped quote.
    fn string_body(&mut self) -> Result<&'a str> {
        let rest = &self.text[self.pos..];
        let bytes = rest.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'\\' => i += 2,
                b'"' => {
                    let body = &rest[..i];
                    self.pos += i + 1;
                    return Ok(body);
                }
                _ => i += 1,
            }
        }
        Err(Error::Triples(format!("unterminated literal in: {}", self.text)))
    }
}

/// Parses the N-Triples subset produced by [`export`]: IRIs, plain string
/// literals, and `xsd:integer` literals. Blank lines and `#` comments are
/// skipped.
pub fn parse(text: &str) -> Result<Vec<Triple>> {
    let mut triples = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cur = Cursor { text: trimmed, pos: 0 };
        cur.expect('<')?;
        let s = cur.until('>')?.to_string();
        cur.skip_ws();
        cur.expect('<')?;
        let p = cur.until('>')?.to_string();
        cur.skip_ws();
        let o = if trimmed[cur.pos..].starts_with('<') {
            cur.expect('<')?;
            Object::Iri(cur.until('>')?.to_string())
        } else {
            cur.expect('"')?;
            let body = cur.string_body()?;
            if trimmed[cur.pos..].starts_with("^^<") {
                cur.pos += 3;
                let dtype = cur.until('>')?;
                if dtype != XSD_INTEGER {
                    return Err(Error::Triples(format!("unsupported datatype {dtype}")));
                }
                let value: i64 = unescape(body)?
                    .parse()
                    .map_err(|_| Error::Triples(format!("bad integer literal {body}")))?;
                Object::Int(value)
            } else {
                Object::Str(unescape(body)?)
            }
        };
        cur.skip_ws();
        cur.expect('.')?;
        if !trimmed[cur.pos..].trim().is_empty() {
            return Err(Error::Triples(format!("trailing content in: {trimmed}")));
        }
        triples.push(Triple { s, p, o });
    }
    Ok(triples)
}
