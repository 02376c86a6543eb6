//! Lexer for TeX-like input.
//!
//! The lexer is total: any Unicode string tokenizes, and the produced tokens
//! partition the input exactly (concatenating token texts reproduces the
//! source byte for byte).
//!
//! Rules:
//! * `%` starts a comment running to (but not including) the end of line,
//!   unless the `%` was consumed by a preceding backslash escape.
//! * `\` followed by a letter run is a command token of maximal length;
//!   `\` followed by any other character is a one-symbol command token.
//! * `\[`, `\]` and `$` are math-shift tokens.
//! * `{ } [ ]` are punctuation tokens.
//! * A word is a maximal run of characters excluding whitespace and
//!   `\ { } [ ] % $`.

use crate::span::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Command,
    Comment,
    MathShift,
    Whitespace,
    OpenBrace,
    CloseBrace,
    OpenBracket,
    CloseBracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        self.span.slice(source)
    }
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '\\' | '{' | '}' | '[' | ']' | '%' | '$')
}

/// Tokenizes `source` completely. Never fails.
pub fn tokenize(source: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut i = 0;
    let n = source.len();
    while i < n {
        let c = source[i..].chars().next().expect("offset on char boundary");
        let start = i;
        let kind = match c {
            '%' => {
                i += 1;
                while i < n {
                    let ch = source[i..].chars().next().unwrap();
                    if ch == '\n' || ch == '\r' {
                        break;
                    }
                    i += ch.len_utf8();
                }
                TokenKind::Comment
            }
            '\\' => {
                i += 1;
                match source[i..].chars().next() {
                    None => TokenKind::Command,
                    Some('[') | Some(']') => {
                        i += 1;
                        TokenKind::MathShift
                    }
                    Some(ch) if ch.is_alphabetic() => {
                        while i < n {
                            let ch = source[i..].chars().next().unwrap();
                            if !ch.is_alphabetic() {
                                break;
                            }
                            i += ch.len_utf8();
                        }
                        TokenKind::Command
                    }
                    Some(ch) => {
                        i += ch.len_utf8();
                        TokenKind::Command
                    }
                }
            }
            '$' => {
                i += 1;
                TokenKind::MathShift
            }
            '{' => {
                i += 1;
                TokenKind::OpenBrace
            }
            '}' => {
                i += 1;
                TokenKind::CloseBrace
            }
            '[' => {
                i += 1;
                TokenKind::OpenBracket
            }
            ']' => {
                i += 1;
                TokenKind::CloseBracket
            }
            c if c.is_whitespace() => {
                while i < n {
                    let ch = source[i..].chars().next().unwrap();
                    if !ch.is_whitespace() {
                        break;
                    }
                    i += ch.len_utf8();
                }
                TokenKind::Whitespace
            }
            _ => {
                while i < n {
                    let ch = source[i..].chars().next().unwrap();
                    if !is_word_char(ch) {
                        break;
                    }
                    i += ch.len_utf8();
                }
                TokenKind::Word
            }
        };
        tokens.push(Token { kind, span: Span::new(start, i) });
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds_and_texts(source: &str) -> Vec<(TokenKind, String)> {
        tokenize(source)
            .iter()
            .map(|t| (t.kind, t.text(source).to_string()))
            .collect()
    }

    /// Independent reference scanner for comment regions: walks characters
    /// with an explicit escape state instead of the token loop.
    fn reference_comment_regions(source: &str) -> Vec<Span> {
        let mut regions = Vec::new();
        let mut chars = source.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    // The escape consumes the next char (or a letter run).
                    if let Some(&(_, next)) = chars.peek() {
                        if next.is_alphabetic() {
                            while chars.peek().is_some_and(|&(_, ch)| ch.is_alphabetic()) {
                                chars.next();
                            }
                        } else {
                            chars.next();
                        }
                    }
                }
                '%' => {
                    let mut end = source.len();
                    for (j, ch) in source[i..].char_indices().skip(1) {
                        if ch == '\n' || ch == '\r' {
                            end = i + j;
                            break;
                        }
                    }
                    regions.push(Span::new(i, end));
                    while chars.peek().is_some_and(|&(j, _)| j < end) {
                        chars.next();
                    }
                }
                _ => {}
            }
        }
        regions
    }

    #[test]
    fn escaped_percent_is_a_command() {
        assert_eq!(
            kinds_and_texts("a \\% b % c"),
            vec![
                (Word, "a".into()),
                (Whitespace, " ".into()),
                (Command, "\\%".into()),
                (Whitespace, " ".into()),
                (Word, "b".into()),
                (Whitespace, " ".into()),
                (Comment, "% c".into()),
            ]
        );
    }

    #[test]
    fn command_with_options_tokenizes_punctuation() {
        assert_eq!(
            kinds_and_texts("\\importmodule[x]{y}"),
            vec![
                (Command, "\\importmodule".into()),
                (OpenBracket, "[".into()),
                (Word, "x".into()),
                (CloseBracket, "]".into()),
                (OpenBrace, "{".into()),
                (Word, "y".into()),
                (CloseBrace, "}".into()),
            ]
        );
    }

    #[test]
    fn math_shift_tokens() {
        assert_eq!(
            kinds_and_texts("$x$ \\[y\\]"),
            vec![
                (MathShift, "$".into()),
                (Word, "x".into()),
                (MathShift, "$".into()),
                (Whitespace, " ".into()),
                (MathShift, "\\[".into()),
                (Word, "y".into()),
                (MathShift, "\\]".into()),
            ]
        );
    }

    #[test]
    fn double_backslash_then_comment() {
        assert_eq!(
            kinds_and_texts("\\\\%"),
            vec![(Command, "\\\\".into()), (Comment, "%".into())]
        );
    }

    #[test]
    fn comment_stops_before_newline() {
        assert_eq!(
            kinds_and_texts("% a\nb"),
            vec![
                (Comment, "% a".into()),
                (Whitespace, "\n".into()),
                (Word, "b".into()),
            ]
        );
        assert_eq!(
            kinds_and_texts("%x\r\ny"),
            vec![
                (Comment, "%x".into()),
                (Whitespace, "\r\n".into()),
                (Word, "y".into()),
            ]
        );
    }

    #[test]
    fn lone_backslash_at_eof() {
        assert_eq!(kinds_and_texts("\\"), vec![(Command, "\\".into())]);
    }

    #[test]
    fn control_space() {
        assert_eq!(
            kinds_and_texts("\\ x"),
            vec![(Command, "\\ ".into()), (Word, "x".into())]
        );
    }

    #[test]
    fn unicode_words_and_commands() {
        assert_eq!(
            kinds_and_texts("größer \\größer #1>#2"),
            vec![
                (Word, "größer".into()),
                (Whitespace, " ".into()),
                (Command, "\\größer".into()),
                (Whitespace, " ".into()),
                (Word, "#1>#2".into()),
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokens_partition_input() {
        let samples = [
            "",
            "a \\% b % c",
            "\\begin{module}[id=reals]\n  \\importmodule[../background/sets]{sets}\n\\end{module}\n",
            "%only a comment",
            "\\",
            "} ] { [",
            "x%\ny",
            "tab\tand \u{a0}nbsp",
        ];
        for sample in samples {
            let tokens = tokenize(sample);
            let mut rebuilt = String::new();
            let mut prev_end = 0;
            for t in &tokens {
                assert_eq!(t.span.start, prev_end, "gap before token in {sample:?}");
                rebuilt.push_str(t.text(sample));
                prev_end = t.span.end;
            }
            assert_eq!(prev_end, sample.len(), "tokens stop short in {sample:?}");
            assert_eq!(rebuilt, sample);
        }
    }

    #[test]
    fn comment_regions_match_reference_scanner() {
        let samples = [
            "a \\% b % c",
            "% full line\nnext % tail",
            "\\\\% after double backslash",
            "\\a%b",
            "mixed \\%% first real\n\\% %second",
            "nothing here",
            "%",
            "x\\",
        ];
        for sample in samples {
            let from_tokens: Vec<Span> = tokenize(sample)
                .iter()
                .filter(|t| t.kind == Comment)
                .map(|t| t.span)
                .collect();
            assert_eq!(
                from_tokens,
                reference_comment_regions(sample),
                "comment regions diverge on {sample:?}"
            );
        }
    }
}
