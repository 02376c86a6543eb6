//! Total, recovering parser: any byte sequence yields a tree plus
//! diagnostics, and the tree reproduces the input exactly.
//!
//! Recovery rules:
//! - `{`/`[` after a command (across whitespace and comments) open options;
//! - `{` anywhere else opens an anonymous group (info diagnostic);
//! - `[` anywhere else is plain text;
//! - unmatched closers become words (`}` warning, `]` info);
//! - a group left open at end of input keeps everything parsed so far and
//!   reports an error at its opening delimiter.

use crate::diagnostics::{codes, Diagnostic};
use crate::span::Span;
use crate::syntax::env::match_environments;
use crate::syntax::node::{
    scan_entries, Delimiter, Document, NodeData, NodeId, NodeKind, SyntaxError, Trivia,
};
use crate::syntax::token::{tokenize, Token, TokenKind};

/// A text replacement: `span` in the old source is replaced by `text`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edit {
    pub span: Span,
    pub text: String,
}

impl Edit {
    pub fn new(span: Span, text: impl Into<String>) -> Self {
        Edit { span, text: text.into() }
    }
}

pub fn parse(source: &str) -> Document {
    Parser::new(source).run(None)
}

pub fn parse_with_file(source: &str, file: impl Into<String>) -> Document {
    Parser::new(source).run(Some(file.into()))
}

/// Applies the edit and parses the result. The new document is
/// indistinguishable from parsing the edited source from scratch.
pub fn reparse(doc: &Document, edit: &Edit) -> Result<Document, SyntaxError> {
    let source = doc.source();
    if edit.span.end > source.len() {
        return Err(SyntaxError::EditOutOfRange { span: edit.span, len: source.len() });
    }
    if !source.is_char_boundary(edit.span.start) || !source.is_char_boundary(edit.span.end) {
        return Err(SyntaxError::EditNotCharBoundary { span: edit.span });
    }
    let mut next = String::with_capacity(source.len() + edit.text.len());
    next.push_str(&source[..edit.span.start]);
    next.push_str(&edit.text);
    next.push_str(&source[edit.span.end..]);
    Ok(Parser::new(&next).run(doc.file().map(str::to_string)))
}

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    nodes: Vec<NodeData>,
    pending: Vec<Trivia>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn new(source: &'a str) -> Self {
        Parser {
            source,
            tokens: tokenize(source),
            pos: 0,
            nodes: Vec::new(),
            pending: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    fn run(mut self, file: Option<String>) -> Document {
        let root = self.new_node(NodeKind::Model, Span::new(0, self.source.len()));
        self.parse_model(root, None);
        self.diagnostics.sort_by(Diagnostic::sort_key_cmp);
        let mut doc = Document {
            source: self.source.to_string(),
            file,
            nodes: self.nodes,
            root,
            diagnostics: self.diagnostics,
            env_pairs: Vec::new(),
            env_diagnostics: Vec::new(),
            content_hash: Document::hash_of(self.source),
        };
        let (pairs, env_diags) = match_environments(&doc);
        doc.env_pairs = pairs;
        doc.env_diagnostics = env_diags;
        doc
    }

    fn new_node(&mut self, kind: NodeKind, span: Span) -> NodeId {
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(NodeData::new(kind, span));
        id
    }

    fn attach(&mut self, parent: NodeId, child: NodeId) {
        self.nodes[child.index()].parent = Some(parent);
        self.nodes[parent.index()].children.push(child);
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos];
        self.pos += 1;
        token
    }

    /// Creates a leaf and gives it the buffered leading trivia.
    fn leaf(&mut self, parent: NodeId, kind: NodeKind, span: Span) -> NodeId {
        let id = self.new_node(kind, span);
        self.nodes[id.index()].leading = std::mem::take(&mut self.pending);
        self.attach(parent, id);
        id
    }

    fn buffer_trivia(&mut self, token: Token) {
        self.pending.push(Trivia {
            span: token.span,
            comment: token.kind == TokenKind::Comment,
        });
    }

    /// Fills `model` with content until the matching closer or end of
    /// input. The closing token itself is left for the caller.
    fn parse_model(&mut self, model: NodeId, closer: Option<Delimiter>) {
        loop {
            let Some(&token) = self.peek() else { break };
            match token.kind {
                TokenKind::Whitespace | TokenKind::Comment => {
                    self.bump();
                    self.buffer_trivia(token);
                }
                TokenKind::Word => {
                    self.bump();
                    self.leaf(model, NodeKind::Word, token.span);
                }
                TokenKind::MathShift => {
                    self.bump();
                    self.leaf(model, NodeKind::MathShift, token.span);
                }
                TokenKind::Command => {
                    self.bump();
                    self.parse_command(model, token);
                }
                TokenKind::OpenBrace => {
                    self.bump();
                    self.diagnostics.push(Diagnostic::info(
                        codes::ORPHAN_GROUP,
                        "group does not belong to a command",
                        token.span,
                    ));
                    let leading = std::mem::take(&mut self.pending);
                    let option = self.parse_option(token, Delimiter::Brace);
                    self.nodes[option.index()].leading = leading;
                    self.attach(model, option);
                }
                TokenKind::OpenBracket => {
                    self.bump();
                    self.leaf(model, NodeKind::Word, token.span);
                }
                TokenKind::CloseBrace => {
                    if closer == Some(Delimiter::Brace) {
                        break;
                    }
                    self.bump();
                    self.diagnostics.push(Diagnostic::warning(
                        codes::STRAY_CLOSE_BRACE,
                        "closing brace without matching open",
                        token.span,
                    ));
                    self.leaf(model, NodeKind::Word, token.span);
                }
                TokenKind::CloseBracket => {
                    if closer == Some(Delimiter::Bracket) {
                        break;
                    }
                    self.bump();
                    self.diagnostics.push(Diagnostic::info(
                        codes::STRAY_CLOSE_BRACKET,
                        "closing bracket without matching open",
                        token.span,
                    ));
                    self.leaf(model, NodeKind::Word, token.span);
                }
            }
        }
        self.nodes[model.index()].trailing = std::mem::take(&mut self.pending);
    }

    /// Parses a command token plus any options bound to it. Whitespace and
    /// comments between the command and an opening delimiter (or between
    /// options) do not break the binding; they become the option's leading
    /// trivia.
    fn parse_command(&mut self, parent: NodeId, token: Token) {
        let command = self.new_node(NodeKind::Command, token.span);
        self.nodes[command.index()].token_span = Some(token.span);
        self.nodes[command.index()].leading = std::mem::take(&mut self.pending);
        self.attach(parent, command);

        loop {
            let mut skipped = Vec::new();
            let mut lookahead = self.pos;
            while let Some(t) = self.tokens.get(lookahead) {
                match t.kind {
                    TokenKind::Whitespace | TokenKind::Comment => {
                        skipped.push(Trivia {
                            span: t.span,
                            comment: t.kind == TokenKind::Comment,
                        });
                        lookahead += 1;
                    }
                    _ => break,
                }
            }
            let delimiter = match self.tokens.get(lookahead).map(|t| t.kind) {
                Some(TokenKind::OpenBrace) => Delimiter::Brace,
                Some(TokenKind::OpenBracket) => Delimiter::Bracket,
                _ => {
                    // No option follows: the trivia belongs to whatever
                    // comes next at the model level.
                    self.pending.extend(skipped);
                    self.pos = lookahead;
                    break;
                }
            };
            self.pos = lookahead;
            let open = self.bump();
            let option = self.parse_option(open, delimiter);
            self.nodes[option.index()].leading = skipped;
            self.attach(command, option);
        }

        let end = self.nodes[command.index()]
            .children
            .last()
            .map(|c| self.nodes[c.index()].span.end)
            .unwrap_or(token.span.end);
        self.nodes[command.index()].span = Span::new(token.span.start, end);
    }

    /// Parses `{model}` or `[model]` starting after the consumed opener.
    fn parse_option(&mut self, open: Token, delimiter: Delimiter) -> NodeId {
        let option = self.new_node(NodeKind::Option, open.span);
        self.nodes[option.index()].delimiter = Some(delimiter);
        let model = self.new_node(NodeKind::Model, Span::empty(open.span.end));
        self.parse_model(model, Some(delimiter));
        let (model_end, option_end, closed) = match self.peek() {
            Some(&close) => {
                self.bump();
                (close.span.start, close.span.end, true)
            }
            None => (self.source.len(), self.source.len(), false),
        };
        if !closed {
            self.diagnostics.push(Diagnostic::error(
                codes::UNCLOSED_GROUP,
                "group opened here is never closed",
                open.span,
            ));
        }
        self.nodes[model.index()].span = Span::new(open.span.end, model_end);
        self.nodes[option.index()].span = Span::new(open.span.start, option_end);
        self.nodes[option.index()].closed = closed;
        self.attach(option, model);
        if delimiter == Delimiter::Bracket {
            let interior = self.nodes[model.index()].span;
            self.nodes[option.index()].entries = scan_entries(self.source, interior);
        }
        option
    }
}
