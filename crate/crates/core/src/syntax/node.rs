//! Syntax tree arena and the [`Document`] produced by parsing.
//!
//! The tree is lossless: every byte of the source is owned either by a node
//! (its own text for leaves, delimiters for options) or by trivia
//! (whitespace and comments) attached to the node that follows it, so
//! [`Document::reconstruct`] reproduces the input exactly. Comments never
//! become tree nodes; they ride along as trivia so that option attachment
//! and sibling span ordering are undisturbed by them.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::diagnostics::Diagnostic;
use crate::span::Span;
use crate::tag::Tag;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub(crate) fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node count fits u32"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Model,
    Word,
    Command,
    Option,
    Comment,
    MathShift,
}

impl NodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeKind::Model => "Model",
            NodeKind::Word => "Word",
            NodeKind::Command => "Command",
            NodeKind::Option => "Option",
            NodeKind::Comment => "Comment",
            NodeKind::MathShift => "MathShift",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Delimiter {
    Brace,
    Bracket,
}

impl Delimiter {
    pub fn open_char(&self) -> char {
        match self {
            Delimiter::Brace => '{',
            Delimiter::Bracket => '[',
        }
    }

    pub fn close_char(&self) -> char {
        match self {
            Delimiter::Brace => '}',
            Delimiter::Bracket => ']',
        }
    }
}

/// Whitespace or comment run preceding a node (or trailing a model).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trivia {
    pub span: Span,
    pub comment: bool,
}

/// Shallow `key=value` view of one comma-separated part of a bracket option.
/// Spans point into the source; values keep their raw text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptEntry {
    pub key: Option<Span>,
    pub value: Span,
}

#[derive(Clone, Debug)]
pub struct NodeData {
    pub kind: NodeKind,
    /// Full extent, including option children for commands and delimiters
    /// for options; never includes leading trivia.
    pub span: Span,
    /// For commands: the `\name` token itself, without options.
    pub token_span: Option<Span>,
    /// For option nodes.
    pub delimiter: Option<Delimiter>,
    /// False only for option nodes whose closing delimiter was missing.
    pub closed: bool,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub tags: BTreeSet<Tag>,
    pub leading: Vec<Trivia>,
    /// Models only: trivia between the last child and the close delimiter
    /// (or end of input).
    pub trailing: Vec<Trivia>,
    /// Bracket options only: shallow key=value entries.
    pub entries: Vec<OptEntry>,
}

impl NodeData {
    pub(crate) fn new(kind: NodeKind, span: Span) -> Self {
        NodeData {
            kind,
            span,
            token_span: None,
            delimiter: None,
            closed: true,
            parent: None,
            children: Vec::new(),
            tags: BTreeSet::new(),
            leading: Vec::new(),
            trailing: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty() && self.kind != NodeKind::Model
    }
}

/// A matched (or half-matched) `\begin`/`\end` pair. `end` is absent when
/// the begin marker stayed unmatched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvPair {
    pub name: String,
    pub begin: NodeId,
    pub end: Option<NodeId>,
}

#[derive(Debug, thiserror::Error)]
pub enum SyntaxError {
    #[error("offset {offset} out of range for document of length {len}")]
    OffsetOutOfRange { offset: usize, len: usize },
    #[error("edit span {span:?} out of range for document of length {len}")]
    EditOutOfRange { span: Span, len: usize },
    #[error("edit span {span:?} does not lie on character boundaries")]
    EditNotCharBoundary { span: Span },
}

/// Parse result: source, tree arena, parse diagnostics, and the
/// environment pairing computed over the tree.
#[derive(Clone, Debug)]
pub struct Document {
    pub(crate) source: String,
    pub(crate) file: Option<String>,
    pub(crate) nodes: Vec<NodeData>,
    pub(crate) root: NodeId,
    pub diagnostics: Vec<Diagnostic>,
    pub env_pairs: Vec<EnvPair>,
    pub env_diagnostics: Vec<Diagnostic>,
    pub(crate) content_hash: [u8; 32],
}

impl Document {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Workspace-relative path this document was loaded from, if any.
    pub fn file(&self) -> Option<&str> {
        self.file.as_deref()
    }

    pub fn set_file(&mut self, file: impl Into<String>) {
        self.file = Some(file.into());
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &NodeData {
        &self.nodes[id.index()]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut NodeData {
        &mut self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Source text covered by the node's span.
    pub fn text(&self, id: NodeId) -> &str {
        self.node(id).span.slice(&self.source)
    }

    /// For commands: the name without the backslash; `\%` has name `%`.
    pub fn command_name(&self, id: NodeId) -> Option<&str> {
        let node = self.node(id);
        let token = node.token_span?;
        Some(&self.source[token.start + 1..token.end])
    }

    /// For commands: the `\name` token text.
    pub fn command_token_text(&self, id: NodeId) -> Option<&str> {
        Some(self.node(id).token_span?.slice(&self.source))
    }

    pub fn content_hash(&self) -> &[u8; 32] {
        &self.content_hash
    }

    /// First 16 hex digits of the content hash; used in node IRIs.
    pub fn content_hash_hex16(&self) -> String {
        self.content_hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub(crate) fn hash_of(source: &str) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(source.as_bytes());
        hasher.finalize().into()
    }

    /// Pre-order traversal of all nodes.
    pub fn descendants(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            for &child in self.node(id).children.iter().rev() {
                stack.push(child);
            }
        }
        out
    }

    /// Leaves (childless non-model nodes) in source order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.descendants()
            .into_iter()
            .filter(|&id| self.node(id).is_leaf())
            .collect()
    }

    /// Deepest node whose span contains `offset`, plus the last leaf ending
    /// at or before `offset` (absent at offset 0 or when no leaf qualifies).
    pub fn node_at(&self, offset: usize) -> Result<(NodeId, Option<NodeId>), SyntaxError> {
        if offset > self.source.len() {
            return Err(SyntaxError::OffsetOutOfRange { offset, len: self.source.len() });
        }
        let mut current = self.root;
        'descend: loop {
            for &child in &self.node(current).children {
                if self.node(child).span.contains(offset) {
                    current = child;
                    continue 'descend;
                }
            }
            break;
        }
        let preceding = self
            .leaves()
            .into_iter()
            .filter(|&id| self.node(id).span.end <= offset)
            .next_back();
        Ok((current, preceding))
    }

    /// Innermost node of the ancestor chain (self included) that carries at
    /// least one tag.
    pub fn nearest_tagged(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = Some(id);
        while let Some(node) = cur {
            if !self.node(node).tags.is_empty() {
                return Some(node);
            }
            cur = self.node(node).parent;
        }
        None
    }

    /// First option child of a command with the given delimiter.
    pub fn find_option(&self, command: NodeId, delimiter: Delimiter) -> Option<NodeId> {
        self.node(command)
            .children
            .iter()
            .copied()
            .find(|&c| self.node(c).delimiter == Some(delimiter))
    }

    /// Option children of a command with the given delimiter, in order.
    pub fn options_with(&self, command: NodeId, delimiter: Delimiter) -> Vec<NodeId> {
        self.node(command)
            .children
            .iter()
            .copied()
            .filter(|&c| self.node(c).delimiter == Some(delimiter))
            .collect()
    }

    /// The single model child of an option node.
    pub fn option_model(&self, option: NodeId) -> Option<NodeId> {
        self.node(option).children.first().copied()
    }

    /// Raw source text of an option's interior (between the delimiters).
    pub fn option_inner_text(&self, option: NodeId) -> &str {
        match self.option_model(option) {
            Some(model) => self.text(model),
            None => "",
        }
    }

    /// Span of an option's interior.
    pub fn option_inner_span(&self, option: NodeId) -> Span {
        match self.option_model(option) {
            Some(model) => self.node(model).span,
            None => Span::empty(self.node(option).span.end),
        }
    }

    /// Environment name of a `\begin`/`\end` command: the trimmed interior
    /// of its first brace option, if present and non-empty.
    pub fn env_name(&self, command: NodeId) -> Option<String> {
        let opt = self.find_option(command, Delimiter::Brace)?;
        let name = self.option_inner_text(opt).trim();
        if name.is_empty() {
            None
        } else {
            Some(name.to_string())
        }
    }

    /// Value span for a `key=` entry of the command's first bracket option.
    pub fn keyval(&self, command: NodeId, key: &str) -> Option<Span> {
        let opt = self.find_option(command, Delimiter::Bracket)?;
        for entry in &self.node(opt).entries {
            if let Some(k) = entry.key {
                if k.slice(&self.source) == key {
                    return Some(entry.value);
                }
            }
        }
        None
    }

    /// Body region of an environment pair: from the end of the begin command
    /// to the start of the end command, clamped to the begin command's
    /// parent model so a pathologically-placed end cannot invert the range.
    pub fn env_region(&self, pair: &EnvPair) -> Span {
        let begin = self.node(pair.begin);
        let start = begin.span.end;
        let parent_end = begin
            .parent
            .map(|p| self.node(p).span.end)
            .unwrap_or(self.source.len());
        let end = match pair.end {
            Some(end_id) => self.node(end_id).span.start.min(parent_end),
            None => parent_end,
        };
        Span::new(start, end.max(start))
    }

    /// Matched pairs only.
    pub fn matched_env_pairs(&self) -> impl Iterator<Item = &EnvPair> {
        self.env_pairs.iter().filter(|p| p.end.is_some())
    }

    /// Innermost matched environment with the given name whose body region
    /// contains `offset`.
    pub fn enclosing_env(&self, name: &str, offset: usize) -> Option<&EnvPair> {
        self.env_pairs
            .iter()
            .filter(|p| p.end.is_some() && p.name == name)
            .filter(|p| {
                let r = self.env_region(p);
                r.start <= offset && offset <= r.end
            })
            .min_by_key(|p| self.env_region(p).len())
    }

    /// Rebuilds the exact source from leaves, delimiters and trivia.
    pub fn reconstruct(&self) -> String {
        let mut out = String::with_capacity(self.source.len());
        self.emit(self.root, &mut out);
        out
    }

    fn emit(&self, id: NodeId, out: &mut String) {
        let node = self.node(id);
        for t in &node.leading {
            out.push_str(t.span.slice(&self.source));
        }
        match node.kind {
            NodeKind::Word | NodeKind::Comment | NodeKind::MathShift => {
                out.push_str(node.span.slice(&self.source));
            }
            NodeKind::Command => {
                out.push_str(node.token_span.expect("command has token").slice(&self.source));
                for &child in &node.children {
                    self.emit(child, out);
                }
            }
            NodeKind::Option => {
                let delim = node.delimiter.expect("option has delimiter");
                out.push(delim.open_char());
                for &child in &node.children {
                    self.emit(child, out);
                }
                if node.closed {
                    out.push(delim.close_char());
                }
            }
            NodeKind::Model => {
                for &child in &node.children {
                    self.emit(child, out);
                }
                for t in &node.trailing {
                    out.push_str(t.span.slice(&self.source));
                }
            }
        }
    }

    /// Structural equality: tree shape, spans, trivia, tags, diagnostics and
    /// environment pairing all agree. Used to state the reparse contract.
    pub fn same_structure(&self, other: &Document) -> bool {
        fn node_eq(a: &Document, an: NodeId, b: &Document, bn: NodeId) -> bool {
            let x = a.node(an);
            let y = b.node(bn);
            x.kind == y.kind
                && x.span == y.span
                && x.token_span == y.token_span
                && x.delimiter == y.delimiter
                && x.closed == y.closed
                && x.tags == y.tags
                && x.leading == y.leading
                && x.trailing == y.trailing
                && x.entries == y.entries
                && x.children.len() == y.children.len()
                && x.children
                    .iter()
                    .zip(&y.children)
                    .all(|(&ca, &cb)| node_eq(a, ca, b, cb))
        }
        let pairs_eq = self.env_pairs.len() == other.env_pairs.len()
            && self.env_pairs.iter().zip(&other.env_pairs).all(|(p, q)| {
                p.name == q.name
                    && self.node(p.begin).span == other.node(q.begin).span
                    && p.end.map(|e| self.node(e).span) == q.end.map(|e| other.node(e).span)
            });
        node_eq(self, self.root, other, other.root)
            && self.diagnostics == other.diagnostics
            && self.env_diagnostics == other.env_diagnostics
            && pairs_eq
    }

    /// JSON view of the tree: `{kind, name?, text?, span, tags, children}`.
    pub fn to_json(&self) -> Value {
        self.node_json(self.root)
    }

    fn node_json(&self, id: NodeId) -> Value {
        let node = self.node(id);
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), json!(node.kind.as_str()));
        if let Some(name) = self.command_name(id) {
            obj.insert("name".into(), json!(name));
        }
        match node.kind {
            NodeKind::Word | NodeKind::Comment | NodeKind::MathShift => {
                obj.insert("text".into(), json!(self.text(id)));
            }
            NodeKind::Command => {
                obj.insert("text".into(), json!(self.command_token_text(id)));
            }
            _ => {}
        }
        obj.insert("span".into(), json!({"start": node.span.start, "end": node.span.end}));
        obj.insert(
            "tags".into(),
            Value::Array(node.tags.iter().map(|t| json!(t.as_str())).collect()),
        );
        obj.insert(
            "children".into(),
            Value::Array(node.children.iter().map(|&c| self.node_json(c)).collect()),
        );
        Value::Object(obj)
    }
}

/// Splits a bracket option interior into shallow `key=value` entries.
///
/// Commas at brace depth zero separate entries; the first `=` at depth zero
/// splits key from value; both sides are whitespace-trimmed. Parts without
/// `=` become positional entries (key absent). Empty parts are dropped.
pub fn scan_entries(source: &str, interior: Span) -> Vec<OptEntry> {
    let text = interior.slice(source);
    let base = interior.start;
    let mut entries = Vec::new();
    let mut depth = 0i32;
    let mut part_start = 0;
    let mut parts = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push((part_start, i));
                part_start = i + 1;
            }
            _ => {}
        }
    }
    parts.push((part_start, text.len()));
    for (start, end) in parts {
        let part = &text[start..end];
        let trimmed_start = start + (part.len() - part.trim_start().len());
        let trimmed_end = end - (part.len() - part.trim_end().len());
        if trimmed_start >= trimmed_end {
            continue;
        }
        let part_text = &text[trimmed_start..trimmed_end];
        let mut eq_at = None;
        let mut depth = 0i32;
        for (i, c) in part_text.char_indices() {
            match c {
                '{' => depth += 1,
                '}' => depth -= 1,
                '=' if depth == 0 => {
                    eq_at = Some(i);
                    break;
                }
                _ => {}
            }
        }
        match eq_at {
            Some(eq) => {
                let key_text = part_text[..eq].trim_end();
                let val_text = part_text[eq + 1..].trim_start();
                let key_start = trimmed_start;
                let val_start = trimmed_end - val_text.len();
                entries.push(OptEntry {
                    key: Some(Span::new(base + key_start, base + key_start + key_text.len())),
                    value: Span::new(base + val_start, base + trimmed_end),
                });
            }
            None => {
                entries.push(OptEntry {
                    key: None,
                    value: Span::new(base + trimmed_start, base + trimmed_end),
                });
            }
        }
    }
    entries
}
