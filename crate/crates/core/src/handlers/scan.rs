//! Structural extractors over parsed documents: module environments,
//! import commands, and symbol declarations, read straight from the tree
//! without any registry involvement. Validation and completion build on
//! these; the index goes through handlers instead.

use crate::span::Span;
use crate::syntax::{Delimiter, Document, NodeId, NodeKind};

#[derive(Clone, Debug)]
pub struct ModuleDecl {
    pub begin: NodeId,
    pub id: Option<String>,
    /// Body region, from after `\begin{module}[…]` to before the
    /// matching `\end` (or the end of the enclosing group).
    pub region: Span,
}

#[derive(Clone, Debug)]
pub struct ImportDecl {
    pub command: NodeId,
    /// Raw bracket-option target, e.g. `../background/sets`.
    pub target: Option<String>,
    /// Brace-option module id, e.g. `sets`.
    pub module_id: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SymbolDecl {
    pub command: NodeId,
    pub name: Option<String>,
    pub arity: i64,
    /// Raw interior of the presentation option, if any.
    pub presentation: Option<String>,
    pub span: Span,
}

/// Module environments in begin order, matched or not.
pub fn modules(doc: &Document) -> Vec<ModuleDecl> {
    doc.env_pairs
        .iter()
        .filter(|p| p.name == "module")
        .map(|p| ModuleDecl {
            begin: p.begin,
            id: doc
                .keyval(p.begin, "id")
                .map(|span| span.slice(doc.source()).to_string()),
            region: doc.env_region(p),
        })
        .collect()
}

/// Innermost module whose region contains the offset (inclusive at both
/// ends, so a cursor right before `\end{module}` still counts).
pub fn enclosing_module<'a>(
    modules: &'a [ModuleDecl],
    offset: usize,
) -> Option<&'a ModuleDecl> {
    modules
        .iter()
        .filter(|m| m.region.start <= offset && offset <= m.region.end)
        .min_by_key(|m| m.region.len())
}

/// `\importmodule` commands in source order.
pub fn imports(doc: &Document) -> Vec<ImportDecl> {
    let mut out = Vec::new();
    for node in doc.descendants() {
        if doc.node(node).kind != NodeKind::Command
            || doc.command_name(node) != Some("importmodule")
        {
            continue;
        }
        let nonempty = |opt: NodeId| {
            let text = doc.option_inner_text(opt).trim().to_string();
            (!text.is_empty()).then_some(text)
        };
        out.push(ImportDecl {
            command: node,
            target: doc.find_option(node, Delimiter::Bracket).and_then(nonempty),
            module_id: doc.find_option(node, Delimiter::Brace).and_then(nonempty),
            span: doc.node(node).span,
        });
    }
    out
}

/// `\symdef` commands in source order. The first brace option is the
/// symbol name, the bracket option its arity, the second brace option
/// its presentation.
pub fn symbols(doc: &Document) -> Vec<SymbolDecl> {
    let mut out = Vec::new();
    for node in doc.descendants() {
        if doc.node(node).kind != NodeKind::Command || doc.command_name(node) != Some("symdef") {
            continue;
        }
        let braces = doc.options_with(node, Delimiter::Brace);
        let name = braces.first().and_then(|&opt| {
            let text = doc.option_inner_text(opt).trim().to_string();
            (!text.is_empty()).then_some(text)
        });
        let arity = doc
            .find_option(node, Delimiter::Bracket)
            .and_then(|opt| doc.option_inner_text(opt).trim().parse::<i64>().ok())
            .unwrap_or(0);
        let presentation = braces.get(1).map(|&opt| doc.option_inner_text(opt).to_string());
        out.push(SymbolDecl {
            command: node,
            name,
            arity,
            presentation,
            span: doc.node(node).span,
        });
    }
    out
}

/// True when the document requests a bibliography.
pub fn has_bibliography(doc: &Document) -> bool {
    doc.descendants().into_iter().any(|node| {
        matches!(
            doc.command_name(node),
            Some("bibliography") | Some("addbibresource")
        )
    })
}
