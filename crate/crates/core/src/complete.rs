//! Context-sensitive completion.
//!
//! The cursor is anchored to a node (the completed leaf just before it,
//! else the deepest node containing it); the nearest tagged ancestor
//! routes the request to that tag's handler. With no tagged ancestor the
//! fallback offers every symbol macro in scope — those of the enclosing
//! module and of files imported before the cursor — plus structural
//! snippets.
//!
//! Macro details come from the index, so callers wanting hover text
//! should index the workspace first; without it, completion still works,
//! just without details.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::handlers::scan;
use crate::index::{ns, Object, TripleStore};
use crate::registry::WorkspaceInfo;
use crate::syntax::{Document, NodeId};
use crate::tag::Tag;
use crate::workspace::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionKind {
    File,
    ModuleId,
    Macro,
    Snippet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompletionItem {
    pub kind: CompletionKind,
    pub label: String,
    pub insert: String,
    pub detail: Option<String>,
}

/// What a handler sees when asked to complete at a tagged anchor.
pub struct CompleteCtx<'a> {
    pub ws: &'a Workspace,
    pub file: &'a str,
    pub doc: &'a Document,
    /// The tagged node the request was routed through.
    pub node: NodeId,
    pub tag: &'a Tag,
    pub offset: usize,
}

/// Completions at a byte offset in a workspace file, filtered by an
/// optional already-typed prefix, deduplicated and sorted.
pub fn complete(
    ws: &Workspace,
    file: &str,
    offset: usize,
    prefix: &str,
) -> Result<Vec<CompletionItem>> {
    let Some(doc) = ws.doc(file) else {
        return Err(Error::Other(format!("`{file}` is not in the workspace")));
    };
    let (containing, preceding) = doc.node_at(offset)?;
    let anchor = if doc.node(containing).is_leaf() {
        containing
    } else {
        match preceding {
            Some(p) if doc.node(p).span.end == offset => p,
            _ => containing,
        }
    };

    let mut items = Vec::new();
    match doc.nearest_tagged(anchor) {
        Some(tagged) => {
            let tags: Vec<Tag> = doc.node(tagged).tags.iter().cloned().collect();
            for tag in &tags {
                let Some(handler) = ws.registry().handler_for_tag(tag) else { continue };
                let ctx = CompleteCtx { ws, file, doc, node: tagged, tag, offset };
                items.extend(handler.autocomplete_tag(&ctx));
            }
        }
        None => items = fallback(ws, file, doc, offset),
    }

    items.retain(|item| item.label.starts_with(prefix));
    let mut seen = BTreeSet::new();
    items.retain(|item| seen.insert((item.kind, item.label.clone())));
    items.sort_by(|a, b| (a.kind, &a.label).cmp(&(b.kind, &b.label)));
    Ok(items)
}

fn macro_insert(name: &str, arity: i64) -> String {
    let mut out = format!("\\{name}");
    for _ in 0..arity {
        out.push_str("{}");
    }
    out
}

/// Definition texts attached to symbols named `name` in the theory,
/// keyed for tie-breaking by `(file, start)`.
fn definition_texts(
    store: &TripleStore,
    theory: &str,
    name: &str,
) -> Vec<((String, i64), String)> {
    store
        .subjects_with(&ns::oo("partOf"), &Object::Iri(theory.to_string()))
        .into_iter()
        .filter(|def| {
            store
                .objects(def, &ns::ide("for"))
                .iter()
                .any(|o| o.as_str() == Some(name))
        })
        .filter_map(|def| {
            let text = store.str_object(def, &ns::ide("text"))?.to_string();
            let file = store.str_object(def, &ns::ide("file")).unwrap_or("").to_string();
            let start = store.int_object(def, &ns::ide("start")).unwrap_or(0);
            Some(((file, start), text))
        })
        .collect()
}

/// Best hover text for a symbol in a theory: the definition closest to
/// the requesting scope — lowest import depth, then file, then offset.
fn best_detail(
    store: &TripleStore,
    theory: &str,
    name: &str,
    depth: usize,
) -> Option<(usize, (String, i64), String)> {
    definition_texts(store, theory, name)
        .into_iter()
        .map(|(key, text)| (depth, key, text))
        .min()
}

fn fallback(ws: &Workspace, file: &str, doc: &Document, offset: usize) -> Vec<CompletionItem> {
    let store = ws.store();
    let mut items = Vec::new();

    // Symbols of the enclosing module declared before the cursor.
    let modules = scan::modules(doc);
    if let Some(module) = scan::enclosing_module(&modules, offset) {
        let theory_id = module.id.clone().unwrap_or_else(|| {
            format!("anonymous:{}:{}", file, doc.node(module.begin).span.start)
        });
        let theory_iri = ws.file_root(file).and_then(|root| {
            store
                .objects(root, &ns::ide("hasModule"))
                .into_iter()
                .filter_map(Object::as_iri)
                .find(|m| store.str_object(m, &ns::rdf("id")) == Some(theory_id.as_str()))
                .map(str::to_string)
        });
        for sym in scan::symbols(doc) {
            if sym.span.start >= offset {
                continue;
            }
            if scan::enclosing_module(&modules, sym.span.start).map(|m| m.begin)
                != Some(module.begin)
            {
                continue;
            }
            let Some(name) = sym.name else { continue };
            let detail = theory_iri
                .as_deref()
                .and_then(|t| best_detail(store, t, &name, 0))
                .map(|(_, _, text)| text);
            items.push(CompletionItem {
                kind: CompletionKind::Macro,
                insert: macro_insert(&name, sym.arity),
                label: name,
                detail,
            });
        }
    }

    // Symbols of every file reachable through imports before the cursor.
    let mut queue: VecDeque<(String, usize)> = scan::imports(doc)
        .into_iter()
        .filter(|imp| imp.span.start < offset)
        .filter_map(|imp| imp.target)
        .filter_map(|t| ws.resolve_import(file, &t))
        .map(|f| (f, 1))
        .collect();
    let mut seen_files = BTreeSet::new();
    while let Some((f, depth)) = queue.pop_front() {
        if !seen_files.insert(f.clone()) {
            continue;
        }
        for next in ws.direct_imports(&f) {
            if !seen_files.contains(&next) {
                queue.push_back((next, depth + 1));
            }
        }
        let Some(root) = ws.file_root(&f) else { continue };
        for theory in store.objects(root, &ns::ide("hasModule")) {
            let Some(theory) = theory.as_iri() else { continue };
            for sym in store.objects(theory, &ns::ide("hasSymbol")) {
                let Some(sym) = sym.as_iri() else { continue };
                let Some(name) = store.str_object(sym, &ns::rdf("id")) else { continue };
                let arity = store.int_object(sym, &ns::ide("arity")).unwrap_or(0);
                let detail = best_detail(store, theory, name, depth).map(|(_, _, text)| text);
                items.push(CompletionItem {
                    kind: CompletionKind::Macro,
                    insert: macro_insert(name, arity),
                    label: name.to_string(),
                    detail,
                });
            }
        }
    }

    for (label, insert) in [
        ("module", "\\begin{module}[id=]\n\n\\end{module}"),
        ("definition", "\\begin{definition}[for=]\n\n\\end{definition}"),
        ("importmodule", "\\importmodule[]{}"),
        ("symdef", "\\symdef{}{}"),
    ] {
        items.push(CompletionItem {
            kind: CompletionKind::Snippet,
            label: label.to_string(),
            insert: insert.to_string(),
            detail: None,
        });
    }
    items
}
