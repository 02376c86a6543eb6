//! `\importmodule[path]{module}`: brings another module's symbols into
//! scope. The bracket option names a file relative to the importing
//! document (without extension), the brace option a module id inside it.

use std::collections::{BTreeSet, VecDeque};

use crate::complete::{CompleteCtx, CompletionItem, CompletionKind};
use crate::diagnostics::{codes, Diagnostic};
use crate::handlers::scan;
use crate::index::{ns, IndexSink};
use crate::registry::{CategoryDecl, Handler, TagSink, ValidateCtx, WorkspaceInfo,
    COMMAND_CATEGORY, COMMAND_CATEGORY_LABEL};
use crate::syntax::{Delimiter, Document, NodeId, NodeKind};
use crate::tag::Tag;

pub const IMPORT_COMMAND_TAG: &str = "kwarc.info.mkmide.latex.importmodule.commandtag";
pub const IMPORT_FILE_TAG: &str = "kwarc.info.mkmide.latex.importmodule.filetag";
pub const IMPORT_SYMBOL_TAG: &str = "kwarc.info.mkmide.latex.importmodule.symboltag";

pub const EXTERNAL_REF_CATEGORY: &str = "kwarc.info.mkmide.latex.syntaxhighlighting.externalRef";

pub struct ImportModuleHandler;

/// Transitive import closure of the seed files (the seeds included).
fn closure(ws: &dyn WorkspaceInfo, seeds: impl IntoIterator<Item = String>) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<String> = seeds.into_iter().collect();
    while let Some(file) = queue.pop_front() {
        if !seen.insert(file.clone()) {
            continue;
        }
        for next in ws.direct_imports(&file) {
            if !seen.contains(&next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// The file an import's brace option refers to: the sibling bracket
/// target if present, the importing file itself otherwise.
fn id_target(doc: &Document, option: NodeId, ws: &dyn WorkspaceInfo, file: &str) -> Option<String> {
    let command = doc.node(option).parent?;
    match doc.find_option(command, Delimiter::Bracket) {
        None => Some(file.to_string()),
        Some(bracket) => {
            let target = doc.option_inner_text(bracket).trim();
            if target.is_empty() {
                Some(file.to_string())
            } else {
                ws.resolve_import(file, target)
            }
        }
    }
}

impl Handler for ImportModuleHandler {
    fn id(&self) -> &str {
        "importmodule"
    }

    fn commands(&self) -> Vec<String> {
        vec!["importmodule".to_string()]
    }

    fn tags(&self) -> Vec<Tag> {
        vec![
            Tag::new(IMPORT_COMMAND_TAG),
            Tag::new(IMPORT_FILE_TAG),
            Tag::new(IMPORT_SYMBOL_TAG),
        ]
    }

    fn highlight_categories(&self) -> Vec<CategoryDecl> {
        vec![
            CategoryDecl {
                id: COMMAND_CATEGORY.to_string(),
                label: COMMAND_CATEGORY_LABEL.to_string(),
            },
            CategoryDecl {
                id: EXTERNAL_REF_CATEGORY.to_string(),
                label: "External references".to_string(),
            },
        ]
    }

    fn syntax_color_uri(&self, tag: &Tag) -> Option<String> {
        match tag.as_str() {
            IMPORT_COMMAND_TAG => Some(COMMAND_CATEGORY.to_string()),
            IMPORT_FILE_TAG | IMPORT_SYMBOL_TAG => Some(EXTERNAL_REF_CATEGORY.to_string()),
            _ => None,
        }
    }

    /// Tags the command, each option node, and the options' words. The
    /// option nodes themselves carry tags so a cursor inside an empty
    /// `{}` still finds its way to this handler.
    fn add_node_tags(&self, doc: &Document, node: NodeId, sink: &mut TagSink) {
        sink.add(node, IMPORT_COMMAND_TAG);
        for (delimiter, tag) in [
            (Delimiter::Bracket, IMPORT_FILE_TAG),
            (Delimiter::Brace, IMPORT_SYMBOL_TAG),
        ] {
            if let Some(opt) = doc.find_option(node, delimiter) {
                sink.add(opt, tag);
                if let Some(model) = doc.option_model(opt) {
                    for &word in &doc.node(model).children {
                        if doc.node(word).kind == NodeKind::Word {
                            sink.add(word, tag);
                        }
                    }
                }
            }
        }
    }

    fn index(&self, doc: &Document, node: NodeId, tag: &Tag, sink: &mut IndexSink) -> bool {
        let kind = doc.node(node).kind;
        match tag.as_str() {
            IMPORT_COMMAND_TAG if kind == NodeKind::Command => {
                sink.add_iri(ns::rdf_type(), ns::ide("importModuleCommand"));
                true
            }
            IMPORT_FILE_TAG | IMPORT_SYMBOL_TAG if kind == NodeKind::Option => {
                let value = doc.option_inner_text(node).trim();
                if value.is_empty() {
                    return false;
                }
                let prop = if tag.as_str() == IMPORT_FILE_TAG { "file" } else { "moduleId" };
                if let Some(frame) = sink.nearest_frame_with_tag(&Tag::new(IMPORT_COMMAND_TAG)) {
                    sink.add_string_on(frame, ns::ide(prop), value);
                }
                false
            }
            _ => false,
        }
    }

    fn validate(&self, ctx: &mut ValidateCtx) {
        if ctx.doc.node(ctx.node).kind != NodeKind::Option {
            return;
        }
        let Some(file) = ctx.doc.file() else { return };
        let value = ctx.doc.option_inner_text(ctx.node).trim().to_string();
        let span = ctx.doc.option_inner_span(ctx.node);
        match ctx.tag.as_str() {
            IMPORT_FILE_TAG => {
                if value.is_empty() {
                    return;
                }
                let Some(resolved) = ctx.workspace.resolve_import(file, &value) else {
                    return;
                };
                if !ctx.workspace.file_exists(&resolved) {
                    ctx.out.push(Diagnostic::error(
                        codes::MISSING_FILE,
                        format!("imported file `{resolved}` does not exist"),
                        span,
                    ));
                    return;
                }
                if closure(ctx.workspace, [resolved.clone()]).contains(file) {
                    ctx.out.push(Diagnostic::warning(
                        codes::IMPORT_CYCLE,
                        format!("importing `{value}` creates an import cycle"),
                        span,
                    ));
                }
                // Redundant iff reachable through the remaining imports
                // alone — equivalently, removing it changes nothing.
                let my_command = ctx.doc.node(ctx.node).parent;
                let others: Vec<String> = scan::imports(ctx.doc)
                    .iter()
                    .filter(|imp| Some(imp.command) != my_command)
                    .filter_map(|imp| imp.target.as_deref())
                    .filter_map(|t| ctx.workspace.resolve_import(file, t))
                    .collect();
                if closure(ctx.workspace, others).contains(&resolved) {
                    ctx.out.push(Diagnostic::warning(
                        codes::REDUNDANT_IMPORT,
                        format!("import of `{value}` is redundant: it is already reachable"),
                        span,
                    ));
                }
            }
            IMPORT_SYMBOL_TAG => {
                if value.is_empty() {
                    return;
                }
                let Some(target) = id_target(ctx.doc, ctx.node, ctx.workspace, file) else {
                    return;
                };
                if !ctx.workspace.file_exists(&target) {
                    return; // the missing file is reported on the path option
                }
                if !ctx.workspace.module_ids(&target).contains(&value) {
                    ctx.out.push(Diagnostic::error(
                        codes::UNKNOWN_MODULE_ID,
                        format!("no module with id `{value}` in `{target}`"),
                        span,
                    ));
                }
            }
            _ => {}
        }
    }

    fn autocomplete_tag(&self, ctx: &CompleteCtx) -> Vec<CompletionItem> {
        match ctx.tag.as_str() {
            IMPORT_FILE_TAG => file_completions(ctx),
            IMPORT_SYMBOL_TAG => module_id_completions(ctx),
            IMPORT_COMMAND_TAG => bracket_completions(ctx),
            _ => Vec::new(),
        }
    }
}

/// The option node an anchor belongs to: itself, or the enclosing option
/// when the anchor is a word inside one.
fn enclosing_option(doc: &Document, node: NodeId) -> Option<NodeId> {
    let mut current = Some(node);
    while let Some(id) = current {
        if doc.node(id).kind == NodeKind::Option {
            return Some(id);
        }
        current = doc.node(id).parent;
    }
    None
}

fn parent_dir(file: &str) -> &str {
    file.rsplit_once('/').map(|(dir, _)| dir).unwrap_or("")
}

/// Path completion inside the bracket option, honoring directories the
/// user already typed: `../ba` lists entries of `../` filtered by `ba`.
fn file_completions(ctx: &CompleteCtx) -> Vec<CompletionItem> {
    let Some(option) = enclosing_option(ctx.doc, ctx.node) else { return Vec::new() };
    let inner = ctx.doc.option_inner_span(option);
    let upto = ctx.offset.clamp(inner.start, inner.end);
    let typed = &ctx.doc.source()[inner.start..upto];
    let (dir_part, partial) = match typed.rsplit_once('/') {
        Some((dir, partial)) => (dir, partial),
        None => ("", typed),
    };
    let Some(base) = crate::workspace::join_normalize(parent_dir(ctx.file), dir_part) else {
        return Vec::new();
    };
    ctx.ws
        .dir_entries(&base)
        .into_iter()
        .filter(|(name, _)| name.starts_with(partial))
        .map(|(name, is_dir)| {
            let label = if is_dir { format!("{name}/") } else { name };
            CompletionItem {
                kind: CompletionKind::File,
                insert: label.clone(),
                label,
                detail: None,
            }
        })
        .collect()
}

/// Module ids declared in the file the bracket option points at; inside
/// the importing file itself, the module the cursor is in is excluded.
fn module_id_completions(ctx: &CompleteCtx) -> Vec<CompletionItem> {
    let Some(option) = enclosing_option(ctx.doc, ctx.node) else { return Vec::new() };
    let Some(target) = id_target(ctx.doc, option, ctx.ws, ctx.file) else {
        return Vec::new();
    };
    let mut exclude = None;
    if target == ctx.file {
        let modules = scan::modules(ctx.doc);
        exclude = scan::enclosing_module(&modules, ctx.offset).and_then(|m| m.id.clone());
    }
    ctx.ws
        .module_ids(&target)
        .into_iter()
        .filter(|id| Some(id) != exclude.as_ref())
        .map(|id| CompletionItem {
            kind: CompletionKind::ModuleId,
            label: id.clone(),
            insert: id,
            detail: None,
        })
        .collect()
}

/// With the cursor on the command itself, offer whole bracket arguments.
fn bracket_completions(ctx: &CompleteCtx) -> Vec<CompletionItem> {
    ctx.ws
        .dir_entries(parent_dir(ctx.file))
        .into_iter()
        .map(|(name, is_dir)| {
            let label = if is_dir { format!("{name}/") } else { name };
            CompletionItem {
                kind: CompletionKind::File,
                insert: format!("[{label}]"),
                label,
                detail: None,
            }
        })
        .collect()
}
