//! Handler registration and tag application.
//!
//! A handler claims a set of command names — `\begin{X}`/`\end{X}`
//! dispatch by the environment name `X`, every other command by its own
//! name — and declares up front which tag URIs it may attach and which
//! highlight categories it may map them to. Attaching an undeclared tag
//! is a hard error, as is any overlap between handlers: one handler per
//! command name, one handler per tag URI.

use std::collections::BTreeMap;

use crate::complete::{CompleteCtx, CompletionItem};
use crate::diagnostics::Diagnostic;
use crate::error::{Error, Result};
use crate::index::IndexSink;
use crate::syntax::{Document, NodeId, NodeKind};
use crate::tag::Tag;

/// A highlight category a handler may assign to its tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategoryDecl {
    /// Stable URI identifying the category across handlers and clients.
    pub id: String,
    /// Human-readable name shown in theme configuration.
    pub label: String,
}

/// Category painted on every command token that no tag overrides.
pub const COMMAND_CATEGORY: &str = "kwarc.info.mkmide.latex.syntaxhighlighting.command";
pub const COMMAND_CATEGORY_LABEL: &str = "Command";

/// Collects tag attachments produced by one handler for one command.
#[derive(Debug, Default)]
pub struct TagSink {
    additions: Vec<(NodeId, Tag)>,
}

impl TagSink {
    pub fn add(&mut self, node: NodeId, tag: impl Into<Tag>) {
        self.additions.push((node, tag.into()));
    }
}

/// What validation may ask about the rest of the workspace. Paths are
/// workspace-relative with forward slashes.
pub trait WorkspaceInfo {
    /// Resolves an import target written in `from` against that file's
    /// directory; returns the normalized path of the `.tex` file the
    /// target denotes, whether or not it exists.
    fn resolve_import(&self, from: &str, target: &str) -> Option<String>;
    fn file_exists(&self, path: &str) -> bool;
    /// Module ids declared in the file (empty if it does not exist).
    fn module_ids(&self, path: &str) -> Vec<String>;
    /// Resolved import targets of the file, one entry per import command
    /// that names a file, in source order, duplicates kept.
    fn direct_imports(&self, path: &str) -> Vec<String>;
}

/// One validation callback: the tagged node under scrutiny plus access
/// to the document, the workspace, and the diagnostic output.
pub struct ValidateCtx<'a> {
    pub doc: &'a Document,
    pub node: NodeId,
    pub tag: &'a Tag,
    pub workspace: &'a dyn WorkspaceInfo,
    pub out: &'a mut Vec<Diagnostic>,
}

/// Extension point: everything the toolkit knows about a command family.
///
/// Only `id`, `commands` and `tags` are required; every service defaults
/// to "nothing to contribute".
pub trait Handler {
    fn id(&self) -> &str;

    /// Command and environment names this handler is responsible for.
    fn commands(&self) -> Vec<String>;

    /// Tag URIs this handler may attach. Attaching anything else fails.
    fn tags(&self) -> Vec<Tag>;

    fn highlight_categories(&self) -> Vec<CategoryDecl> {
        Vec::new()
    }

    /// Category a tag paints with; `None` leaves the node unpainted
    /// (commands fall back to [`COMMAND_CATEGORY`]).
    fn syntax_color_uri(&self, _tag: &Tag) -> Option<String> {
        None
    }

    /// Attach tags for one command node dispatched to this handler.
    fn add_node_tags(&self, _doc: &Document, _node: NodeId, _sink: &mut TagSink) {}

    /// Contribute index triples for one tagged node; `true` iff the node
    /// itself should be materialized in the index.
    fn index(&self, _doc: &Document, _node: NodeId, _tag: &Tag, _sink: &mut IndexSink) -> bool {
        false
    }

    /// Workspace-aware checks for one tagged node.
    fn validate(&self, _ctx: &mut ValidateCtx) {}

    /// Completions for a cursor anchored at a node carrying one of this
    /// handler's tags.
    fn autocomplete_tag(&self, _ctx: &CompleteCtx) -> Vec<CompletionItem> {
        Vec::new()
    }

    /// Structured rewrites; none are available by default.
    fn refactor(&self, operation: &str) -> Result<()> {
        Err(Error::RefactorUnsupported(operation.to_string()))
    }
}

pub struct Registry {
    handlers: Vec<Box<dyn Handler>>,
    by_command: BTreeMap<String, usize>,
    by_tag: BTreeMap<Tag, usize>,
    categories: BTreeMap<String, CategoryDecl>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new()
    }
}

impl Registry {
    pub fn new() -> Self {
        let mut categories = BTreeMap::new();
        categories.insert(
            COMMAND_CATEGORY.to_string(),
            CategoryDecl {
                id: COMMAND_CATEGORY.to_string(),
                label: COMMAND_CATEGORY_LABEL.to_string(),
            },
        );
        Registry {
            handlers: Vec::new(),
            by_command: BTreeMap::new(),
            by_tag: BTreeMap::new(),
            categories,
        }
    }

    /// Registry with all built-in handlers installed.
    pub fn with_builtins() -> Self {
        let mut registry = Self::new();
        crate::handlers::install_builtins(&mut registry)
            .expect("built-in handlers register cleanly");
        registry
    }

    pub fn register(&mut self, handler: Box<dyn Handler>) -> Result<()> {
        let id = handler.id().to_string();
        if self.handlers.iter().any(|h| h.id() == id) {
            return Err(Error::DuplicateHandler(id));
        }
        for command in handler.commands() {
            if let Some(&other) = self.by_command.get(&command) {
                return Err(Error::DuplicateCommand {
                    command,
                    first: self.handlers[other].id().to_string(),
                    second: id,
                });
            }
        }
        for tag in handler.tags() {
            if let Some(&other) = self.by_tag.get(&tag) {
                return Err(Error::DuplicateTag {
                    tag: tag.as_str().to_string(),
                    first: self.handlers[other].id().to_string(),
                    second: id,
                });
            }
        }
        for decl in handler.highlight_categories() {
            match self.categories.get(&decl.id) {
                Some(existing) if existing.label != decl.label => {
                    return Err(Error::CategoryConflict(decl.id));
                }
                Some(_) => {}
                None => {
                    self.categories.insert(decl.id.clone(), decl);
                }
            }
        }
        let index = self.handlers.len();
        for command in handler.commands() {
            self.by_command.insert(command, index);
        }
        for tag in handler.tags() {
            self.by_tag.insert(tag, index);
        }
        self.handlers.push(handler);
        Ok(())
    }

    pub fn handler_for_command(&self, name: &str) -> Option<&dyn Handler> {
        self.by_command.get(name).map(|&i| self.handlers[i].as_ref())
    }

    pub fn handler_for_tag(&self, tag: &Tag) -> Option<&dyn Handler> {
        self.by_tag.get(tag).map(|&i| self.handlers[i].as_ref())
    }

    pub fn handlers(&self) -> impl Iterator<Item = &dyn Handler> {
        self.handlers.iter().map(|h| h.as_ref())
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryDecl> {
        self.categories.values()
    }

    pub fn category(&self, id: &str) -> Option<&CategoryDecl> {
        self.categories.get(id)
    }

    /// Handler responsible for a command node: environment name for
    /// `\begin`/`\end`, the command's own name otherwise.
    pub fn dispatch(&self, doc: &Document, node: NodeId) -> Option<&dyn Handler> {
        if doc.node(node).kind != NodeKind::Command {
            return None;
        }
        let name = doc.command_name(node)?;
        let key = match name {
            "begin" | "end" => doc.env_name(node)?,
            other => other.to_string(),
        };
        self.handler_for_command(&key)
    }

    /// Painting category for a tag, resolved through its owning handler.
    /// The category must have been declared.
    pub fn category_for_tag(&self, tag: &Tag) -> Result<Option<&CategoryDecl>> {
        let Some(handler) = self.handler_for_tag(tag) else {
            return Ok(None);
        };
        match handler.syntax_color_uri(tag) {
            None => Ok(None),
            Some(id) => match self.categories.get(&id) {
                Some(decl) => Ok(Some(decl)),
                None => Err(Error::UndeclaredCategory(id)),
            },
        }
    }
}

/// Recomputes every tag in the document from scratch: clears old tags,
/// dispatches each command node to its handler, and applies the
/// collected additions. Running it twice yields the same document.
pub fn tag_document(mut doc: Document, registry: &Registry) -> Result<Document> {
    for i in 0..doc.node_count() {
        doc.node_mut(NodeId::new(i)).tags.clear();
    }
    let mut additions: Vec<(NodeId, Tag, String)> = Vec::new();
    for node in doc.descendants() {
        let Some(handler) = registry.dispatch(&doc, node) else { continue };
        let mut sink = TagSink::default();
        handler.add_node_tags(&doc, node, &mut sink);
        let declared = handler.tags();
        for (target, tag) in sink.additions {
            if !declared.contains(&tag) {
                return Err(Error::UndeclaredTag {
                    handler: handler.id().to_string(),
                    tag: tag.as_str().to_string(),
                });
            }
            additions.push((target, tag, handler.id().to_string()));
        }
    }
    for (target, tag, _) in additions {
        doc.node_mut(target).tags.insert(tag);
    }
    Ok(doc)
}

/// Runs every handler's validation over the document's tagged nodes.
/// Each (node, tag) pair is offered once, in tree order.
pub fn validate_document(
    registry: &Registry,
    doc: &Document,
    workspace: &dyn WorkspaceInfo,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for node in doc.descendants() {
        let tags: Vec<Tag> = doc.node(node).tags.iter().cloned().collect();
        for tag in &tags {
            let Some(handler) = registry.handler_for_tag(tag) else { continue };
            let mut ctx = ValidateCtx { doc, node, tag, workspace, out: &mut out };
            handler.validate(&mut ctx);
        }
    }
    out
}
