//! Language intelligence for modular TeX documents.
//!
//! The crate parses a dialect of LaTeX in which knowledge lives in small
//! interlinked modules (`\begin{module}`, `\symdef`, `\importmodule`,
//! `\begin{definition}`), and turns the resulting trees into editor
//! services: semantic highlighting, validation, workspace-wide indexing
//! and queries, completion, definition search, and build orchestration.
//!
//! The layers, bottom to top:
//!
//! - [`syntax`]: a total, recovering parser whose trees reproduce their
//!   input byte for byte, plus `\begin`/`\end` pairing;
//! - [`registry`]: pluggable per-command handlers that tag tree nodes
//!   with URIs;
//! - [`highlight`], [`diagnostics`]: services computed per document;
//! - [`index`]: a triple store over all tagged documents, with
//!   conjunctive queries and N-Triples import/export;
//! - [`complete`], [`search`]: services computed over the index;
//! - [`build`]: toolchain capability negotiation, plan construction, and
//!   execution;
//! - [`workspace`]: file management tying the layers together.

pub mod build;
pub mod complete;
pub mod diagnostics;
pub mod error;
pub mod handlers;
pub mod highlight;
pub mod index;
pub mod registry;
pub mod search;
pub mod span;
pub mod syntax;
pub mod tag;
pub mod workspace;

pub use complete::{complete, CompletionItem, CompletionKind};
pub use diagnostics::{Diagnostic, Severity};
pub use error::{Error, Result};
pub use highlight::{highlight, HighlightSpan};
pub use index::{index_document, Object, Triple, TripleStore};
pub use registry::{tag_document, validate_document, Handler, Registry, WorkspaceInfo};
pub use search::{search, SearchHit};
pub use span::{LineIndex, Span};
pub use syntax::{parse, parse_with_file, reparse, Document, Edit, NodeId, NodeKind};
pub use tag::Tag;
pub use workspace::Workspace;
