//! Diagnostic records shared by the parser, the environment matcher, and the
//! validators, plus the workspace-level `validate` entry point.
//!
//! Every diagnostic carries a stable machine-readable `code` drawn from
//! [`codes::ALL`] so downstream tooling can filter without string-matching
//! messages.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::span::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

/// Stable diagnostic codes. New codes must be added to [`codes::ALL`].
pub mod codes {
    /// A `{` or `[` group was still open at end of input.
    pub const UNCLOSED_GROUP: &str = "unclosed-group";
    /// A `}` had no open brace group; it was kept as a word.
    pub const STRAY_CLOSE_BRACE: &str = "stray-close-brace";
    /// A `]` had no open bracket option; it was kept as a word.
    pub const STRAY_CLOSE_BRACKET: &str = "stray-close-bracket";
    /// A brace group appeared outside any command; parsed as an anonymous option.
    pub const ORPHAN_GROUP: &str = "orphan-group";
    /// `\begin`/`\end` marker left unmatched by the environment pairing.
    pub const ENV_MISMATCH: &str = "env-mismatch";
    /// `\begin` or `\end` without a braced environment name.
    pub const ENV_MISSING_NAME: &str = "env-missing-name";
    /// Import path does not resolve to an existing file.
    pub const MISSING_FILE: &str = "missing-file";
    /// Imported module id is not defined in the target file.
    pub const UNKNOWN_MODULE_ID: &str = "unknown-module-id";
    /// Removing this import leaves the module's transitive closure unchanged.
    pub const REDUNDANT_IMPORT: &str = "redundant-import";
    /// The module participates in an import cycle.
    pub const IMPORT_CYCLE: &str = "import-cycle";
    /// Module environment without an `id=` option.
    pub const MISSING_MODULE_ID: &str = "missing-module-id";
    /// `\symdef` without a symbol name option.
    pub const SYMDEF_MISSING_NAME: &str = "symdef-missing-name";
    /// `\symdef` outside any module environment.
    pub const SYMDEF_OUTSIDE_MODULE: &str = "symdef-outside-module";
    /// Definition environment without a `for=` option.
    pub const DEFINITION_MISSING_FOR: &str = "definition-missing-for";
    /// Diagnostic recovered from a build tool's output stream.
    pub const BUILD_OUTPUT: &str = "build-output";

    pub const ALL: &[&str] = &[
        UNCLOSED_GROUP,
        STRAY_CLOSE_BRACE,
        STRAY_CLOSE_BRACKET,
        ORPHAN_GROUP,
        ENV_MISMATCH,
        ENV_MISSING_NAME,
        MISSING_FILE,
        UNKNOWN_MODULE_ID,
        REDUNDANT_IMPORT,
        IMPORT_CYCLE,
        MISSING_MODULE_ID,
        SYMDEF_MISSING_NAME,
        SYMDEF_OUTSIDE_MODULE,
        DEFINITION_MISSING_FOR,
        BUILD_OUTPUT,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: Span,
    /// Workspace-relative path, filled in by workspace-level operations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: &'static str, message: impl Into<String>, span: Span) -> Self {
        debug_assert!(codes::ALL.contains(&code), "unregistered diagnostic code {code}");
        Diagnostic { severity, code, message: message.into(), span, file: None }
    }

    pub fn error(code: &'static str, message: impl Into<String>, span: Span) -> Self {
        Self::new(Severity::Error, code, message, span)
    }

    pub fn warning(code: &'static str, message: impl Into<String>, span: Span) -> Self {
        Self::new(Severity::Warning, code, message, span)
    }

    pub fn info(code: &'static str, message: impl Into<String>, span: Span) -> Self {
        Self::new(Severity::Info, code, message, span)
    }

    pub fn with_file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }

    /// Deterministic report order: position first, then severity, code, message.
    pub fn sort_key_cmp(&self, other: &Self) -> Ordering {
        (self.file.as_deref(), self.span, self.severity, self.code, &self.message).cmp(&(
            other.file.as_deref(),
            other.span,
            other.severity,
            other.code,
            &other.message,
        ))
    }
}

/// Sorts diagnostics into the canonical report order.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key_cmp(b));
}
