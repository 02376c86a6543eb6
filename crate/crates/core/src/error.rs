//! Crate-wide error type. Parsing itself never fails; errors here come
//! from misuse of the registry, malformed queries, bad build
//! configurations, and the filesystem.

use crate::syntax::SyntaxError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("handler `{0}` is already registered")]
    DuplicateHandler(String),
    #[error("command `{command}` is claimed by both `{first}` and `{second}`")]
    DuplicateCommand { command: String, first: String, second: String },
    #[error("tag `{tag}` is declared by both `{first}` and `{second}`")]
    DuplicateTag { tag: String, first: String, second: String },
    #[error("handler `{handler}` attached undeclared tag `{tag}`")]
    UndeclaredTag { handler: String, tag: String },
    #[error("highlight category `{0}` was never declared")]
    UndeclaredCategory(String),
    #[error("highlight category `{0}` declared twice with different labels")]
    CategoryConflict(String),
    #[error("refactoring `{0}` is not supported")]
    RefactorUnsupported(String),
    #[error("malformed query: {0}")]
    Query(String),
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(String),
    #[error("invalid triple data: {0}")]
    Triples(String),
    #[error("build configuration: {0}")]
    Config(String),
    #[error("cannot connect `{from}` to `{to}`: {reason}")]
    Binding { from: String, to: String, reason: String },
    #[error("program `{program}` failed: {message}")]
    Tool { program: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
