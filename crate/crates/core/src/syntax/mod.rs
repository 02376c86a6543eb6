//! Lexing, parsing, the syntax tree, and environment pairing.

pub mod env;
pub mod node;
pub mod parser;
pub mod token;

pub use env::{match_environments, match_markers, Marker, MarkerKind};
pub use node::{
    scan_entries, Delimiter, Document, EnvPair, NodeData, NodeId, NodeKind, OptEntry, SyntaxError,
    Trivia,
};
pub use parser::{parse, parse_with_file, reparse, Edit};
pub use token::{tokenize, Token, TokenKind};
