//! A directory of `.tex` files, parsed and tagged once, with an index
//! kept fresh per file by content hash.
//!
//! All paths handed out or accepted here are workspace-relative with
//! forward slashes, regardless of platform.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::diagnostics::{sort_diagnostics, Diagnostic};
use crate::error::{Error, Result};
use crate::handlers::scan;
use crate::index::{index_document, TripleStore};
use crate::registry::{tag_document, validate_document, Registry, WorkspaceInfo};
use crate::syntax::{parse_with_file, Document};

/// Resolves `rel` against `base_dir`, folding `.` and `..` segments.
/// `None` when the path would climb above the workspace root.
pub fn join_normalize(base_dir: &str, rel: &str) -> Option<String> {
    let mut parts: Vec<&str> = base_dir
        .split('/')
        .filter(|s| !s.is_empty() && *s != ".")
        .collect();
    for seg in rel.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            other => parts.push(other),
        }
    }
    Some(parts.join("/"))
}

fn parent_dir(file: &str) -> &str {
    file.rsplit_once('/').map(|(dir, _)| dir).unwrap_or("")
}

pub struct Workspace {
    root: PathBuf,
    registry: Registry,
    docs: BTreeMap<String, Document>,
    store: TripleStore,
}

impl Workspace {
    /// Scans `root` for `.tex` files and parses and tags each one. The
    /// index starts empty; it fills on demand.
    pub fn open(root: impl Into<PathBuf>, registry: Registry) -> Result<Self> {
        let root = root.into();
        let mut ws = Workspace {
            root: root.clone(),
            registry,
            docs: BTreeMap::new(),
            store: TripleStore::new(),
        };
        for entry in WalkDir::new(&root).sort_by_file_name() {
            let entry =
                entry.map_err(|e| Error::Other(format!("scanning workspace: {e}")))?;
            if !entry.file_type().is_file()
                || entry.path().extension().and_then(|e| e.to_str()) != Some("tex")
            {
                continue;
            }
            let rel = ws.relative(entry.path())?;
            let source = std::fs::read_to_string(entry.path())
                .map_err(|e| Error::io(entry.path().display().to_string(), e))?;
            ws.insert(rel, &source)?;
        }
        Ok(ws)
    }

    /// An empty workspace with no backing directory, filled via
    /// [`Workspace::insert`].
    pub fn in_memory(registry: Registry) -> Self {
        Workspace {
            root: PathBuf::new(),
            registry,
            docs: BTreeMap::new(),
            store: TripleStore::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    /// Workspace-relative forward-slash form of a path inside the root.
    pub fn relative(&self, path: &Path) -> Result<String> {
        let rel = path.strip_prefix(&self.root).map_err(|_| {
            Error::Other(format!(
                "`{}` is outside the workspace root `{}`",
                path.display(),
                self.root.display()
            ))
        })?;
        let parts: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        Ok(parts.join("/"))
    }

    /// Parses, tags, and stores one file, replacing any previous version.
    pub fn insert(&mut self, rel: impl Into<String>, source: &str) -> Result<()> {
        let rel = rel.into();
        let doc = tag_document(parse_with_file(source, rel.clone()), &self.registry)?;
        self.docs.insert(rel, doc);
        Ok(())
    }

    pub fn remove(&mut self, rel: &str) {
        self.docs.remove(rel);
        self.store.remove_file(rel);
    }

    pub fn files(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    pub fn doc(&self, rel: &str) -> Option<&Document> {
        self.docs.get(rel)
    }

    /// Brings the file's triples up to date; `true` iff a rebuild was
    /// needed. Unchanged content is recognized by hash and skipped.
    pub fn ensure_indexed(&mut self, rel: &str) -> bool {
        let Some(doc) = self.docs.get(rel) else { return false };
        if self.store.file_hash(rel) == Some(doc.content_hash_hex16().as_str()) {
            return false;
        }
        let index = index_document(doc, &self.registry);
        self.store
            .replace_file(rel, index.root, index.hash16, index.triples);
        true
    }

    /// Indexes every file; returns how many actually rebuilt.
    pub fn index_all(&mut self) -> usize {
        let files: Vec<String> = self.docs.keys().cloned().collect();
        files.iter().filter(|f| self.ensure_indexed(f)).count()
    }

    /// The root subject IRI of an indexed file.
    pub fn file_root(&self, rel: &str) -> Option<&str> {
        self.store.file_root(rel)
    }

    /// All diagnostics for one file: parse recovery, environment
    /// matching, and handler validation, sorted by position.
    pub fn validate(&self, rel: &str) -> Vec<Diagnostic> {
        let Some(doc) = self.docs.get(rel) else { return Vec::new() };
        let mut out: Vec<Diagnostic> = doc
            .diagnostics
            .iter()
            .chain(&doc.env_diagnostics)
            .cloned()
            .chain(validate_document(&self.registry, doc, self))
            .map(|d| d.with_file(rel))
            .collect();
        sort_diagnostics(&mut out);
        out
    }

    /// Entries of a workspace directory as seen by completion: child
    /// directories (that contain `.tex` files somewhere below) and the
    /// stems of the `.tex` files directly inside.
    pub fn dir_entries(&self, rel_dir: &str) -> Vec<(String, bool)> {
        let prefix = if rel_dir.is_empty() {
            String::new()
        } else {
            format!("{rel_dir}/")
        };
        let mut out = std::collections::BTreeSet::new();
        for key in self.docs.keys() {
            let Some(rest) = key.strip_prefix(&prefix) else { continue };
            match rest.split_once('/') {
                Some((dir, _)) => {
                    out.insert((dir.to_string(), true));
                }
                None => {
                    let stem = rest.strip_suffix(".tex").unwrap_or(rest);
                    out.insert((stem.to_string(), false));
                }
            }
        }
        out.into_iter().collect()
    }
}

impl WorkspaceInfo for Workspace {
    fn resolve_import(&self, from: &str, target: &str) -> Option<String> {
        let mut resolved = join_normalize(parent_dir(from), target)?;
        if !resolved.ends_with(".tex") {
            resolved.push_str(".tex");
        }
        Some(resolved)
    }

    fn file_exists(&self, path: &str) -> bool {
        self.docs.contains_key(path)
    }

    fn module_ids(&self, path: &str) -> Vec<String> {
        let Some(doc) = self.docs.get(path) else { return Vec::new() };
        scan::modules(doc).into_iter().filter_map(|m| m.id).collect()
    }

    fn direct_imports(&self, path: &str) -> Vec<String> {
        let Some(doc) = self.docs.get(path) else { return Vec::new() };
        scan::imports(doc)
            .into_iter()
            .filter_map(|imp| imp.target)
            .filter_map(|t| self.resolve_import(path, &t))
            .collect()
    }
}
