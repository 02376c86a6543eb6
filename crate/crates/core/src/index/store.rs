//! In-memory triple store with per-file replacement.
//!
//! Triples live in three orderings (SPO, POS, OSP) so any partially
//! constant pattern can be answered by a range scan. Each indexed file
//! owns its triples; re-indexing a file replaces exactly that set, and a
//! content hash per file lets callers skip rebuilding when nothing
//! changed.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::ops::Bound;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Iri(String),
    Str(String),
    Int(i64),
}

impl Object {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Object::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Object::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Object::Int(i) => Some(*i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub s: String,
    pub p: String,
    pub o: Object,
}

impl Triple {
    pub fn new(s: impl Into<String>, p: impl Into<String>, o: Object) -> Self {
        Triple { s: s.into(), p: p.into(), o }
    }
}

#[derive(Clone, Debug)]
struct FileEntry {
    root: String,
    hash16: String,
    triples: Vec<Triple>,
}

#[derive(Clone, Debug, Default)]
pub struct TripleStore {
    spo: BTreeSet<Triple>,
    pos: BTreeSet<(String, Object, String)>,
    osp: BTreeSet<(Object, String, String)>,
    files: BTreeMap<String, FileEntry>,
    rebuilds: u64,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// How many times a file's triples have been (re)built into the store.
    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    /// Content hash the store holds for a file, if it is indexed.
    pub fn file_hash(&self, file: &str) -> Option<&str> {
        self.files.get(file).map(|e| e.hash16.as_str())
    }

    /// Root node IRI of an indexed file.
    pub fn file_root(&self, file: &str) -> Option<&str> {
        self.files.get(file).map(|e| e.root.as_str())
    }

    /// Number of triples contributed by one file.
    pub fn file_triple_count(&self, file: &str) -> Option<usize> {
        self.files.get(file).map(|e| e.triples.len())
    }

    pub fn indexed_files(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// Replaces everything previously indexed for `file`.
    pub fn replace_file(
        &mut self,
        file: impl Into<String>,
        root: impl Into<String>,
        hash16: impl Into<String>,
        triples: Vec<Triple>,
    ) {
        let file = file.into();
        if let Some(old) = self.files.remove(&file) {
            for t in &old.triples {
                self.remove_triple(t);
            }
        }
        for t in &triples {
            self.insert_triple(t.clone());
        }
        self.files.insert(
            file,
            FileEntry { root: root.into(), hash16: hash16.into(), triples },
        );
        self.rebuilds += 1;
    }

    pub fn remove_file(&mut self, file: &str) {
        if let Some(old) = self.files.remove(file) {
            for t in &old.triples {
                self.remove_triple(t);
            }
        }
    }

    fn insert_triple(&mut self, t: Triple) {
        self.pos.insert((t.p.clone(), t.o.clone(), t.s.clone()));
        self.osp.insert((t.o.clone(), t.p.clone(), t.s.clone()));
        self.spo.insert(t);
    }

    fn remove_triple(&mut self, t: &Triple) {
        self.spo.remove(t);
        self.pos.remove(&(t.p.clone(), t.o.clone(), t.s.clone()));
        self.osp.remove(&(t.o.clone(), t.p.clone(), t.s.clone()));
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.spo.iter()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo.contains(t)
    }

    /// All objects of `(s, p, ·)`.
    pub fn objects(&self, s: &str, p: &str) -> Vec<&Object> {
        let lo = Triple::new(s, p, Object::Iri(String::new()));
        self.spo
            .range((Bound::Included(lo), Bound::Unbounded))
            .take_while(|t| t.s == s && t.p == p)
            .map(|t| &t.o)
            .collect()
    }

    /// First string object of `(s, p, ·)`, a common accessor.
    pub fn str_object(&self, s: &str, p: &str) -> Option<&str> {
        self.objects(s, p).into_iter().find_map(|o| o.as_str())
    }

    pub fn int_object(&self, s: &str, p: &str) -> Option<i64> {
        self.objects(s, p).into_iter().find_map(|o| o.as_int())
    }

    pub fn iri_object(&self, s: &str, p: &str) -> Option<&str> {
        self.objects(s, p).into_iter().find_map(|o| o.as_iri())
    }

    /// All subjects of `(·, p, o)`.
    pub fn subjects_with(&self, p: &str, o: &Object) -> Vec<&str> {
        let lo = (p.to_string(), o.clone(), String::new());
        self.pos
            .range((Bound::Included(lo), Bound::Unbounded))
            .take_while(|(tp, to, _)| tp == p && to == o)
            .map(|(_, _, s)| s.as_str())
            .collect()
    }

    /// All triples matching a pattern of optional constants, via the most
    /// selective index.
    pub fn matching(
        &self,
        s: Option<&str>,
        p: Option<&str>,
        o: Option<&Object>,
    ) -> Vec<&Triple> {
        match (s, p, o) {
            (Some(s), _, _) => {
                let lo = Triple::new(s, p.unwrap_or(""), Object::Iri(String::new()));
                self.spo
                    .range((Bound::Included(lo), Bound::Unbounded))
                    .take_while(|t| t.s == s && p.map_or(true, |p| t.p == p))
                    .filter(|t| o.map_or(true, |o| &t.o == o))
                    .collect()
            }
            (None, Some(p), o) => {
                let lo = (
                    p.to_string(),
                    o.cloned().unwrap_or(Object::Iri(String::new())),
                    String::new(),
                );
                self.pos
                    .range((Bound::Included(lo), Bound::Unbounded))
                    .take_while(|(tp, to, _)| tp == p && o.map_or(true, |o| to == o))
                    .map(|(p, o, s)| self.lookup(s, p, o))
                    .collect()
            }
            (None, None, Some(o)) => {
                let lo = (o.clone(), String::new(), String::new());
                self.osp
                    .range((Bound::Included(lo), Bound::Unbounded))
                    .take_while(|(to, _, _)| to == o)
                    .map(|(o, p, s)| self.lookup(s, p, o))
                    .collect()
            }
            (None, None, None) => self.spo.iter().collect(),
        }
    }

    fn lookup(&self, s: &str, p: &str, o: &Object) -> &Triple {
        let probe = Triple::new(s, p, o.clone());
        self.spo.get(&probe).expect("indexes agree")
    }

    /// A store over a bare triple list, with no file bookkeeping.
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut store = Self::new();
        for t in triples {
            store.insert_triple(t);
        }
        store
    }
}
