//! Turning tagged documents into triples.
//!
//! The builder walks the tree once. Every tagged node is offered to the
//! handlers owning its tags; if any of them claims the node, it is
//! minted: typed `rdf:Seq`, numbered `rdf:_n` under the nearest live
//! frame, and given the properties the handlers buffered. Minted nodes
//! then become frames themselves for the duration of their subtree —
//! except environment begins, whose frame stays alive until the matching
//! end marker (or, failing that, the end of the enclosing group). That
//! deferral is what lets a symbol declared between `\begin{module}` and
//! `\end{module}` attach to the module even though the two are siblings.

pub mod ns;
pub mod ntriples;
pub mod query;
pub mod store;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::registry::Registry;
use crate::syntax::{Document, NodeId, NodeKind};
use crate::tag::Tag;

pub use query::{parse_query, query, solve, Binding, Pattern, Term};
pub use store::{Object, Triple, TripleStore};

/// Everything the index knows about one file.
#[derive(Clone, Debug)]
pub struct FileIndex {
    pub file: String,
    pub root: String,
    pub hash16: String,
    pub triples: Vec<Triple>,
}

/// Handle to a live frame, valid for the duration of one `index` call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameRef(usize);

#[derive(Debug)]
struct Frame {
    id: u64,
    iri: String,
    tags: BTreeSet<Tag>,
    counter: u64,
    env_end: Option<NodeId>,
    owner_model: Option<NodeId>,
    deferred: bool,
}

enum BufferedOp {
    Prop(String, Object),
    LinkFrom(String, String),
    LinkTo(String, String),
}

/// What a handler may contribute for one tagged node. Properties target
/// the node itself and are kept only if some handler mints the node;
/// frame-addressed additions apply immediately.
pub struct IndexSink<'a> {
    frames: &'a [Frame],
    triples: &'a mut Vec<Triple>,
    buffered: &'a mut Vec<BufferedOp>,
}

impl<'a> IndexSink<'a> {
    pub fn add_string(&mut self, prop: impl Into<String>, value: impl Into<String>) {
        self.buffered.push(BufferedOp::Prop(prop.into(), Object::Str(value.into())));
    }

    pub fn add_int(&mut self, prop: impl Into<String>, value: i64) {
        self.buffered.push(BufferedOp::Prop(prop.into(), Object::Int(value)));
    }

    pub fn add_iri(&mut self, prop: impl Into<String>, iri: impl Into<String>) {
        self.buffered.push(BufferedOp::Prop(prop.into(), Object::Iri(iri.into())));
    }

    /// `(frame, prop, value)`, applied immediately.
    pub fn add_string_on(
        &mut self,
        frame: FrameRef,
        prop: impl Into<String>,
        value: impl Into<String>,
    ) {
        self.triples.push(Triple::new(
            self.frames[frame.0].iri.clone(),
            prop,
            Object::Str(value.into()),
        ));
    }

    /// `(frame, prop, this-node)`, kept only if the node is minted.
    pub fn link_from(&mut self, frame: FrameRef, prop: impl Into<String>) {
        self.buffered
            .push(BufferedOp::LinkFrom(self.frames[frame.0].iri.clone(), prop.into()));
    }

    /// `(this-node, prop, frame)`, kept only if the node is minted.
    pub fn link_to(&mut self, frame: FrameRef, prop: impl Into<String>) {
        self.buffered
            .push(BufferedOp::LinkTo(self.frames[frame.0].iri.clone(), prop.into()));
    }

    /// Innermost live frame whose minted node carried `tag`.
    pub fn nearest_frame_with_tag(&self, tag: &Tag) -> Option<FrameRef> {
        self.frames
            .iter()
            .rposition(|f| f.tags.contains(tag))
            .map(FrameRef)
    }

    /// The document's root frame, always live.
    pub fn root_frame(&self) -> FrameRef {
        FrameRef(0)
    }
}

/// Builds the triples for one tagged document.
pub fn index_document(doc: &Document, registry: &Registry) -> FileIndex {
    let hash16 = doc.content_hash_hex16();
    let file = doc.file().unwrap_or("<buffer>").to_string();
    let root = ns::root_iri(&hash16);
    let mut walker = Walker {
        doc,
        registry,
        hash16: hash16.clone(),
        triples: Vec::new(),
        frames: Vec::new(),
        env_begin: doc.env_pairs.iter().map(|p| (p.begin, p.end)).collect(),
        next_frame_id: 0,
    };
    walker.triples.push(Triple::new(
        root.clone(),
        ns::rdf_type(),
        Object::Iri(ns::rdf_seq()),
    ));
    walker
        .triples
        .push(Triple::new(root.clone(), ns::ide("file"), Object::Str(file.clone())));
    walker.frames.push(Frame {
        id: 0,
        iri: root.clone(),
        tags: BTreeSet::new(),
        counter: 0,
        env_end: None,
        owner_model: None,
        deferred: true,
    });
    walker.next_frame_id = 1;
    walker.walk(doc.root());
    let mut triples = walker.triples;
    triples.sort();
    triples.dedup();
    FileIndex { file, root, hash16, triples }
}

struct Walker<'a> {
    doc: &'a Document,
    registry: &'a Registry,
    hash16: String,
    triples: Vec<Triple>,
    frames: Vec<Frame>,
    env_begin: BTreeMap<NodeId, Option<NodeId>>,
    next_frame_id: u64,
}

impl Walker<'_> {
    fn walk(&mut self, node: NodeId) {
        let my_frame = self.process(node);
        for &child in &self.doc.node(node).children.clone() {
            self.walk(child);
            // An end marker closes the deferred frame of its begin.
            if let Some(i) = self.frames.iter().rposition(|f| f.env_end == Some(child)) {
                self.frames.remove(i);
            }
        }
        if self.doc.node(node).kind == NodeKind::Model {
            // Environments opened in this group cannot outlive it.
            self.frames
                .retain(|f| f.owner_model != Some(node) || !f.deferred);
        }
        if let Some(id) = my_frame {
            // A non-deferred frame covers exactly its subtree; a deferred
            // one may already be gone by now.
            if let Some(i) = self.frames.iter().rposition(|f| f.id == id && !f.deferred) {
                self.frames.remove(i);
            }
        }
    }

    /// Offers the node's tags to their handlers; mints the node if any
    /// handler claims it. Returns the id of the pushed frame, if any.
    fn process(&mut self, node: NodeId) -> Option<u64> {
        let tags = self.doc.node(node).tags.clone();
        if tags.is_empty() {
            return None;
        }
        let iri = ns::node_iri(&self.hash16, self.doc.node(node).span.start);
        let mut buffered = Vec::new();
        let mut minted = false;
        for tag in &tags {
            let Some(handler) = self.registry.handler_for_tag(tag) else { continue };
            let mut sink = IndexSink {
                frames: &self.frames,
                triples: &mut self.triples,
                buffered: &mut buffered,
            };
            minted |= handler.index(self.doc, node, tag, &mut sink);
        }
        if !minted {
            return None;
        }
        let parent = self.frames.last_mut().expect("root frame is always live");
        parent.counter += 1;
        let member = ns::rdf_member(parent.counter);
        let parent_iri = parent.iri.clone();
        self.triples
            .push(Triple::new(parent_iri, member, Object::Iri(iri.clone())));
        self.triples
            .push(Triple::new(iri.clone(), ns::rdf_type(), Object::Iri(ns::rdf_seq())));
        for op in buffered {
            match op {
                BufferedOp::Prop(p, o) => self.triples.push(Triple::new(iri.clone(), p, o)),
                BufferedOp::LinkFrom(f, p) => {
                    self.triples.push(Triple::new(f, p, Object::Iri(iri.clone())))
                }
                BufferedOp::LinkTo(f, p) => {
                    self.triples.push(Triple::new(iri.clone(), p, Object::Iri(f)))
                }
            }
        }
        let deferred = self.env_begin.contains_key(&node);
        let id = self.next_frame_id;
        self.next_frame_id += 1;
        self.frames.push(Frame {
            id,
            iri,
            tags,
            counter: 0,
            env_end: self.env_begin.get(&node).copied().flatten(),
            owner_model: self.doc.node(node).parent,
            deferred,
        });
        Some(id)
    }
}
