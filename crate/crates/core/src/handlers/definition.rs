//! `\begin{definition}[id=…,for=…,title=…]` … `\end{definition}`: prose
//! that defines one or more symbols.

use crate::diagnostics::{codes, Diagnostic};
use crate::handlers::importmodule::EXTERNAL_REF_CATEGORY;
use crate::handlers::module::MODULE_COMMAND_TAG;
use crate::index::{ns, IndexSink};
use crate::registry::{CategoryDecl, Handler, TagSink, ValidateCtx, COMMAND_CATEGORY,
    COMMAND_CATEGORY_LABEL};
use crate::span::Span;
use crate::syntax::{Delimiter, Document, EnvPair, NodeId, NodeKind};
use crate::tag::Tag;

pub const DEFINITION_COMMAND_TAG: &str = "stex.definition.command";
pub const DEFINITION_FOR_TAG: &str = "stex.definition.definitionfor";
pub const DEFINITION_TEXT_TAG: &str = "stex.definition.definitionText";

pub struct DefinitionHandler;

fn pair_of(doc: &Document, begin: NodeId) -> Option<&EnvPair> {
    doc.env_pairs.iter().find(|p| p.begin == begin)
}

/// Key-list values may be braced to protect commas: `for={a,b}`.
fn strip_braces(s: &str) -> &str {
    let t = s.trim();
    t.strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .unwrap_or(t)
}

/// Word leaves inside the region, joined by single spaces.
pub fn body_text(doc: &Document, region: Span) -> String {
    let words: Vec<&str> = doc
        .descendants()
        .into_iter()
        .filter(|&id| {
            let n = doc.node(id);
            n.kind == NodeKind::Word && region.start <= n.span.start && n.span.end <= region.end
        })
        .map(|id| doc.text(id))
        .collect();
    words.join(" ")
}

impl Handler for DefinitionHandler {
    fn id(&self) -> &str {
        "definition"
    }

    fn commands(&self) -> Vec<String> {
        vec!["definition".to_string()]
    }

    fn tags(&self) -> Vec<Tag> {
        vec![
            Tag::new(DEFINITION_COMMAND_TAG),
            Tag::new(DEFINITION_FOR_TAG),
            Tag::new(DEFINITION_TEXT_TAG),
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
            DEFINITION_COMMAND_TAG => Some(COMMAND_CATEGORY.to_string()),
            DEFINITION_FOR_TAG => Some(EXTERNAL_REF_CATEGORY.to_string()),
            _ => None,
        }
    }

    fn add_node_tags(&self, doc: &Document, node: NodeId, sink: &mut TagSink) {
        sink.add(node, DEFINITION_COMMAND_TAG);
        if doc.command_name(node) != Some("begin") {
            return;
        }
        sink.add(node, DEFINITION_TEXT_TAG);
        if let Some(value) = doc.keyval(node, "for") {
            if let Some(opt) = doc.find_option(node, Delimiter::Bracket) {
                if let Some(model) = doc.option_model(opt) {
                    for &word in &doc.node(model).children {
                        let w = doc.node(word);
                        if w.kind == NodeKind::Word
                            && w.span.start < value.end
                            && value.start < w.span.end
                        {
                            sink.add(word, DEFINITION_FOR_TAG);
                        }
                    }
                }
            }
        }
    }

    fn index(&self, doc: &Document, node: NodeId, tag: &Tag, sink: &mut IndexSink) -> bool {
        if doc.command_name(node) != Some("begin") {
            return false;
        }
        let Some(pair) = pair_of(doc, node) else { return false };
        let region = doc.env_region(pair);
        match tag.as_str() {
            DEFINITION_COMMAND_TAG => {
                sink.add_iri(ns::rdf_type(), ns::oo("Definition"));
                if let Some(value) = doc.keyval(node, "for") {
                    for name in strip_braces(value.slice(doc.source())).split(',') {
                        let name = name.trim();
                        if !name.is_empty() {
                            sink.add_string(ns::ide("for"), name);
                        }
                    }
                }
                if let Some(title) = doc.keyval(node, "title") {
                    sink.add_string(ns::ide("title"), strip_braces(title.slice(doc.source())));
                }
                sink.add_string(ns::ide("file"), doc.file().unwrap_or("<buffer>"));
                sink.add_int(ns::ide("start"), region.start as i64);
                sink.add_int(ns::ide("end"), region.end as i64);
                if let Some(frame) = sink.nearest_frame_with_tag(&Tag::new(MODULE_COMMAND_TAG)) {
                    sink.link_to(frame, ns::oo("partOf"));
                }
                true
            }
            DEFINITION_TEXT_TAG => {
                sink.add_string(ns::ide("text"), body_text(doc, region));
                false
            }
            _ => false,
        }
    }

    fn validate(&self, ctx: &mut ValidateCtx) {
        if ctx.tag.as_str() != DEFINITION_COMMAND_TAG
            || ctx.doc.command_name(ctx.node) != Some("begin")
        {
            return;
        }
        if ctx.doc.keyval(ctx.node, "for").is_some() {
            return;
        }
        // A definiendum marked up in the body also says what is defined.
        let region = match pair_of(ctx.doc, ctx.node) {
            Some(pair) => ctx.doc.env_region(pair),
            None => return,
        };
        let marked = ctx.doc.descendants().into_iter().any(|id| {
            let n = ctx.doc.node(id);
            n.kind == NodeKind::Command
                && region.start <= n.span.start
                && n.span.end <= region.end
                && matches!(ctx.doc.command_name(id), Some("defin") | Some("twindef"))
        });
        if !marked {
            ctx.out.push(Diagnostic::info(
                codes::DEFINITION_MISSING_FOR,
                "definition does not say which symbol it defines",
                ctx.doc.node(ctx.node).span,
            ));
        }
    }
}
