//! `\begin{module}[id=…]` … `\end{module}`: the unit of import and the
//! container for symbols.

use crate::diagnostics::{codes, Diagnostic};
use crate::index::{ns, IndexSink};
use crate::registry::{CategoryDecl, Handler, TagSink, ValidateCtx, COMMAND_CATEGORY,
    COMMAND_CATEGORY_LABEL};
use crate::syntax::{Delimiter, Document, NodeId, NodeKind};
use crate::tag::Tag;

pub const MODULE_COMMAND_TAG: &str = "stex.module.command";
pub const MODULE_ID_TAG: &str = "stex.module.moduleid";

pub struct ModuleHandler;

impl Handler for ModuleHandler {
    fn id(&self) -> &str {
        "module"
    }

    fn commands(&self) -> Vec<String> {
        vec!["module".to_string()]
    }

    fn tags(&self) -> Vec<Tag> {
        vec![Tag::new(MODULE_COMMAND_TAG), Tag::new(MODULE_ID_TAG)]
    }

    fn highlight_categories(&self) -> Vec<CategoryDecl> {
        vec![CategoryDecl {
            id: COMMAND_CATEGORY.to_string(),
            label: COMMAND_CATEGORY_LABEL.to_string(),
        }]
    }

    fn syntax_color_uri(&self, tag: &Tag) -> Option<String> {
        (tag.as_str() == MODULE_COMMAND_TAG).then(|| COMMAND_CATEGORY.to_string())
    }

    fn add_node_tags(&self, doc: &Document, node: NodeId, sink: &mut TagSink) {
        sink.add(node, MODULE_COMMAND_TAG);
        if doc.command_name(node) != Some("begin") {
            return;
        }
        if let Some(value) = doc.keyval(node, "id") {
            if let Some(opt) = doc.find_option(node, Delimiter::Bracket) {
                if let Some(model) = doc.option_model(opt) {
                    for &word in &doc.node(model).children {
                        let w = doc.node(word);
                        if w.kind == NodeKind::Word
                            && w.span.start < value.end
                            && value.start < w.span.end
                        {
                            sink.add(word, MODULE_ID_TAG);
                        }
                    }
                }
            }
        }
    }

    fn index(&self, doc: &Document, node: NodeId, tag: &Tag, sink: &mut IndexSink) -> bool {
        if tag.as_str() != MODULE_COMMAND_TAG || doc.command_name(node) != Some("begin") {
            return false;
        }
        sink.add_iri(ns::rdf_type(), ns::oo("Theory"));
        let id = match doc.keyval(node, "id") {
            Some(span) => span.slice(doc.source()).to_string(),
            None => format!(
                "anonymous:{}:{}",
                doc.file().unwrap_or("<buffer>"),
                doc.node(node).span.start
            ),
        };
        sink.add_string(ns::rdf("id"), id);
        sink.link_from(sink.root_frame(), ns::ide("hasModule"));
        true
    }

    fn validate(&self, ctx: &mut ValidateCtx) {
        if ctx.tag.as_str() != MODULE_COMMAND_TAG
            || ctx.doc.command_name(ctx.node) != Some("begin")
        {
            return;
        }
        if ctx.doc.keyval(ctx.node, "id").is_none() {
            ctx.out.push(Diagnostic::warning(
                codes::MISSING_MODULE_ID,
                "module has no id",
                ctx.doc.node(ctx.node).span,
            ));
        }
    }
}
