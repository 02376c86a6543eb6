//! `\symdef{name}[arity]{presentation}`: declares a symbol macro inside
//! a module.

use crate::diagnostics::{codes, Diagnostic};
use crate::handlers::module::MODULE_COMMAND_TAG;
use crate::handlers::scan;
use crate::index::{ns, IndexSink};
use crate::registry::{CategoryDecl, Handler, TagSink, ValidateCtx, COMMAND_CATEGORY,
    COMMAND_CATEGORY_LABEL};
use crate::syntax::{Delimiter, Document, NodeId, NodeKind};
use crate::tag::Tag;

pub const SYMDEF_COMMAND_TAG: &str = "stex.symdef.command";
pub const SYMBOL_NAME_TAG: &str = "stex.symdef.symbolname";

pub struct SymdefHandler;

impl Handler for SymdefHandler {
    fn id(&self) -> &str {
        "symdef"
    }

    fn commands(&self) -> Vec<String> {
        vec!["symdef".to_string()]
    }

    fn tags(&self) -> Vec<Tag> {
        vec![Tag::new(SYMDEF_COMMAND_TAG), Tag::new(SYMBOL_NAME_TAG)]
    }

    fn highlight_categories(&self) -> Vec<CategoryDecl> {
        vec![CategoryDecl {
            id: COMMAND_CATEGORY.to_string(),
            label: COMMAND_CATEGORY_LABEL.to_string(),
        }]
    }

    fn syntax_color_uri(&self, tag: &Tag) -> Option<String> {
        (tag.as_str() == SYMDEF_COMMAND_TAG).then(|| COMMAND_CATEGORY.to_string())
    }

    fn add_node_tags(&self, doc: &Document, node: NodeId, sink: &mut TagSink) {
        sink.add(node, SYMDEF_COMMAND_TAG);
        if let Some(&opt) = doc.options_with(node, Delimiter::Brace).first() {
            if let Some(model) = doc.option_model(opt) {
                for &word in &doc.node(model).children {
                    if doc.node(word).kind == NodeKind::Word {
                        sink.add(word, SYMBOL_NAME_TAG);
                    }
                }
            }
        }
    }

    fn index(&self, doc: &Document, node: NodeId, tag: &Tag, sink: &mut IndexSink) -> bool {
        if tag.as_str() != SYMDEF_COMMAND_TAG {
            return false;
        }
        let braces = doc.options_with(node, Delimiter::Brace);
        let name = braces
            .first()
            .map(|&opt| doc.option_inner_text(opt).trim().to_string())
            .filter(|n| !n.is_empty());
        let Some(name) = name else { return false };
        sink.add_iri(ns::rdf_type(), ns::oo("Symbol"));
        sink.add_string(ns::rdf("id"), name);
        let arity = doc
            .find_option(node, Delimiter::Bracket)
            .and_then(|opt| doc.option_inner_text(opt).trim().parse::<i64>().ok())
            .unwrap_or(0);
        sink.add_int(ns::ide("arity"), arity);
        if let Some(&opt) = braces.get(1) {
            sink.add_string(ns::ide("presentation"), doc.option_inner_text(opt));
        }
        if let Some(frame) = sink.nearest_frame_with_tag(&Tag::new(MODULE_COMMAND_TAG)) {
            sink.link_from(frame, ns::ide("hasSymbol"));
        }
        true
    }

    fn validate(&self, ctx: &mut ValidateCtx) {
        if ctx.tag.as_str() != SYMDEF_COMMAND_TAG {
            return;
        }
        let span = ctx.doc.node(ctx.node).span;
        let name = ctx
            .doc
            .options_with(ctx.node, Delimiter::Brace)
            .first()
            .map(|&opt| ctx.doc.option_inner_text(opt).trim().to_string())
            .filter(|n| !n.is_empty());
        if name.is_none() {
            ctx.out.push(Diagnostic::warning(
                codes::SYMDEF_MISSING_NAME,
                "symbol declaration has no name",
                span,
            ));
        }
        let modules = scan::modules(ctx.doc);
        if scan::enclosing_module(&modules, span.start).is_none() {
            ctx.out.push(Diagnostic::warning(
                codes::SYMDEF_OUTSIDE_MODULE,
                "symbol declared outside any module",
                span,
            ));
        }
    }
}
