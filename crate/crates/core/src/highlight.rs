//! Semantic highlighting: every command token is painted, tags may
//! override or extend the painting through their handlers' categories.
//!
//! Painting happens on a per-byte canvas in tree order, so a child's
//! category overrides its parent's; adjacent bytes with equal categories
//! merge into one span.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::registry::{CategoryDecl, Registry, COMMAND_CATEGORY};
use crate::span::Span;
use crate::syntax::{Document, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HighlightSpan {
    pub span: Span,
    pub category: String,
    pub label: String,
}

fn intern(
    palette: &mut Vec<(String, String)>,
    by_id: &mut BTreeMap<String, usize>,
    decl: &CategoryDecl,
) -> usize {
    if let Some(&i) = by_id.get(&decl.id) {
        return i;
    }
    palette.push((decl.id.clone(), decl.label.clone()));
    by_id.insert(decl.id.clone(), palette.len() - 1);
    palette.len() - 1
}

/// Highlight spans for a tagged document, in source order.
pub fn highlight(doc: &Document, registry: &Registry) -> Result<Vec<HighlightSpan>> {
    let mut palette: Vec<(String, String)> = Vec::new();
    let mut by_id: BTreeMap<String, usize> = BTreeMap::new();
    let mut paint: Vec<Option<usize>> = vec![None; doc.source().len()];

    for node in doc.descendants() {
        let data = doc.node(node);
        let (region, decl) = match data.kind {
            NodeKind::Command => {
                let mut chosen = None;
                for tag in &data.tags {
                    if let Some(decl) = registry.category_for_tag(tag)? {
                        chosen = Some(decl);
                        break;
                    }
                }
                let decl = match chosen {
                    Some(decl) => decl,
                    None => registry
                        .category(COMMAND_CATEGORY)
                        .expect("command category is always registered"),
                };
                (data.token_span.unwrap_or(data.span), decl)
            }
            _ => {
                let mut chosen = None;
                for tag in &data.tags {
                    if let Some(decl) = registry.category_for_tag(tag)? {
                        chosen = Some(decl);
                        break;
                    }
                }
                match chosen {
                    Some(decl) => (data.span, decl),
                    None => continue,
                }
            }
        };
        let index = intern(&mut palette, &mut by_id, decl);
        for cell in &mut paint[region.start..region.end] {
            *cell = Some(index);
        }
    }

    let mut out = Vec::new();
    let mut i = 0;
    while i < paint.len() {
        let Some(index) = paint[i] else {
            i += 1;
            continue;
        };
        let start = i;
        while i < paint.len() && paint[i] == Some(index) {
            i += 1;
        }
        let (category, label) = palette[index].clone();
        out.push(HighlightSpan { span: Span::new(start, i), category, label });
    }
    Ok(out)
}
