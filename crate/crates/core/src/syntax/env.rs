//! `\begin`/`\end` pairing over an already-parsed tree.
//!
//! Markers are collected in source order and matched by name so that the
//! number of properly nested pairs is maximal. A plain stack pass handles
//! the well-nested common case; only documents with mismatches pay for the
//! interval dynamic program. Ties are broken deterministically: dropping
//! the current marker wins over pairing it, and among equally good partners
//! the nearest one wins.

use crate::diagnostics::{codes, Diagnostic};
use crate::syntax::node::{Document, EnvPair, NodeId, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkerKind {
    Begin,
    End,
}

/// One `\begin` or `\end` occurrence, with its environment name interned
/// to an id (equal names share an id).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Marker {
    pub kind: MarkerKind,
    pub name: u32,
}

/// Maximum-cardinality properly-nested matching of begin/end markers.
/// Returns index pairs `(begin, end)` sorted by begin index.
pub fn match_markers(markers: &[Marker]) -> Vec<(usize, usize)> {
    if let Some(pairs) = stack_match(markers) {
        return pairs;
    }
    dp_match(markers)
}

/// Succeeds only when every marker pairs up with proper nesting; that
/// matching is then the unique non-crossing one and trivially maximal.
fn stack_match(markers: &[Marker]) -> Option<Vec<(usize, usize)>> {
    let mut stack: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for (idx, marker) in markers.iter().enumerate() {
        match marker.kind {
            MarkerKind::Begin => stack.push(idx),
            MarkerKind::End => {
                let begin = stack.pop()?;
                if markers[begin].name != marker.name {
                    return None;
                }
                pairs.push((begin, idx));
            }
        }
    }
    if stack.is_empty() {
        pairs.sort_unstable();
        Some(pairs)
    } else {
        None
    }
}

fn dp_match(markers: &[Marker]) -> Vec<(usize, usize)> {
    let n = markers.len();
    // dp[i][j] = max pairs within markers[i..j], flattened row-major.
    let width = n + 1;
    let mut dp = vec![0u32; width * width];
    let at = |i: usize, j: usize| i * width + j;
    for len in 2..=n {
        for i in 0..=(n - len) {
            let j = i + len;
            let mut best = dp[at(i + 1, j)];
            if markers[i].kind == MarkerKind::Begin {
                for k in (i + 1)..j {
                    if markers[k].kind == MarkerKind::End && markers[k].name == markers[i].name {
                        let cand = 1 + dp[at(i + 1, k)] + dp[at(k + 1, j)];
                        best = best.max(cand);
                    }
                }
            }
            dp[at(i, j)] = best;
        }
    }
    let mut pairs = Vec::new();
    let mut work = vec![(0usize, n)];
    while let Some((i, j)) = work.pop() {
        if j.saturating_sub(i) < 2 || dp[at(i, j)] == 0 {
            continue;
        }
        if dp[at(i + 1, j)] == dp[at(i, j)] {
            work.push((i + 1, j));
            continue;
        }
        let target = dp[at(i, j)];
        for k in (i + 1)..j {
            if markers[k].kind == MarkerKind::End
                && markers[k].name == markers[i].name
                && 1 + dp[at(i + 1, k)] + dp[at(k + 1, j)] == target
            {
                pairs.push((i, k));
                work.push((i + 1, k));
                work.push((k + 1, j));
                break;
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Finds all `\begin`/`\end` commands in the document, pairs them, and
/// reports nameless and unmatched markers. Unmatched begins still appear
/// in the pair list (with `end` absent) so later passes can treat their
/// body as running to the end of the enclosing group.
pub fn match_environments(doc: &Document) -> (Vec<EnvPair>, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let mut occurrences: Vec<(NodeId, MarkerKind, String)> = Vec::new();
    for id in doc.descendants() {
        let node = doc.node(id);
        if node.kind != NodeKind::Command {
            continue;
        }
        let kind = match doc.command_name(id) {
            Some("begin") => MarkerKind::Begin,
            Some("end") => MarkerKind::End,
            _ => continue,
        };
        match doc.env_name(id) {
            Some(name) => occurrences.push((id, kind, name)),
            None => diagnostics.push(Diagnostic::warning(
                codes::ENV_MISSING_NAME,
                "environment has no name",
                node.span,
            )),
        }
    }
    occurrences.sort_by_key(|(id, _, _)| doc.node(*id).span.start);

    let mut names: Vec<&str> = Vec::new();
    let markers: Vec<Marker> = occurrences
        .iter()
        .map(|(_, kind, name)| {
            let interned = match names.iter().position(|n| n == name) {
                Some(i) => i as u32,
                None => {
                    names.push(name);
                    (names.len() - 1) as u32
                }
            };
            Marker { kind: *kind, name: interned }
        })
        .collect();

    let matched = match_markers(&markers);
    let mut end_of: Vec<Option<usize>> = vec![None; markers.len()];
    let mut is_matched_end = vec![false; markers.len()];
    for &(b, e) in &matched {
        end_of[b] = Some(e);
        is_matched_end[e] = true;
    }

    let mut pairs = Vec::new();
    for (idx, (id, kind, name)) in occurrences.iter().enumerate() {
        match kind {
            MarkerKind::Begin => {
                let end = end_of[idx].map(|e| occurrences[e].0);
                if end.is_none() {
                    diagnostics.push(Diagnostic::warning(
                        codes::ENV_MISMATCH,
                        format!("\\begin{{{name}}} has no matching \\end"),
                        doc.node(*id).span,
                    ));
                }
                pairs.push(EnvPair { name: name.clone(), begin: *id, end });
            }
            MarkerKind::End => {
                if !is_matched_end[idx] {
                    diagnostics.push(Diagnostic::warning(
                        codes::ENV_MISMATCH,
                        format!("\\end{{{name}}} has no matching \\begin"),
                        doc.node(*id).span,
                    ));
                }
            }
        }
    }
    (pairs, diagnostics)
}
