//! Whole-system guarantees, one test per promise.
//!
//! Each test here pins down one externally visible property of the
//! toolkit — parser totality, maximal environment matching, index
//! shape, oracle agreement for the workspace services, planner rules,
//! and query-engine correctness — mostly by comparing against
//! independent brute-force reimplementations on generated inputs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use flexitex_core::build::{
    self, bind, Binding, BuildConfig, InputCap, OutputCap, Program,
};
use flexitex_core::complete::{complete, CompletionItem, CompletionKind};
use flexitex_core::index::query::{query, Pattern, Term};
use flexitex_core::index::{ns, IndexSink, Object, Triple, TripleStore};
use flexitex_core::registry::{Handler, Registry, TagSink, WorkspaceInfo};
use flexitex_core::search::search;
use flexitex_core::syntax::env::{match_markers, Marker, MarkerKind};
use flexitex_core::syntax::{parse, parse_with_file, reparse, Document, Edit, NodeId};
use flexitex_core::{tag_document, Span, Tag, Workspace};

/// A small module in the style the toolkit is built for: a module with
/// one symbol and a definition that names it.
const MODULE_LISTING: &str = "\\begin{module}[id=sets-operations]\n  \\symdef{cart}{\\times}\n  \\begin{definition}[id=Cartesianproduct.def,display=flow,for=cart]\n    {\\twindef{Cartesian}{product}:}\n    $\\defeq{\\cart{A,B}}{\\setst{\\tup{a,b}}{\\conj{\\inset{a}{A},\\inset{b}{B}}}}$, call\n    $\\tup{a,b}$ {\\defin{pair}}.\n  \\end{definition}\n\\end{module}\n";

const REALS_LISTING: &str = "\\begin{module}[id=reals]\n  \\importmodule[../background/sets]{sets}\n  \\symdef{Reals}{\\mathcal{R}}\n  \\symdef{greater}[2]{#1>#2}\n  \\symdef{positiveReals}{\\Reals^+}\n  \\begin{definition}[id=posreals.def,title=Positive Real Numbers]\n    The set $\\positiveReals$ is the set of $\\inset{x}\\Reals$ such that $\\greater{x}0$\n  \\end{definition}\n\\end{module}\n";

const SETS_LISTING: &str = "\\begin{module}[id=sets]\n  \\symdef{inset}[2]{#1 \\in #2}\n  \\symdef{union}[2]{#1 \\cup #2}\n\\end{module}\n";

// ---------------------------------------------------------------------
// Parser totality and losslessness

fn random_char_soup(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'c', 'x', 'y', 'z', '0', '1', '9', ' ', ' ', '\n', '\n', '\t', '\\', '\\',
        '{', '{', '}', '}', '[', ']', '%', '$', '#', ',', '.', '=', '-', '_', 'é', '∀', '→',
    ];
    let len = rng.gen_range(0..300);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn random_bytes_lossy(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(0..300);
    let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Splits a source into coarse tokens (command, brace, word, space,
/// anything else) without consulting the parser under test.
fn coarse_tokens(src: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = src;
    while let Some(c) = rest.chars().next() {
        let taken = if c == '\\' {
            let tail = &rest[1..];
            let run = tail.chars().take_while(|c| c.is_ascii_alphabetic()).count();
            if run > 0 {
                1 + run
            } else {
                1 + tail.chars().next().map_or(0, char::len_utf8)
            }
        } else if c.is_alphanumeric() {
            rest.chars().take_while(|c| c.is_alphanumeric()).map(char::len_utf8).sum()
        } else if c.is_whitespace() {
            rest.chars().take_while(|c| c.is_whitespace()).map(char::len_utf8).sum()
        } else {
            c.len_utf8()
        };
        out.push(&rest[..taken]);
        rest = &rest[taken..];
    }
    out
}

#[test]
fn parser_accepts_anything_and_round_trips_byte_exactly() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1_0001);

    for case in 0..5_000 {
        let input = if case % 2 == 0 {
            random_char_soup(&mut rng)
        } else {
            random_bytes_lossy(&mut rng)
        };
        let doc = parse(&input);
        assert_eq!(doc.reconstruct(), input, "fuzz case {case} lost bytes");
    }

    let corpus = [MODULE_LISTING, REALS_LISTING, SETS_LISTING];
    for case in 0..5_000 {
        let mut tokens = coarse_tokens(corpus[case % corpus.len()]);
        tokens.shuffle(&mut rng);
        let input: String = tokens.concat();
        let doc = parse(&input);
        assert_eq!(doc.reconstruct(), input, "shuffle case {case} lost bytes");
    }

    assert!(
        start.elapsed() < Duration::from_secs(60),
        "10,000 parses took {:?}",
        start.elapsed()
    );
}

// ---------------------------------------------------------------------
// Incremental reparse

const FRAGMENTS: &[&str] = &[
    "\\begin{module}[id=alpha]\n",
    "\\end{module}\n",
    "\\begin{definition}[id=a.def,for=alpha]\n",
    "\\end{definition}\n",
    "\\symdef{alpha}[2]{#1+#2}\n",
    "\\importmodule[../background/sets]{sets}\n",
    "plain words in a row\n",
    "% a comment reaching the end of line\n",
    "$\\greater{x}{y}$ inline math\n",
    "{\\twindef{Cartesian}{product}:}\n",
    "\\end{definition} % stray end\n",
    "} stray close\n",
    "{ unclosed open\n",
    "[half open\n",
    "\\symdef{broken\n",
    "text with $ one math shift\n",
];

fn random_docish(rng: &mut ChaCha8Rng) -> String {
    let lines = rng.gen_range(1..=20);
    (0..lines).map(|_| *FRAGMENTS.choose(rng).unwrap()).collect()
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while i > 0 && !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

#[test]
fn incremental_reparse_equals_a_fresh_parse() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1_0002);

    for case in 0..1_000 {
        let source = random_docish(&mut rng);
        let doc = parse(&source);
        let a = floor_char_boundary(&source, rng.gen_range(0..=source.len()));
        let b = floor_char_boundary(&source, rng.gen_range(0..=source.len()));
        let span = Span::new(a.min(b), a.max(b));
        let replacement = if rng.gen_bool(0.2) {
            String::new()
        } else {
            FRAGMENTS.choose(&mut rng).unwrap().to_string()
        };
        let edit = Edit::new(span, replacement.clone());

        let incremental = reparse(&doc, &edit).expect("edit lies on char boundaries");
        let mut edited = source.clone();
        edited.replace_range(span.start..span.end, &replacement);
        let fresh = parse(&edited);

        assert_eq!(incremental.source(), fresh.source(), "case {case}");
        assert!(
            incremental.same_structure(&fresh),
            "case {case}: tree mismatch after editing {span:?} in {source:?}"
        );
        assert_eq!(incremental.diagnostics, fresh.diagnostics, "case {case}");
        assert_eq!(incremental.env_diagnostics, fresh.env_diagnostics, "case {case}");
    }

    assert!(
        start.elapsed() < Duration::from_secs(60),
        "1,000 reparse pairs took {:?}",
        start.elapsed()
    );
}

// ---------------------------------------------------------------------
// Maximal environment matching

/// Maximum properly nested matching by memoless recursion: either drop
/// the final marker, or (if it is an end) pair it with each compatible
/// begin, splitting what the pair encloses from what precedes it.
fn max_pairs_brute(m: &[Marker], lo: usize, hi: usize) -> u32 {
    if hi - lo < 2 {
        return 0;
    }
    let last = hi - 1;
    let mut best = max_pairs_brute(m, lo, last);
    if m[last].kind == MarkerKind::End {
        for k in lo..last {
            if m[k].kind == MarkerKind::Begin && m[k].name == m[last].name {
                let v = 1 + max_pairs_brute(m, lo, k) + max_pairs_brute(m, k + 1, last);
                best = best.max(v);
            }
        }
    }
    best
}

/// Pairs must point begin→end at equal names, use disjoint indices, and
/// never cross.
fn assert_well_formed(markers: &[Marker], pairs: &[(usize, usize)]) {
    let mut used = vec![false; markers.len()];
    for &(b, e) in pairs {
        assert!(b < e, "begin before end: {pairs:?}");
        assert_eq!(markers[b].kind, MarkerKind::Begin);
        assert_eq!(markers[e].kind, MarkerKind::End);
        assert_eq!(markers[b].name, markers[e].name, "name mismatch: {pairs:?}");
        assert!(!used[b] && !used[e], "index reused: {pairs:?}");
        used[b] = true;
        used[e] = true;
    }
    for &(b1, e1) in pairs {
        for &(b2, e2) in pairs {
            if b1 < b2 {
                assert!(e1 < b2 || e2 < e1, "crossing pairs: {pairs:?}");
            }
        }
    }
}

fn check_one_sequence(markers: &[Marker]) {
    let pairs = match_markers(markers);
    assert_well_formed(markers, &pairs);
    let best = max_pairs_brute(markers, 0, markers.len());
    assert_eq!(
        pairs.len() as u32,
        best,
        "not maximal on {markers:?}: got {pairs:?}"
    );
}

/// Enumerates every name sequence of length `n` over three names, up to
/// renaming: the first occurrence order of names is fixed, so exactly
/// one representative per renaming class is produced.
fn for_each_name_pattern(n: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(buf: &mut Vec<u32>, n: usize, high: u32, f: &mut impl FnMut(&[u32])) {
        if buf.len() == n {
            f(buf);
            return;
        }
        let top = (high + 1).min(2);
        for v in 0..=top {
            buf.push(v);
            rec(buf, n, high.max(v), f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(n);
    buf.push(0);
    rec(&mut buf, n, 0, f);
}

#[test]
fn environment_matching_is_always_maximal() {
    // The matcher only ever compares names for equality, so renaming
    // the environments cannot change its output. That invariance is
    // verified directly below; the exhaustive sweep therefore needs one
    // representative per renaming class only.
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1_0003);
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=10);
        let markers: Vec<Marker> = (0..n)
            .map(|_| Marker {
                kind: if rng.gen() { MarkerKind::Begin } else { MarkerKind::End },
                name: rng.gen_range(0..3),
            })
            .collect();
        let perm = {
            let mut p = [0u32, 1, 2];
            p.shuffle(&mut rng);
            p
        };
        let renamed: Vec<Marker> = markers
            .iter()
            .map(|m| Marker { kind: m.kind, name: perm[m.name as usize] })
            .collect();
        assert_eq!(
            match_markers(&markers),
            match_markers(&renamed),
            "renaming changed the matching for {markers:?}"
        );
        check_one_sequence(&markers);
    }

    // Every begin/end sequence of up to 10 markers over three names,
    // one representative per renaming class.
    let class_counts = [1u64, 2, 5, 14, 41, 122, 365, 1094, 3281, 9842];
    let mut total_cases = 0u64;
    let mut markers = Vec::with_capacity(10);
    for n in 1..=10usize {
        let mut classes = 0u64;
        for_each_name_pattern(n, &mut |names| {
            classes += 1;
            for mask in 0u32..(1 << n) {
                markers.clear();
                for (i, &name) in names.iter().enumerate() {
                    markers.push(Marker {
                        kind: if mask & (1 << i) != 0 {
                            MarkerKind::Begin
                        } else {
                            MarkerKind::End
                        },
                        name,
                    });
                }
                check_one_sequence(&markers);
                total_cases += 1;
            }
        });
        assert_eq!(classes, class_counts[n - 1], "class count for n={n}");
    }
    assert_eq!(total_cases, 12_094_258, "exhaustive sweep size");
}

// ---------------------------------------------------------------------
// Index shape of a module listing

fn indexed_workspace(files: &[(&str, &str)]) -> Workspace {
    let mut ws = Workspace::in_memory(Registry::with_builtins());
    for (path, source) in files {
        ws.insert(*path, source).unwrap();
    }
    ws.index_all();
    ws
}

#[test]
fn a_module_listing_indexes_to_the_expected_graph() {
    let ws = indexed_workspace(&[("sets/operations.tex", MODULE_LISTING)]);
    let store = ws.store();
    let root = ws.file_root("sets/operations.tex").unwrap();

    // root → theory, both as a plain link and as the first child.
    let modules = store.objects(root, &ns::ide("hasModule"));
    assert_eq!(modules.len(), 1, "one module under the file root");
    let theory = modules[0].as_iri().unwrap().to_string();
    let has = |s: &str, p: String, o: Object| store.contains(&Triple::new(s, p, o));
    assert!(has(root, ns::rdf_member(1), Object::Iri(theory.clone())));
    assert!(has(&theory, ns::rdf_type(), Object::Iri(ns::oo("Theory"))));
    assert_eq!(store.str_object(&theory, &ns::rdf("id")), Some("sets-operations"));

    // theory → symbol via hasSymbol, and the symbol is its first child.
    let symbols = store.objects(&theory, &ns::ide("hasSymbol"));
    assert_eq!(symbols.len(), 1, "one symbol in the module");
    let symbol = symbols[0].as_iri().unwrap().to_string();
    assert_eq!(store.str_object(&symbol, &ns::rdf("id")), Some("cart"));
    assert!(has(&theory, ns::rdf_member(1), Object::Iri(symbol.clone())));

    // theory → definition: second child, linked back via partOf.
    let defs = store.subjects_with(&ns::oo("partOf"), &Object::Iri(theory.clone()));
    assert_eq!(defs.len(), 1, "one definition in the module");
    let def = defs[0].to_string();
    assert!(has(&def, ns::rdf_type(), Object::Iri(ns::oo("Definition"))));
    assert!(has(&theory, ns::rdf_member(2), Object::Iri(def.clone())));
    assert_eq!(
        store.objects(&def, &ns::ide("for")),
        vec![&Object::Str("cart".to_string())]
    );

    // The module-id query names exactly this module.
    let rows = query(store, "?m a oo:Theory . ?m rdf:id ?id").unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["id"], Object::Str("sets-operations".to_string()));
    assert_eq!(rows[0]["m"], Object::Iri(theory));
}

// ---------------------------------------------------------------------
// Indexing more nodes never disturbs the semantic links

/// Claims every command name the built-ins leave alone in the listings
/// and mints an index node for each occurrence.
struct IndexEverything;

const EVERYTHING_TAG: &str = "test.everynode.command";

impl Handler for IndexEverything {
    fn id(&self) -> &str {
        "index-everything"
    }

    fn commands(&self) -> Vec<String> {
        ["twindef", "defeq", "cart", "setst", "tup", "conj", "inset", "defin", "greater"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn tags(&self) -> Vec<Tag> {
        vec![Tag::new(EVERYTHING_TAG)]
    }

    fn add_node_tags(&self, _doc: &Document, node: NodeId, sink: &mut TagSink) {
        sink.add(node, EVERYTHING_TAG);
    }

    fn index(&self, doc: &Document, node: NodeId, _tag: &Tag, sink: &mut IndexSink) -> bool {
        sink.add_iri(ns::rdf_type(), "urn:flexitex:test#Occurrence");
        if let Some(name) = doc.command_name(node) {
            sink.add_string("urn:flexitex:test#name", name);
        }
        true
    }
}

fn semantic_links(store: &TripleStore) -> BTreeSet<Triple> {
    let semantic = [ns::ide("hasModule"), ns::ide("hasSymbol"), ns::oo("partOf"), ns::ide("for")];
    store
        .triples()
        .filter(|t| semantic.contains(&t.p))
        .cloned()
        .collect()
}

#[test]
fn extra_index_handlers_leave_semantic_links_untouched() {
    let files = [
        ("sets/operations.tex", MODULE_LISTING),
        ("background/sets.tex", SETS_LISTING),
        ("work/reals.tex", REALS_LISTING),
    ];
    let plain = indexed_workspace(&files);

    let mut registry = Registry::with_builtins();
    registry.register(Box::new(IndexEverything)).unwrap();
    let mut enriched = Workspace::in_memory(registry);
    for (path, source) in files {
        enriched.insert(path, source).unwrap();
    }
    enriched.index_all();

    // The index itself did grow — the synthetic handler minted nodes,
    // which also renumbers children within their parents...
    let plain_triples: BTreeSet<Triple> = plain.store().triples().cloned().collect();
    let enriched_triples: BTreeSet<Triple> = enriched.store().triples().cloned().collect();
    assert!(
        enriched_triples.len() > plain_triples.len(),
        "the extra handler minted nothing"
    );
    let membership = |set: &BTreeSet<Triple>| -> BTreeSet<Triple> {
        set.iter()
            .filter(|t| t.p.starts_with(&ns::rdf("_")))
            .cloned()
            .collect()
    };
    assert_ne!(
        membership(&plain_triples),
        membership(&enriched_triples),
        "tree shape should differ once extra nodes are indexed"
    );

    // ...while every semantic link and every query over them is
    // byte-for-byte identical.
    assert_eq!(semantic_links(plain.store()), semantic_links(enriched.store()));
    for pattern in [
        "?root IDE:hasModule ?m",
        "?m IDE:hasSymbol ?s",
        "?d oo:partOf ?m",
        "?d IDE:for ?name",
        "?m a oo:Theory . ?m rdf:id ?id",
        "?d a oo:Definition . ?d IDE:for ?name . ?name2 IDE:hasSymbol ?s",
    ] {
        assert_eq!(
            query(plain.store(), pattern).unwrap(),
            query(enriched.store(), pattern).unwrap(),
            "query results drifted for `{pattern}`"
        );
    }
}

// ---------------------------------------------------------------------
// Generated workspaces versus a text-walk oracle

#[derive(Clone)]
struct GenSymbol {
    name: String,
    arity: i64,
    decl_start: usize,
}

#[derive(Clone)]
struct GenImport {
    /// As written between the brackets, without `.tex`.
    target_rel: String,
    id: String,
    cmd_start: usize,
    bracket_inner_start: usize,
    brace_inner_start: usize,
}

#[derive(Clone)]
struct GenDef {
    for_names: Vec<String>,
    words: Vec<String>,
    region: (usize, usize),
}

#[derive(Clone)]
struct GenModule {
    id: String,
    region: (usize, usize),
    symbols: Vec<GenSymbol>,
}

#[derive(Clone, Default)]
struct GenFile {
    source: String,
    modules: Vec<GenModule>,
    imports: Vec<GenImport>,
    defs: Vec<GenDef>,
    cursors: Vec<usize>,
}

struct GenWorkspace {
    files: BTreeMap<String, GenFile>,
}

const BODY_WORDS: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "set", "pair", "product", "closure", "bound", "limit",
];

/// Directory-relative resolution, restated on plain strings: `..` pops,
/// anything else pushes.
fn oracle_resolve(from: &str, target: &str) -> Option<String> {
    let dir = match from.rsplit_once('/') {
        Some((d, _)) => d,
        None => "",
    };
    let mut parts: Vec<&str> = dir.split('/').filter(|p| !p.is_empty()).collect();
    for seg in target.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            s => parts.push(s),
        }
    }
    let joined = parts.join("/");
    Some(if joined.ends_with(".tex") { joined } else { format!("{joined}.tex") })
}

fn generate_workspace(rng: &mut ChaCha8Rng, serial: usize) -> GenWorkspace {
    let n_files = rng.gen_range(2..=10);
    // First pass: skeletons, so imports can reference real ids.
    struct Skeleton {
        path: String,
        modules: Vec<(String, Vec<(String, i64)>)>,
    }
    let mut skeletons = Vec::new();
    for i in 0..n_files {
        let dir = if rng.gen_bool(0.5) { "" } else { "sub/" };
        let path = format!("{dir}f{i}.tex");
        let n_modules = rng.gen_range(1..=3);
        let mut modules = Vec::new();
        for k in 0..n_modules {
            let id = format!("m{serial}x{i}x{k}");
            let n_syms = rng.gen_range(0..=3);
            let symbols = (0..n_syms)
                .map(|j| (format!("sym{serial}w{i}k{k}j{j}"), rng.gen_range(0..=3) as i64))
                .collect();
            modules.push((id, symbols));
        }
        skeletons.push(Skeleton { path, modules });
    }

    let paths: Vec<String> = skeletons.iter().map(|s| s.path.clone()).collect();
    let rel_path_to = |from: &str, to_index: usize| -> String {
        let target = &paths[to_index];
        let from_dir = from.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
        let target_dir = target.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
        let stem = target.rsplit('/').next().unwrap().trim_end_matches(".tex");
        if from_dir == target_dir {
            stem.to_string()
        } else if from_dir.is_empty() {
            format!("{target_dir}/{stem}")
        } else {
            format!("../{}", if target_dir.is_empty() { stem.to_string() } else { format!("{target_dir}/{stem}") })
        }
    };

    // Second pass: emit the text, recording every offset the oracles need.
    let mut files = BTreeMap::new();
    for i in 0..n_files {
        let path = skeletons[i].path.clone();
        let mut gf = GenFile::default();
        for (id, symbols) in &skeletons[i].modules {
            gf.source.push_str(&format!("\\begin{{module}}[id={id}]\n"));
            let region_start = gf.source.len() - 1; // the newline after `]`
            let mut gm = GenModule { id: id.clone(), region: (region_start, 0), symbols: Vec::new() };

            enum Line {
                Symbol(usize),
                Import,
                Def,
                Cursor,
            }
            let mut lines: Vec<Line> = (0..symbols.len()).map(Line::Symbol).collect();
            for _ in 0..rng.gen_range(0..=2) {
                lines.push(Line::Import);
            }
            for _ in 0..rng.gen_range(0..=2) {
                lines.push(Line::Def);
            }
            for _ in 0..rng.gen_range(0..=1) {
                lines.push(Line::Cursor);
            }
            lines.shuffle(rng);

            for line in lines {
                match line {
                    Line::Symbol(j) => {
                        let (name, arity) = &symbols[j];
                        let decl_start = gf.source.len();
                        if *arity == 0 {
                            gf.source.push_str(&format!("\\symdef{{{name}}}{{X}}\n"));
                        } else {
                            gf.source.push_str(&format!("\\symdef{{{name}}}[{arity}]{{X}}\n"));
                        }
                        gm.symbols.push(GenSymbol { name: name.clone(), arity: *arity, decl_start });
                    }
                    Line::Import => {
                        let roll = rng.gen_range(0..100);
                        let (target_rel, import_id) = if roll < 70 {
                            let t = rng.gen_range(0..n_files);
                            let target_mods = &skeletons[t].modules;
                            let id = if rng.gen_bool(0.8) {
                                target_mods.choose(rng).unwrap().0.clone()
                            } else {
                                format!("nomod{serial}")
                            };
                            (rel_path_to(&path, t), id)
                        } else {
                            (format!("missing{}", rng.gen_range(0..3)), format!("ghostmod{serial}"))
                        };
                        let cmd_start = gf.source.len();
                        gf.source.push_str("\\importmodule[");
                        let bracket_inner_start = gf.source.len();
                        gf.source.push_str(&target_rel);
                        gf.source.push_str("]{");
                        let brace_inner_start = gf.source.len();
                        gf.source.push_str(&import_id);
                        gf.source.push_str("}\n");
                        gf.imports.push(GenImport {
                            target_rel,
                            id: import_id,
                            cmd_start,
                            bracket_inner_start,
                            brace_inner_start,
                        });
                    }
                    Line::Def => {
                        let n_for = rng.gen_range(0..=2.min(gm.symbols.len()));
                        let for_names: Vec<String> = gm
                            .symbols
                            .choose_multiple(rng, n_for)
                            .map(|s| s.name.clone())
                            .collect();
                        let n_words = rng.gen_range(3..=8);
                        let words: Vec<String> = (0..n_words)
                            .map(|_| BODY_WORDS.choose(rng).unwrap().to_string())
                            .collect();
                        gf.source.push_str("\\begin{definition}[id=d.def");
                        match for_names.len() {
                            0 => {}
                            1 => gf.source.push_str(&format!(",for={}", for_names[0])),
                            _ => gf.source.push_str(&format!(",for={{{}}}", for_names.join(","))),
                        }
                        if rng.gen_bool(0.3) {
                            gf.source.push_str(&format!(
                                ",title={{{}}}",
                                BODY_WORDS.choose(rng).unwrap()
                            ));
                        }
                        gf.source.push(']');
                        let def_region_start = gf.source.len();
                        gf.source.push('\n');
                        gf.source.push_str(&words.join(" "));
                        gf.source.push('\n');
                        let def_region_end = gf.source.len();
                        gf.source.push_str("\\end{definition}\n");
                        gf.defs.push(GenDef {
                            for_names,
                            words,
                            region: (def_region_start, def_region_end),
                        });
                    }
                    Line::Cursor => {
                        gf.cursors.push(gf.source.len());
                        gf.source.push('\n');
                    }
                }
            }

            gm.region.1 = gf.source.len();
            gf.source.push_str("\\end{module}\n");
            gf.modules.push(gm);
        }
        files.insert(path, gf);
    }
    GenWorkspace { files }
}

impl GenWorkspace {
    fn resolved_imports(&self, path: &str) -> Vec<String> {
        let Some(f) = self.files.get(path) else { return Vec::new() };
        f.imports
            .iter()
            .filter_map(|imp| oracle_resolve(path, &imp.target_rel))
            .collect()
    }

    fn closure(&self, seeds: impl IntoIterator<Item = String>) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<String> = seeds.into_iter().collect();
        while let Some(f) = queue.pop_front() {
            if !seen.insert(f.clone()) {
                continue;
            }
            for next in self.resolved_imports(&f) {
                if !seen.contains(&next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    fn module_ids(&self, path: &str) -> Vec<String> {
        self.files
            .get(path)
            .map(|f| f.modules.iter().map(|m| m.id.clone()).collect())
            .unwrap_or_default()
    }

    /// Expected (code, start) diagnostics for one file's imports.
    fn expected_import_diagnostics(&self, path: &str) -> BTreeSet<(&'static str, usize)> {
        let mut out = BTreeSet::new();
        let f = &self.files[path];
        for (n, imp) in f.imports.iter().enumerate() {
            let Some(resolved) = oracle_resolve(path, &imp.target_rel) else { continue };
            if !self.files.contains_key(&resolved) {
                out.insert(("missing-file", imp.bracket_inner_start));
                continue;
            }
            if self.closure([resolved.clone()]).contains(path) {
                out.insert(("import-cycle", imp.bracket_inner_start));
            }
            let others = f
                .imports
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != n)
                .filter_map(|(_, other)| oracle_resolve(path, &other.target_rel));
            if self.closure(others).contains(&resolved) {
                out.insert(("redundant-import", imp.bracket_inner_start));
            }
            if !self.module_ids(&resolved).contains(&imp.id) {
                out.insert(("unknown-module-id", imp.brace_inner_start));
            }
        }
        out
    }

    /// Everything the fallback completion should offer at `offset`,
    /// before prefix filtering: kind, label, insert.
    fn expected_completions(
        &self,
        path: &str,
        offset: usize,
    ) -> Vec<(CompletionKind, String, String)> {
        let insert_for = |name: &str, arity: i64| {
            let mut s = format!("\\{name}");
            for _ in 0..arity {
                s.push_str("{}");
            }
            s
        };
        let f = &self.files[path];
        let mut items = Vec::new();
        if let Some(module) = f
            .modules
            .iter()
            .filter(|m| m.region.0 <= offset && offset <= m.region.1)
            .min_by_key(|m| m.region.1 - m.region.0)
        {
            for sym in &module.symbols {
                if sym.decl_start < offset {
                    items.push((
                        CompletionKind::Macro,
                        sym.name.clone(),
                        insert_for(&sym.name, sym.arity),
                    ));
                }
            }
        }
        let seeds: Vec<String> = f
            .imports
            .iter()
            .filter(|imp| imp.cmd_start < offset)
            .filter_map(|imp| oracle_resolve(path, &imp.target_rel))
            .collect();
        for reached in self.closure(seeds) {
            let Some(rf) = self.files.get(&reached) else { continue };
            for module in &rf.modules {
                for sym in &module.symbols {
                    items.push((
                        CompletionKind::Macro,
                        sym.name.clone(),
                        insert_for(&sym.name, sym.arity),
                    ));
                }
            }
        }
        for (label, insert) in [
            ("module", "\\begin{module}[id=]\n\n\\end{module}"),
            ("definition", "\\begin{definition}[for=]\n\n\\end{definition}"),
            ("importmodule", "\\importmodule[]{}"),
            ("symdef", "\\symdef{}{}"),
        ] {
            items.push((CompletionKind::Snippet, label.to_string(), insert.to_string()));
        }
        items
    }

    /// Search results restated: conjunctive whole-word matches over
    /// definition words and defined-symbol names.
    fn expected_search(&self, keywords: &[String]) -> Vec<(String, i64, i64, usize)> {
        let mut hits = Vec::new();
        for (path, f) in &self.files {
            for def in &f.defs {
                let mut total = 0usize;
                let mut all = true;
                for kw in keywords {
                    let kw = kw.to_lowercase();
                    let words = def.words.iter().filter(|w| w.to_lowercase() == kw).count();
                    let fors =
                        def.for_names.iter().filter(|n| n.to_lowercase() == kw).count();
                    let n = words + fors;
                    if n == 0 {
                        all = false;
                        break;
                    }
                    total += n;
                }
                if all && !keywords.is_empty() {
                    hits.push((path.clone(), def.region.0 as i64, def.region.1 as i64, total));
                }
            }
        }
        hits.sort_by(|a, b| {
            b.3.cmp(&a.3).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(&b.1))
        });
        hits
    }
}

#[test]
fn workspace_services_agree_with_a_text_walk_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1_0006);
    for serial in 0..50 {
        let gen = generate_workspace(&mut rng, serial);
        let mut ws = Workspace::in_memory(Registry::with_builtins());
        for (path, gf) in &gen.files {
            ws.insert(path.clone(), &gf.source).unwrap();
        }
        ws.index_all();

        // Import validation.
        let import_codes =
            ["missing-file", "import-cycle", "redundant-import", "unknown-module-id"];
        for path in gen.files.keys() {
            let actual: BTreeSet<(&'static str, usize)> = ws
                .validate(path)
                .iter()
                .filter_map(|d| {
                    import_codes
                        .iter()
                        .find(|&&c| c == d.code)
                        .map(|&c| (c, d.span.start))
                })
                .collect();
            assert_eq!(
                actual,
                gen.expected_import_diagnostics(path),
                "workspace {serial}, file {path}:\n{}",
                gen.files[path].source
            );
        }

        // Fallback completion at every recorded cursor, plain and
        // prefix-filtered.
        for (path, gf) in &gen.files {
            for &cursor in &gf.cursors {
                for prefix in ["", "sym", "mod"] {
                    let actual: Vec<(CompletionKind, String, String)> = complete(
                        &ws, path, cursor, prefix,
                    )
                    .unwrap()
                    .into_iter()
                    .map(|i: CompletionItem| (i.kind, i.label, i.insert))
                    .collect();
                    let mut expected = gen.expected_completions(path, cursor);
                    expected.retain(|(_, label, _)| label.starts_with(prefix));
                    let mut seen = BTreeSet::new();
                    expected.retain(|(kind, label, _)| seen.insert((*kind, label.clone())));
                    expected.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
                    assert_eq!(
                        actual, expected,
                        "workspace {serial}, completion at {path}:{cursor} prefix {prefix:?}"
                    );
                }
            }
        }

        // Definition search for body words and symbol names.
        let mut keyword_sets: Vec<Vec<String>> = vec![
            vec![BODY_WORDS.choose(&mut rng).unwrap().to_string()],
            vec![
                BODY_WORDS.choose(&mut rng).unwrap().to_string(),
                BODY_WORDS.choose(&mut rng).unwrap().to_string(),
            ],
        ];
        let symbol_names: Vec<String> = gen
            .files
            .values()
            .flat_map(|f| f.modules.iter())
            .flat_map(|m| m.symbols.iter())
            .map(|s| s.name.clone())
            .collect();
        if let Some(name) = symbol_names.choose(&mut rng) {
            keyword_sets.push(vec![name.clone()]);
        }
        for keywords in keyword_sets {
            let actual: Vec<(String, i64, i64, usize)> = search(ws.store(), &keywords)
                .into_iter()
                .map(|h| (h.file, h.start, h.end, h.score))
                .collect();
            assert_eq!(
                actual,
                gen.expected_search(&keywords),
                "workspace {serial}, search {keywords:?}"
            );
        }
    }
}

// ---------------------------------------------------------------------
// Warm index versus reparsing

#[test]
fn warm_index_queries_beat_reparsing_the_import_closure() {
    let n_files = 100;
    let mut sources = Vec::new();
    for i in 0..n_files {
        let mut src = format!("\\begin{{module}}[id=m{i:03}]\n");
        for j in 0..6 {
            src.push_str(&format!("\\symdef{{sym{i:03}n{j}}}[2]{{#1 c #2}}\n"));
        }
        for j in 0..5 {
            src.push_str(&format!("filler words line {j} about bounds and limits\n"));
        }
        if i + 1 < n_files {
            src.push_str(&format!("\\importmodule[f{:03}]{{m{:03}}}\n", i + 1, i + 1));
        }
        src.push_str("\\end{module}\n");
        sources.push((format!("chain/f{i:03}.tex"), src));
    }

    let mut ws = Workspace::in_memory(Registry::with_builtins());
    for (path, src) in &sources {
        ws.insert(path.clone(), src).unwrap();
    }
    ws.index_all();
    let rebuilds_after_warmup = ws.store().rebuilds();

    // Answer one module-id lookup per file from the warm index.
    let mut warm = Duration::MAX;
    for _ in 0..3 {
        let t = Instant::now();
        for q in 0..n_files {
            let text = format!("?m a oo:Theory . ?m rdf:id \"m{q:03}\"");
            let rows = query(ws.store(), &text).unwrap();
            assert_eq!(rows.len(), 1, "module m{q:03} not found in the index");
        }
        warm = warm.min(t.elapsed());
    }

    // The same lookups with no index: parse every file in the import
    // closure of the first file and scan it for the module id.
    use flexitex_core::handlers::scan;
    let by_path: BTreeMap<&str, &str> =
        sources.iter().map(|(p, s)| (p.as_str(), s.as_str())).collect();
    let t = Instant::now();
    for q in 0..n_files {
        let wanted = format!("m{q:03}");
        let mut found = false;
        let mut queue = VecDeque::from(["chain/f000.tex".to_string()]);
        let mut seen = BTreeSet::new();
        while let Some(path) = queue.pop_front() {
            if !seen.insert(path.clone()) {
                continue;
            }
            let Some(src) = by_path.get(path.as_str()) else { continue };
            let doc = parse_with_file(*src, path.clone());
            for module in scan::modules(&doc) {
                if module.id.as_deref() == Some(&wanted) {
                    found = true;
                }
            }
            for import in scan::imports(&doc) {
                if let Some(target) = import.target {
                    if let Some(resolved) = ws.resolve_import(&path, &target) {
                        queue.push_back(resolved);
                    }
                }
            }
        }
        assert!(found, "module {wanted} not reachable by reparsing");
    }
    let cold = t.elapsed();

    assert!(
        cold >= warm * 10,
        "warm index gave only {:.1}x over reparsing (warm {warm:?}, reparse {cold:?})",
        cold.as_secs_f64() / warm.as_secs_f64()
    );

    // Nothing changed, so nothing may rebuild.
    let paths: Vec<String> = ws.files().map(str::to_string).collect();
    for path in &paths {
        assert!(!ws.ensure_indexed(path), "{path} rebuilt without a change");
    }
    assert_eq!(ws.store().rebuilds(), rebuilds_after_warmup);
}

// ---------------------------------------------------------------------
// Build planning and execution

fn capability_programs() -> Vec<Program> {
    let input_sets: [&[InputCap]; 3] = [
        &[InputCap::Stdin],
        &[InputCap::File],
        &[InputCap::Stdin, InputCap::File],
    ];
    let output_sets: [&[OutputCap]; 7] = [
        &[OutputCap::Stdout],
        &[OutputCap::File],
        &[OutputCap::MultiFile],
        &[OutputCap::Stdout, OutputCap::File],
        &[OutputCap::Stdout, OutputCap::MultiFile],
        &[OutputCap::File, OutputCap::MultiFile],
        &[OutputCap::Stdout, OutputCap::File, OutputCap::MultiFile],
    ];
    let mut programs = Vec::new();
    for (i, ins) in input_sets.iter().enumerate() {
        for (j, outs) in output_sets.iter().enumerate() {
            programs.push(Program {
                id: format!("p{i}x{j}"),
                command: vec!["true".to_string()],
                input: ins.to_vec(),
                output: outs.to_vec(),
                output_ext: Some("out".to_string()),
                parse: Vec::new(),
            });
        }
    }
    programs
}

/// The handoff rule, restated: a scatterer needs a file reader sharing
/// its directory; stdout into stdin pipes; any remaining file-capable
/// pair goes through a temp file; nothing else connects.
fn expected_handoff(a: &Program, b: &Program) -> Option<Binding> {
    if a.writes_many() {
        return b.reads_file().then_some(Binding::WorkDir);
    }
    if a.writes_stdout() && b.reads_stdin() {
        return Some(Binding::Pipe);
    }
    if (a.writes_stdout() || a.writes_file()) && b.reads_file() {
        return Some(Binding::TempFile);
    }
    None
}

fn expected_chain(programs: &[&Program]) -> Option<Vec<Binding>> {
    programs
        .windows(2)
        .map(|w| expected_handoff(w[0], w[1]))
        .collect()
}

fn check_chain(config: &mut BuildConfig, chain: &[usize]) {
    let ids: Vec<String> = chain.iter().map(|&i| format!("p{}x{}", i / 7, i % 7)).collect();
    config.workflows.insert("probe".to_string(), ids.clone());
    let programs: Vec<&Program> = {
        // Look the programs up the same way the planner will.
        let cfg: &BuildConfig = config;
        ids.iter().map(|id| cfg.program(id).unwrap()).collect()
    };
    let expected = expected_chain(&programs);
    match (build::plan(config, "probe"), expected) {
        (Ok(plan), Some(bindings)) => {
            let got: Vec<Binding> =
                plan.steps.iter().filter_map(|s| s.handoff).collect();
            assert_eq!(got, bindings, "handoffs for {ids:?}");
            assert_eq!(plan.steps.last().unwrap().handoff, None);
        }
        (Err(flexitex_core::Error::Binding { .. }), None) => {}
        (got, expected) => {
            panic!("chain {ids:?}: planner said {got:?}, rule says {expected:?}")
        }
    }
}

#[test]
fn build_planning_and_execution_honor_the_capability_rule() {
    let mut config = BuildConfig {
        programs: capability_programs(),
        workflows: BTreeMap::new(),
    };
    let n = config.programs.len();
    assert_eq!(n, 21);

    // Every pair, directly against the rule.
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&config.programs[i], &config.programs[j]);
            match (bind(a, b), expected_handoff(a, b)) {
                (Ok(got), Some(want)) => assert_eq!(got, want, "{} -> {}", a.id, b.id),
                (Err(flexitex_core::Error::Binding { .. }), None) => {}
                (got, want) => {
                    panic!("{} -> {}: bind said {got:?}, rule says {want:?}", a.id, b.id)
                }
            }
        }
    }

    // Every chain of up to four steps, then a seeded sample of longer
    // ones, against the pairwise fold.
    let mut checked = 0u64;
    for len in 1..=4usize {
        let total = (n as u64).pow(len as u32);
        for mut code in 0..total {
            let mut chain = Vec::with_capacity(len);
            for _ in 0..len {
                chain.push((code % n as u64) as usize);
                code /= n as u64;
            }
            check_chain(&mut config, &chain);
            checked += 1;
        }
    }
    assert_eq!(checked, 21 + 441 + 9_261 + 194_481);
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1_0008);
    for _ in 0..500_000 {
        let len = rng.gen_range(5..=6);
        let chain: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
        check_chain(&mut config, &chain);
    }

    // A three-step pipe chain must hand the payload through untouched.
    let payload = "line one\nsymbols: αβγ ∀x\nline three, unterminated";
    let root = tempfile::tempdir().unwrap();
    std::fs::write(root.path().join("doc.tex"), payload).unwrap();
    let cat = |id: &str| Program {
        id: id.to_string(),
        command: vec!["cat".to_string()],
        input: vec![InputCap::Stdin],
        output: vec![OutputCap::Stdout],
        output_ext: Some("txt".to_string()),
        parse: Vec::new(),
    };
    let pipeline = BuildConfig {
        programs: vec![cat("one"), cat("two"), cat("three")],
        workflows: BTreeMap::from([(
            "copy".to_string(),
            vec!["one".to_string(), "two".to_string(), "three".to_string()],
        )]),
    };
    let plan = build::plan(&pipeline, "copy").unwrap();
    let handoffs: Vec<Binding> = plan.steps.iter().filter_map(|s| s.handoff).collect();
    assert_eq!(handoffs, [Binding::Pipe, Binding::Pipe]);
    let doc = tag_document(
        parse_with_file(payload, "doc.tex"),
        &Registry::with_builtins(),
    )
    .unwrap();
    let report = build::execute(&pipeline, &plan, root.path(), &doc).unwrap();
    assert!(report.success);
    let product = report.product.expect("pipeline produces a file");
    assert_eq!(std::fs::read_to_string(product).unwrap(), payload);

    // A document with a bibliography picks the bibliography workflow.
    let defaults = build::default_config();
    let plain = parse_with_file("\\begin{module}[id=m]\n\\end{module}\n", "a.tex");
    assert_eq!(build::choose_workflow(&defaults, "pdf", &plain), "pdf");
    let with_bib = parse_with_file(
        "text\n\\bibliography{refs}\n\\bibliographystyle{plain}\n",
        "b.tex",
    );
    assert_eq!(build::choose_workflow(&defaults, "pdf", &with_bib), "pdf_bib");
    assert_eq!(build::choose_workflow(&defaults, "xhtml", &with_bib), "xhtml");
}

// ---------------------------------------------------------------------
// Conjunctive queries versus a nested-loop oracle

fn random_object(rng: &mut ChaCha8Rng) -> Object {
    match rng.gen_range(0..3) {
        0 => Object::Iri(format!("urn:t:n{}", rng.gen_range(0..6))),
        1 => Object::Str(format!("w{}", rng.gen_range(0..4))),
        _ => Object::Int(rng.gen_range(0..4)),
    }
}

fn random_store(rng: &mut ChaCha8Rng) -> TripleStore {
    let n = rng.gen_range(5..=40);
    TripleStore::from_triples((0..n).map(|_| {
        Triple::new(
            format!("urn:t:n{}", rng.gen_range(0..6)),
            format!("urn:t:p{}", rng.gen_range(0..4)),
            random_object(rng),
        )
    }))
}

/// The query parser only admits variables and IRIs in subject and
/// predicate position, so those slots never draw a literal.
fn random_term(rng: &mut ChaCha8Rng, iri_only: bool) -> Term {
    if rng.gen_bool(0.45) {
        return Term::Var(["a", "b", "c", "d"].choose(rng).unwrap().to_string());
    }
    if iri_only {
        let pool = [
            format!("urn:t:n{}", rng.gen_range(0..6)),
            format!("urn:t:p{}", rng.gen_range(0..4)),
        ];
        return Term::Iri(pool.choose(rng).unwrap().clone());
    }
    match random_object(rng) {
        Object::Iri(i) => Term::Iri(i),
        Object::Str(s) => Term::Str(s),
        Object::Int(n) => Term::Int(n),
    }
}

fn render_term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Iri(i) => format!("<{i}>"),
        Term::Str(s) => format!("{s:?}"),
        Term::Int(n) => n.to_string(),
    }
}

fn term_matches(
    term: &Term,
    value: &Object,
    binding: &mut BTreeMap<String, Object>,
    undo: &mut Vec<String>,
) -> bool {
    match term {
        Term::Var(v) => match binding.get(v) {
            Some(bound) => bound == value,
            None => {
                binding.insert(v.clone(), value.clone());
                undo.push(v.clone());
                true
            }
        },
        Term::Iri(i) => matches!(value, Object::Iri(x) if x == i),
        Term::Str(s) => matches!(value, Object::Str(x) if x == s),
        Term::Int(n) => matches!(value, Object::Int(x) if x == n),
    }
}

fn nested_loop_solve(
    store: &TripleStore,
    patterns: &[Pattern],
    binding: &mut BTreeMap<String, Object>,
    out: &mut BTreeSet<BTreeMap<String, Object>>,
) {
    let Some(pattern) = patterns.first() else {
        out.insert(binding.clone());
        return;
    };
    for triple in store.triples() {
        let mut undo = Vec::new();
        let s = Object::Iri(triple.s.clone());
        let p = Object::Iri(triple.p.clone());
        let hit = term_matches(&pattern.s, &s, binding, &mut undo)
            && term_matches(&pattern.p, &p, binding, &mut undo)
            && term_matches(&pattern.o, &triple.o, binding, &mut undo);
        if hit {
            nested_loop_solve(store, &patterns[1..], binding, out);
        }
        for v in undo {
            binding.remove(&v);
        }
    }
}

#[test]
fn conjunctive_queries_match_a_nested_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1_0009);
    for store_case in 0..200 {
        let store = random_store(&mut rng);
        for query_case in 0..50 {
            let n_patterns = rng.gen_range(1..=3);
            let patterns: Vec<Pattern> = (0..n_patterns)
                .map(|_| Pattern {
                    s: random_term(&mut rng, true),
                    p: random_term(&mut rng, true),
                    o: random_term(&mut rng, false),
                })
                .collect();
            let text: String = patterns
                .iter()
                .map(|p| {
                    format!("{} {} {}", render_term(&p.s), render_term(&p.p), render_term(&p.o))
                })
                .collect::<Vec<_>>()
                .join(" . ");

            let mut expected = BTreeSet::new();
            nested_loop_solve(&store, &patterns, &mut BTreeMap::new(), &mut expected);
            let expected: Vec<BTreeMap<String, Object>> = expected.into_iter().collect();

            let got = query(&store, &text).unwrap();
            assert_eq!(
                got, expected,
                "store {store_case}, query {query_case}: `{text}`"
            );
        }
    }
}
