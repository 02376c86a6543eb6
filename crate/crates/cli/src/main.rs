//! `flexitex`: command-line front end for the workspace tools.
//!
//! Exit codes: 0 on success (warnings included), 1 when diagnostics of
//! error severity were reported or a build failed, 2 on usage errors and
//! tool failures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use flexitex_core::build::{self, BuildConfig, BuildReport};
use flexitex_core::complete::complete;
use flexitex_core::diagnostics::Severity;
use flexitex_core::highlight::{highlight, HighlightSpan};
use flexitex_core::index::{ntriples, query as run_query, Object};
use flexitex_core::registry::{tag_document, Registry};
use flexitex_core::search::search;
use flexitex_core::syntax::{parse_with_file, Document, NodeId, NodeKind};
use flexitex_core::workspace::Workspace;
use flexitex_core::{Diagnostic, LineIndex};

#[derive(Parser)]
#[command(name = "flexitex", version, about = "Language tools for modular TeX workspaces")]
struct Cli {
    /// Workspace root; defaults to the current directory.
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a file and print its tree; diagnostics go to stderr.
    Parse { file: PathBuf },
    /// Print highlight spans for a file.
    Highlight {
        file: PathBuf,
        /// Render the source with ANSI colors instead of listing spans.
        #[arg(long)]
        ansi: bool,
    },
    /// Validate files (the whole workspace when none are given).
    Lint { files: Vec<PathBuf> },
    /// List completion candidates at a byte offset.
    Complete {
        file: PathBuf,
        offset: usize,
        /// Only offer candidates whose label starts with this.
        #[arg(long, default_value = "")]
        prefix: String,
    },
    /// Build or refresh the index (the whole workspace when no files are given).
    Index { files: Vec<PathBuf> },
    /// Run a conjunctive triple query against the workspace index.
    ///
    /// The token `<root>` stands for the root subject of --file (or of
    /// the only file in the workspace).
    Query {
        query: String,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Export the workspace index as N-Triples.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search definitions by keyword.
    Search { keywords: Vec<String> },
    /// Run a build workflow for a file.
    Build {
        file: PathBuf,
        /// Workflow name; `pdf` upgrades itself when a bibliography is used.
        #[arg(long, default_value = "pdf")]
        target: String,
        /// Build configuration file (falls back to $FLEXITEX_CONFIG, then
        /// <root>/flexitex.json, then the built-in defaults).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Rebuild whenever the file changes.
        #[arg(long)]
        watch: bool,
        /// Poll interval for --watch, in milliseconds.
        #[arg(long, default_value_t = 500)]
        debounce: u64,
    },
}

fn main() -> ExitCode {
    // Die quietly when the consumer of a pipe goes away (`flexitex … | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn severity_name(s: Severity) -> &'static str {
    match s {
        Severity::Error => "error",
        Severity::Warning => "warning",
        Severity::Info => "info",
    }
}

fn print_diagnostics(diags: &[Diagnostic], source_of: impl Fn(&str) -> Option<String>) {
    let mut indexes: BTreeMap<String, (String, LineIndex)> = BTreeMap::new();
    for d in diags {
        let file = d.file.clone().unwrap_or_else(|| "<buffer>".to_string());
        let place = match source_of(&file) {
            Some(src) => {
                let (_, index) = indexes
                    .entry(file.clone())
                    .or_insert_with(|| (src.clone(), LineIndex::new(&src)));
                let (line, col) = index.line_col(&src, d.span.start);
                format!("{file}:{line}:{col}")
            }
            None => format!("{file}:{}..{}", d.span.start, d.span.end),
        };
        eprintln!("{place}: {}: {} [{}]", severity_name(d.severity), d.message, d.code);
    }
}

fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

fn load_standalone(file: &Path) -> anyhow::Result<Document> {
    let source = std::fs::read_to_string(file)
        .with_context(|| format!("reading {}", file.display()))?;
    let registry = Registry::with_builtins();
    let doc = tag_document(
        parse_with_file(&source, file.display().to_string()),
        &registry,
    )?;
    Ok(doc)
}

fn open_workspace(cli_root: &Option<PathBuf>) -> anyhow::Result<(Workspace, PathBuf)> {
    let root = match cli_root {
        Some(r) => r.clone(),
        None => std::env::current_dir().context("finding the current directory")?,
    };
    let root = root
        .canonicalize()
        .with_context(|| format!("opening workspace root {}", root.display()))?;
    let ws = Workspace::open(&root, Registry::with_builtins())?;
    Ok((ws, root))
}

/// Workspace-relative path for a CLI file argument. Relative paths are
/// taken against the workspace root first, then the current directory.
fn to_rel(ws: &Workspace, file: &Path) -> anyhow::Result<String> {
    let candidates = if file.is_absolute() {
        vec![file.to_path_buf()]
    } else {
        vec![ws.root().join(file), file.to_path_buf()]
    };
    let abs = candidates
        .iter()
        .find_map(|c| c.canonicalize().ok())
        .with_context(|| format!("resolving {}", file.display()))?;
    Ok(ws.relative(&abs)?)
}

fn print_tree(doc: &Document, node: NodeId, depth: usize) {
    let data = doc.node(node);
    let indent = "  ".repeat(depth);
    let label = match data.kind {
        NodeKind::Command => format!(
            "Command \\{}",
            doc.command_name(node).unwrap_or_default()
        ),
        NodeKind::Word => format!("Word {:?}", doc.text(node)),
        NodeKind::Option => format!(
            "Option {}{}",
            data.delimiter.map(|d| d.open_char()).unwrap_or('?'),
            if data.closed { "" } else { " (unclosed)" }
        ),
        kind => format!("{kind:?}"),
    };
    let tags = if data.tags.is_empty() {
        String::new()
    } else {
        let list: Vec<&str> = data.tags.iter().map(|t| t.as_str()).collect();
        format!("  [{}]", list.join(", "))
    };
    println!("{indent}{label} @ {}..{}{tags}", data.span.start, data.span.end);
    for &child in &data.children {
        print_tree(doc, child, depth + 1);
    }
}

fn object_json(o: &Object) -> serde_json::Value {
    match o {
        Object::Iri(i) => serde_json::json!({ "kind": "iri", "value": i }),
        Object::Str(s) => serde_json::json!({ "kind": "string", "value": s }),
        Object::Int(n) => serde_json::json!({ "kind": "integer", "value": n }),
    }
}

fn object_text(o: &Object) -> String {
    match o {
        Object::Iri(i) => format!("<{i}>"),
        Object::Str(s) => format!("{s:?}"),
        Object::Int(n) => n.to_string(),
    }
}

const ANSI_COLORS: [u8; 6] = [34, 36, 33, 32, 35, 31];

fn print_ansi(source: &str, spans: &[HighlightSpan]) {
    let mut palette: BTreeMap<&str, u8> = BTreeMap::new();
    let mut cursor = 0;
    for span in spans {
        let next = palette.len() % ANSI_COLORS.len();
        let color = *palette
            .entry(span.category.as_str())
            .or_insert(ANSI_COLORS[next]);
        print!("{}", &source[cursor..span.span.start]);
        print!("\x1b[{color}m{}\x1b[0m", span.span.slice(source));
        cursor = span.span.end;
    }
    print!("{}", &source[cursor..]);
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Cmd::Parse { file } => {
            let doc = load_standalone(&file)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&doc.to_json())?);
            } else {
                print_tree(&doc, doc.root(), 0);
            }
            let name = file.display().to_string();
            let diags: Vec<Diagnostic> = doc
                .diagnostics
                .iter()
                .chain(&doc.env_diagnostics)
                .cloned()
                .map(|d| d.with_file(name.clone()))
                .collect();
            print_diagnostics(&diags, |_| Some(doc.source().to_string()));
            Ok(if has_errors(&diags) { 1 } else { 0 })
        }
        Cmd::Highlight { file, ansi } => {
            let doc = load_standalone(&file)?;
            let registry = Registry::with_builtins();
            let spans = highlight(&doc, &registry)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&spans)?);
            } else if ansi {
                print_ansi(doc.source(), &spans);
            } else {
                for s in &spans {
                    println!("{}..{}\t{}\t{}", s.span.start, s.span.end, s.label, s.category);
                }
            }
            Ok(0)
        }
        Cmd::Lint { files } => {
            let (ws, _) = open_workspace(&cli.root)?;
            let rels: Vec<String> = if files.is_empty() {
                ws.files().map(str::to_string).collect()
            } else {
                files
                    .iter()
                    .map(|f| to_rel(&ws, f))
                    .collect::<anyhow::Result<_>>()?
            };
            let mut all = Vec::new();
            for rel in &rels {
                all.extend(ws.validate(rel));
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&all)?);
            } else {
                print_diagnostics(&all, |f| ws.doc(f).map(|d| d.source().to_string()));
                if all.is_empty() {
                    eprintln!("{} file(s) clean", rels.len());
                }
            }
            Ok(if has_errors(&all) { 1 } else { 0 })
        }
        Cmd::Complete { file, offset, prefix } => {
            let (mut ws, _) = open_workspace(&cli.root)?;
            let rel = to_rel(&ws, &file)?;
            ws.index_all();
            let items = complete(&ws, &rel, offset, &prefix)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&items)?);
            } else {
                for item in &items {
                    let detail = item
                        .detail
                        .as_deref()
                        .map(|d| format!("\t— {d}"))
                        .unwrap_or_default();
                    println!("{:?}\t{}\t{}{detail}", item.kind, item.label, item.insert);
                }
            }
            Ok(0)
        }
        Cmd::Index { files } => {
            let (mut ws, _) = open_workspace(&cli.root)?;
            let rels: Vec<String> = if files.is_empty() {
                ws.files().map(str::to_string).collect()
            } else {
                files
                    .iter()
                    .map(|f| to_rel(&ws, f))
                    .collect::<anyhow::Result<_>>()?
            };
            let mut rows = Vec::new();
            for rel in &rels {
                let rebuilt = ws.ensure_indexed(rel);
                let triples = ws.store().file_triple_count(rel).unwrap_or(0);
                let root = ws.file_root(rel).unwrap_or("").to_string();
                rows.push(serde_json::json!({
                    "file": rel,
                    "root": root,
                    "triples": triples,
                    "rebuilt": rebuilt,
                }));
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                for row in &rows {
                    println!(
                        "{}: {} triples{}",
                        row["file"].as_str().unwrap_or(""),
                        row["triples"],
                        if row["rebuilt"].as_bool() == Some(true) { " (rebuilt)" } else { "" }
                    );
                }
                println!("total: {} triples", ws.store().len());
            }
            Ok(0)
        }
        Cmd::Query { query, file } => {
            let (mut ws, _) = open_workspace(&cli.root)?;
            ws.index_all();
            let text = if query.contains("<root>") {
                let rel = match &file {
                    Some(f) => to_rel(&ws, f)?,
                    None => {
                        let files: Vec<&str> = ws.files().collect();
                        match files.as_slice() {
                            [one] => one.to_string(),
                            _ => bail!(
                                "`<root>` needs --file when the workspace has {} files",
                                files.len()
                            ),
                        }
                    }
                };
                let root = ws
                    .file_root(&rel)
                    .with_context(|| format!("`{rel}` is not indexed"))?;
                query.replace("<root>", &format!("<{root}>"))
            } else {
                query
            };
            let rows = run_query(ws.store(), &text)?;
            if cli.json {
                let out: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|b| {
                        serde_json::Value::Object(
                            b.iter()
                                .map(|(k, v)| (k.clone(), object_json(v)))
                                .collect(),
                        )
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                for b in &rows {
                    let parts: Vec<String> = b
                        .iter()
                        .map(|(k, v)| format!("?{k} = {}", object_text(v)))
                        .collect();
                    println!("{}", parts.join("\t"));
                }
                eprintln!("{} solution(s)", rows.len());
            }
            Ok(0)
        }
        Cmd::Export { out } => {
            let (mut ws, _) = open_workspace(&cli.root)?;
            ws.index_all();
            let text = ntriples::export(ws.store().triples());
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Cmd::Search { keywords } => {
            let (mut ws, _) = open_workspace(&cli.root)?;
            ws.index_all();
            let hits = search(ws.store(), &keywords);
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&hits)?);
            } else {
                for hit in &hits {
                    let title = hit
                        .title
                        .as_deref()
                        .map(|t| format!(" ({t})"))
                        .unwrap_or_default();
                    println!(
                        "{}\t{}:{}..{}{title}\t{}",
                        hit.score, hit.file, hit.start, hit.end, hit.snippet
                    );
                }
                eprintln!("{} hit(s)", hits.len());
            }
            Ok(0)
        }
        Cmd::Build { file, target, config, watch, debounce } => {
            let (mut ws, root) = open_workspace(&cli.root)?;
            let rel = to_rel(&ws, &file)?;
            let config = load_build_config(&config, &root)?;
            let code = run_build(&ws, &root, &rel, &target, &config, cli.json)?;
            if !watch {
                return Ok(code);
            }
            let abs = root.join(&rel);
            let mut last = std::fs::metadata(&abs).and_then(|m| m.modified()).ok();
            loop {
                std::thread::sleep(std::time::Duration::from_millis(debounce));
                let now = std::fs::metadata(&abs).and_then(|m| m.modified()).ok();
                if now == last {
                    continue;
                }
                last = now;
                let source = std::fs::read_to_string(&abs)
                    .with_context(|| format!("re-reading {}", abs.display()))?;
                ws.insert(rel.clone(), &source)?;
                eprintln!("-- rebuilding {rel}");
                run_build(&ws, &root, &rel, &target, &config, cli.json)?;
            }
        }
    }
}

fn load_build_config(flag: &Option<PathBuf>, root: &Path) -> anyhow::Result<BuildConfig> {
    let path = flag
        .clone()
        .or_else(|| std::env::var_os("FLEXITEX_CONFIG").map(PathBuf::from))
        .or_else(|| {
            let default = root.join("flexitex.json");
            default.exists().then_some(default)
        });
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .with_context(|| format!("reading {}", p.display()))?;
            Ok(BuildConfig::from_json(&text)?)
        }
        None => Ok(build::default_config()),
    }
}

fn run_build(
    ws: &Workspace,
    root: &Path,
    rel: &str,
    target: &str,
    config: &BuildConfig,
    json: bool,
) -> anyhow::Result<u8> {
    let doc = ws
        .doc(rel)
        .with_context(|| format!("`{rel}` is not in the workspace"))?;
    let workflow = build::choose_workflow(config, target, doc);
    let plan = build::plan(config, &workflow)?;
    let report = build::execute(config, &plan, root, doc)?;
    print_build_report(&report, ws, json)?;
    Ok(if report.success { 0 } else { 1 })
}

fn print_build_report(report: &BuildReport, ws: &Workspace, json: bool) -> anyhow::Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(report)?);
        return Ok(());
    }
    for step in &report.steps {
        let status = match step.exit {
            Some(0) => "ok".to_string(),
            Some(code) => format!("failed ({code})"),
            None => "killed".to_string(),
        };
        eprintln!("[{}] {}", step.program, status);
        print_diagnostics(&step.diagnostics, |f| {
            ws.doc(f).map(|d| d.source().to_string())
        });
    }
    match (&report.product, report.success) {
        (Some(path), true) => eprintln!("{} -> {}", report.workflow, path.display()),
        (None, true) => eprintln!("{} finished", report.workflow),
        (_, false) => eprintln!("{} failed", report.workflow),
    }
    Ok(())
}
