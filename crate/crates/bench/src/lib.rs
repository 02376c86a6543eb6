//! Synthetic corpora for the benchmarks: lint-clean module files of
//! controllable size and import structure.

/// One module file with `n_symbols` symbol definitions, a worded
/// definition block, and an optional import of `import`.
pub fn module_source(serial: usize, n_symbols: usize, import: Option<&str>) -> String {
    let mut out = format!("\\begin{{module}}[id=mod{serial:03}]\n");
    if let Some(target) = import {
        let id = target.rsplit('/').next().unwrap();
        out.push_str(&format!("  \\importmodule[{target}]{{{id}}}\n"));
    }
    for k in 0..n_symbols {
        out.push_str(&format!(
            "  \\symdef{{sym{serial}n{k}}}[2]{{#1 \\oplus #2}}\n"
        ));
    }
    out.push_str(&format!(
        "  \\begin{{definition}}[id=d{serial}.def,for=sym{serial}n0,title=Block {serial}]\n"
    ));
    out.push_str("    the structured operation distributes over the carrier set\n");
    out.push_str("    and composition with $\\apply{a}{b}$ stays total\n");
    out.push_str("  \\end{definition}\n\\end{module}\n");
    out
}

/// `n_files` module files where file `i` imports file `i + 1`, as
/// `(workspace-relative path, source)` pairs.
pub fn chain_workspace(n_files: usize, symbols_per_file: usize) -> Vec<(String, String)> {
    (0..n_files)
        .map(|i| {
            let import = (i + 1 < n_files).then(|| format!("mod{:03}", i + 1));
            (
                format!("chain/mod{i:03}.tex"),
                module_source(i, symbols_per_file, import.as_deref()),
            )
        })
        .collect()
}

/// A single large document: `n_modules` modules back to back.
pub fn large_document(n_modules: usize) -> String {
    (0..n_modules)
        .map(|i| module_source(i, 4, None))
        .collect::<Vec<_>>()
        .join("\n")
}
