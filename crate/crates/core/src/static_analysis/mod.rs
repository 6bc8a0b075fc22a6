//! Static call-site extraction.
//!
//! Every source file is parsed into a [`syntax::SyntaxTree`]; call
//! expressions whose terminal callee segment matches the
//! [`catalog::FunctionCatalog`] become [`CallSite`]s.

pub mod catalog;
pub mod lexer;
pub mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{FileKind, PackageId, UnpackedTree};
use crate::types::{Category, Label, Language};

pub use catalog::{CatalogEntry, CatalogError, FunctionCatalog};
pub use syntax::{parse_source, CallInfo, SyntaxTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum StaticError {
    #[error("empty corpus: no profiles to compare")]
    EmptyCorpus,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    pub function_name: String,
    pub category: Category,
    pub file: PathBuf,
    pub line: u32,
    pub argument_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticProfile {
    pub package: PackageId,
    pub calls: Vec<CallSite>,
    pub per_category_counts: BTreeMap<Category, usize>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl StaticProfile {
    pub fn new(package: PackageId, calls: Vec<CallSite>, warnings: Vec<String>) -> StaticProfile {
        let mut per_category_counts: BTreeMap<Category, usize> = Category::COUNTED.iter().map(|&c| (c, 0)).collect();
        for call in &calls {
            *per_category_counts.entry(call.category).or_default() += 1;
        }
        StaticProfile { package, calls, per_category_counts, warnings }
    }

    /// Distinct cataloged function names used by the package.
    pub fn function_names(&self) -> BTreeSet<&str> {
        self.calls.iter().map(|c| c.function_name.as_str()).collect()
    }

    pub fn count(&self, category: Category) -> usize {
        self.per_category_counts.get(&category).copied().unwrap_or(0)
    }
}

/// Call-sites of one parsed file, in depth-first order.
pub fn extract_calls(tree: &SyntaxTree, catalog: &FunctionCatalog, file: &Path) -> Vec<CallSite> {
    tree.calls()
        .filter_map(|(node, call)| {
            let entry = catalog.lookup(tree.language, lookup_name(tree.language, call))?;
            Some(CallSite {
                function_name: entry.function_name.clone(),
                category: entry.category,
                file: file.to_path_buf(),
                line: node.span.line,
                argument_count: call.argument_count,
            })
        })
        .collect()
}

/// Ruby constructs objects with `Const.new`, so the class is the callee
/// of interest there.
fn lookup_name(language: Language, call: &CallInfo) -> &str {
    match call.callee.as_slice() {
        [.., class, new] if language == Language::Ruby && new == "new" => class,
        _ => call.terminal(),
    }
}

fn file_language(path: &Path) -> Option<Language> {
    path.extension().and_then(|e| e.to_str()).and_then(Language::from_extension)
}

/// Extracts call-sites from every source file of an unpacked package.
/// Files that fail to parse contribute nothing and leave a warning.
pub fn static_profile(package: PackageId, tree: &UnpackedTree, catalog: &FunctionCatalog) -> StaticProfile {
    let sources: Vec<_> = tree.files_of_kind(FileKind::Source).collect();
    let per_file: Vec<Result<Vec<CallSite>, String>> = sources
        .par_iter()
        .map(|file| {
            let Some(language) = file_language(&file.path) else {
                return Ok(Vec::new());
            };
            match parse_source(&tree.absolute(file), language) {
                Ok(syntax) => Ok(extract_calls(&syntax, catalog, &file.path)),
                Err(e) => Err(format!("{}: {e}", file.path.display())),
            }
        })
        .collect();
    let mut calls = Vec::new();
    let mut warnings = Vec::new();
    for result in per_file {
        match result {
            Ok(mut c) => calls.append(&mut c),
            Err(w) => {
                log::warn!("skipping unparsable source {w}");
                warnings.push(w);
            }
        }
    }
    StaticProfile::new(package, calls, warnings)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetAlgebraResult {
    pub s_same: BTreeSet<String>,
    pub s_r_minus: BTreeSet<String>,
    pub s_m_minus: BTreeSet<String>,
    /// Packages using each function, counted once per package.
    pub per_function_package_counts: BTreeMap<(String, Label), usize>,
}

impl SetAlgebraResult {
    pub fn package_count(&self, function: &str, label: Label) -> usize {
        self.per_function_package_counts.get(&(function.to_string(), label)).copied().unwrap_or(0)
    }
}

/// Compares the functions used by malicious and legitimate packages.
pub fn set_algebra(profiles_m: &[StaticProfile], profiles_r: &[StaticProfile]) -> Result<SetAlgebraResult, StaticError> {
    if profiles_m.is_empty() && profiles_r.is_empty() {
        return Err(StaticError::EmptyCorpus);
    }
    let mut counts = BTreeMap::new();
    let mut tally = |profiles: &[StaticProfile], label: Label| {
        let mut seen = BTreeSet::new();
        for p in profiles {
            for name in p.function_names() {
                *counts.entry((name.to_string(), label)).or_insert(0) += 1;
                seen.insert(name.to_string());
            }
        }
        seen
    };
    let malicious = tally(profiles_m, Label::Malicious);
    let legitimate = tally(profiles_r, Label::Legitimate);
    Ok(SetAlgebraResult {
        s_same: malicious.intersection(&legitimate).cloned().collect(),
        s_r_minus: legitimate.difference(&malicious).cloned().collect(),
        s_m_minus: malicious.difference(&legitimate).cloned().collect(),
        per_function_package_counts: counts,
    })
}

/// Writes one JSON object per call-site.
pub fn write_calls_jsonl<W: Write>(profile: &StaticProfile, mut out: W) -> Result<(), StaticError> {
    for call in &profile.calls {
        serde_json::to_writer(&mut out, call)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
