//! Install-time system call traces.
//!
//! Logs are strace text output, optionally produced with `-f` so lines carry
//! a pid prefix. Running the install itself is delegated to an external,
//! user-configured runner (see [`runner`]); everything else works from
//! recorded logs.

pub mod runner;
pub mod syscalls;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::PackageId;
use crate::static_analysis::FunctionCatalog;
use crate::types::{Category, Language};

pub use runner::{run_sandboxed_install, NetworkPolicy, RunnerConfig, SandboxRunSpec};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace log not found: {0}")]
    MissingLog(String),
    #[error("no sandbox runner configured")]
    RunnerUnavailable,
    #[error("sandboxed install timed out after {seconds}s; partial log at {partial_log}")]
    Timeout { seconds: u64, partial_log: String },
    #[error("runner reported an isolation violation: {0}")]
    IsolationViolation(String),
    #[error("runner failed: {0}")]
    RunnerFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub sequence: usize,
    pub function_name: String,
    pub category: Category,
    pub arguments: String,
    pub return_value: Option<String>,
    pub pid: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedLine {
    /// 1-based line number in the log.
    pub line: usize,
    pub text: String,
}

/// Result of parsing one log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedTrace {
    pub events: Vec<TraceEvent>,
    /// Signal, exit, attach notices and blank lines.
    pub skipped_lines: usize,
    pub malformed: Vec<MalformedLine>,
    /// `<unfinished ...>` lines later merged with their resumption.
    pub merged_lines: usize,
    /// Last line was `+++ exited with 0 +++`.
    pub clean_exit: bool,
}

/// Maps names to categories: the syscall table first, then the function
/// catalog in any language.
pub struct Categorizer<'c> {
    catalog: &'c FunctionCatalog,
}

impl<'c> Categorizer<'c> {
    pub fn new(catalog: &'c FunctionCatalog) -> Self {
        Categorizer { catalog }
    }

    pub fn categorize(&self, name: &str) -> Category {
        if let Some(c) = syscalls::category(name) {
            return c;
        }
        [Language::Python, Language::JavaScript, Language::Ruby]
            .iter()
            .find_map(|&l| self.catalog.lookup(l, name))
            .map(|e| e.category)
            .unwrap_or(Category::Other)
    }
}

/// Strips an optional pid prefix (`1234 ` or `[pid 1234] `) and an optional
/// timestamp.
fn split_prefix(line: &str) -> (Option<u32>, &str) {
    let mut rest = line.trim_start();
    let mut pid = None;
    if let Some(r) = rest.strip_prefix("[pid") {
        if let Some(end) = r.find(']') {
            pid = r[..end].trim().parse().ok();
            rest = r[end + 1..].trim_start();
        }
    } else {
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        if digits > 0 && rest[digits..].starts_with(char::is_whitespace) {
            pid = rest[..digits].parse().ok();
            rest = rest[digits..].trim_start();
        }
    }
    // -t / -tt / -ttt / -r timestamps
    let stamp = rest.bytes().take_while(|b| b.is_ascii_digit() || *b == b':' || *b == b'.').count();
    if stamp > 0 && rest[stamp..].starts_with(' ') && rest[..stamp].contains(['.', ':']) {
        rest = rest[stamp..].trim_start();
    }
    (pid, rest)
}

/// Index just past the `)` that closes the argument list, scanning from
/// inside the list with quote and nesting awareness.
fn close_of_args(s: &str, start_depth: usize) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut depth = start_depth;
    let mut i = 0;
    let mut in_str = false;
    while i < bytes.len() {
        let b = bytes[i];
        if in_str {
            match b {
                b'\\' => i += 1,
                b'"' => in_str = false,
                _ => {}
            }
        } else {
            match b {
                b'"' => in_str = true,
                b'(' | b'[' | b'{' => depth += 1,
                b')' | b']' | b'}' => {
                    depth = depth.checked_sub(1)?;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    None
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Splits `= retval` off the text following the argument list.
fn return_value(after: &str) -> Option<Option<String>> {
    let after = after.trim();
    if after.is_empty() {
        return Some(None);
    }
    let value = after.strip_prefix('=')?.trim();
    Some((!value.is_empty()).then(|| value.to_string()))
}

enum LineKind {
    Skip,
    Complete { name: String, args: String, ret: Option<String> },
    Unfinished { name: String, partial: String },
    Resumed { name: String, tail: String, ret: Option<String> },
    Malformed,
}

fn classify_line(body: &str) -> LineKind {
    let body = body.trim_end();
    if body.is_empty()
        || body.starts_with("---")
        || body.starts_with("+++")
        || body.starts_with("strace:")
        || body.starts_with("Process ")
    {
        return LineKind::Skip;
    }
    if let Some(rest) = body.strip_prefix("<...") {
        let Some((name, tail)) = rest.trim_start().split_once(" resumed>") else {
            return LineKind::Malformed;
        };
        let name = name.trim();
        if !is_name(name) {
            return LineKind::Malformed;
        }
        let tail = tail.trim_start();
        // the tail closes the argument list opened on the unfinished line
        let (args, after) = match close_of_args(tail, 1) {
            Some(end) => (&tail[..end - 1], &tail[end..]),
            None => return LineKind::Malformed,
        };
        return match return_value(after) {
            Some(ret) => LineKind::Resumed { name: name.to_string(), tail: args.trim().to_string(), ret },
            None => LineKind::Malformed,
        };
    }
    let Some(open) = body.find('(') else { return LineKind::Malformed };
    let name = body[..open].trim();
    if !is_name(name) {
        return LineKind::Malformed;
    }
    let rest = &body[open + 1..];
    if let Some(partial) = rest.strip_suffix("<unfinished ...>") {
        return LineKind::Unfinished { name: name.to_string(), partial: partial.trim().trim_end_matches(',').trim().to_string() };
    }
    let Some(end) = close_of_args(rest, 1) else { return LineKind::Malformed };
    match return_value(&rest[end..]) {
        Some(ret) => LineKind::Complete { name: name.to_string(), args: rest[..end - 1].to_string(), ret },
        None => LineKind::Malformed,
    }
}

/// Parses a strace text log. Malformed lines are recorded and skipped.
pub fn parse_trace_log<R: Read>(log: R, catalog: &FunctionCatalog) -> Result<ParsedTrace, TraceError> {
    let categorizer = Categorizer::new(catalog);
    let mut out = ParsedTrace::default();
    let mut pending: HashMap<(Option<u32>, String), String> = HashMap::new();
    let mut last_line = String::new();
    let emit = |out: &mut ParsedTrace, pid, name: String, arguments: String, return_value| {
        let category = categorizer.categorize(&name);
        let sequence = out.events.len();
        out.events.push(TraceEvent { sequence, function_name: name, category, arguments, return_value, pid });
    };
    for (idx, line) in BufReader::new(log).lines().enumerate() {
        let raw = line?;
        let (pid, body) = split_prefix(&raw);
        if !raw.trim().is_empty() {
            last_line = body.trim().to_string();
        }
        match classify_line(body) {
            LineKind::Skip => out.skipped_lines += 1,
            LineKind::Complete { name, args, ret } => emit(&mut out, pid, name, args, ret),
            LineKind::Unfinished { name, partial } => {
                out.merged_lines += 1;
                pending.insert((pid, name), partial);
            }
            LineKind::Resumed { name, tail, ret } => {
                let head = pending.remove(&(pid, name.clone())).unwrap_or_default();
                let args = match (head.is_empty(), tail.is_empty()) {
                    (true, _) => tail,
                    (false, true) => head,
                    (false, false) => format!("{head}, {tail}"),
                };
                emit(&mut out, pid, name, args, ret)
            }
            LineKind::Malformed => out.malformed.push(MalformedLine { line: idx + 1, text: raw.clone() }),
        }
    }
    // calls still unfinished at the end (killed mid-call) count as events
    let mut leftovers: Vec<_> = pending.into_iter().collect();
    leftovers.sort();
    for ((pid, name), args) in leftovers {
        out.merged_lines -= 1;
        emit(&mut out, pid, name, args, None);
    }
    out.clean_exit = last_line == "+++ exited with 0 +++";
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicProfile {
    pub package: PackageId,
    pub events: Vec<TraceEvent>,
    /// Counts for network, file and process; `other` is excluded.
    pub per_category_counts: BTreeMap<Category, usize>,
    pub succeeded: bool,
    pub skipped_lines: usize,
    pub malformed: Vec<MalformedLine>,
}

impl DynamicProfile {
    pub fn from_trace(package: PackageId, trace: ParsedTrace) -> DynamicProfile {
        let mut per_category_counts: BTreeMap<Category, usize> = Category::COUNTED.iter().map(|&c| (c, 0)).collect();
        for e in &trace.events {
            if let Some(n) = per_category_counts.get_mut(&e.category) {
                *n += 1;
            }
        }
        DynamicProfile {
            package,
            events: trace.events,
            per_category_counts,
            succeeded: trace.clean_exit,
            skipped_lines: trace.skipped_lines,
            malformed: trace.malformed,
        }
    }

    pub fn count(&self, category: Category) -> usize {
        self.per_category_counts.get(&category).copied().unwrap_or(0)
    }

    /// Raw events in the counted categories.
    pub fn raw_count(&self) -> usize {
        self.per_category_counts.values().sum()
    }

    /// Distinct names among counted events.
    pub fn distinct_names(&self) -> BTreeSet<&str> {
        self.events.iter().filter(|e| e.category != Category::Other).map(|e| e.function_name.as_str()).collect()
    }

    pub fn write_events_jsonl<W: Write>(&self, mut out: W) -> Result<(), TraceError> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn dynamic_profile(package: PackageId, log_path: &Path, catalog: &FunctionCatalog) -> Result<DynamicProfile, TraceError> {
    let file = fs::File::open(log_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => TraceError::MissingLog(log_path.display().to_string()),
        _ => TraceError::Io(e),
    })?;
    let trace = parse_trace_log(file, catalog)?;
    for m in &trace.malformed {
        log::warn!("{}:{}: malformed trace line", log_path.display(), m.line);
    }
    Ok(DynamicProfile::from_trace(package, trace))
}
