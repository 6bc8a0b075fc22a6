use std::collections::BTreeMap;
use std::path::Path;

use fgi_core::dynamic_trace::{parse_trace_log, DynamicProfile};
use fgi_core::static_analysis::FunctionCatalog;
use fgi_core::Category;
use proptest::prelude::*;

fn reference_log() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/traces/npm-install.strace")).unwrap()
}

/// Categories of every call name that occurs in the reference log.
fn oracle_category(name: &str) -> Category {
    match name {
        "openat" | "read" | "fstat" | "close" | "getcwd" | "statx" | "mkdir" | "write" | "fchmod" | "getdents64"
        | "newfstatat" | "access" => Category::File,
        "socket" | "connect" | "getsockopt" | "setsockopt" | "sendto" | "recvfrom" => Category::Network,
        "execve" | "clone" | "wait4" | "exit_group" | "prctl" | "setsid" | "kill" => Category::Process,
        "brk" | "arch_prctl" | "mmap" | "mprotect" | "set_tid_address" | "rt_sigaction" | "futex" | "epoll_wait"
        | "poll" | "ioctl" | "rt_sigreturn" => Category::Other,
        other => panic!("oracle has no entry for `{other}`"),
    }
}

struct Tally {
    per_category: BTreeMap<Category, usize>,
    skipped: usize,
    resumed: usize,
}

/// Counts by looking at each line in isolation: signal and exit notices are
/// skipped, a resumed half never adds a call, anything else is one call.
fn line_count_oracle(log: &str) -> Tally {
    let mut t = Tally { per_category: BTreeMap::new(), skipped: 0, resumed: 0 };
    for line in log.lines() {
        let body = line.splitn(3, ' ').nth(2).unwrap();
        if body.starts_with("+++") || body.starts_with("---") {
            t.skipped += 1;
        } else if body.starts_with("<...") {
            t.resumed += 1;
        } else {
            let name = &body[..body.find('(').unwrap()];
            *t.per_category.entry(oracle_category(name)).or_default() += 1;
        }
    }
    t
}

#[test]
fn reference_log_matches_line_count_oracle() {
    let log = reference_log();
    assert_eq!(log.lines().count(), 600);
    let parsed = parse_trace_log(log.as_bytes(), &FunctionCatalog::builtin()).unwrap();
    assert!(parsed.malformed.is_empty(), "{:?}", parsed.malformed);
    let oracle = line_count_oracle(&log);
    assert!(oracle.resumed >= 5);
    assert_eq!(parsed.merged_lines, oracle.resumed);
    assert_eq!(parsed.skipped_lines, oracle.skipped);
    assert!(parsed.clean_exit);

    let mut got: BTreeMap<Category, usize> = BTreeMap::new();
    for e in &parsed.events {
        *got.entry(e.category).or_default() += 1;
    }
    assert_eq!(got, oracle.per_category);

    let profile = DynamicProfile::from_trace(
        fgi_core::corpus::PackageId { ecosystem: fgi_core::Ecosystem::Npm, name: "evil-pkg".into(), version: "1.0.0".into() },
        parsed,
    );
    for c in [Category::File, Category::Network, Category::Process] {
        assert_eq!(profile.count(c), oracle.per_category[&c], "{c:?}");
    }
}

#[test]
fn resumed_halves_are_joined_per_process() {
    let log = reference_log();
    let parsed = parse_trace_log(log.as_bytes(), &FunctionCatalog::builtin()).unwrap();
    let find = |pid: u32, name: &str| -> Vec<_> {
        parsed.events.iter().filter(|e| e.pid == Some(pid) && e.function_name == name).collect()
    };
    let npm_wait = find(4100, "wait4");
    assert_eq!(npm_wait.len(), 1);
    assert_eq!(npm_wait[0].return_value.as_deref(), Some("4107"));
    assert!(npm_wait[0].arguments.contains("WEXITSTATUS"));
    let sh_wait = find(4107, "wait4");
    assert_eq!(sh_wait[0].return_value.as_deref(), Some("4119"));
    let curl_connect = find(4112, "connect");
    assert_eq!(curl_connect[0].return_value.as_deref(), Some("0"));
    assert!(curl_connect[0].arguments.contains("203.0.113.5"));
    let curl_recv = find(4112, "recvfrom");
    assert_eq!(curl_recv[0].return_value.as_deref(), Some("151"));
    let sh_read = find(4107, "read");
    assert!(sh_read.iter().any(|e| e.arguments.starts_with("0,") && e.return_value.as_deref() == Some("0")));
}

#[test]
fn crafted_pairs_in_bracket_pid_form() {
    let log = "\
[pid  10] openat(AT_FDCWD, \"/etc/passwd\", O_RDONLY <unfinished ...>
[pid  11] connect(3, {sa_family=AF_INET, sin_port=htons(22)}, 16 <unfinished ...>
[pid  12] execve(\"/bin/id\", [\"id\"], 0x1 /* 3 vars */ <unfinished ...>
[pid  11] <... connect resumed>) = -1 ECONNREFUSED (Connection refused)
[pid  13] read(5,  <unfinished ...>
[pid  10] <... openat resumed>) = 3
[pid  14] clone(child_stack=NULL, flags=SIGCHLD <unfinished ...>
[pid  12] <... execve resumed>) = 0
[pid  14] <... clone resumed>) = 15
[pid  13] <... read resumed>\"root:x:0:0\"..., 4096) = 10
";
    let parsed = parse_trace_log(log.as_bytes(), &FunctionCatalog::builtin()).unwrap();
    assert_eq!(parsed.merged_lines, 5);
    assert!(parsed.malformed.is_empty());
    // Each merged call sits where its resumed half was.
    let summary: Vec<(Option<u32>, &str, Option<&str>)> =
        parsed.events.iter().map(|e| (e.pid, e.function_name.as_str(), e.return_value.as_deref())).collect();
    assert_eq!(
        summary,
        vec![
            (Some(11), "connect", Some("-1 ECONNREFUSED (Connection refused)")),
            (Some(10), "openat", Some("3")),
            (Some(12), "execve", Some("0")),
            (Some(14), "clone", Some("15")),
            (Some(13), "read", Some("10")),
        ]
    );
    assert!(parsed.events.windows(2).all(|w| w[0].sequence < w[1].sequence));
}

fn arb_line() -> impl Strategy<Value = String> {
    prop_oneof![
        ("[a-z_]{2,10}", "[a-z0-9, ]{0,20}", -2i64..100).prop_map(|(n, a, r)| format!("{n}({a}) = {r}")),
        Just("+++ exited with 0 +++".to_string()),
        Just("--- SIGCHLD {si_signo=SIGCHLD} ---".to_string()),
        "[ -~]{0,30}",
        ("[a-z]{3,6}", 1u32..4).prop_map(|(n, p)| format!("{p} {n}(1,  <unfinished ...>")),
        ("[a-z]{3,6}", 1u32..4).prop_map(|(n, p)| format!("{p} <... {n} resumed>) = 0")),
    ]
}

proptest! {
    #[test]
    fn every_line_is_accounted_for(lines in prop::collection::vec(arb_line(), 0..60)) {
        let log = lines.join("\n");
        let parsed = parse_trace_log(log.as_bytes(), &FunctionCatalog::builtin()).unwrap();
        let total = if log.is_empty() { 0 } else { log.lines().count() };
        prop_assert_eq!(parsed.events.len() + parsed.skipped_lines + parsed.malformed.len(), total - parsed.merged_lines);
    }
}
