//! Seeded synthetic package profiles with the label signal observed in
//! real malicious and legitimate packages.
#![allow(dead_code)]

use std::path::PathBuf;

use fgi_core::corpus::{PackageId, PackageRef};
use fgi_core::dynamic_trace::{DynamicProfile, ParsedTrace, TraceEvent};
use fgi_core::metadata::{metadata_features, Dependency, PackageMetadata, Person};
use fgi_core::static_analysis::{CallSite, StaticProfile};
use fgi_core::{Category, Ecosystem, FgiProfile, Label};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "a", "simple", "fast", "library", "for", "parsing", "json", "http", "client", "with", "support", "async",
    "streaming", "data", "tools", "utility", "command", "line", "interface", "logging", "config", "files",
    "testing", "framework", "plugin", "python", "wrapper", "api", "server", "database", "cache", "module",
    "helpers", "format", "date", "time", "string", "template", "render", "image", "terminal", "colors",
];

const LEGIT_STATIC: &[(&str, Category)] = &[
    ("open", Category::File), ("read", Category::File), ("write", Category::File), ("makedirs", Category::File),
    ("exists", Category::File), ("listdir", Category::File), ("remove", Category::File), ("load", Category::File),
    ("dump", Category::File), ("get", Category::Process), ("getattr", Category::Process), ("setattr", Category::Process),
    ("Thread", Category::Process), ("urlparse", Category::Network), ("Session", Category::Network),
];

const MALICIOUS_STATIC: &[(&str, Category)] = &[
    ("socket", Category::Network), ("connect", Category::Network), ("URLopen", Category::Network),
    ("post", Category::Network), ("b64decode", Category::Network), ("Request", Category::Network),
    ("gethostname", Category::Network), ("system", Category::Process), ("exec", Category::Process),
    ("popen", Category::Process), ("open", Category::File), ("getenv", Category::Process),
];

const LEGIT_DYNAMIC: &[(&str, Category, &str)] = &[
    ("openat", Category::File, "AT_FDCWD, \"/usr/lib/python3/x.py\", O_RDONLY|O_CLOEXEC"),
    ("read", Category::File, "3, \"...\", 4096"),
    ("newfstatat", Category::File, "AT_FDCWD, \"/tmp\", {st_mode=S_IFDIR|0755}, 0"),
    ("close", Category::File, "3"),
    ("write", Category::File, "1, \"ok\\n\", 3"),
    ("mmap", Category::Other, "NULL, 4096, PROT_READ, MAP_PRIVATE, 3, 0"),
    ("clone", Category::Process, "child_stack=NULL, flags=SIGCHLD"),
    ("wait4", Category::Process, "-1, [0], 0, NULL"),
    ("socket", Category::Network, "AF_INET, SOCK_STREAM, IPPROTO_TCP"),
    ("connect", Category::Network, "3, {sa_family=AF_INET}, 16"),
];

const MALICIOUS_DYNAMIC: &[(&str, Category, &str)] = &[
    ("connect", Category::Network, "3, {sa_family=AF_INET, sin_port=htons(4444)}, 16"),
    ("execve", Category::Process, "\"/bin/sh\", [\"sh\", \"-c\"], 0x0"),
    ("openat", Category::File, "AT_FDCWD, \"/etc/passwd\", O_RDONLY"),
];

fn words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn person(i: usize) -> Person {
    Person::new(Some(&format!("Dev {i}")), Some(&format!("dev{i}@example.org"))).unwrap()
}

fn static_profile(id: &PackageId, rng: &mut ChaCha8Rng, malicious: bool) -> StaticProfile {
    let (pool, n) = if malicious { (MALICIOUS_STATIC, rng.random_range(2..=14)) } else { (LEGIT_STATIC, rng.random_range(4..=60)) };
    let calls = (0..n)
        .map(|i| {
            let (name, category) = *pool.choose(rng).unwrap();
            CallSite {
                function_name: name.into(),
                category,
                file: PathBuf::from("pkg/__init__.py"),
                line: i as u32 + 1,
                argument_count: rng.random_range(0..4),
            }
        })
        .collect();
    StaticProfile::new(id.clone(), calls, Vec::new())
}

fn dynamic_profile(id: &PackageId, rng: &mut ChaCha8Rng, malicious: bool) -> DynamicProfile {
    let (pool, n) = if malicious { (MALICIOUS_DYNAMIC, rng.random_range(0..=2)) } else { (LEGIT_DYNAMIC, rng.random_range(15..=200)) };
    let events = (0..n)
        .map(|sequence| {
            let (name, category, args) = *pool.choose(rng).unwrap();
            TraceEvent {
                sequence,
                function_name: name.into(),
                category,
                arguments: args.into(),
                return_value: Some("0".into()),
                pid: Some(100),
            }
        })
        .collect();
    DynamicProfile::from_trace(id.clone(), ParsedTrace { events, clean_exit: true, ..Default::default() })
}

/// One profile. Malicious packages: description under 40 tokens and empty
/// 37% of the time, at most one author, no dependencies 60% of the time,
/// network and process heavy calls, at most two traced events.
/// Legitimate packages get the complements with some overlap.
pub fn profile(rng: &mut ChaCha8Rng, index: usize, label: Label) -> FgiProfile {
    let malicious = label == Label::Malicious;
    let package = PackageRef {
        ecosystem: Ecosystem::Pypi,
        name: format!("{}-{index:04}", if malicious { "m" } else { "r" }),
        version: "1.0.0".into(),
        label,
        archive_path: PathBuf::from(format!("/synthetic/{index}.tar.gz")),
        content_digest: format!("{index:064x}"),
    };
    let id = package.id();
    let description = if malicious {
        if rng.random_bool(0.37) { String::new() } else { let n = rng.random_range(1..40); words(rng, n) }
    } else if rng.random_bool(0.15) {
        let n = rng.random_range(3..15);
        words(rng, n)
    } else {
        let n = rng.random_range(12..120);
        words(rng, n)
    };
    let authors: Vec<Person> = if malicious {
        (0..rng.random_range(0..=1)).map(person).collect()
    } else if rng.random_bool(0.25) {
        vec![person(0)]
    } else {
        (0..rng.random_range(2..=5)).map(person).collect()
    };
    let dependency_count = if malicious {
        if rng.random_bool(0.6) { 0 } else { rng.random_range(1..=3) }
    } else if rng.random_bool(0.25) {
        0
    } else {
        rng.random_range(1..=15)
    };
    let dependencies = (0..dependency_count).map(|i| Dependency { name: format!("dep{i}"), constraint: ">=1".into() }).collect();
    let (url_p, git_p) = if malicious { (0.3, 0.5) } else { (0.85, 0.8) };
    let homepage_url = rng.random_bool(url_p).then(|| {
        if rng.random_bool(git_p) { format!("https://github.com/example/{}", package.name) } else { "https://example.org".into() }
    });
    let md = PackageMetadata {
        name: package.name.clone(),
        version: package.version.clone(),
        description,
        authors,
        dependencies,
        homepage_url,
        ..Default::default()
    };
    FgiProfile {
        metadata_features: Some(metadata_features(&md)),
        metadata: Some(md),
        static_profile: static_profile(&id, rng, malicious),
        dynamic_profile: Some(dynamic_profile(&id, rng, malicious)),
        package,
        warnings: Vec::new(),
    }
}

/// `legit` legitimate then `mal` malicious profiles, deterministic in `seed`.
pub fn corpus(legit: usize, mal: usize, seed: u64) -> Vec<FgiProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..legit + mal).map(|i| profile(&mut rng, i, if i < legit { Label::Legitimate } else { Label::Malicious })).collect()
}
