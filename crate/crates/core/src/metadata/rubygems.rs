use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

use super::yaml::Yaml;
use super::{non_empty, MetadataError, PackageMetadata, Person};

fn string_list(v: Option<&Yaml>) -> Vec<String> {
    match v {
        Some(Yaml::Str(s)) => vec![s.clone()],
        Some(Yaml::Seq(items)) => items.iter().filter_map(Yaml::as_str).map(str::to_string).collect(),
        _ => Vec::new(),
    }
}

/// Pairs `authors` with `email` by position.
fn pair_people(names: &[String], emails: &[String]) -> Vec<Person> {
    let n = names.len().max(emails.len());
    (0..n)
        .filter_map(|i| Person::new(names.get(i).map(String::as_str), emails.get(i).map(String::as_str)))
        .collect()
}

fn requirement_string(req: Option<&Yaml>) -> String {
    let Some(list) = req.and_then(|r| r.get("requirements")).and_then(Yaml::as_seq) else {
        return String::new();
    };
    list.iter()
        .filter_map(|pair| {
            let pair = pair.as_seq()?;
            let op = pair.first()?.as_str()?;
            let version = match pair.get(1)? {
                Yaml::Str(s) => s.clone(),
                other => other.get("version")?.as_str()?.to_string(),
            };
            Some(format!("{op} {version}"))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses the YAML gem specification stored as `metadata.gz` in a `.gem`.
pub(crate) fn parse_gem_yaml(text: &str, file: &str) -> Result<PackageMetadata, MetadataError> {
    let doc = Yaml::parse(text).map_err(|e| MetadataError::malformed(file, e))?;
    if !matches!(doc, Yaml::Map(_) | Yaml::Null) {
        return Err(MetadataError::malformed(file, "gem specification is not a mapping"));
    }
    let s = |k: &str| doc.get(k).and_then(Yaml::as_str).map(str::to_string);
    let version = match doc.get("version") {
        Some(Yaml::Str(v)) => v.clone(),
        Some(v) => v.get("version").and_then(Yaml::as_str).unwrap_or_default().to_string(),
        None => String::new(),
    };
    let metadata = doc.get("metadata");
    let meta = |k: &str| metadata.and_then(|m| m.get(k)).and_then(Yaml::as_str);

    let mut md = PackageMetadata {
        name: s("name").unwrap_or_default().trim().to_string(),
        version: version.trim().to_string(),
        authors: pair_people(&string_list(doc.get("authors")), &string_list(doc.get("email"))),
        homepage_url: non_empty(s("homepage").as_deref()).or_else(|| non_empty(meta("homepage_uri"))),
        repository_url: non_empty(meta("source_code_uri")),
        ..Default::default()
    };
    let summary = s("summary").filter(|x| !x.trim().is_empty());
    md.set_description(&summary.or_else(|| s("description")).unwrap_or_default());
    for dep in doc.get("dependencies").and_then(Yaml::as_seq).unwrap_or_default() {
        let kind = dep.get("type").and_then(Yaml::as_str).unwrap_or(":runtime");
        if kind != ":runtime" {
            continue;
        }
        if let Some(name) = dep.get("name").and_then(Yaml::as_str) {
            md.push_dependency(name, &requirement_string(dep.get("requirement")));
        }
    }
    Ok(md)
}

fn gemspec_patterns() -> &'static [Regex; 9] {
    static RE: OnceLock<[Regex; 9]> = OnceLock::new();
    RE.get_or_init(|| {
        let field = |f: &str| Regex::new(&format!(r#"\.{f}\s*=\s*["']([^"']*)["']"#)).unwrap();
        [
            field("name"),
            field("version"),
            field("summary"),
            field("description"),
            field("homepage"),
            Regex::new(r#"\.authors?\s*=\s*(\[[^\]]*\]|["'][^"']*["'])"#).unwrap(),
            Regex::new(r#"\.email\s*=\s*(\[[^\]]*\]|["'][^"']*["'])"#).unwrap(),
            Regex::new(r#"metadata\[\s*["']source_code_uri["']\s*\]\s*=\s*["']([^"']*)["']"#).unwrap(),
            Regex::new(
                r#"add_(?:runtime_)?dependency\s*\(?\s*["']([^"']+)["']((?:\s*,\s*["'][^"']*["'])*)"#,
            )
            .unwrap(),
        ]
    })
}

fn quoted_strings(raw: &str) -> Vec<String> {
    static Q: OnceLock<Regex> = OnceLock::new();
    let q = Q.get_or_init(|| Regex::new(r#"["']([^"']*)["']"#).unwrap());
    q.captures_iter(raw).map(|c| c[1].to_string()).collect()
}

/// Reads literal assignments from a Ruby `.gemspec` without evaluating it.
pub(crate) fn parse_gemspec_ruby(text: &str) -> PackageMetadata {
    let [name, version, summary, description, homepage, authors, email, source, dependency] =
        gemspec_patterns();
    let first = |re: &Regex| re.captures(text).map(|c| c[1].to_string());
    let mut md = PackageMetadata {
        name: first(name).unwrap_or_default(),
        version: first(version).unwrap_or_default(),
        authors: pair_people(
            &first(authors).map(|a| quoted_strings(&a)).unwrap_or_default(),
            &first(email).map(|e| quoted_strings(&e)).unwrap_or_default(),
        ),
        homepage_url: non_empty(first(homepage).as_deref()),
        repository_url: non_empty(first(source).as_deref()),
        ..Default::default()
    };
    md.set_description(&first(summary).or_else(|| first(description)).unwrap_or_default());
    for cap in dependency.captures_iter(text) {
        md.push_dependency(&cap[1], &quoted_strings(&cap[2]).join(", "));
    }
    md
}

/// Maps a RubyGems v2 API document (`/api/v2/rubygems/<n>/versions/<v>.json`).
pub(crate) fn from_json_api(doc: &Value) -> Option<PackageMetadata> {
    let s = |k: &str| doc.get(k).and_then(Value::as_str);
    let names: Vec<String> = s("authors")
        .map(|a| a.split(',').map(|p| p.trim().to_string()).collect())
        .unwrap_or_default();
    let mut md = PackageMetadata {
        name: s("name")?.to_string(),
        version: s("version").unwrap_or_default().to_string(),
        authors: pair_people(&names, &[]),
        homepage_url: non_empty(s("homepage_uri")),
        repository_url: non_empty(s("source_code_uri")),
        download_count: doc.get("downloads").and_then(Value::as_u64),
        ..Default::default()
    };
    md.set_description(s("summary").filter(|x| !x.is_empty()).or(s("info")).unwrap_or_default());
    if let Some(runtime) = doc.pointer("/dependencies/runtime").and_then(Value::as_array) {
        for dep in runtime {
            if let Some(name) = dep.get("name").and_then(Value::as_str) {
                md.push_dependency(name, dep.get("requirements").and_then(Value::as_str).unwrap_or_default());
            }
        }
    }
    Some(md)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gem_yaml_runtime_dependencies_only() {
        let md = parse_gem_yaml(
            "--- !ruby/object:Gem::Specification\nname: loglib\nversion: !ruby/object:Gem::Version\n  version: 1.0.0\nauthors:\n- Logan Houston\nemail: houston4509@gmail.com\ndependencies:\n- !ruby/object:Gem::Dependency\n  name: neotermcolor\n  requirement: !ruby/object:Gem::Requirement\n    requirements:\n    - - \">=\"\n      - !ruby/object:Gem::Version\n        version: '2.0'\n  type: :runtime\n- !ruby/object:Gem::Dependency\n  name: rspec\n  requirement: !ruby/object:Gem::Requirement\n    requirements:\n    - - \">=\"\n      - !ruby/object:Gem::Version\n        version: '0'\n  type: :development\nsummary: A decent logging system\nhomepage: https://github.com/lh/loglib\n",
            "metadata.yml",
        )
        .unwrap();
        assert_eq!(md.name, "loglib");
        assert_eq!(md.version, "1.0.0");
        assert_eq!(md.description, "A decent logging system");
        assert_eq!(md.dependencies.len(), 1);
        assert_eq!(md.dependencies[0].constraint, ">= 2.0");
        assert_eq!(
            md.authors,
            vec![Person::new(Some("Logan Houston"), Some("houston4509@gmail.com")).unwrap()]
        );
    }

    #[test]
    fn ruby_gemspec_literals() {
        let md = parse_gemspec_ruby(
            r#"Gem::Specification.new do |s|
  s.name        = "tiny"
  s.version     = "0.2.0"
  s.summary     = "Tiny gem"
  s.authors     = ["Ann", "Bo"]
  s.email       = ["ann@x.io"]
  s.homepage    = "https://example.org/tiny"
  s.metadata["source_code_uri"] = "https://github.com/ann/tiny"
  s.add_dependency "json", ">= 2.0", "< 3"
  s.add_runtime_dependency("rake")
end"#,
        );
        assert_eq!(md.name, "tiny");
        assert_eq!(md.authors.len(), 2);
        assert_eq!(md.authors[0].email.as_deref(), Some("ann@x.io"));
        assert_eq!(md.repository_url.as_deref(), Some("https://github.com/ann/tiny"));
        assert_eq!(md.dependencies.len(), 2);
        assert_eq!(md.dependencies[0].constraint, ">= 2.0, < 3");
        assert_eq!(md.dependencies[1].constraint, "");
    }
}
