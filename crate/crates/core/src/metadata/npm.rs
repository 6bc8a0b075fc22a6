use serde_json::Value;

use super::{non_empty, MetadataError, PackageMetadata, Person};

pub(crate) fn parse_package_json(text: &str, file: &str) -> Result<PackageMetadata, MetadataError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| MetadataError::malformed(file, e))?;
    from_document(&doc, file)
}

fn person_of(v: &Value) -> Option<Person> {
    match v {
        Value::String(s) => Person::parse(s),
        Value::Object(o) => Person::new(
            o.get("name").and_then(Value::as_str),
            o.get("email").and_then(Value::as_str),
        ),
        _ => None,
    }
}

fn people_of(v: Option<&Value>) -> Vec<Person> {
    match v {
        Some(Value::Array(items)) => items.iter().filter_map(person_of).collect(),
        Some(other) => person_of(other).into_iter().collect(),
        None => Vec::new(),
    }
}

/// Maps a package.json (or npm registry version document) onto metadata.
pub(crate) fn from_document(doc: &Value, file: &str) -> Result<PackageMetadata, MetadataError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| MetadataError::malformed(file, "top-level value is not an object"))?;
    let text = |key: &str| obj.get(key).and_then(Value::as_str);

    let mut md = PackageMetadata {
        name: text("name").unwrap_or_default().trim().to_string(),
        version: text("version").unwrap_or_default().trim().to_string(),
        authors: people_of(obj.get("author")),
        maintainers: people_of(obj.get("maintainers")),
        homepage_url: non_empty(text("homepage")),
        repository_url: match obj.get("repository") {
            Some(Value::String(s)) => non_empty(Some(s)),
            Some(Value::Object(r)) => non_empty(r.get("url").and_then(Value::as_str)),
            _ => None,
        },
        ..Default::default()
    };
    md.set_description(text("description").unwrap_or_default());
    if let Some(Value::Object(deps)) = obj.get("dependencies") {
        for (name, constraint) in deps {
            let constraint = match constraint {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            md.push_dependency(name, &constraint);
        }
    }
    Ok(md)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_manifest() {
        let md = parse_package_json(
            r#"{
              "name": "loglib",
              "version": "1.0.2",
              "description": "A decent logging system with some settings built in",
              "author": "Logan Houston <houston4509@gmail.com>",
              "maintainers": [{"name": "Logan Houston", "email": "houston4509@gmail.com"}],
              "homepage": "https://github.com/lh/loglib",
              "repository": {"type": "git", "url": "git+https://github.com/lh/loglib.git"},
              "dependencies": {"neotermcolor": ">=2.0", "chalk": "^4.1.0"}
            }"#,
            "package.json",
        )
        .unwrap();
        assert_eq!(md.name, "loglib");
        assert_eq!(md.version, "1.0.2");
        assert_eq!(md.authors.len(), 1);
        assert_eq!(md.authors, md.maintainers);
        assert_eq!(md.repository_url.as_deref(), Some("git+https://github.com/lh/loglib.git"));
        assert_eq!(md.dependencies.len(), 2);
        assert_eq!(md.dependencies[1].name, "neotermcolor");
        assert_eq!(md.dependencies[1].constraint, ">=2.0");
    }

    #[test]
    fn absent_fields_are_empty() {
        let md = parse_package_json(r#"{"name": "loglib-modules"}"#, "package.json").unwrap();
        assert_eq!(md.description, "");
        assert!(md.version.is_empty());
        assert!(md.authors.is_empty() && md.dependencies.is_empty());
        assert_eq!(md.homepage_url, None);
        assert_eq!(md.dependents_count, None);
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(
            parse_package_json("{\"name\": ", "package.json"),
            Err(MetadataError::MalformedManifest { .. })
        ));
        assert!(parse_package_json("[1,2]", "package.json").is_err());
    }
}
