use serde_json::Value;

use super::{non_empty, MetadataError, PackageMetadata, Person};

/// Fields shared by PKG-INFO/METADATA, setup.cfg and the PyPI JSON API.
#[derive(Debug, Default)]
pub(crate) struct CoreFields {
    pub name: String,
    pub version: String,
    pub summary: Option<String>,
    pub description: Option<String>,
    pub author: Option<String>,
    pub author_email: Option<String>,
    pub maintainer: Option<String>,
    pub maintainer_email: Option<String>,
    pub home_page: Option<String>,
    pub project_urls: Vec<(String, String)>,
    pub requires_dist: Vec<String>,
}

/// `Name <email>, other@x` lists as used by Author-email.
fn people(name: Option<&str>, emails: Option<&str>) -> Vec<Person> {
    let mut out: Vec<Person> = emails
        .map(|e| e.split(',').filter_map(Person::parse).collect())
        .unwrap_or_default();
    let Some(name) = name.map(str::trim).filter(|n| !n.is_empty()) else {
        return out;
    };
    if out.len() == 1 && out[0].name.is_none() {
        out[0].name = Some(name.to_string());
    } else if !out.iter().any(|p| p.name.as_deref() == Some(name)) {
        out.extend(Person::new(Some(name), None));
    }
    out
}

/// Splits a PEP 508 requirement into name and constraint:
/// `neotermcolor (>=2.0)` → (`neotermcolor`, `>=2.0`).
pub(crate) fn split_requirement(req: &str) -> (String, String) {
    let req = req.trim();
    let (spec, marker) = match req.find(';') {
        Some(i) => (req[..i].trim(), Some(req[i + 1..].trim())),
        None => (req, None),
    };
    let end = spec
        .find(|c: char| c.is_whitespace() || "([<>=!~@".contains(c))
        .unwrap_or(spec.len());
    let name = spec[..end].to_string();
    let mut rest = spec[end..].trim();
    if rest.starts_with('[') {
        rest = rest.find(']').map(|i| rest[i + 1..].trim()).unwrap_or("");
    }
    let mut constraint = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(rest)
        .trim()
        .to_string();
    if let Some(m) = marker {
        if constraint.is_empty() {
            constraint = format!("; {m}");
        } else {
            constraint = format!("{constraint}; {m}");
        }
    }
    (name, constraint)
}

impl CoreFields {
    pub(crate) fn into_metadata(self) -> PackageMetadata {
        let mut homepage = non_empty(self.home_page.as_deref()).filter(|u| u != "UNKNOWN");
        let mut repository = None;
        for (label, url) in &self.project_urls {
            let label = label.to_ascii_lowercase();
            let is_repo = ["source", "repository", "code", "github", "gitlab"]
                .iter()
                .any(|k| label.contains(k));
            if is_repo && repository.is_none() {
                repository = non_empty(Some(url));
            } else if label.contains("homepage") && homepage.is_none() {
                homepage = non_empty(Some(url));
            }
        }
        let description = self
            .summary
            .filter(|s| !s.trim().is_empty() && s.trim() != "UNKNOWN")
            .or(self.description.filter(|s| s.trim() != "UNKNOWN"))
            .unwrap_or_default();
        let mut md = PackageMetadata {
            name: self.name.trim().to_string(),
            version: self.version.trim().to_string(),
            authors: people(self.author.as_deref(), self.author_email.as_deref()),
            maintainers: people(self.maintainer.as_deref(), self.maintainer_email.as_deref()),
            homepage_url: homepage,
            repository_url: repository,
            ..Default::default()
        };
        md.set_description(&description);
        for req in &self.requires_dist {
            let (name, constraint) = split_requirement(req);
            md.push_dependency(&name, &constraint);
        }
        md
    }
}

/// Parses RFC 822-style core metadata (PKG-INFO, METADATA). Never fails:
/// unknown headers are ignored and a missing header leaves its field empty.
pub(crate) fn parse_core_metadata(text: &str) -> PackageMetadata {
    let mut headers: Vec<(String, String)> = Vec::new();
    let mut body = String::new();
    let mut in_body = false;
    for line in text.lines() {
        if in_body {
            body.push_str(line);
            body.push('\n');
            continue;
        }
        if line.trim().is_empty() {
            in_body = true;
            continue;
        }
        if line.starts_with([' ', '\t']) {
            if let Some((_, value)) = headers.last_mut() {
                let cont = line.trim_start();
                let cont = cont.strip_prefix('|').unwrap_or(cont);
                value.push('\n');
                value.push_str(cont);
            }
            continue;
        }
        if let Some((k, v)) = line.split_once(':') {
            headers.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
    }

    let mut f = CoreFields::default();
    for (k, v) in headers {
        match k.as_str() {
            "name" => f.name = v,
            "version" => f.version = v,
            "summary" => f.summary = Some(v),
            "description" => f.description = Some(v),
            "author" => f.author = Some(v),
            "author-email" => f.author_email = Some(v),
            "maintainer" => f.maintainer = Some(v),
            "maintainer-email" => f.maintainer_email = Some(v),
            "home-page" => f.home_page = Some(v),
            "project-url" => {
                if let Some((label, url)) = v.split_once(',') {
                    f.project_urls.push((label.trim().to_string(), url.trim().to_string()));
                }
            }
            "requires-dist" => f.requires_dist.push(v),
            _ => {}
        }
    }
    if f.description.is_none() && !body.trim().is_empty() {
        f.description = Some(body);
    }
    f.into_metadata()
}

pub(crate) fn parse_pyproject(text: &str, file: &str) -> Result<PackageMetadata, MetadataError> {
    let doc: toml::Table = text.parse().map_err(|e| MetadataError::malformed(file, e))?;
    let str_of = |t: &toml::Table, k: &str| t.get(k).and_then(|v| v.as_str()).map(str::to_string);

    if let Some(project) = doc.get("project").and_then(|v| v.as_table()) {
        let people_of = |key: &str| -> Vec<Person> {
            project
                .get(key)
                .and_then(|v| v.as_array())
                .map(|arr| {
                    arr.iter()
                        .filter_map(|p| p.as_table())
                        .filter_map(|p| {
                            Person::new(
                                p.get("name").and_then(|v| v.as_str()),
                                p.get("email").and_then(|v| v.as_str()),
                            )
                        })
                        .collect()
                })
                .unwrap_or_default()
        };
        let urls: Vec<(String, String)> = project
            .get("urls")
            .and_then(|v| v.as_table())
            .map(|t| {
                t.iter()
                    .filter_map(|(k, v)| v.as_str().map(|u| (k.clone(), u.to_string())))
                    .collect()
            })
            .unwrap_or_default();
        let mut f = CoreFields {
            name: str_of(project, "name").unwrap_or_default(),
            version: str_of(project, "version").unwrap_or_default(),
            summary: str_of(project, "description"),
            project_urls: urls,
            requires_dist: project
                .get("dependencies")
                .and_then(|v| v.as_array())
                .map(|a| a.iter().filter_map(|d| d.as_str().map(str::to_string)).collect())
                .unwrap_or_default(),
            ..Default::default()
        };
        f.home_page = f
            .project_urls
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("homepage"))
            .map(|(_, u)| u.clone());
        let mut md = f.into_metadata();
        md.authors = people_of("authors");
        md.maintainers = people_of("maintainers");
        return Ok(md);
    }

    if let Some(poetry) = doc
        .get("tool")
        .and_then(|t| t.get("poetry"))
        .and_then(|v| v.as_table())
    {
        let list = |key: &str| -> Vec<Person> {
            poetry
                .get(key)
                .and_then(|v| v.as_array())
                .map(|a| a.iter().filter_map(|p| p.as_str()).filter_map(Person::parse).collect())
                .unwrap_or_default()
        };
        let mut md = PackageMetadata {
            name: str_of(poetry, "name").unwrap_or_default(),
            version: str_of(poetry, "version").unwrap_or_default(),
            authors: list("authors"),
            maintainers: list("maintainers"),
            homepage_url: non_empty(str_of(poetry, "homepage").as_deref()),
            repository_url: non_empty(str_of(poetry, "repository").as_deref()),
            ..Default::default()
        };
        md.set_description(&str_of(poetry, "description").unwrap_or_default());
        if let Some(deps) = poetry.get("dependencies").and_then(|v| v.as_table()) {
            for (name, spec) in deps {
                if name == "python" {
                    continue;
                }
                let constraint = match spec {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Table(t) => {
                        t.get("version").and_then(|v| v.as_str()).unwrap_or_default().to_string()
                    }
                    other => other.to_string(),
                };
                md.push_dependency(name, &constraint);
            }
        }
        return Ok(md);
    }

    Ok(PackageMetadata::default())
}

/// setup.cfg `[metadata]` and `[options] install_requires`.
pub(crate) fn parse_setup_cfg(text: &str) -> Result<PackageMetadata, MetadataError> {
    let mut section = String::new();
    let mut entries: Vec<(String, String, String)> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if trimmed.starts_with('[') && trimmed.ends_with(']') {
            section = trimmed[1..trimmed.len() - 1].trim().to_ascii_lowercase();
            continue;
        }
        if line.starts_with([' ', '\t']) {
            if let Some(last) = entries.last_mut() {
                last.2.push('\n');
                last.2.push_str(trimmed);
            }
            continue;
        }
        if let Some((k, v)) = trimmed.split_once(['=', ':']) {
            entries.push((section.clone(), k.trim().to_ascii_lowercase().replace('-', "_"), v.trim().to_string()));
        }
    }
    let mut f = CoreFields::default();
    for (section, key, value) in entries {
        match (section.as_str(), key.as_str()) {
            ("metadata", "name") => f.name = value,
            ("metadata", "version") => f.version = value,
            ("metadata", "description") | ("metadata", "summary") => f.summary = Some(value),
            ("metadata", "author") => f.author = Some(value),
            ("metadata", "author_email") => f.author_email = Some(value),
            ("metadata", "maintainer") => f.maintainer = Some(value),
            ("metadata", "maintainer_email") => f.maintainer_email = Some(value),
            ("metadata", "url") | ("metadata", "home_page") => f.home_page = Some(value),
            ("metadata", "project_urls") => {
                for line in value.lines() {
                    if let Some((label, url)) = line.split_once('=') {
                        f.project_urls.push((label.trim().to_string(), url.trim().to_string()));
                    }
                }
            }
            ("options", "install_requires") => f
                .requires_dist
                .extend(value.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string)),
            _ => {}
        }
    }
    Ok(f.into_metadata())
}

/// Maps a PyPI JSON API document (`/pypi/<name>/<version>/json`).
pub(crate) fn from_json_api(doc: &Value) -> Option<PackageMetadata> {
    let info = doc.get("info")?.as_object()?;
    let s = |k: &str| info.get(k).and_then(Value::as_str).map(str::to_string);
    let fields = CoreFields {
        name: s("name")?,
        version: s("version").unwrap_or_default(),
        summary: s("summary"),
        description: s("description"),
        author: s("author"),
        author_email: s("author_email"),
        maintainer: s("maintainer"),
        maintainer_email: s("maintainer_email"),
        home_page: s("home_page"),
        project_urls: info
            .get("project_urls")
            .and_then(Value::as_object)
            .map(|m| {
                m.iter()
                    .filter_map(|(k, v)| v.as_str().map(|u| (k.clone(), u.to_string())))
                    .collect()
            })
            .unwrap_or_default(),
        requires_dist: info
            .get("requires_dist")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
            .unwrap_or_default(),
    };
    Some(fields.into_metadata())
}
