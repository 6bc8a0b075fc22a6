//! Curated catalog of sensitive functions per language.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::types::{Category, Language};

const BUILTIN: &str = include_str!("../../data/catalog.csv");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("catalog line {line}: duplicate entry `{name}` for {language}")]
    Duplicate { line: usize, name: String, language: Language },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub function_name: String,
    pub category: Category,
    pub language: Language,
}

#[derive(Debug, Deserialize)]
struct Row {
    function: String,
    category: String,
    language: String,
}

#[derive(Debug, Clone)]
pub struct FunctionCatalog {
    entries: Vec<CatalogEntry>,
    /// Hex SHA-256 of the source CSV, so exports can tell catalogs apart.
    pub version: String,
    index: HashMap<(Language, String), usize>,
}

impl FunctionCatalog {
    pub fn builtin() -> FunctionCatalog {
        Self::from_csv(BUILTIN).expect("bundled catalog is valid")
    }

    pub fn load(path: &Path) -> Result<FunctionCatalog, CatalogError> {
        Self::from_csv(&fs::read_to_string(path)?)
    }

    pub fn from_csv(text: &str) -> Result<FunctionCatalog, CatalogError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| CatalogError::Malformed { line, message: e.to_string() })?;
            let malformed = |message: String| CatalogError::Malformed { line, message };
            if row.function.is_empty() {
                return Err(malformed("empty function name".into()));
            }
            let category: Category = row.category.parse().map_err(malformed)?;
            if category == Category::Other {
                return Err(CatalogError::Malformed { line, message: "category must be network, file or process".into() });
            }
            let language: Language = row.language.parse().map_err(|m: String| CatalogError::Malformed { line, message: m })?;
            let key = (language, row.function.to_lowercase());
            if index.contains_key(&key) {
                return Err(CatalogError::Duplicate { line, name: row.function, language });
            }
            index.insert(key, entries.len());
            entries.push(CatalogEntry { function_name: row.function, category, language });
        }
        let version = crate::corpus::sha256_hex(text.as_bytes())[..16].to_string();
        Ok(FunctionCatalog { entries, version, index })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    /// Case-insensitive lookup of a terminal name segment.
    pub fn lookup(&self, language: Language, name: &str) -> Option<&CatalogEntry> {
        self.index.get(&(language, name.to_lowercase())).map(|&i| &self.entries[i])
    }

    pub fn len_for(&self, language: Language) -> usize {
        self.entries.iter().filter(|e| e.language == language).count()
    }
}

impl Default for FunctionCatalog {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_common_functions() {
        let cat = FunctionCatalog::builtin();
        for name in [
            "open", "remove", "rmtree", "mkdtemp", "unlink", "copyfile", "write", "socket", "URLopen", "getaddrinfo",
            "HTTPConnection", "Request", "SMTP", "FTP", "getattr", "setattr", "get", "signal", "call", "kill",
        ] {
            assert!(cat.lookup(Language::Python, name).is_some(), "{name}");
        }
        assert_eq!(cat.lookup(Language::Python, "urlopen").unwrap().function_name, "URLopen");
        assert!(cat.len_for(Language::JavaScript) > 0 && cat.len_for(Language::Ruby) > 0);
    }

    #[test]
    fn duplicates_rejected_case_insensitively() {
        let err = FunctionCatalog::from_csv("function,category,language\nopen,file,python\nOPEN,network,python\n");
        assert!(matches!(err, Err(CatalogError::Duplicate { line: 3, .. })));
        assert!(FunctionCatalog::from_csv("function,category,language\nopen,file,python\nopen,file,ruby\n").is_ok());
    }

    #[test]
    fn categories_must_be_counted_kinds() {
        assert!(FunctionCatalog::from_csv("function,category,language\nx,other,python\n").is_err());
        assert!(FunctionCatalog::from_csv("function,category,language\nx,weird,python\n").is_err());
    }
}
