//! A small YAML reader covering what `gem` writes into `metadata.gz`:
//! block mappings and sequences (including compact `- - x` and `- key: v`
//! forms), plain/quoted scalars, literal and folded block scalars, empty
//! flow collections and simple flow lists. Tags such as
//! `!ruby/object:Gem::Version` are accepted and discarded.

#[derive(Debug, Clone, PartialEq)]
pub enum Yaml {
    Null,
    Str(String),
    Seq(Vec<Yaml>),
    Map(Vec<(String, Yaml)>),
}

#[derive(Debug, thiserror::Error)]
#[error("yaml line {line}: {message}")]
pub struct YamlError {
    pub line: usize,
    pub message: String,
}

impl Yaml {
    pub fn get(&self, key: &str) -> Option<&Yaml> {
        match self {
            Yaml::Map(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Yaml::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_seq(&self) -> Option<&[Yaml]> {
        match self {
            Yaml::Seq(items) => Some(items),
            _ => None,
        }
    }

    pub fn parse(text: &str) -> Result<Yaml, YamlError> {
        let mut p = Parser { lines: text.lines().map(str::to_string).collect(), pos: 0 };
        p.skip_document_marker();
        let root = p.node(0)?;
        p.skip_blank();
        if p.pos < p.lines.len() {
            return Err(p.error("unexpected content after document"));
        }
        Ok(root)
    }
}

struct Parser {
    lines: Vec<String>,
    pos: usize,
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start_matches(' ').len()
}

fn is_blank(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn is_seq_item(content: &str) -> bool {
    content == "-" || content.starts_with("- ")
}

/// Drops a leading `!tag` from a value.
fn strip_tag(value: &str) -> &str {
    if value.starts_with('!') {
        match value.find(' ') {
            Some(i) => value[i + 1..].trim_start(),
            None => "",
        }
    } else {
        value
    }
}

/// Position of the `:` separating a mapping key, outside quotes.
fn key_split(content: &str) -> Option<usize> {
    let bytes = content.as_bytes();
    let mut quote: Option<u8> = None;
    for (i, &b) in bytes.iter().enumerate() {
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if (b == b'"' || b == b'\'') && i == 0 => quote = Some(b),
            None if b == b'#' && i > 0 && bytes[i - 1] == b' ' => return None,
            None if b == b':' && (i + 1 == bytes.len() || bytes[i + 1] == b' ') => return Some(i),
            None => {}
        }
    }
    None
}

fn strip_comment(value: &str) -> &str {
    match value.find(" #") {
        Some(i) => value[..i].trim_end(),
        None => value,
    }
}

fn unquote(raw: &str) -> Option<String> {
    let raw = raw.trim();
    if raw.len() >= 2 && raw.starts_with('\'') && raw.ends_with('\'') {
        return Some(raw[1..raw.len() - 1].replace("''", "'"));
    }
    if raw.len() >= 2 && raw.starts_with('"') && raw.ends_with('"') {
        let mut out = String::new();
        let mut chars = raw[1..raw.len() - 1].chars();
        while let Some(c) = chars.next() {
            if c != '\\' {
                out.push(c);
                continue;
            }
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('0') => out.push('\0'),
                Some(other) => out.push(other),
                None => {}
            }
        }
        return Some(out);
    }
    None
}

fn scalar(raw: &str) -> Yaml {
    let raw = strip_comment(raw.trim());
    if let Some(s) = unquote(raw) {
        return Yaml::Str(s);
    }
    match raw {
        "" | "~" | "null" => Yaml::Null,
        "[]" => Yaml::Seq(Vec::new()),
        "{}" => Yaml::Map(Vec::new()),
        _ if raw.starts_with('[') && raw.ends_with(']') => Yaml::Seq(
            raw[1..raw.len() - 1]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(scalar)
                .collect(),
        ),
        _ => Yaml::Str(raw.to_string()),
    }
}

impl Parser {
    fn error(&self, message: &str) -> YamlError {
        YamlError { line: self.pos + 1, message: message.to_string() }
    }

    fn skip_blank(&mut self) {
        while self.pos < self.lines.len() && is_blank(&self.lines[self.pos]) {
            self.pos += 1;
        }
    }

    fn skip_document_marker(&mut self) {
        self.skip_blank();
        if let Some(line) = self.lines.get(self.pos) {
            if let Some(rest) = line.strip_prefix("---") {
                let rest = strip_tag(rest.trim());
                if rest.is_empty() {
                    self.pos += 1;
                } else {
                    self.lines[self.pos] = rest.to_string();
                }
            }
        }
    }

    /// Indentation and trimmed content of the next non-blank line.
    fn peek(&mut self) -> Option<(usize, String)> {
        self.skip_blank();
        self.lines.get(self.pos).map(|l| (indent_of(l), l.trim().to_string()))
    }

    fn node(&mut self, min_indent: usize) -> Result<Yaml, YamlError> {
        let Some((indent, content)) = self.peek() else { return Ok(Yaml::Null) };
        if indent < min_indent {
            return Ok(Yaml::Null);
        }
        if is_seq_item(&content) {
            self.sequence(indent)
        } else if key_split(&content).is_some() {
            self.mapping(indent)
        } else {
            self.pos += 1;
            let mut text = strip_tag(&content).to_string();
            let single = scalar(&text);
            if !matches!(single, Yaml::Str(_)) || unquote(&text).is_some() {
                return Ok(single);
            }
            while let Some((i, more)) = self.peek() {
                if i < indent || (i == indent && (is_seq_item(&more) || key_split(&more).is_some())) {
                    break;
                }
                text.push(' ');
                text.push_str(&more);
                self.pos += 1;
            }
            Ok(Yaml::Str(text))
        }
    }

    /// Re-seats `rest` (found after `- ` at `column`) as its own line so the
    /// compact forms parse like ordinary nested blocks.
    fn reseat(&mut self, column: usize, rest: &str) {
        self.lines[self.pos] = format!("{}{}", " ".repeat(column), rest);
    }

    fn sequence(&mut self, indent: usize) -> Result<Yaml, YamlError> {
        let mut items = Vec::new();
        while let Some((i, content)) = self.peek() {
            if i != indent || !is_seq_item(&content) {
                if i > indent {
                    return Err(self.error("bad indentation in sequence"));
                }
                break;
            }
            let raw_rest = content[1..].trim_start();
            let rest = strip_tag(raw_rest);
            let column = indent + (content.len() - raw_rest.len());
            if rest.is_empty() {
                self.pos += 1;
                items.push(self.node(indent + 1)?);
            } else if is_seq_item(rest) || key_split(rest).is_some() {
                self.reseat(column, rest);
                items.push(self.node(column)?);
            } else if rest.starts_with('|') || rest.starts_with('>') {
                self.pos += 1;
                items.push(self.block_scalar(rest, indent));
            } else {
                self.reseat(column, rest);
                items.push(self.node(column)?);
            }
        }
        Ok(Yaml::Seq(items))
    }

    fn mapping(&mut self, indent: usize) -> Result<Yaml, YamlError> {
        let mut entries = Vec::new();
        while let Some((i, content)) = self.peek() {
            if i != indent || is_seq_item(&content) {
                if i > indent {
                    return Err(self.error("bad indentation in mapping"));
                }
                break;
            }
            let Some(split) = key_split(&content) else {
                return Err(self.error("expected `key: value`"));
            };
            let raw_key = content[..split].trim();
            let key = unquote(raw_key).unwrap_or_else(|| raw_key.to_string());
            let value = strip_tag(strip_comment(content[split + 1..].trim()));
            self.pos += 1;
            let node = if value.is_empty() {
                match self.peek() {
                    Some((ni, _)) if ni > indent => self.node(indent + 1)?,
                    Some((ni, next)) if ni == indent && is_seq_item(&next) => self.sequence(indent)?,
                    _ => Yaml::Null,
                }
            } else if value.starts_with('|') || value.starts_with('>') {
                self.block_scalar(value, indent)
            } else {
                let first = scalar(value);
                match first {
                    Yaml::Str(mut text) if unquote(value).is_none() => {
                        while let Some((ni, more)) = self.peek() {
                            if ni <= indent {
                                break;
                            }
                            text.push(' ');
                            text.push_str(&more);
                            self.pos += 1;
                        }
                        Yaml::Str(text)
                    }
                    other => other,
                }
            };
            entries.push((key, node));
        }
        Ok(Yaml::Map(entries))
    }

    fn block_scalar(&mut self, header: &str, parent_indent: usize) -> Yaml {
        let folded = header.starts_with('>');
        let strip = header.contains('-');
        let keep = header.contains('+');
        let mut raw: Vec<String> = Vec::new();
        let mut block_indent = None;
        while self.pos < self.lines.len() {
            let line = &self.lines[self.pos];
            if line.trim().is_empty() {
                raw.push(String::new());
                self.pos += 1;
                continue;
            }
            let i = indent_of(line);
            if i <= parent_indent {
                break;
            }
            let bi = *block_indent.get_or_insert(i);
            if i < bi {
                break;
            }
            raw.push(line[bi..].to_string());
            self.pos += 1;
        }
        let trailing = raw.iter().rev().take_while(|l| l.is_empty()).count();
        raw.truncate(raw.len() - trailing);
        let mut text = if folded {
            let mut out = String::new();
            for (idx, line) in raw.iter().enumerate() {
                if idx > 0 {
                    let prev_empty = raw[idx - 1].is_empty();
                    if line.is_empty() || prev_empty || line.starts_with(' ') {
                        out.push('\n');
                    } else {
                        out.push(' ');
                    }
                }
                out.push_str(line);
            }
            out
        } else {
            raw.join("\n")
        };
        if !strip && !raw.is_empty() {
            text.push('\n');
            if keep {
                text.push_str(&"\n".repeat(trailing));
            }
        }
        Yaml::Str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gem_specification_shape() {
        let doc = Yaml::parse(
            r#"--- !ruby/object:Gem::Specification
name: rake
version: !ruby/object:Gem::Version
  version: 13.0.6
authors:
- Hiroshi SHIBATA
- Eric Hodel
cert_chain: []
dependencies:
- !ruby/object:Gem::Dependency
  name: neotermcolor
  requirement: !ruby/object:Gem::Requirement
    requirements:
    - - ">="
      - !ruby/object:Gem::Version
        version: '2.0'
  type: :runtime
description: |
  Rake is a Make-like program.
  Second line.
email:
- hsbt@ruby-lang.org
homepage: https://github.com/ruby/rake
metadata:
  source_code_uri: https://github.com/ruby/rake/tree/v13.0.6
summary: Rake is a Make-like program implemented in Ruby
"#,
        )
        .unwrap();
        assert_eq!(doc.get("name").and_then(Yaml::as_str), Some("rake"));
        assert_eq!(
            doc.get("version").and_then(|v| v.get("version")).and_then(Yaml::as_str),
            Some("13.0.6")
        );
        assert_eq!(doc.get("authors").and_then(Yaml::as_seq).map(<[_]>::len), Some(2));
        assert_eq!(doc.get("cert_chain"), Some(&Yaml::Seq(vec![])));
        let dep = &doc.get("dependencies").and_then(Yaml::as_seq).unwrap()[0];
        assert_eq!(dep.get("name").and_then(Yaml::as_str), Some("neotermcolor"));
        assert_eq!(dep.get("type").and_then(Yaml::as_str), Some(":runtime"));
        let reqs = dep.get("requirement").and_then(|r| r.get("requirements")).unwrap();
        let pair = reqs.as_seq().unwrap()[0].as_seq().unwrap();
        assert_eq!(pair[0].as_str(), Some(">="));
        assert_eq!(pair[1].get("version").and_then(Yaml::as_str), Some("2.0"));
        assert_eq!(
            doc.get("description").and_then(Yaml::as_str),
            Some("Rake is a Make-like program.\nSecond line.\n")
        );
        assert_eq!(
            doc.get("metadata").and_then(|m| m.get("source_code_uri")).and_then(Yaml::as_str),
            Some("https://github.com/ruby/rake/tree/v13.0.6")
        );
    }

    #[test]
    fn scalars_and_folding() {
        let doc = Yaml::parse("a: 'it''s'\nb: \"x\\ny\"\nc: ~\nd: [x, 'y']\ne: >-\n  one\n  two\nf: plain\n  continued\n").unwrap();
        assert_eq!(doc.get("a").and_then(Yaml::as_str), Some("it's"));
        assert_eq!(doc.get("b").and_then(Yaml::as_str), Some("x\ny"));
        assert_eq!(doc.get("c"), Some(&Yaml::Null));
        assert_eq!(doc.get("d"), Some(&Yaml::Seq(vec![Yaml::Str("x".into()), Yaml::Str("y".into())])));
        assert_eq!(doc.get("e").and_then(Yaml::as_str), Some("one two"));
        assert_eq!(doc.get("f").and_then(Yaml::as_str), Some("plain continued"));
    }

    #[test]
    fn bad_indentation_is_an_error() {
        assert!(Yaml::parse("a:\n  b: 1\n c: 2\n").is_err());
    }
}
