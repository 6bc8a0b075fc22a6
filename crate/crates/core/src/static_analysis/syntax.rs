//! Syntax trees built from the token stream.
//!
//! The tree is structural rather than a full grammar: it records bracket
//! groups, indentation and keyword blocks, and recognizes call expressions
//! with their callee name path and argument count. That is everything the
//! call-site extractor needs, and it is enough to reject sources with
//! unbalanced structure.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::lexer::{Lexer, Token, TokenKind};
use super::ParseError;
use crate::types::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Module,
    Block,
    Group,
    Call,
    Attribute,
    Identifier,
    Keyword,
    Literal,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallInfo {
    /// Dotted name segments of the callee, e.g. `["os", "path", "join"]`.
    pub callee: Vec<String>,
    pub argument_count: usize,
}

impl CallInfo {
    pub fn terminal(&self) -> &str {
        self.callee.last().map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
    pub text: String,
    pub children: Vec<Node>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub call: Option<CallInfo>,
}

impl Node {
    fn leaf(kind: NodeKind, tok: &Token) -> Node {
        Node {
            kind,
            span: Span { line: tok.line, column: tok.col },
            text: tok.text.clone(),
            children: Vec::new(),
            call: None,
        }
    }

    fn container(kind: NodeKind, span: Span, text: &str) -> Node {
        Node { kind, span, text: text.to_string(), children: Vec::new(), call: None }
    }

    fn is_punct(&self, text: &str) -> bool {
        self.kind == NodeKind::Punct && self.text == text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxTree {
    pub language: Language,
    pub root: Node,
}

/// Pre-order depth-first traversal.
pub struct Dfs<'a> {
    stack: Vec<&'a Node>,
}

impl<'a> Iterator for Dfs<'a> {
    type Item = &'a Node;

    fn next(&mut self) -> Option<&'a Node> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

impl SyntaxTree {
    pub fn parse(language: Language, source: &str) -> Result<SyntaxTree, ParseError> {
        let tokens = Lexer::new(language, source).tokenize()?;
        let root = Builder::new(language, &tokens).build()?;
        Ok(SyntaxTree { language, root })
    }

    pub fn dfs(&self) -> Dfs<'_> {
        Dfs { stack: vec![&self.root] }
    }

    pub fn calls(&self) -> impl Iterator<Item = (&Node, &CallInfo)> {
        self.dfs().filter_map(|n| n.call.as_ref().map(|c| (n, c)))
    }
}

/// Decodes source bytes as UTF-8, falling back to Latin-1.
pub fn decode_source(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.strip_prefix('\u{feff}').unwrap_or(s).to_string(),
        Err(_) => bytes.iter().map(|&b| b as char).collect(),
    }
}

/// Reads and parses one source file.
pub fn parse_source(path: &Path, language: Language) -> Result<SyntaxTree, ParseError> {
    let bytes = fs::read(path).map_err(|e| ParseError { line: 0, column: 0, message: e.to_string() })?;
    SyntaxTree::parse(language, &decode_source(&bytes))
}

#[derive(Debug, Clone, PartialEq)]
enum Frame {
    Root,
    Group(char),
    Indented,
    /// Ruby keyword block; `loop_line` is set for while/until/for so an
    /// optional `do` on the same line does not open a second block.
    Keyword { loop_line: Option<u32>, has_do: bool },
    /// Ruby paren-less call; holds the callee node until arguments end.
    Command(Box<Node>, Vec<String>),
}

struct Builder<'t> {
    language: Language,
    tokens: &'t [Token],
    frames: Vec<(Frame, Node)>,
}

const MEMBER_ACCESS: &[&str] = &[".", "?.", "&.", "::"];
const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "**=", "||=", "&&=", "<<=", ">>=", "|=", "&=", "^="];

fn argument_count(children: &[Node]) -> usize {
    let significant: Vec<&Node> = children.iter().collect();
    if significant.is_empty() {
        return 0;
    }
    let commas = significant.iter().filter(|n| n.is_punct(",")).count();
    let trailing = significant.last().is_some_and(|n| n.is_punct(","));
    commas + 1 - usize::from(trailing)
}

impl<'t> Builder<'t> {
    fn new(language: Language, tokens: &'t [Token]) -> Self {
        let root = Node::container(NodeKind::Module, Span { line: 1, column: 1 }, "");
        Builder { language, tokens, frames: vec![(Frame::Root, root)] }
    }

    fn children(&mut self) -> &mut Vec<Node> {
        &mut self.frames.last_mut().unwrap().1.children
    }

    fn err(tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError { line: tok.line, column: tok.col, message: message.into() }
    }

    fn build(mut self) -> Result<Node, ParseError> {
        let tokens = self.tokens;
        for (i, tok) in tokens.iter().enumerate() {
            let next = tokens.get(i + 1);
            let prev = i.checked_sub(1).map(|p| &tokens[p]);
            match tok.kind {
                TokenKind::Open => {
                    let node = Node::container(NodeKind::Group, Span { line: tok.line, column: tok.col }, &tok.text);
                    let open = tok.text.chars().next().unwrap();
                    self.frames.push((Frame::Group(open), node));
                }
                TokenKind::Close => self.close_group(tok, next)?,
                TokenKind::Indent => {
                    let node = Node::container(NodeKind::Block, Span { line: tok.line, column: tok.col }, "");
                    self.frames.push((Frame::Indented, node));
                }
                TokenKind::Dedent => {
                    self.finish_commands();
                    match self.frames.last() {
                        Some((Frame::Indented, _)) => self.pop_into_parent(),
                        _ => return Err(Self::err(tok, "dedent does not close an indented block")),
                    }
                }
                TokenKind::Newline => {
                    let continued = prev.is_some_and(|p| p.kind == TokenKind::Punct && (p.text == "," || p.text == "\\"));
                    if !continued {
                        self.finish_commands();
                    }
                }
                TokenKind::Keyword if self.language == Language::Ruby => self.ruby_keyword(tok, prev)?,
                TokenKind::Keyword => self.children().push(Node::leaf(NodeKind::Keyword, tok)),
                TokenKind::Ident => {
                    self.children().push(Node::leaf(NodeKind::Identifier, tok));
                    if self.language == Language::Ruby {
                        self.ruby_identifier(tok, next);
                    }
                }
                TokenKind::Str | TokenKind::Num | TokenKind::Regex | TokenKind::Symbol => {
                    self.children().push(Node::leaf(NodeKind::Literal, tok))
                }
                TokenKind::Punct => {
                    if self.language == Language::Ruby && tok.text == ";" {
                        self.finish_commands();
                    }
                    self.children().push(Node::leaf(NodeKind::Punct, tok));
                }
            }
        }
        self.finish_commands();
        let (frame, node) = self.frames.pop().unwrap();
        if frame != Frame::Root {
            let last = tokens.last().cloned().unwrap_or(Token {
                kind: TokenKind::Newline,
                text: String::new(),
                line: 1,
                col: 1,
                space_before: false,
            });
            let what = match frame {
                Frame::Group(c) => format!("unclosed `{c}` opened at line {}", node.span.line),
                _ => format!("unclosed block opened at line {}", node.span.line),
            };
            return Err(Self::err(&last, what));
        }
        Ok(node)
    }

    fn pop_into_parent(&mut self) {
        let (_, node) = self.frames.pop().unwrap();
        self.children().push(node);
    }

    fn finish_commands(&mut self) {
        while matches!(self.frames.last(), Some((Frame::Command(..), _))) {
            let (frame, args) = self.frames.pop().unwrap();
            let Frame::Command(callee, path) = frame else { unreachable!() };
            let call = Self::make_call(*callee, path, args);
            self.children().push(call);
        }
    }

    fn make_call(callee: Node, path: Vec<String>, args: Node) -> Node {
        let argc = argument_count(&args.children);
        Node {
            kind: NodeKind::Call,
            span: callee.span,
            text: path.last().cloned().unwrap_or_default(),
            call: Some(CallInfo { callee: path, argument_count: argc }),
            children: vec![callee, args],
        }
    }

    /// Finds the callee chain ending at the last child: `a.b.c`, `self.x`,
    /// or `expr.name`. Returns the index where the chain starts and its
    /// identifier segments.
    fn callee_chain(children: &[Node]) -> Option<(usize, Vec<String>)> {
        let last = children.last()?;
        if last.kind != NodeKind::Identifier {
            return None;
        }
        let mut idx = children.len() - 1;
        let mut segments = vec![last.text.clone()];
        while idx >= 2 && MEMBER_ACCESS.iter().any(|p| children[idx - 1].is_punct(p)) {
            let receiver = &children[idx - 2];
            match receiver.kind {
                NodeKind::Identifier => segments.push(receiver.text.clone()),
                NodeKind::Keyword if matches!(receiver.text.as_str(), "self" | "this" | "super") => {
                    segments.push(receiver.text.clone())
                }
                NodeKind::Call | NodeKind::Group | NodeKind::Literal | NodeKind::Attribute => {
                    idx -= 2;
                    break;
                }
                _ => break,
            }
            idx -= 2;
        }
        segments.reverse();
        Some((idx, segments))
    }

    /// True when the chain starting at `start` names a definition
    /// (`def f(`, `function f(`, `class A(`).
    fn is_definition(children: &[Node], start: usize) -> bool {
        let is_def_kw = |n: &Node| n.kind == NodeKind::Keyword && matches!(n.text.as_str(), "def" | "function" | "class");
        match start.checked_sub(1).map(|p| &children[p]) {
            Some(n) if is_def_kw(n) => true,
            Some(n) if n.is_punct("*") => start >= 2 && is_def_kw(&children[start - 2]),
            _ => false,
        }
    }

    fn take_chain(&mut self, start: usize) -> Node {
        let drained: Vec<Node> = self.children().drain(start..).collect();
        if drained.len() == 1 {
            return drained.into_iter().next().unwrap();
        }
        let mut attr = Node::container(NodeKind::Attribute, drained[0].span, "");
        attr.text = drained.last().map(|n| n.text.clone()).unwrap_or_default();
        attr.children = drained;
        attr
    }

    fn close_group(&mut self, tok: &Token, next: Option<&Token>) -> Result<(), ParseError> {
        self.finish_commands();
        let close = tok.text.chars().next().unwrap();
        let expected = match self.frames.last() {
            Some((Frame::Group('('), _)) => ')',
            Some((Frame::Group('['), _)) => ']',
            Some((Frame::Group('{'), _)) => '}',
            _ => return Err(Self::err(tok, format!("unmatched `{close}`"))),
        };
        if close != expected {
            return Err(Self::err(tok, format!("expected `{expected}` but found `{close}`")));
        }
        let (_, group) = self.frames.pop().unwrap();
        if close != ')' {
            self.children().push(group);
            return Ok(());
        }
        let chain = Self::callee_chain(self.children());
        let Some((start, path)) = chain else {
            self.children().push(group);
            return Ok(());
        };
        let not_call = Self::is_definition(self.children(), start)
            || (self.language == Language::JavaScript
                && next.is_some_and(|n| (n.kind == TokenKind::Open && n.text == "{") || (n.kind == TokenKind::Punct && n.text == "=>")));
        if not_call {
            self.children().push(group);
            return Ok(());
        }
        let callee = self.take_chain(start);
        let call = Self::make_call(callee, path, group);
        self.children().push(call);
        Ok(())
    }

    fn ruby_keyword(&mut self, tok: &Token, prev: Option<&Token>) -> Result<(), ParseError> {
        let word = tok.text.as_str();
        let prev_is_value_same_line = prev.is_some_and(|p| {
            p.line == tok.line
                && match p.kind {
                    TokenKind::Ident | TokenKind::Str | TokenKind::Num | TokenKind::Symbol | TokenKind::Regex => true,
                    TokenKind::Close => true,
                    TokenKind::Keyword => matches!(p.text.as_str(), "end" | "self" | "nil" | "true" | "false" | "redo" | "retry" | "break" | "next"),
                    _ => false,
                }
        });
        match word {
            "end" => {
                self.finish_commands();
                match self.frames.last() {
                    Some((Frame::Keyword { .. }, _)) => {
                        self.children().push(Node::leaf(NodeKind::Keyword, tok));
                        self.pop_into_parent();
                    }
                    _ => return Err(Self::err(tok, "unexpected `end`")),
                }
            }
            "do" => {
                self.finish_commands();
                if let Some((Frame::Keyword { loop_line: Some(line), has_do }, _)) = self.frames.last_mut() {
                    if *line == tok.line && !*has_do {
                        *has_do = true;
                        self.children().push(Node::leaf(NodeKind::Keyword, tok));
                        return Ok(());
                    }
                }
                self.open_keyword_block(tok, None);
            }
            "if" | "unless" | "while" | "until" | "rescue" if prev_is_value_same_line => {
                // Statement modifier: ends any paren-less argument list.
                self.finish_commands();
                self.children().push(Node::leaf(NodeKind::Keyword, tok));
            }
            "if" | "unless" | "case" | "begin" | "def" | "class" | "module" => self.open_keyword_block(tok, None),
            "while" | "until" | "for" => self.open_keyword_block(tok, Some(tok.line)),
            "and" | "or" | "then" => {
                self.finish_commands();
                self.children().push(Node::leaf(NodeKind::Keyword, tok));
            }
            _ => self.children().push(Node::leaf(NodeKind::Keyword, tok)),
        }
        Ok(())
    }

    fn open_keyword_block(&mut self, tok: &Token, loop_line: Option<u32>) {
        let mut node = Node::container(NodeKind::Block, Span { line: tok.line, column: tok.col }, &tok.text);
        node.children.push(Node::leaf(NodeKind::Keyword, tok));
        self.frames.push((Frame::Keyword { loop_line, has_do: false }, node));
    }

    /// Ruby calls without parentheses: `system "id"`, `File.delete path`,
    /// receiver calls such as `uri.read`, and `fork do ... end`.
    fn ruby_identifier(&mut self, tok: &Token, next: Option<&Token>) {
        let Some((start, path)) = Self::callee_chain(self.children()) else { return };
        if Self::is_definition(self.children(), start) {
            return;
        }
        let children = self.children();
        let has_receiver = children.len() >= 2 && {
            let sep = &children[children.len() - 2];
            sep.is_punct(".") || sep.is_punct("&.") || (sep.is_punct("::") && tok.text.starts_with(|c: char| c.is_lowercase() || c == '_'))
        };
        let Some(next) = next else {
            if has_receiver {
                self.zero_arg_call(start, path);
            }
            return;
        };
        if next.kind == TokenKind::Open && next.text == "(" {
            return;
        }
        let same_line = next.line == tok.line;
        let starts_argument = same_line
            && next.space_before
            && match next.kind {
                TokenKind::Str | TokenKind::Num | TokenKind::Symbol | TokenKind::Regex | TokenKind::Ident => true,
                TokenKind::Keyword => matches!(next.text.as_str(), "nil" | "true" | "false" | "self" | "__FILE__" | "defined?"),
                TokenKind::Punct => next.text == "->",
                _ => false,
            };
        if starts_argument {
            let callee = self.take_chain(start);
            let args = Node::container(NodeKind::Group, Span { line: next.line, column: next.col }, " ");
            self.frames.push((Frame::Command(Box::new(callee), path), args));
            return;
        }
        let is_assignment = next.kind == TokenKind::Punct && ASSIGN_OPS.contains(&next.text.as_str());
        let in_loop_header = matches!(
            self.frames.last(),
            Some((Frame::Keyword { loop_line: Some(l), has_do: false }, _)) if *l == tok.line
        );
        let block_follows = (next.kind == TokenKind::Keyword && next.text == "do" && !in_loop_header)
            || (next.kind == TokenKind::Open && next.text == "{" && next.space_before && same_line && !has_receiver);
        if (has_receiver && !is_assignment) || block_follows {
            self.zero_arg_call(start, path);
        }
    }

    fn zero_arg_call(&mut self, start: usize, path: Vec<String>) {
        let callee = self.take_chain(start);
        let args = Node::container(NodeKind::Group, callee.span, "");
        let call = Self::make_call(callee, path, args);
        self.children().push(call);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calls(lang: Language, src: &str) -> Vec<(String, usize, u32)> {
        SyntaxTree::parse(lang, src)
            .unwrap()
            .calls()
            .map(|(n, c)| (c.callee.join("."), c.argument_count, n.span.line))
            .collect()
    }

    #[test]
    fn minimal_python_call() {
        assert_eq!(calls(Language::Python, "open(\"a.txt\")"), vec![("open".into(), 1, 1)]);
    }

    #[test]
    fn python_definitions_are_not_calls() {
        let src = "class A(Base):\n    def f(self, x):\n        return os.path.join(x, 'y')\n";
        assert_eq!(calls(Language::Python, src), vec![("os.path.join".into(), 2, 3)]);
    }

    #[test]
    fn python_nested_and_chained() {
        let src = "data = urllib.request.urlopen(Request(url, headers=h)).read()\n";
        let got: Vec<String> = calls(Language::Python, src).into_iter().map(|c| c.0).collect();
        assert_eq!(got, vec!["read", "urllib.request.urlopen", "Request"]);
    }

    #[test]
    fn argument_counting() {
        let got = calls(Language::Python, "f()\ng(a,)\nh(a, b, *c, **d)\nk(x for x in y)\n");
        let argc: Vec<usize> = got.iter().map(|c| c.1).collect();
        assert_eq!(argc, vec![0, 1, 4, 1]);
    }

    #[test]
    fn js_call_inside_function_body() {
        let src = "function build() {\n  const p = require('path');\n  fs.writeFileSync(p.join(__dirname, 'out'), data);\n}\nclass A { run(x) { exec(x) } }\nconst f = async (a) => fetch(a);\n";
        let got: Vec<String> = calls(Language::JavaScript, src).into_iter().map(|c| c.0).collect();
        assert_eq!(got, vec!["require", "fs.writeFileSync", "p.join", "exec", "fetch"]);
    }

    #[test]
    fn js_member_chain_on_call_result() {
        let got = calls(Language::JavaScript, "require('http').get(url, (res) => { res.on('data', d => buf.push(d)) })");
        let names: Vec<&str> = got.iter().map(|c| c.0.as_str()).collect();
        assert_eq!(names, vec!["get", "require", "res.on", "buf.push"]);
        assert_eq!(got[0].1, 2);
    }

    #[test]
    fn ruby_command_calls() {
        let src = "require 'net/http'\nsystem \"curl #{host}\", '-s'\nres = Net::HTTP.get(URI(u))\nFile.delete path if File.exist?(path)\npid = fork do\n  exec cmd\nend\nx = data.read\n";
        let got: Vec<(String, usize)> = calls(Language::Ruby, src).into_iter().map(|c| (c.0, c.1)).collect();
        assert_eq!(
            got,
            vec![
                ("require".into(), 1),
                ("system".into(), 2),
                ("Net.HTTP.get".into(), 1),
                ("URI".into(), 1),
                ("File.delete".into(), 1),
                ("File.exist?".into(), 1),
                ("fork".into(), 0),
                ("exec".into(), 1),
                ("data.read".into(), 0),
            ]
        );
    }

    #[test]
    fn ruby_definitions_and_blocks() {
        let src = "module M\n  class C < Base\n    attr_reader :x\n  end\nend\n";
        assert_eq!(calls(Language::Ruby, src), vec![("attr_reader".into(), 1, 3)]);
        let src = "def self.run(x)\n  while x do\n    kill(x)\n  end\nend\n";
        assert_eq!(calls(Language::Ruby, src), vec![("kill".into(), 1, 3)]);
    }

    #[test]
    fn unbalanced_brackets_are_errors() {
        let e = SyntaxTree::parse(Language::Python, "open('a'\n").unwrap_err();
        assert!(e.message.contains("unclosed"), "{e:?}");
        let e = SyntaxTree::parse(Language::JavaScript, "f(a]);").unwrap_err();
        assert_eq!((e.line, e.column), (1, 4));
        assert!(SyntaxTree::parse(Language::Ruby, "def x\n  y\nend\nend\n").is_err());
        assert!(SyntaxTree::parse(Language::Ruby, "def x\n  y(\nend\n").is_err());
    }

    #[test]
    fn dfs_is_preorder() {
        let tree = SyntaxTree::parse(Language::Python, "a(b(c()), d())").unwrap();
        let order: Vec<String> = tree.calls().map(|(_, c)| c.terminal().to_string()).collect();
        assert_eq!(order, vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn latin1_fallback() {
        assert_eq!(decode_source(&[b'#', 0xe9, b'\n']), "#é\n");
    }
}
