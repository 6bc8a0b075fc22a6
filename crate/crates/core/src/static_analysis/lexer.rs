//! Tokenizers for Python, JavaScript and Ruby source.
//!
//! The token stream is shaped for the tree builder: brackets are explicit,
//! Python indentation becomes `Indent`/`Dedent`, and interpolated string
//! segments (f-strings, template literals, `"#{...}"`) surface their
//! embedded expressions as ordinary tokens between `Open('{')`/`Close('}')`.

use super::ParseError;
use crate::types::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Str,
    Num,
    Regex,
    Symbol,
    Punct,
    Open,
    Close,
    Newline,
    Indent,
    Dedent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
    pub space_before: bool,
}

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in",
    "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with",
    "yield",
];

const JS_KEYWORDS: &[&str] = &[
    "break", "case", "catch", "class", "const", "continue", "debugger", "default", "delete", "do",
    "else", "export", "extends", "finally", "for", "function", "if", "import", "in", "instanceof",
    "let", "new", "return", "super", "switch", "this", "throw", "try", "typeof", "var", "void",
    "while", "with", "yield", "await", "null", "true", "false",
];

const RUBY_KEYWORDS: &[&str] = &[
    "BEGIN", "END", "alias", "and", "begin", "break", "case", "class", "def", "defined?", "do",
    "else", "elsif", "end", "ensure", "false", "for", "if", "in", "module", "next", "nil", "not",
    "or", "redo", "rescue", "retry", "return", "self", "super", "then", "true", "undef", "unless",
    "until", "when", "while", "yield", "__FILE__", "__LINE__", "__ENCODING__",
];

pub fn is_keyword(language: Language, word: &str) -> bool {
    match language {
        Language::Python => PYTHON_KEYWORDS.contains(&word),
        Language::JavaScript => JS_KEYWORDS.contains(&word),
        Language::Ruby => RUBY_KEYWORDS.contains(&word),
    }
}

/// An interpolated string whose embedded expression is currently being lexed.
#[derive(Debug, Clone)]
struct Interp {
    /// Brace depth at which the embedded expression closes.
    depth: usize,
    terminator: Vec<char>,
    /// Doubled braces are literal (Python f-strings).
    doubled_braces: bool,
    opener: &'static str,
}

pub struct Lexer {
    language: Language,
    src: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    space_before: bool,
    /// Open brackets `([{` depth, used for Python line joining.
    bracket_depth: usize,
    brace_depth: usize,
    interps: Vec<Interp>,
    indents: Vec<usize>,
    at_line_start: bool,
    pending_heredocs: Vec<(String, bool)>,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl Lexer {
    pub fn new(language: Language, source: &str) -> Self {
        Lexer {
            language,
            src: source.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            tokens: Vec::new(),
            space_before: false,
            bracket_depth: 0,
            brace_depth: 0,
            interps: Vec::new(),
            indents: vec![0],
            at_line_start: true,
            pending_heredocs: Vec::new(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.src.get(self.pos + ahead).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: u32, col: u32, message: impl Into<String>) -> ParseError {
        ParseError { line, column: col, message: message.into() }
    }

    fn push(&mut self, kind: TokenKind, text: impl Into<String>, line: u32, col: u32) {
        self.tokens.push(Token { kind, text: text.into(), line, col, space_before: self.space_before });
        self.space_before = false;
    }

    fn last(&self) -> Option<&Token> {
        self.tokens.last()
    }

    /// True when the previous token ends an operand, so `/` or `%` is an operator.
    fn prev_is_value(&self) -> bool {
        match self.last() {
            None => false,
            Some(t) => match t.kind {
                TokenKind::Ident | TokenKind::Num | TokenKind::Str | TokenKind::Regex | TokenKind::Symbol => true,
                TokenKind::Close => t.text != "}",
                TokenKind::Keyword => matches!(t.text.as_str(), "this" | "self" | "true" | "false" | "nil" | "null" | "end" | "super"),
                _ => false,
            },
        }
    }

    fn prev_is_member_access(&self) -> bool {
        matches!(self.last(), Some(t) if t.kind == TokenKind::Punct && matches!(t.text.as_str(), "." | "?." | "&." | "::"))
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        if self.starts_with("#!") {
            while !matches!(self.peek(0), None | Some('\n')) {
                self.bump();
            }
        }
        while self.pos < self.src.len() {
            if self.language == Language::Python && self.at_line_start && self.bracket_depth == 0 {
                self.python_indentation()?;
                if self.pos >= self.src.len() {
                    break;
                }
            }
            self.at_line_start = false;
            let c = self.peek(0).unwrap();
            let (line, col) = (self.line, self.col);

            if c == '\n' {
                self.bump();
                self.end_of_line(line, col)?;
                continue;
            }
            if c == ' ' || c == '\t' || c == '\r' || c == '\u{c}' {
                self.bump();
                self.space_before = true;
                continue;
            }
            if c == '\\' && matches!(self.peek(1), Some('\n') | Some('\r')) {
                self.bump();
                if self.peek(0) == Some('\r') {
                    self.bump();
                }
                self.bump();
                self.space_before = true;
                continue;
            }
            if self.skip_comment()? {
                continue;
            }
            if self.language == Language::Ruby && self.col == 1 && self.starts_with("__END__") {
                break;
            }
            if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit()) && !self.prev_is_value()) {
                self.number(line, col);
                continue;
            }
            if self.try_string(line, col)? {
                continue;
            }
            if is_ident_start(c) || (c == '$' && self.language != Language::Python) || (c == '@' && self.language == Language::Ruby) {
                self.identifier(line, col);
                continue;
            }
            self.punct(line, col)?;
        }
        if let Some(interp) = self.interps.last() {
            return Err(self.error(self.line, self.col, format!("unterminated interpolation `{}`", interp.opener)));
        }
        if let Some((term, _)) = self.pending_heredocs.first() {
            return Err(self.error(self.line, self.col, format!("unterminated heredoc `{term}`")));
        }
        if self.language == Language::Python {
            if self.last().is_some_and(|t| t.kind != TokenKind::Newline) {
                let (l, c) = (self.line, self.col);
                self.push(TokenKind::Newline, "\n", l, c);
            }
            while self.indents.len() > 1 {
                self.indents.pop();
                let (l, c) = (self.line, self.col);
                self.push(TokenKind::Dedent, "", l, c);
            }
        }
        Ok(self.tokens)
    }

    fn end_of_line(&mut self, line: u32, col: u32) -> Result<(), ParseError> {
        match self.language {
            Language::Python => {
                if self.bracket_depth == 0 && self.interps.is_empty() {
                    if self.last().is_some_and(|t| t.kind != TokenKind::Newline && t.kind != TokenKind::Indent && t.kind != TokenKind::Dedent) {
                        self.push(TokenKind::Newline, "\n", line, col);
                    }
                    self.at_line_start = true;
                }
            }
            Language::Ruby => {
                self.push(TokenKind::Newline, "\n", line, col);
                self.consume_heredoc_bodies()?;
            }
            Language::JavaScript => self.space_before = true,
        }
        Ok(())
    }

    fn python_indentation(&mut self) -> Result<(), ParseError> {
        loop {
            let mut width = 0usize;
            let mut ahead = 0usize;
            while let Some(c) = self.peek(ahead) {
                match c {
                    ' ' => width += 1,
                    '\t' => width = (width / 8 + 1) * 8,
                    '\u{c}' | '\r' => {}
                    _ => break,
                }
                ahead += 1;
            }
            match self.peek(ahead) {
                None => {
                    for _ in 0..ahead {
                        self.bump();
                    }
                    return Ok(());
                }
                Some('\n') | Some('#') => {
                    for _ in 0..ahead {
                        self.bump();
                    }
                    while !matches!(self.peek(0), None | Some('\n')) {
                        self.bump();
                    }
                    self.bump();
                    continue;
                }
                Some(_) => {
                    for _ in 0..ahead {
                        self.bump();
                    }
                    let (line, col) = (self.line, self.col);
                    let top = *self.indents.last().unwrap();
                    if width > top {
                        let opens_block = self
                            .tokens
                            .iter()
                            .rev()
                            .find(|t| t.kind != TokenKind::Newline)
                            .is_some_and(|t| t.text == ":");
                        if !opens_block {
                            return Err(self.error(line, col, "unexpected indent"));
                        }
                        self.indents.push(width);
                        self.push(TokenKind::Indent, "", line, col);
                    } else if width < top {
                        while *self.indents.last().unwrap() > width {
                            self.indents.pop();
                            self.push(TokenKind::Dedent, "", line, col);
                        }
                        if *self.indents.last().unwrap() != width {
                            return Err(self.error(line, col, "unindent does not match any outer indentation level"));
                        }
                    }
                    return Ok(());
                }
            }
        }
    }

    fn skip_comment(&mut self) -> Result<bool, ParseError> {
        let c = self.peek(0).unwrap();
        match self.language {
            Language::Python | Language::Ruby if c == '#' => {
                if self.language == Language::Ruby && self.peek(1) == Some('{') && !self.interps.is_empty() {
                    return Ok(false);
                }
                while !matches!(self.peek(0), None | Some('\n')) {
                    self.bump();
                }
                Ok(true)
            }
            Language::Ruby if c == '=' && self.col == 1 && self.starts_with("=begin") => {
                let (line, col) = (self.line, self.col);
                loop {
                    while !matches!(self.peek(0), None | Some('\n')) {
                        self.bump();
                    }
                    if self.bump().is_none() {
                        return Err(self.error(line, col, "unterminated =begin comment"));
                    }
                    if self.starts_with("=end") {
                        while !matches!(self.peek(0), None | Some('\n')) {
                            self.bump();
                        }
                        return Ok(true);
                    }
                }
            }
            Language::JavaScript if c == '/' && self.peek(1) == Some('/') => {
                while !matches!(self.peek(0), None | Some('\n')) {
                    self.bump();
                }
                Ok(true)
            }
            Language::JavaScript if c == '/' && self.peek(1) == Some('*') => {
                let (line, col) = (self.line, self.col);
                self.bump();
                self.bump();
                loop {
                    if self.starts_with("*/") {
                        self.bump();
                        self.bump();
                        self.space_before = true;
                        return Ok(true);
                    }
                    if self.bump().is_none() {
                        return Err(self.error(line, col, "unterminated block comment"));
                    }
                }
            }
            _ => Ok(false),
        }
    }

    fn number(&mut self, line: u32, col: u32) {
        let start = self.pos;
        while let Some(c) = self.peek(0) {
            let exponent_sign = (c == '+' || c == '-')
                && matches!(self.src.get(self.pos.wrapping_sub(1)), Some('e') | Some('E'))
                && !self.src[start..self.pos].iter().any(|&d| d == 'x' || d == 'X');
            if c.is_alphanumeric() || c == '_' || exponent_sign {
                self.bump();
            } else if c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit()) {
                self.bump();
            } else {
                break;
            }
        }
        let text: String = self.src[start..self.pos].iter().collect();
        self.push(TokenKind::Num, text, line, col);
    }

    fn identifier(&mut self, line: u32, col: u32) {
        let start = self.pos;
        while matches!(self.peek(0), Some('$') | Some('@')) {
            self.bump();
        }
        while self.peek(0).is_some_and(|c| is_ident_char(c) || (c == '$' && self.language == Language::JavaScript)) {
            self.bump();
        }
        if self.language == Language::Ruby {
            let next = self.peek(1);
            match self.peek(0) {
                Some('?') if next != Some(':') && next != Some('=') && !next.is_some_and(is_ident_char) => {
                    self.bump();
                }
                Some('!') if next != Some('=') => {
                    self.bump();
                }
                _ => {}
            }
        }
        let text: String = self.src[start..self.pos].iter().collect();
        let kind = if !self.prev_is_member_access() && is_keyword(self.language, &text) {
            TokenKind::Keyword
        } else {
            TokenKind::Ident
        };
        self.push(kind, text, line, col);
    }

    fn punct(&mut self, line: u32, col: u32) -> Result<(), ParseError> {
        let c = self.peek(0).unwrap();
        match c {
            '(' | '[' | '{' => {
                self.bump();
                self.bracket_depth += 1;
                if c == '{' {
                    self.brace_depth += 1;
                }
                self.push(TokenKind::Open, c.to_string(), line, col);
                return Ok(());
            }
            ')' | ']' | '}' => {
                self.bump();
                self.bracket_depth = self.bracket_depth.saturating_sub(1);
                self.push(TokenKind::Close, c.to_string(), line, col);
                if c == '}' {
                    if self.interps.last().is_some_and(|i| i.depth == self.brace_depth) {
                        self.brace_depth -= 1;
                        let interp = self.interps.pop().unwrap();
                        self.string_body(interp.terminator, interp.doubled_braces, interp.opener, line, col)?;
                    } else {
                        self.brace_depth = self.brace_depth.saturating_sub(1);
                    }
                }
                return Ok(());
            }
            _ => {}
        }
        if self.language == Language::Ruby && c == ':' && self.peek(1).is_some_and(|n| is_ident_start(n) || n == '"' || n == '@' || n == '$') && !self.starts_with("::") {
            let prev_ident_glued = self.last().is_some_and(|t| !self.space_before && matches!(t.kind, TokenKind::Ident | TokenKind::Close));
            if !prev_ident_glued {
                self.bump();
                if self.peek(0) == Some('"') {
                    self.bump();
                    self.string_body(vec!['"'], false, "", line, col)?;
                    return Ok(());
                }
                let start = self.pos;
                while self.peek(0).is_some_and(|c| is_ident_char(c) || c == '@' || c == '$') {
                    self.bump();
                }
                if matches!(self.peek(0), Some('?') | Some('!') | Some('=')) && self.peek(1) != Some('>') && self.peek(1) != Some('=') {
                    self.bump();
                }
                let text: String = self.src[start..self.pos].iter().collect();
                self.push(TokenKind::Symbol, text, line, col);
                return Ok(());
            }
        }
        if (self.language != Language::Python) && c == '/' && !self.prev_is_value() {
            return self.regex(line, col);
        }
        if self.language == Language::Ruby && c == '%' && !self.prev_is_value() {
            if let Some(()) = self.percent_literal(line, col)? {
                return Ok(());
            }
        }
        if self.language == Language::Ruby && self.starts_with("<<") && self.try_heredoc(line, col) {
            return Ok(());
        }
        const MULTI: &[&str] = &[
            "===", "!==", "**=", "...", "<=>", "&&=", "||=", ">>>", "?.", "&.", "::", "=>", "->",
            "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "**", "<<", ">>", "//",
            "++", "--", "..", ":=",
        ];
        let op = MULTI.iter().find(|m| self.starts_with(m)).map(|m| m.to_string());
        let text = match op {
            Some(op) => {
                for _ in 0..op.chars().count() {
                    self.bump();
                }
                op
            }
            None => {
                self.bump();
                c.to_string()
            }
        };
        if self.language == Language::Python && matches!(text.as_str(), "$" | "?" | "`") {
            return Err(self.error(line, col, format!("invalid character `{text}`")));
        }
        self.push(TokenKind::Punct, text, line, col);
        Ok(())
    }

    /// Detects a string opener at the cursor (including prefixes) and lexes it.
    fn try_string(&mut self, line: u32, col: u32) -> Result<bool, ParseError> {
        let c = self.peek(0).unwrap();
        match self.language {
            Language::Python => {
                let mut prefix_len = 0;
                while prefix_len < 3 && self.peek(prefix_len).is_some_and(|p| "rRbBuUfF".contains(p)) {
                    prefix_len += 1;
                }
                let quote = self.peek(prefix_len);
                if !matches!(quote, Some('"') | Some('\'')) {
                    return Ok(false);
                }
                if prefix_len > 0 && self.pos > 0 && self.src.get(self.pos - 1).is_some_and(|&p| is_ident_char(p)) {
                    return Ok(false);
                }
                let prefix: String = self.src[self.pos..self.pos + prefix_len].iter().collect::<String>().to_ascii_lowercase();
                for _ in 0..prefix_len {
                    self.bump();
                }
                let q = quote.unwrap();
                let triple = self.peek(1) == Some(q) && self.peek(2) == Some(q);
                let terminator = if triple { vec![q; 3] } else { vec![q] };
                for _ in 0..terminator.len() {
                    self.bump();
                }
                let raw = prefix.contains('r');
                if prefix.contains('f') {
                    self.string_body(terminator, true, "{", line, col)?;
                } else {
                    self.plain_string(&terminator, raw, line, col)?;
                }
                Ok(true)
            }
            Language::JavaScript => match c {
                '"' | '\'' => {
                    self.bump();
                    self.plain_string(&[c], false, line, col)?;
                    Ok(true)
                }
                '`' => {
                    self.bump();
                    self.string_body(vec!['`'], false, "${", line, col)?;
                    Ok(true)
                }
                _ => Ok(false),
            },
            Language::Ruby => match c {
                '\'' => {
                    self.bump();
                    self.plain_string(&['\''], false, line, col)?;
                    Ok(true)
                }
                '"' | '`' => {
                    self.bump();
                    self.string_body(vec![c], false, "#{", line, col)?;
                    Ok(true)
                }
                _ => Ok(false),
            },
        }
    }

    /// A string without interpolation; the opening quote is consumed.
    fn plain_string(&mut self, terminator: &[char], raw: bool, line: u32, col: u32) -> Result<(), ParseError> {
        let single_line = terminator.len() == 1;
        loop {
            if terminator.iter().enumerate().all(|(i, &t)| self.peek(i) == Some(t)) {
                for _ in 0..terminator.len() {
                    self.bump();
                }
                self.push(TokenKind::Str, "", line, col);
                return Ok(());
            }
            match self.peek(0) {
                None => return Err(self.error(line, col, "unterminated string literal")),
                Some('\n') if single_line && !(self.language == Language::Ruby) => {
                    return Err(self.error(line, col, "unterminated string literal"))
                }
                Some('\\') => {
                    self.bump();
                    if !raw || self.peek(0).is_some_and(|n| terminator.contains(&n) || n == '\\') {
                        self.bump();
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    /// Lexes string text up to the terminator or an interpolation opener.
    /// On an opener, emits `Str` + `Open('{')` and records the frame so the
    /// matching `}` resumes the string.
    fn string_body(&mut self, terminator: Vec<char>, doubled_braces: bool, opener: &'static str, line: u32, col: u32) -> Result<(), ParseError> {
        let single_line = terminator.len() == 1 && terminator[0] != '`' && self.language != Language::Ruby;
        loop {
            if terminator.iter().enumerate().all(|(i, &t)| self.peek(i) == Some(t)) {
                for _ in 0..terminator.len() {
                    self.bump();
                }
                self.push(TokenKind::Str, "", line, col);
                return Ok(());
            }
            if doubled_braces && (self.starts_with("{{") || self.starts_with("}}")) {
                self.bump();
                self.bump();
                continue;
            }
            if !opener.is_empty() && self.starts_with(opener) {
                self.push(TokenKind::Str, "", line, col);
                let (ol, oc) = (self.line, self.col);
                for _ in 0..opener.len() {
                    self.bump();
                }
                self.bracket_depth += 1;
                self.brace_depth += 1;
                self.push(TokenKind::Open, "{", ol, oc);
                self.interps.push(Interp { depth: self.brace_depth, terminator, doubled_braces, opener });
                return Ok(());
            }
            match self.peek(0) {
                None => return Err(self.error(line, col, "unterminated string literal")),
                Some('\n') if single_line => return Err(self.error(line, col, "unterminated string literal")),
                Some('\\') => {
                    self.bump();
                    self.bump();
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn regex(&mut self, line: u32, col: u32) -> Result<(), ParseError> {
        self.bump();
        let mut in_class = false;
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(line, col, "unterminated regular expression")),
                Some('\\') => {
                    self.bump();
                }
                Some('[') => in_class = true,
                Some(']') => in_class = false,
                Some('/') if !in_class => break,
                Some(_) => {}
            }
        }
        while self.peek(0).is_some_and(|c| c.is_ascii_alphabetic()) {
            self.bump();
        }
        self.push(TokenKind::Regex, "", line, col);
        Ok(())
    }

    /// Ruby `%w[...]`, `%q(...)`, `%(...)` and friends.
    fn percent_literal(&mut self, line: u32, col: u32) -> Result<Option<()>, ParseError> {
        let (kind_len, delim) = match (self.peek(1), self.peek(2)) {
            (Some(k), Some(d)) if "wWiIqQrsx".contains(k) && !d.is_alphanumeric() && !d.is_whitespace() => (1, d),
            (Some(d), _) if "([{<|!/^".contains(d) => (0, d),
            _ => return Ok(None),
        };
        let close = match delim {
            '(' => ')',
            '[' => ']',
            '{' => '}',
            '<' => '>',
            other => other,
        };
        for _ in 0..(1 + kind_len + 1) {
            self.bump();
        }
        let mut depth = 1;
        loop {
            match self.bump() {
                None => return Err(self.error(line, col, "unterminated percent literal")),
                Some('\\') => {
                    self.bump();
                }
                Some(c) if c == close => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                Some(c) if c == delim && close != delim => depth += 1,
                Some(_) => {}
            }
        }
        self.push(TokenKind::Str, "", line, col);
        Ok(Some(()))
    }

    fn try_heredoc(&mut self, line: u32, col: u32) -> bool {
        let mut ahead = 2;
        let mut squiggly = false;
        if matches!(self.peek(ahead), Some('~') | Some('-')) {
            squiggly = true;
            ahead += 1;
        }
        let quote = self.peek(ahead).filter(|q| *q == '\'' || *q == '"');
        if quote.is_some() {
            ahead += 1;
        }
        let start = ahead;
        while self.peek(ahead).is_some_and(is_ident_char) {
            ahead += 1;
        }
        if ahead == start {
            return false;
        }
        let ident: String = self.src[self.pos + start..self.pos + ahead].iter().collect();
        let plain_ok = quote.is_some() || squiggly || ident.chars().next().is_some_and(|c| c.is_uppercase());
        if !plain_ok {
            return false;
        }
        if let Some(q) = quote {
            if self.peek(ahead) != Some(q) {
                return false;
            }
            ahead += 1;
        }
        for _ in 0..ahead {
            self.bump();
        }
        self.pending_heredocs.push((ident, squiggly));
        self.push(TokenKind::Str, "", line, col);
        true
    }

    fn consume_heredoc_bodies(&mut self) -> Result<(), ParseError> {
        let pending = std::mem::take(&mut self.pending_heredocs);
        for (term, indented) in pending {
            let (line, col) = (self.line, self.col);
            loop {
                if self.pos >= self.src.len() {
                    return Err(self.error(line, col, format!("unterminated heredoc `{term}`")));
                }
                let start = self.pos;
                while !matches!(self.peek(0), None | Some('\n')) {
                    self.bump();
                }
                let text: String = self.src[start..self.pos].iter().collect();
                self.bump();
                let candidate = if indented { text.trim() } else { text.trim_end() };
                if candidate == term {
                    break;
                }
            }
        }
        Ok(())
    }
}
