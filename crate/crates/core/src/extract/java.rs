//! Structural parser for the `java-like` profile.
//!
//! This is not a full Java grammar. It recognises type declarations, members,
//! parameters and local declarations well enough to collect identifiers and to
//! record every invocation site together with what is statically known about
//! its receiver. Resolution against the project class roster happens later.

use std::collections::{BTreeSet, HashMap};

use super::lexer::{lex, Comment, Tok, Token};

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "yield",
    "permits",
    "sealed",
];

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

/// Reserved words of the profile. Also used as a built-in stoplist.
pub fn keywords() -> &'static [&'static str] {
    KEYWORDS
}

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_primitive(word: &str) -> bool {
    PRIMITIVES.contains(&word)
}

/// Can `word` start a type in a declaration?
fn type_word(word: &str) -> bool {
    !is_keyword(word) || is_primitive(word)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Receiver {
    /// Unqualified call, implicit `this`.
    Implicit,
    /// `this.m()` or `Outer.this.m()`.
    This,
    /// A variable with an explicitly declared type.
    Typed(String),
    /// A dotted chain of names that are not variables in scope.
    Name(Vec<String>),
    /// Any other expression.
    Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Site {
    Call { receiver: Receiver, method: String },
    New(String),
}

#[derive(Debug, Default)]
pub(crate) struct TypeUnit {
    pub name: String,
    /// Nested type paths relative to the top-level type, e.g. `Inner.Deeper`.
    pub nested: Vec<String>,
    pub identifiers: Vec<String>,
    pub comments: Vec<String>,
    pub methods: BTreeSet<String>,
    pub sites: Vec<Site>,
}

#[derive(Debug, Default)]
pub(crate) struct FileUnit {
    pub package: Option<String>,
    pub imports: Vec<String>,
    pub types: Vec<TypeUnit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

type PResult<T> = Result<T, ParseError>;

pub(crate) fn parse(src: &str) -> PResult<FileUnit> {
    let lexed = lex(src).map_err(|e| ParseError {
        line: e.line,
        message: e.message.to_string(),
    })?;
    Parser {
        toks: &lexed.tokens,
        comments: &lexed.comments,
        pos: 0,
        scopes: Vec::new(),
        unit: TypeUnit::default(),
        type_path: Vec::new(),
    }
    .parse_file()
}

struct Scope {
    fields: bool,
    /// `None` for variables without a usable declared type (`var x = f()`).
    vars: HashMap<String, Option<String>>,
}

impl Scope {
    fn fields() -> Self {
        Scope {
            fields: true,
            vars: HashMap::new(),
        }
    }

    fn locals() -> Self {
        Scope {
            fields: false,
            vars: HashMap::new(),
        }
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    comments: &'a [Comment],
    pos: usize,
    scopes: Vec<Scope>,
    unit: TypeUnit,
    type_path: Vec<String>,
}

impl<'a> Parser<'a> {
    // ---- token helpers -------------------------------------------------

    fn tok_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(k).map(|t| &t.tok)
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.tok_at(self.pos)
    }

    fn ident_at(&self, k: usize) -> Option<&'a str> {
        match self.tok_at(k) {
            Some(Tok::Ident(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    fn punct_at(&self, k: usize, c: char) -> bool {
        matches!(self.tok_at(k), Some(Tok::Punct(p)) if *p == c)
    }

    fn punct(&self, c: char) -> bool {
        self.punct_at(self.pos, c)
    }

    fn word(&self, w: &str) -> bool {
        self.ident_at(self.pos) == Some(w)
    }

    fn prev_punct(&self, k: usize, c: char) -> bool {
        k > 0 && self.punct_at(k - 1, c)
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.line)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            line: self.line(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.punct(c) {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.ident_at(self.pos) {
            Some(w) if !is_keyword(w) => {
                self.advance();
                Ok(w.to_string())
            }
            _ => self.err("expected identifier"),
        }
    }

    fn dotted(&mut self) -> PResult<String> {
        let mut name = self.expect_ident()?;
        while self.punct('.') {
            self.advance();
            if self.punct('*') {
                self.advance();
                name.push_str(".*");
                break;
            }
            name.push('.');
            name.push_str(&self.expect_ident()?);
        }
        Ok(name)
    }

    fn skip_balanced(&mut self, open: char, close: char) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1usize;
        while depth > 0 {
            match self.peek() {
                None => return self.err(format!("unbalanced `{open}`")),
                Some(Tok::Punct(c)) if *c == open => depth += 1,
                Some(Tok::Punct(c)) if *c == close => depth -= 1,
                Some(Tok::Punct('{' | '}' | ';')) if open == '<' => {
                    return self.err("malformed type arguments")
                }
                _ => {}
            }
            self.advance();
        }
        Ok(())
    }

    fn skip_annotation(&mut self) -> PResult<()> {
        self.expect('@')?;
        self.dotted()?;
        if self.punct('(') {
            self.skip_balanced('(', ')')?;
        }
        Ok(())
    }

    fn skip_annotations_and_final(&mut self) -> PResult<()> {
        loop {
            if self.punct('@') {
                self.skip_annotation()?;
            } else if self.word("final") {
                self.advance();
            } else {
                return Ok(());
            }
        }
    }

    fn skip_dims(&mut self) {
        while self.punct('[') && self.punct_at(self.pos + 1, ']') {
            self.pos += 2;
        }
    }

    fn skip_modifier(&mut self) -> bool {
        match self.ident_at(self.pos) {
            Some(w) if MODIFIERS.contains(&w) => {
                self.advance();
                true
            }
            // non-sealed
            Some("non") if self.punct_at(self.pos + 1, '-') => {
                self.pos += 3;
                true
            }
            _ => false,
        }
    }

    // ---- scopes --------------------------------------------------------

    fn declare(&mut self, name: &str, ty: Option<String>) {
        if let Some(scope) = self.scopes.last_mut() {
            scope.vars.insert(name.to_string(), ty);
        }
    }

    fn lookup(&self, name: &str) -> Option<&Option<String>> {
        self.scopes.iter().rev().find_map(|s| s.vars.get(name))
    }

    fn lookup_field(&self, name: &str) -> Option<&Option<String>> {
        self.scopes
            .iter()
            .rev()
            .find(|s| s.fields)
            .and_then(|s| s.vars.get(name))
    }

    // ---- declarations --------------------------------------------------

    fn parse_file(mut self) -> PResult<FileUnit> {
        let mut file = FileUnit::default();
        let mut comment_floor = 0usize;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Punct(';') => {
                    self.advance();
                    comment_floor = self.pos;
                }
                Tok::Ident(w) if w == "package" => {
                    self.advance();
                    file.package = Some(self.dotted()?);
                    self.expect(';')?;
                    comment_floor = self.pos;
                }
                Tok::Ident(w) if w == "import" => {
                    self.advance();
                    if self.word("static") {
                        self.advance();
                    }
                    file.imports.push(self.dotted()?);
                    self.expect(';')?;
                    comment_floor = self.pos;
                }
                // module-info.java declares no classes
                Tok::Ident(w) if (w == "module" || w == "open") && file.types.is_empty() => {
                    return Ok(FileUnit::default());
                }
                Tok::Punct('@') if self.ident_at(self.pos + 1) == Some("interface") => {
                    self.top_level_type(&mut file, comment_floor)?;
                    comment_floor = self.pos;
                }
                Tok::Punct('@') => self.skip_annotation()?,
                Tok::Ident(w) if is_type_keyword(w) => {
                    self.top_level_type(&mut file, comment_floor)?;
                    comment_floor = self.pos;
                }
                Tok::Ident(w) if w == "record" && self.ident_at(self.pos + 1).is_some() => {
                    self.top_level_type(&mut file, comment_floor)?;
                    comment_floor = self.pos;
                }
                _ => {
                    if !self.skip_modifier() {
                        return self.err("unexpected token at top level");
                    }
                }
            }
        }
        Ok(file)
    }

    fn top_level_type(&mut self, file: &mut FileUnit, comment_floor: usize) -> PResult<()> {
        self.unit = TypeUnit::default();
        self.parse_type_decl()?;
        let end = self.pos;
        let mut unit = std::mem::take(&mut self.unit);
        unit.comments = self
            .comments
            .iter()
            .filter(|c| c.at >= comment_floor && c.at < end)
            .map(|c| c.text.clone())
            .collect();
        file.types.push(unit);
        Ok(())
    }

    fn parse_type_decl(&mut self) -> PResult<()> {
        let kind = if self.punct('@') {
            self.pos += 2;
            "interface".to_string()
        } else {
            let k = self.ident_at(self.pos).unwrap_or_default().to_string();
            self.advance();
            k
        };
        let name = self.expect_ident()?;
        if self.type_path.is_empty() {
            self.unit.name = name.clone();
        } else {
            let mut path = self.type_path[1..].to_vec();
            path.push(name.clone());
            self.unit.nested.push(path.join("."));
        }
        self.unit.identifiers.push(name.clone());
        self.type_path.push(name);
        self.scopes.push(Scope::fields());

        if self.punct('<') {
            self.skip_balanced('<', '>')?;
        }
        if kind == "record" && self.punct('(') {
            self.parse_params()?;
        }
        while !self.punct('{') {
            match self.peek() {
                None | Some(Tok::Punct(';' | '}')) => {
                    return self.err("malformed type declaration header")
                }
                Some(Tok::Punct('<')) => self.skip_balanced('<', '>')?,
                Some(Tok::Punct('(')) => self.skip_balanced('(', ')')?,
                _ => self.advance(),
            }
        }
        self.parse_class_body(kind == "enum")?;

        self.scopes.pop();
        self.type_path.pop();
        Ok(())
    }

    fn parse_class_body(&mut self, is_enum: bool) -> PResult<()> {
        self.expect('{')?;
        if is_enum {
            self.scan_code(&[';', '}'])?;
            if self.punct(';') {
                self.advance();
            }
        }
        loop {
            match self.peek() {
                None => return self.err("unexpected end of file in class body"),
                Some(Tok::Punct('}')) => {
                    self.advance();
                    return Ok(());
                }
                Some(Tok::Punct(';')) => self.advance(),
                Some(Tok::Punct('@')) if self.ident_at(self.pos + 1) == Some("interface") => {
                    self.parse_type_decl()?
                }
                Some(Tok::Punct('@')) => self.skip_annotation()?,
                Some(Tok::Punct('{')) => self.scan_block()?,
                Some(Tok::Punct('<')) => self.skip_balanced('<', '>')?,
                Some(Tok::Ident(w)) if is_type_keyword(w) => self.parse_type_decl()?,
                Some(Tok::Ident(w))
                    if w == "record"
                        && self.ident_at(self.pos + 1).is_some()
                        && (self.punct_at(self.pos + 2, '(')
                            || self.punct_at(self.pos + 2, '<')) =>
                {
                    self.parse_type_decl()?
                }
                Some(Tok::Ident(_)) => {
                    if !self.skip_modifier() {
                        self.parse_member()?;
                    }
                }
                _ => return self.err("unexpected token in class body"),
            }
        }
    }

    fn parse_member(&mut self) -> PResult<()> {
        if self.ident_at(self.pos).is_some_and(|w| !is_keyword(w)) {
            // constructor
            if self.punct_at(self.pos + 1, '(') {
                self.advance();
                return self.parse_method_rest();
            }
            // compact record constructor
            if self.punct_at(self.pos + 1, '{') {
                self.advance();
                return self.scan_block();
            }
        }
        let ty = self.parse_type()?;
        let name = self.expect_ident()?;
        self.unit.identifiers.push(name.clone());
        if self.punct('(') {
            self.unit.methods.insert(name);
            return self.parse_method_rest();
        }
        self.declare(&name, Some(ty.clone()));
        loop {
            self.skip_dims();
            if self.punct('=') {
                self.advance();
                self.scan_code(&[',', ';'])?;
            }
            if self.punct(',') {
                self.advance();
                let next = self.expect_ident()?;
                self.unit.identifiers.push(next.clone());
                self.declare(&next, Some(ty.clone()));
                continue;
            }
            return self.expect(';');
        }
    }

    fn parse_method_rest(&mut self) -> PResult<()> {
        self.scopes.push(Scope::locals());
        self.parse_params()?;
        self.skip_dims();
        if self.word("throws") {
            self.advance();
            loop {
                self.parse_type()?;
                if !self.punct(',') {
                    break;
                }
                self.advance();
            }
        }
        match self.peek() {
            Some(Tok::Punct('{')) => self.scan_block()?,
            Some(Tok::Punct(';')) => self.advance(),
            Some(Tok::Ident(w)) if w == "default" => {
                self.advance();
                self.scan_code(&[';'])?;
                self.expect(';')?;
            }
            _ => return self.err("expected method body"),
        }
        self.scopes.pop();
        Ok(())
    }

    fn parse_params(&mut self) -> PResult<()> {
        self.expect('(')?;
        if self.punct(')') {
            self.advance();
            return Ok(());
        }
        loop {
            self.skip_annotations_and_final()?;
            let ty = self.parse_type()?;
            if self.word("this") {
                self.advance();
            } else {
                let name = self.expect_ident()?;
                self.skip_dims();
                self.unit.identifiers.push(name.clone());
                self.declare(&name, Some(ty));
            }
            if self.punct(',') {
                self.advance();
                continue;
            }
            return self.expect(')');
        }
    }

    fn parse_type(&mut self) -> PResult<String> {
        self.skip_annotations_and_final()?;
        let name = match self.ident_at(self.pos) {
            Some(w) if type_word(w) => w.to_string(),
            _ => return self.err("expected type"),
        };
        let (name, next) = match self.type_at(self.pos) {
            Some(found) => found,
            None => (name, self.pos + 1),
        };
        if next == self.pos + 1 && self.punct_at(self.pos + 1, '<') {
            // type arguments the lenient scanner rejected, e.g. intersections
            self.advance();
            self.skip_balanced('<', '>')?;
            self.skip_dims();
        } else {
            self.pos = next;
        }
        Ok(name)
    }

    /// Speculatively read a type starting at token `k`. Returns the dotted base
    /// name (type arguments stripped) and the index after the type.
    fn type_at(&self, mut k: usize) -> Option<(String, usize)> {
        let first = self.ident_at(k)?;
        if !type_word(first) {
            return None;
        }
        let mut name = first.to_string();
        k += 1;
        while self.punct_at(k, '.') {
            match self.ident_at(k + 1) {
                Some(w) if !is_keyword(w) => {
                    name.push('.');
                    name.push_str(w);
                    k += 2;
                }
                _ => break,
            }
        }
        if self.punct_at(k, '<') {
            let mut depth = 0usize;
            loop {
                match self.tok_at(k)? {
                    Tok::Punct('<') => depth += 1,
                    Tok::Punct('>') => {
                        depth -= 1;
                        if depth == 0 {
                            k += 1;
                            break;
                        }
                    }
                    Tok::Punct('.' | ',' | '?' | '[' | ']') => {}
                    Tok::Ident(w) if type_word(w) || w == "extends" || w == "super" => {}
                    _ => return None,
                }
                k += 1;
            }
        }
        while self.punct_at(k, '[') && self.punct_at(k + 1, ']') {
            k += 2;
        }
        if self.punct_at(k, '.') && self.punct_at(k + 1, '.') && self.punct_at(k + 2, '.') {
            k += 3;
        }
        Some((name, k))
    }

    // ---- code ----------------------------------------------------------

    fn scan_block(&mut self) -> PResult<()> {
        self.expect('{')?;
        self.scopes.push(Scope::locals());
        self.scan_code(&['}'])?;
        self.expect('}')?;
        self.scopes.pop();
        Ok(())
    }

    /// Scan statements or an expression until one of `stops` appears at
    /// bracket depth zero. The stop token is not consumed.
    fn scan_code(&mut self, stops: &[char]) -> PResult<()> {
        let mut stack: Vec<char> = Vec::new();
        loop {
            let Some(tok) = self.peek() else {
                return self.err("unexpected end of file in code block");
            };
            match tok {
                Tok::Punct(c) if stack.is_empty() && stops.contains(c) => return Ok(()),
                Tok::Punct(c @ ('(' | '[' | '{')) => {
                    if *c == '{' {
                        self.scopes.push(Scope::locals());
                    }
                    stack.push(*c);
                    self.advance();
                }
                Tok::Punct(c @ (')' | ']' | '}')) => {
                    let expected = match stack.pop() {
                        Some('(') => ')',
                        Some('[') => ']',
                        Some(_) => '}',
                        None => return self.err(format!("unexpected `{c}`")),
                    };
                    if *c != expected {
                        return self.err(format!("mismatched `{c}`"));
                    }
                    if *c == '}' {
                        self.scopes.pop();
                    }
                    self.advance();
                }
                Tok::Ident(w) => self.scan_word(w),
                _ => self.advance(),
            }
        }
    }

    fn scan_word(&mut self, word: &str) {
        let i = self.pos;
        if self.prev_punct(i, '@') {
            self.advance();
            return;
        }
        if word == "new" {
            self.advance();
            if let Some((ty, next)) = self.type_at(self.pos) {
                if self.punct_at(next, '(') {
                    self.unit.sites.push(Site::New(ty));
                }
                self.pos = next;
            }
            return;
        }
        if is_keyword(word) && !is_primitive(word) {
            self.advance();
            return;
        }
        if !self.prev_punct(i, '.') {
            if let Some(next) = self.local_decl(i) {
                self.pos = next;
                return;
            }
        }
        if !is_primitive(word) && self.punct_at(i + 1, '(') {
            if self.prev_is_type(i) {
                // method declared in an anonymous or local class
                self.unit.identifiers.push(word.to_string());
            } else {
                let receiver = self.receiver_before(i);
                self.unit.sites.push(Site::Call {
                    receiver,
                    method: word.to_string(),
                });
            }
        }
        self.advance();
    }

    fn prev_is_type(&self, i: usize) -> bool {
        if i == 0 {
            return false;
        }
        match self.tok_at(i - 1) {
            Some(Tok::Ident(w)) => type_word(w),
            Some(Tok::Punct(']')) => true,
            _ => false,
        }
    }

    /// Recognise `Type name` followed by `=`, `;`, `,`, `:` or `)`.
    fn local_decl(&mut self, i: usize) -> Option<usize> {
        let (ty, j) = self.type_at(i)?;
        let name = self.ident_at(j).filter(|w| !is_keyword(w))?;
        let follows = ['=', ';', ',', ':', ')']
            .iter()
            .any(|c| self.punct_at(j + 1, *c));
        if !follows {
            return None;
        }
        let ty = if ty == "var" {
            if self.punct_at(j + 1, '=') && self.ident_at(j + 2) == Some("new") {
                self.type_at(j + 3).map(|(t, _)| t)
            } else {
                None
            }
        } else {
            Some(ty)
        };
        self.unit.identifiers.push(name.to_string());
        self.declare(name, ty);
        Some(j + 1)
    }

    fn receiver_before(&self, i: usize) -> Receiver {
        if !self.prev_punct(i, '.') {
            return Receiver::Implicit;
        }
        let mut chain: Vec<String> = Vec::new();
        let mut dot = i - 1;
        loop {
            if dot == 0 {
                return Receiver::Expr;
            }
            match self.ident_at(dot - 1) {
                Some(w) => {
                    chain.push(w.to_string());
                    if dot >= 2 && self.punct_at(dot - 2, '.') {
                        dot -= 2;
                    } else {
                        break;
                    }
                }
                None => return Receiver::Expr,
            }
        }
        chain.reverse();

        if chain.last().is_some_and(|w| w == "this") {
            return Receiver::This;
        }
        if chain.iter().any(|w| is_keyword(w)) && chain[0] != "this" {
            return Receiver::Expr;
        }
        if chain[0] == "this" {
            return match (chain.len(), self.lookup_field(&chain[1])) {
                (2, Some(Some(ty))) => Receiver::Typed(ty.clone()),
                _ => Receiver::Expr,
            };
        }
        match self.lookup(&chain[0]) {
            Some(Some(ty)) if chain.len() == 1 => Receiver::Typed(ty.clone()),
            Some(_) => Receiver::Expr,
            None => Receiver::Name(chain),
        }
    }
}

fn is_type_keyword(word: &str) -> bool {
    matches!(word, "class" | "interface" | "enum")
}
