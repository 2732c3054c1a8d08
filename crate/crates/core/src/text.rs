//! Policy text format.
//!
//! ```text
//! policy  := section*
//! section := "Roles" ident+ ";"
//!          | "Users" ident+ ";"
//!          | "UA" pair* ";"                  pair  := "<" ident "," ident ">"
//!          | "CR" pair* ";"                  (admin, target)
//!          | "CA" caent* ";"                 caent := "<" ident "," cond "," ident ">"
//!          | "RH" pair* ";"                  (senior, junior)
//!          | "ADMIN" ident+ ";"
//!          | "SPEC" ident ident ";"          (user, target)
//! cond    := "TRUE" | lit ("&" lit)*         lit   := "-"? ident
//! ident   := [A-Za-z_][A-Za-z0-9_@-]*
//! ```
//!
//! Whitespace between tokens is insignificant and `//` starts a line
//! comment. Repeated sections concatenate. Output is canonical: sections in
//! the order above, one entry per line for the rule sections, `\n` line
//! endings and no trailing whitespace.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{
    is_identifier_continue, validate, CanAssignRule, CanRevokeRule, Diagnostic, Policy,
    Precondition, RoleId, SafetyQuery, UserId, RESERVED_WORD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Error)]
#[error("policy has {} validation error(s); first: {}", .0.len(), .0[0])]
pub struct InvalidPolicy(pub Vec<Diagnostic>);

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Ident(String),
    Less,
    Greater,
    Comma,
    Semi,
    Amp,
    Minus,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Less => "`<`".into(),
            TokenKind::Greater => "`>`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Amp => "`&`".into(),
            TokenKind::Minus => "`-`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    span: SourceSpan,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(c) = chars.next() {
        let start = SourceSpan {
            line,
            column,
            length: 1,
        };
        column += 1;
        let kind = match c {
            '\n' => {
                line += 1;
                column = 1;
                continue;
            }
            '\r' => {
                if chars.peek() != Some(&'\n') {
                    line += 1;
                    column = 1;
                }
                continue;
            }
            c if c.is_whitespace() => continue,
            '/' if chars.peek() == Some(&'/') => {
                while chars.peek().is_some_and(|&c| c != '\n' && c != '\r') {
                    chars.next();
                }
                continue;
            }
            '<' => TokenKind::Less,
            '>' => TokenKind::Greater,
            ',' => TokenKind::Comma,
            ';' => TokenKind::Semi,
            '&' => TokenKind::Amp,
            '-' => TokenKind::Minus,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::from(c);
                while let Some(&next) = chars.peek() {
                    if !is_identifier_continue(next) {
                        break;
                    }
                    ident.push(next);
                    chars.next();
                    column += 1;
                }
                tokens.push(Token {
                    span: SourceSpan {
                        length: ident.len(),
                        ..start
                    },
                    kind: TokenKind::Ident(ident),
                });
                continue;
            }
            other => {
                return Err(ParseError {
                    span: start,
                    message: format!("unexpected character {other:?}"),
                    expected: vec![],
                })
            }
        };
        tokens.push(Token { kind, span: start });
    }
    Ok(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Roles,
    Users,
    Ua,
    Cr,
    Ca,
    Rh,
    Admin,
    Spec,
}

const SECTIONS: [(&str, Section); 8] = [
    ("Roles", Section::Roles),
    ("Users", Section::Users),
    ("UA", Section::Ua),
    ("CR", Section::Cr),
    ("CA", Section::Ca),
    ("RH", Section::Rh),
    ("ADMIN", Section::Admin),
    ("SPEC", Section::Spec),
];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let expected: Vec<String> = expected.iter().map(|s| (*s).to_owned()).collect();
        let wanted = expected.join(" or ");
        match self.tokens.get(self.pos) {
            Some(tok) => ParseError {
                span: tok.span,
                message: format!("expected {wanted}, found {}", tok.kind.describe()),
                expected,
            },
            None => ParseError {
                // the last token always exists here: an empty input never errors
                span: self.tokens.last().map(|t| t.span).unwrap_or(SourceSpan {
                    line: 1,
                    column: 1,
                    length: 1,
                }),
                message: format!("unexpected end of input, expected {wanted}"),
                expected,
            },
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(&[&kind.describe()]))
        }
    }

    /// Returns the identifier text, rejecting `TRUE`.
    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(TokenKind::Ident(s)) if s != RESERVED_WORD => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn role(&mut self) -> PResult<RoleId> {
        self.ident("role name")
            .map(|s| RoleId::new(s).expect("lexer grammar"))
    }

    fn user(&mut self) -> PResult<UserId> {
        self.ident("user name")
            .map(|s| UserId::new(s).expect("lexer grammar"))
    }

    fn at_ident(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::Ident(s)) if s != RESERVED_WORD)
    }

    fn section(&mut self) -> PResult<Section> {
        if let Some(TokenKind::Ident(word)) = self.peek() {
            if let Some((_, section)) = SECTIONS.iter().find(|(kw, _)| kw == word) {
                self.pos += 1;
                return Ok(*section);
            }
        }
        Err(self.error(&SECTIONS.map(|(kw, _)| kw)))
    }

    /// `ident+ ;`
    fn ident_list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = vec![item(self)?];
        while !self.eat(&TokenKind::Semi) {
            if !self.at_ident() {
                return Err(self.error(&["identifier", "`;`"]));
            }
            out.push(item(self)?);
        }
        Ok(out)
    }

    /// `entry* ;`
    fn entries<T>(&mut self, mut entry: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        while !self.eat(&TokenKind::Semi) {
            if self.peek() != Some(&TokenKind::Less) {
                return Err(self.error(&["`<`", "`;`"]));
            }
            out.push(entry(self)?);
        }
        Ok(out)
    }

    fn pair<A, B>(
        &mut self,
        first: impl FnOnce(&mut Self) -> PResult<A>,
        second: impl FnOnce(&mut Self) -> PResult<B>,
    ) -> PResult<(A, B)> {
        self.expect(TokenKind::Less)?;
        let a = first(self)?;
        self.expect(TokenKind::Comma)?;
        let b = second(self)?;
        self.expect(TokenKind::Greater)?;
        Ok((a, b))
    }

    fn condition(&mut self) -> PResult<Precondition> {
        if matches!(self.peek(), Some(TokenKind::Ident(s)) if s == RESERVED_WORD) {
            self.pos += 1;
            return Ok(Precondition::always());
        }
        let mut pre = Precondition::always();
        loop {
            if self.eat(&TokenKind::Minus) {
                pre.negative.insert(self.role()?);
            } else if self.at_ident() {
                pre.positive.insert(self.role()?);
            } else {
                return Err(self.error(&["`TRUE`", "role name", "`-`"]));
            }
            if !self.eat(&TokenKind::Amp) {
                return Ok(pre);
            }
        }
    }

    fn can_assign(&mut self) -> PResult<CanAssignRule> {
        self.expect(TokenKind::Less)?;
        let admin = self.role()?;
        self.expect(TokenKind::Comma)?;
        let pre = self.condition()?;
        self.expect(TokenKind::Comma)?;
        let target = self.role()?;
        self.expect(TokenKind::Greater)?;
        Ok(CanAssignRule { admin, pre, target })
    }

    fn policy(&mut self) -> PResult<Policy> {
        let mut p = Policy::default();
        while self.pos < self.tokens.len() {
            match self.section()? {
                Section::Roles => p.roles.extend(self.ident_list(Self::role)?),
                Section::Users => p.users.extend(self.ident_list(Self::user)?),
                Section::Admin => p.admin_roles.extend(self.ident_list(Self::role)?),
                Section::Ua => {
                    p.ua.extend(self.entries(|s| s.pair(Self::user, Self::role))?)
                }
                Section::Rh => p
                    .hierarchy
                    .edges
                    .extend(self.entries(|s| s.pair(Self::role, Self::role))?),
                Section::Cr => p.cr.extend(
                    self.entries(|s| s.pair(Self::role, Self::role))?
                        .into_iter()
                        .map(|(admin, target)| CanRevokeRule { admin, target }),
                ),
                Section::Ca => p.ca.extend(self.entries(Self::can_assign)?),
                Section::Spec => {
                    let user = self.user()?;
                    let target = self.role()?;
                    self.expect(TokenKind::Semi)?;
                    p.queries.push(SafetyQuery { user, target });
                }
            }
        }
        Ok(p)
    }
}

/// Parses policy text. Names are checked syntactically only; use
/// [`validate`] for references to undeclared names.
pub fn parse_policy(text: &str) -> Result<Policy, ParseError> {
    let tokens = tokenize(text)?;
    Parser { tokens, pos: 0 }.policy()
}

/// Canonical text of a well-formed policy.
pub fn serialize_policy(policy: &Policy) -> Result<String, InvalidPolicy> {
    let errors: Vec<Diagnostic> = validate(policy)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(InvalidPolicy(errors));
    }
    Ok(render(policy))
}

fn write_names<T: fmt::Display>(out: &mut String, keyword: &str, names: &[T]) {
    if names.is_empty() {
        return;
    }
    out.push_str(keyword);
    for name in names {
        let _ = write!(out, " {name}");
    }
    out.push_str(";\n");
}

fn write_entries<T: fmt::Display>(out: &mut String, keyword: &str, entries: &[T]) {
    out.push_str(keyword);
    if entries.is_empty() {
        out.push_str(" ;\n");
        return;
    }
    out.push('\n');
    for entry in entries {
        let _ = writeln!(out, "{entry}");
    }
    out.push_str(";\n");
}

struct Pair<'a, A, B>(&'a A, &'a B);

impl<A: fmt::Display, B: fmt::Display> fmt::Display for Pair<'_, A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.0, self.1)
    }
}

/// Renders without validating. Only meaningful for well-formed policies.
pub(crate) fn render(policy: &Policy) -> String {
    let mut out = String::new();
    write_names(&mut out, "Roles", &policy.roles);
    write_names(&mut out, "Users", &policy.users);
    let ua: Vec<_> = policy.ua.iter().map(|(u, r)| Pair(u, r)).collect();
    write_entries(&mut out, "UA", &ua);
    write_entries(&mut out, "CR", &policy.cr);
    write_entries(&mut out, "CA", &policy.ca);
    if !policy.hierarchy.is_empty() {
        let rh: Vec<_> = policy
            .hierarchy
            .edges
            .iter()
            .map(|(s, j)| Pair(s, j))
            .collect();
        write_entries(&mut out, "RH", &rh);
    }
    write_names(&mut out, "ADMIN", &policy.admin_roles);
    for query in &policy.queries {
        let _ = writeln!(out, "SPEC {} {};", query.user, query.target);
    }
    out
}

/// Renders can_assign rules as a standalone `CA` section.
pub fn render_ca_section(rules: &[CanAssignRule]) -> String {
    let mut out = String::new();
    write_entries(&mut out, "CA", rules);
    out
}
