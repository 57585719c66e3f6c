//! Session-type abstract syntax, parsing, rendering and duality.
//!
//! A session type describes one endpoint of a two-party channel:
//! an internal choice `+{l;T, ...}` sends one of the labels, an external
//! choice `&{l;T, ...}` receives one, `rec X.T` / `X` express recursion
//! and `end` terminates the protocol. Message payloads are abstracted
//! away; only label names matter.
//!
//! The concrete syntax accepted by [`parse`] is:
//!
//! ```text
//! S  ::= OP '{' id ';' S (',' id ';' S)* '}'
//!      | 'rec' id '.' S  |  id  |  'end'
//!      | '!' id ';' S  |  '[' '!' id ';' S (',' '!' id ';' S)* ']'
//!      | '?' id ';' S  |  '[' '?' id ';' S (',' '?' id ';' S)* ']'
//! OP ::= '+' | '&'
//! ```
//!
//! where `id` is a non-empty sequence of ASCII letters optionally
//! followed by trailing digits. `!a;T` and `?a;T` abbreviate the
//! singleton choices, and the bracketed "raw" forms are alternative
//! spellings of `+{...}` / `&{...}`.

use std::fmt;

use thiserror::Error;

/// A message label (also used for recursion variables, which share the
/// same lexical class; the grammar position disambiguates).
///
/// Invariant: a non-empty run of ASCII letters optionally followed by
/// trailing digits, e.g. `ok`, `ko1`, `X`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

/// Error returned by [`Label::new`] for strings outside the `id` class.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid label {0:?}: expected ASCII letters optionally followed by digits")]
pub struct InvalidLabel(pub String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidLabel> {
        let name = name.into();
        if is_valid_id(&name) {
            Ok(Label(name))
        } else {
            Err(InvalidLabel(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_valid_id(s: &str) -> bool {
    let letters = s.chars().take_while(|c| c.is_ascii_alphabetic()).count();
    letters > 0 && s.chars().skip(letters).all(|c| c.is_ascii_digit())
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Abstract syntax of two-party session types.
///
/// Branch lists preserve source order, so rendering and the derived
/// transition systems are deterministic. Well-formed values have
/// non-empty choices with pairwise-distinct labels, every `Var` bound
/// by an enclosing `Rec` of the same name, and every recursion guarded
/// (the variable occurs only under at least one choice). [`parse`]
/// enforces all of this; programmatic constructions are expected to
/// respect it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SessionType {
    /// Internal choice: send one of the labels, continue accordingly.
    Select(Vec<(Label, SessionType)>),
    /// External choice: receive one of the labels, continue accordingly.
    Branch(Vec<(Label, SessionType)>),
    /// Recursion binder `rec X.T`.
    Rec(Label, Box<SessionType>),
    /// Recursion variable.
    Var(Label),
    /// Terminated protocol.
    End,
}

impl SessionType {
    /// The dual endpoint: selects become branches and vice versa,
    /// `end` and variables are fixed, recursion distributes.
    ///
    /// Duality is an involution: `t.dual().dual() == t`.
    pub fn dual(&self) -> SessionType {
        match self {
            SessionType::Select(bs) => {
                SessionType::Branch(bs.iter().map(|(l, t)| (l.clone(), t.dual())).collect())
            }
            SessionType::Branch(bs) => {
                SessionType::Select(bs.iter().map(|(l, t)| (l.clone(), t.dual())).collect())
            }
            SessionType::Rec(x, body) => SessionType::Rec(x.clone(), Box::new(body.dual())),
            SessionType::Var(x) => SessionType::Var(x.clone()),
            SessionType::End => SessionType::End,
        }
    }

    /// Canonical text in the `+`/`&`/`rec` syntax. Re-parsing the result
    /// yields a structurally identical value.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            SessionType::Select(bs) => render_choice('+', bs, out),
            SessionType::Branch(bs) => render_choice('&', bs, out),
            SessionType::Rec(x, body) => {
                out.push_str("rec ");
                out.push_str(x.as_str());
                out.push('.');
                body.render_into(out);
            }
            SessionType::Var(x) => out.push_str(x.as_str()),
            SessionType::End => out.push_str("end"),
        }
    }

    /// Substitutes `replacement` for free occurrences of `var`.
    /// Inner binders of the same name shadow as usual.
    pub(crate) fn substitute(&self, var: &Label, replacement: &SessionType) -> SessionType {
        match self {
            SessionType::Select(bs) => SessionType::Select(
                bs.iter()
                    .map(|(l, t)| (l.clone(), t.substitute(var, replacement)))
                    .collect(),
            ),
            SessionType::Branch(bs) => SessionType::Branch(
                bs.iter()
                    .map(|(l, t)| (l.clone(), t.substitute(var, replacement)))
                    .collect(),
            ),
            SessionType::Rec(x, body) => {
                if x == var {
                    self.clone()
                } else {
                    SessionType::Rec(x.clone(), Box::new(body.substitute(var, replacement)))
                }
            }
            SessionType::Var(x) => {
                if x == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            SessionType::End => SessionType::End,
        }
    }
}

fn render_choice(op: char, branches: &[(Label, SessionType)], out: &mut String) {
    out.push(op);
    out.push('{');
    for (i, (l, t)) in branches.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(l.as_str());
        out.push(';');
        t.render_into(out);
    }
    out.push('}');
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A source position (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Parse failures, each carrying the source position where the problem
/// was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: expected {expected}, found {found}")]
    Syntax {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: duplicate label `{label}` in choice")]
    DuplicateLabel { pos: Pos, label: Label },
    #[error("{pos}: empty choice (a choice needs at least one branch)")]
    EmptyChoice { pos: Pos },
    #[error("{pos}: free recursion variable `{name}`")]
    FreeVariable { pos: Pos, name: String },
    #[error("{pos}: unguarded recursion variable `{name}` (it must occur under a choice)")]
    UnguardedRecursion { pos: Pos, name: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::DuplicateLabel { pos, .. }
            | ParseError::EmptyChoice { pos }
            | ParseError::FreeVariable { pos, .. }
            | ParseError::UnguardedRecursion { pos, .. } => *pos,
        }
    }
}

/// Parses a session type from text. Whitespace-insensitive.
///
/// Accepts the primary `+`/`&`/`rec`/`end` syntax, the raw bracket
/// forms `[!a;T, !b;T']` / `[?a;T, ...]` and the singleton
/// abbreviations `!a;T` / `?a;T`. The result satisfies all
/// [`SessionType`] invariants (distinct labels, non-empty choices,
/// closed and guarded recursion).
pub fn parse(text: &str) -> Result<SessionType, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        i: 0,
        scope: Vec::new(),
        choice_depth: 0,
    };
    let t = parser.session()?;
    parser.expect_eof()?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Plus,
    Amp,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Semi,
    Comma,
    Dot,
    Bang,
    Query,
    Rec,
    End,
    Id(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Plus => "`+`".into(),
            Tok::Amp => "`&`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Query => "`?`".into(),
            Tok::Rec => "`rec`".into(),
            Tok::End => "`end`".into(),
            Tok::Id(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        let tok = match c {
            '+' => Some(Tok::Plus),
            '&' => Some(Tok::Amp),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '!' => Some(Tok::Bang),
            '?' => Some(Tok::Query),
            _ => None,
        };
        if let Some(tok) = tok {
            chars.next();
            col += 1;
            tokens.push(Token { tok, pos });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut id = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphabetic() {
                    id.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    id.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let tok = match id.as_str() {
                "rec" => Tok::Rec,
                "end" => Tok::End,
                _ => Tok::Id(id),
            };
            tokens.push(Token { tok, pos });
            continue;
        }
        return Err(ParseError::Syntax {
            pos,
            expected: "a session type token".into(),
            found: format!("`{c}`"),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
    /// In-scope recursion variables with the choice depth at their binder.
    scope: Vec<(String, u32)>,
    choice_depth: u32,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.i]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.i].clone();
        if self.i + 1 < self.tokens.len() {
            self.i += 1;
        }
        t
    }

    fn syntax_err(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            pos: t.pos,
            expected: expected.into(),
            found: t.tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.syntax_err(expected))
        }
    }

    fn expect_id(&mut self, expected: &str) -> Result<(String, Pos), ParseError> {
        match &self.peek().tok {
            Tok::Id(_) => {
                let t = self.bump();
                match t.tok {
                    Tok::Id(s) => Ok((s, t.pos)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.syntax_err(expected)),
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.syntax_err("end of input"))
        }
    }

    fn session(&mut self) -> Result<SessionType, ParseError> {
        match self.peek().tok.clone() {
            Tok::Plus => {
                self.bump();
                let bs = self.braced_branches()?;
                Ok(SessionType::Select(bs))
            }
            Tok::Amp => {
                self.bump();
                let bs = self.braced_branches()?;
                Ok(SessionType::Branch(bs))
            }
            Tok::Rec => {
                self.bump();
                let (name, _) = self.expect_id("a recursion variable")?;
                self.expect(Tok::Dot, "`.`")?;
                self.scope.push((name.clone(), self.choice_depth));
                let body = self.session()?;
                self.scope.pop();
                let var = Label(name);
                Ok(SessionType::Rec(var, Box::new(body)))
            }
            Tok::End => {
                self.bump();
                Ok(SessionType::End)
            }
            Tok::Id(name) => {
                let t = self.bump();
                match self.scope.iter().rev().find(|(n, _)| *n == name) {
                    None => Err(ParseError::FreeVariable {
                        pos: t.pos,
                        name,
                    }),
                    Some((_, bind_depth)) if *bind_depth >= self.choice_depth => {
                        Err(ParseError::UnguardedRecursion {
                            pos: t.pos,
                            name,
                        })
                    }
                    Some(_) => Ok(SessionType::Var(Label(name))),
                }
            }
            Tok::Bang => {
                self.bump();
                let (l, t) = self.prefixed_branch()?;
                Ok(SessionType::Select(vec![(l, t)]))
            }
            Tok::Query => {
                self.bump();
                let (l, t) = self.prefixed_branch()?;
                Ok(SessionType::Branch(vec![(l, t)]))
            }
            Tok::LBrack => self.raw_choice(),
            _ => Err(self.syntax_err("a session type")),
        }
    }

    /// `{ id ; S (, id ; S)* }` after a `+` or `&`.
    fn braced_branches(&mut self) -> Result<Vec<(Label, SessionType)>, ParseError> {
        let open = self.expect(Tok::LBrace, "`{`")?;
        if self.peek().tok == Tok::RBrace {
            return Err(ParseError::EmptyChoice { pos: open.pos });
        }
        let mut branches: Vec<(Label, SessionType)> = Vec::new();
        loop {
            let (name, pos) = self.expect_id("a branch label")?;
            self.expect(Tok::Semi, "`;`")?;
            let cont = self.branch_body()?;
            let label = Label(name);
            if branches.iter().any(|(l, _)| *l == label) {
                return Err(ParseError::DuplicateLabel { pos, label });
            }
            branches.push((label, cont));
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                _ => return Err(self.syntax_err("`,` or `}`")),
            }
        }
        Ok(branches)
    }

    /// `id ; S` after a bare `!` or `?` prefix.
    fn prefixed_branch(&mut self) -> Result<(Label, SessionType), ParseError> {
        let (name, _) = self.expect_id("a label")?;
        self.expect(Tok::Semi, "`;`")?;
        let cont = self.branch_body()?;
        Ok((Label(name), cont))
    }

    /// `[ !a;S (, !a;S)* ]` or `[ ?a;S (, ?a;S)* ]`; the polarity of the
    /// first item fixes the polarity of the whole choice.
    fn raw_choice(&mut self) -> Result<SessionType, ParseError> {
        let open = self.expect(Tok::LBrack, "`[`")?;
        if self.peek().tok == Tok::RBrack {
            return Err(ParseError::EmptyChoice { pos: open.pos });
        }
        let polarity = match self.peek().tok {
            Tok::Bang => Tok::Bang,
            Tok::Query => Tok::Query,
            _ => return Err(self.syntax_err("`!` or `?`")),
        };
        let mut branches: Vec<(Label, SessionType)> = Vec::new();
        loop {
            if self.peek().tok != polarity {
                return Err(self.syntax_err(&format!(
                    "{} (raw choices cannot mix polarities)",
                    polarity.describe()
                )));
            }
            self.bump();
            let (name, pos) = self.expect_id("a label")?;
            self.expect(Tok::Semi, "`;`")?;
            let cont = self.branch_body()?;
            let label = Label(name);
            if branches.iter().any(|(l, _)| *l == label) {
                return Err(ParseError::DuplicateLabel { pos, label });
            }
            branches.push((label, cont));
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrack => {
                    self.bump();
                    break;
                }
                _ => return Err(self.syntax_err("`,` or `]`")),
            }
        }
        Ok(if polarity == Tok::Bang {
            SessionType::Select(branches)
        } else {
            SessionType::Branch(branches)
        })
    }

    /// A branch continuation sits under one more choice constructor, so
    /// recursion variables occurring in it are guarded.
    fn branch_body(&mut self) -> Result<SessionType, ParseError> {
        self.choice_depth += 1;
        let t = self.session();
        self.choice_depth -= 1;
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn sel(bs: Vec<(&str, SessionType)>) -> SessionType {
        SessionType::Select(bs.into_iter().map(|(l, t)| (lab(l), t)).collect())
    }

    fn bra(bs: Vec<(&str, SessionType)>) -> SessionType {
        SessionType::Branch(bs.into_iter().map(|(l, t)| (lab(l), t)).collect())
    }

    fn rec(x: &str, body: SessionType) -> SessionType {
        SessionType::Rec(lab(x), Box::new(body))
    }

    fn var(x: &str) -> SessionType {
        SessionType::Var(lab(x))
    }

    fn hospital_server() -> SessionType {
        rec(
            "X",
            bra(vec![
                ("nd", sel(vec![("ko", var("X")), ("ok", var("X"))])),
                ("pr", sel(vec![("ko", var("X")), ("ok", var("X"))])),
            ]),
        )
    }

    #[test]
    fn parses_hospital_server() {
        let t = parse("rec X. &{nd; +{ko;X, ok;X}, pr; +{ko;X, ok;X}}").unwrap();
        assert_eq!(t, hospital_server());
    }

    #[test]
    fn parses_end() {
        assert_eq!(parse("end").unwrap(), SessionType::End);
    }

    #[test]
    fn parses_singleton_abbreviations() {
        assert_eq!(parse("!a;end").unwrap(), sel(vec![("a", SessionType::End)]));
        assert_eq!(parse("?a;end").unwrap(), bra(vec![("a", SessionType::End)]));
    }

    #[test]
    fn parses_raw_syntax() {
        assert_eq!(
            parse("[?a;end, ?b;end]").unwrap(),
            bra(vec![("a", SessionType::End), ("b", SessionType::End)])
        );
        assert_eq!(
            parse("[!a;end, !b;end]").unwrap(),
            sel(vec![("a", SessionType::End), ("b", SessionType::End)])
        );
    }

    #[test]
    fn rejects_mixed_raw_polarity() {
        let err = parse("[!a;end, ?b;end]").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
    }

    #[test]
    fn rejects_unguarded_recursion() {
        let err = parse("rec X. X").unwrap_err();
        match err {
            ParseError::UnguardedRecursion { pos, name } => {
                assert_eq!(name, "X");
                assert_eq!(pos, Pos { line: 1, col: 8 });
            }
            other => panic!("expected UnguardedRecursion, got {other}"),
        }
        // Guardedness must also hold through nested binders.
        assert!(matches!(
            parse("rec X. rec Y. X"),
            Err(ParseError::UnguardedRecursion { .. })
        ));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = parse("+{a;end, a;end}").unwrap_err();
        match err {
            ParseError::DuplicateLabel { label, .. } => assert_eq!(label.as_str(), "a"),
            other => panic!("expected DuplicateLabel, got {other}"),
        }
    }

    #[test]
    fn rejects_free_variables() {
        assert!(matches!(parse("X"), Err(ParseError::FreeVariable { .. })));
        assert!(matches!(
            parse("rec X. !a;Y"),
            Err(ParseError::FreeVariable { .. })
        ));
    }

    #[test]
    fn rejects_empty_choice() {
        assert!(matches!(parse("+{}"), Err(ParseError::EmptyChoice { .. })));
        assert!(matches!(parse("[]"), Err(ParseError::EmptyChoice { .. })));
    }

    #[test]
    fn whitespace_is_insignificant() {
        let spaced = parse("  rec   X .\n &  { nd ;\t+{ko;X, ok;X}, pr; +{ ko ; X , ok ; X } }")
            .unwrap();
        assert_eq!(spaced, hospital_server());
    }

    #[test]
    fn shadowed_variables_bind_innermost() {
        let t = parse("rec X. !a; rec X. !b; X").unwrap();
        match &t {
            SessionType::Rec(_, body) => match body.as_ref() {
                SessionType::Select(bs) => match &bs[0].1 {
                    SessionType::Rec(x, inner) => {
                        assert_eq!(x.as_str(), "X");
                        assert!(matches!(
                            inner.as_ref(),
                            SessionType::Select(inner_bs)
                                if inner_bs[0].1 == SessionType::Var(lab("X"))
                        ));
                    }
                    other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn renders_canonically() {
        assert_eq!(SessionType::End.render(), "end");
        assert_eq!(sel(vec![("a", SessionType::End)]).render(), "+{a;end}");
        assert_eq!(
            hospital_server().render(),
            "rec X.&{nd;+{ko;X, ok;X}, pr;+{ko;X, ok;X}}"
        );
    }

    #[test]
    fn render_round_trips() {
        for src in [
            "rec X. &{nd; +{ko;X, ok;X}, pr; +{ko;X, ok;X}}",
            "end",
            "!a;end",
            "[?a;end, ?b;end]",
            "rec X.&{tm;X, over;rec Y.+{tc;Y, done;end}}",
        ] {
            let t = parse(src).unwrap();
            assert_eq!(parse(&t.render()).unwrap(), t, "round trip of {src}");
        }
    }

    #[test]
    fn dual_of_hospital_server_is_ideal_client() {
        let expected = rec(
            "X",
            sel(vec![
                ("nd", bra(vec![("ko", var("X")), ("ok", var("X"))])),
                ("pr", bra(vec![("ko", var("X")), ("ok", var("X"))])),
            ]),
        );
        assert_eq!(hospital_server().dual(), expected);
    }

    #[test]
    fn dual_fixes_end() {
        assert_eq!(SessionType::End.dual(), SessionType::End);
    }

    #[test]
    fn dual_is_an_involution() {
        let satellite_client = parse("rec X.+{tc;X, done;rec Y.&{tm;Y, over;end}}").unwrap();
        assert_eq!(satellite_client.dual().dual(), satellite_client);
        assert_eq!(hospital_server().dual().dual(), hospital_server());
    }

    #[test]
    fn error_positions_point_at_the_offender() {
        let err = parse("+{a;end,\n a;end}").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 2, col: 2 });
    }
}
