//! Textual front-end for recursive process systems.
//!
//! ```text
//! program := def* 'main' '=' proc
//! def     := ident '(' names ')' '=' proc
//! proc    := sum ('|' sum)*
//! sum     := 'new' ident '.' sum
//!          | guarded ('+' guarded)*
//! guarded := '0'
//!          | ident '(' ident ')' '.' guarded     -- input
//!          | ident '<' ident '>' '.' guarded     -- output
//!          | ident '(' names ')'                 -- call, or input with
//!          |                                        omitted continuation
//!          | '(' proc ')'
//! names   := (ident (',' ident)*)?
//! ```
//!
//! A prefix may omit `.0`, so `x<y>` is `x<y>.0`. The dot-less form
//! `x(y)` is therefore ambiguous between a nullary-continuation input and a
//! unary call; it resolves to a call exactly when `x` is a defined
//! identifier. Comments run from `--` to the end of the line.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{Equation, Name, ProcessTerm, RecursiveSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: unexpected character {found:?}")]
    UnexpectedChar { line: usize, col: usize, found: char },
    #[error("{line}:{col}: invalid token {found:?}")]
    InvalidToken { line: usize, col: usize, found: String },
    #[error("{line}:{col}: unexpected {found}, expected {expected}")]
    Unexpected { line: usize, col: usize, found: String, expected: String },
    #[error("duplicate definition of {0}")]
    DuplicateDefinition(String),
    #[error("call to unknown identifier {0}")]
    UnknownIdentifier(String),
    #[error("call to {ident} passes {found} arguments, definition takes {expected}")]
    ArityMismatch { ident: String, expected: usize, found: usize },
    #[error("choice branch is not a prefix or 0: {0}")]
    UnguardedChoice(String),
    #[error("definition {ident} uses the name {name}, which is not among its formals")]
    OpenDefinition { ident: String, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Ident(String),
    Zero,
    LParen,
    RParen,
    Lt,
    Gt,
    Dot,
    Bar,
    Plus,
    Eq,
    Comma,
    New,
    Main,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("identifier {s:?}"),
            TokKind::Zero => "'0'".into(),
            TokKind::LParen => "'('".into(),
            TokKind::RParen => "')'".into(),
            TokKind::Lt => "'<'".into(),
            TokKind::Gt => "'>'".into(),
            TokKind::Dot => "'.'".into(),
            TokKind::Bar => "'|'".into(),
            TokKind::Plus => "'+'".into(),
            TokKind::Eq => "'='".into(),
            TokKind::Comma => "','".into(),
            TokKind::New => "'new'".into(),
            TokKind::Main => "'main'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if c.is_whitespace() {
            chars.next();
            bump(c, &mut line, &mut col);
            continue;
        }
        if c == '-' {
            chars.next();
            bump(c, &mut line, &mut col);
            if chars.peek() == Some(&'-') {
                while let Some(&d) = chars.peek() {
                    chars.next();
                    bump(d, &mut line, &mut col);
                    if d == '\n' {
                        break;
                    }
                }
                continue;
            }
            return Err(ParseError::UnexpectedChar { line: tline, col: tcol, found: '-' });
        }
        if c.is_ascii_alphabetic() || c == '_' || c.is_ascii_digit() {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    word.push(d);
                    chars.next();
                    bump(d, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let kind = if word == "0" {
                TokKind::Zero
            } else if word.starts_with(|d: char| d.is_ascii_digit()) {
                return Err(ParseError::InvalidToken { line: tline, col: tcol, found: word });
            } else if word == "new" {
                TokKind::New
            } else if word == "main" {
                TokKind::Main
            } else {
                TokKind::Ident(word)
            };
            toks.push(Token { kind, line: tline, col: tcol });
            continue;
        }
        let kind = match c {
            '(' => TokKind::LParen,
            ')' => TokKind::RParen,
            '<' => TokKind::Lt,
            '>' => TokKind::Gt,
            '.' => TokKind::Dot,
            '|' => TokKind::Bar,
            '+' => TokKind::Plus,
            '=' => TokKind::Eq,
            ',' => TokKind::Comma,
            other => {
                return Err(ParseError::UnexpectedChar { line: tline, col: tcol, found: other })
            }
        };
        chars.next();
        bump(c, &mut line, &mut col);
        toks.push(Token { kind, line: tline, col: tcol });
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.toks.get(self.pos) {
            Some(t) => ParseError::Unexpected {
                line: t.line,
                col: t.col,
                found: t.kind.describe(),
                expected: expected.into(),
            },
            None => ParseError::Unexpected {
                line: self.end_line,
                col: self.end_col,
                found: "end of input".into(),
                expected: expected.into(),
            },
        }
    }

    fn expect(&mut self, kind: TokKind, expected: &str) -> Result<Token, ParseError> {
        if self.peek() == Some(&kind) {
            Ok(self.next().unwrap())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<Name, ParseError> {
        match self.peek() {
            Some(TokKind::Ident(_)) => {
                let Some(Token { kind: TokKind::Ident(s), .. }) = self.next() else {
                    unreachable!()
                };
                Ok(s)
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    fn program(&mut self) -> Result<(ProcessTerm, Vec<(String, Vec<Name>, ProcessTerm)>), ParseError>
    {
        let mut defs = Vec::new();
        loop {
            match self.peek() {
                Some(TokKind::Main) => break,
                Some(TokKind::Ident(_)) => defs.push(self.def()?),
                _ => return Err(self.unexpected("a definition or 'main'")),
            }
        }
        self.expect(TokKind::Main, "'main'")?;
        self.expect(TokKind::Eq, "'='")?;
        let main = self.proc()?;
        if self.pos < self.toks.len() {
            return Err(self.unexpected("end of input"));
        }
        Ok((main, defs))
    }

    fn def(&mut self) -> Result<(String, Vec<Name>, ProcessTerm), ParseError> {
        let ident = self.ident("an identifier")?;
        self.expect(TokKind::LParen, "'('")?;
        let formals = self.names()?;
        self.expect(TokKind::RParen, "')'")?;
        self.expect(TokKind::Eq, "'='")?;
        let body = self.proc()?;
        Ok((ident, formals, body))
    }

    fn names(&mut self) -> Result<Vec<Name>, ParseError> {
        let mut names = Vec::new();
        if matches!(self.peek(), Some(TokKind::Ident(_))) {
            names.push(self.ident("a name")?);
            while self.eat(&TokKind::Comma) {
                names.push(self.ident("a name")?);
            }
        }
        Ok(names)
    }

    fn proc(&mut self) -> Result<ProcessTerm, ParseError> {
        let mut parts = vec![self.sum()?];
        while self.eat(&TokKind::Bar) {
            parts.push(self.sum()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { ProcessTerm::Par(parts) })
    }

    fn sum(&mut self) -> Result<ProcessTerm, ParseError> {
        if self.eat(&TokKind::New) {
            let name = self.ident("a name")?;
            self.expect(TokKind::Dot, "'.'")?;
            let body = self.sum()?;
            return Ok(ProcessTerm::restrict(name, body));
        }
        let mut branches = vec![self.guarded()?];
        while self.eat(&TokKind::Plus) {
            branches.push(self.guarded()?);
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { ProcessTerm::Sum(branches) })
    }

    fn guarded(&mut self) -> Result<ProcessTerm, ParseError> {
        match self.peek() {
            Some(TokKind::Zero) => {
                self.next();
                Ok(ProcessTerm::Nil)
            }
            Some(TokKind::LParen) => {
                self.next();
                let inner = self.proc()?;
                self.expect(TokKind::RParen, "')'")?;
                Ok(inner)
            }
            Some(TokKind::Ident(_)) => {
                let head = self.ident("an identifier")?;
                match self.peek() {
                    Some(TokKind::LParen) => {
                        self.next();
                        let names = self.names()?;
                        self.expect(TokKind::RParen, "')'")?;
                        if names.len() == 1 && self.eat(&TokKind::Dot) {
                            let cont = self.guarded()?;
                            Ok(ProcessTerm::input(head, names.into_iter().next().unwrap(), cont))
                        } else {
                            // A call for now; resolved against the definition
                            // table after the whole program is read.
                            Ok(ProcessTerm::Call { ident: head, args: names })
                        }
                    }
                    Some(TokKind::Lt) => {
                        self.next();
                        let datum = self.ident("a name")?;
                        self.expect(TokKind::Gt, "'>'")?;
                        let cont = if self.eat(&TokKind::Dot) {
                            self.guarded()?
                        } else {
                            ProcessTerm::Nil
                        };
                        Ok(ProcessTerm::output(head, datum, cont))
                    }
                    _ => Err(self.unexpected("'(' or '<'")),
                }
            }
            _ => Err(self.unexpected("a process")),
        }
    }
}

/// Rewrite placeholder calls: a dot-less `x(y)` is an input unless `x` is
/// defined. Calls that resolve to nothing are reported.
fn resolve_calls(
    p: ProcessTerm,
    defined: &BTreeSet<String>,
) -> Result<ProcessTerm, ParseError> {
    Ok(match p {
        ProcessTerm::Call { ident, args } => {
            if defined.contains(&ident) {
                ProcessTerm::Call { ident, args }
            } else if args.len() == 1 {
                ProcessTerm::input(ident, args.into_iter().next().unwrap(), ProcessTerm::Nil)
            } else {
                return Err(ParseError::UnknownIdentifier(ident));
            }
        }
        ProcessTerm::Input { chan, binder, cont } => ProcessTerm::Input {
            chan,
            binder,
            cont: Box::new(resolve_calls(*cont, defined)?),
        },
        ProcessTerm::Output { chan, datum, cont } => ProcessTerm::Output {
            chan,
            datum,
            cont: Box::new(resolve_calls(*cont, defined)?),
        },
        ProcessTerm::Par(children) => ProcessTerm::Par(
            children.into_iter().map(|c| resolve_calls(c, defined)).collect::<Result<_, _>>()?,
        ),
        ProcessTerm::Sum(children) => ProcessTerm::Sum(
            children.into_iter().map(|c| resolve_calls(c, defined)).collect::<Result<_, _>>()?,
        ),
        ProcessTerm::Restrict { name, body } => {
            ProcessTerm::restrict(name, resolve_calls(*body, defined)?)
        }
        ProcessTerm::Nil => ProcessTerm::Nil,
    })
}

fn check_arities(p: &ProcessTerm, defs: &BTreeMap<String, Equation>) -> Result<(), ParseError> {
    match p {
        ProcessTerm::Call { ident, args } => {
            let eq = defs
                .get(ident)
                .ok_or_else(|| ParseError::UnknownIdentifier(ident.clone()))?;
            if eq.formals.len() != args.len() {
                return Err(ParseError::ArityMismatch {
                    ident: ident.clone(),
                    expected: eq.formals.len(),
                    found: args.len(),
                });
            }
            Ok(())
        }
        ProcessTerm::Input { cont, .. } | ProcessTerm::Output { cont, .. } => {
            check_arities(cont, defs)
        }
        ProcessTerm::Par(children) | ProcessTerm::Sum(children) => {
            children.iter().try_for_each(|c| check_arities(c, defs))
        }
        ProcessTerm::Restrict { body, .. } => check_arities(body, defs),
        ProcessTerm::Nil => Ok(()),
    }
}

/// Every multi-branch choice must offer only prefixes and 0.
fn check_guardedness(p: &ProcessTerm) -> Result<(), ParseError> {
    match p {
        ProcessTerm::Sum(branches) => {
            for b in branches {
                match b {
                    ProcessTerm::Nil
                    | ProcessTerm::Input { .. }
                    | ProcessTerm::Output { .. }
                    | ProcessTerm::Sum(_) => check_guardedness(b)?,
                    other => return Err(ParseError::UnguardedChoice(other.to_string())),
                }
            }
            Ok(())
        }
        ProcessTerm::Input { cont, .. } | ProcessTerm::Output { cont, .. } => {
            check_guardedness(cont)
        }
        ProcessTerm::Par(children) => children.iter().try_for_each(check_guardedness),
        ProcessTerm::Restrict { body, .. } => check_guardedness(body),
        ProcessTerm::Nil | ProcessTerm::Call { .. } => Ok(()),
    }
}

/// Parse a whole program. On success the returned process is the `main`
/// body, with all calls resolved, arities checked, choices guarded, and
/// every definition closed with respect to its formals.
pub fn parse_process(src: &str) -> Result<(ProcessTerm, RecursiveSystem), ParseError> {
    let toks = lex(src)?;
    let (end_line, end_col) = toks
        .last()
        .map(|t| (t.line, t.col + 1))
        .unwrap_or((1, 1));
    let mut parser = Parser { toks, pos: 0, end_line, end_col };
    let (raw_main, raw_defs) = parser.program()?;

    let mut defined: BTreeSet<String> = BTreeSet::new();
    for (ident, _, _) in &raw_defs {
        if !defined.insert(ident.clone()) {
            return Err(ParseError::DuplicateDefinition(ident.clone()));
        }
    }
    let mut defs: BTreeMap<String, Equation> = BTreeMap::new();
    for (ident, formals, body) in raw_defs {
        let body = resolve_calls(body, &defined)?;
        defs.insert(ident, Equation { formals, body });
    }
    let main = resolve_calls(raw_main, &defined)?;

    for (ident, eq) in &defs {
        check_arities(&eq.body, &defs)?;
        check_guardedness(&eq.body)?;
        if let Some(name) = eq.body.free_names().into_iter().find(|n| !eq.formals.contains(n)) {
            return Err(ParseError::OpenDefinition { ident: ident.clone(), name });
        }
    }
    check_arities(&main, &defs)?;
    check_guardedness(&main)?;

    let mut sys = RecursiveSystem::new();
    for (ident, eq) in defs {
        sys.define(ident, eq.formals, eq.body);
    }
    Ok((main, sys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prefixes_and_operators() {
        let (p, sys) = parse_process("main = x(z).z<w> | x<y> + x<y>").unwrap();
        assert!(sys.is_empty());
        assert_eq!(p.to_string(), "x(z).z<w> | x<y> + x<y>");
        match &p {
            ProcessTerm::Par(children) => {
                assert_eq!(children.len(), 2);
                assert!(matches!(&children[1], ProcessTerm::Sum(b) if b.len() == 2));
            }
            other => panic!("expected parallel, got {other}"),
        }
    }

    #[test]
    fn new_scopes_over_a_sum_but_not_across_bars() {
        let (p, _) = parse_process("main = new x.x<a> + x(b) | y<c>").unwrap();
        let ProcessTerm::Par(children) = &p else { panic!("expected parallel") };
        assert!(matches!(&children[0], ProcessTerm::Restrict { .. }));
        assert_eq!(p.to_string(), "new x.x<a> + x(b) | y<c>");
    }

    #[test]
    fn dotless_unary_parens_resolve_by_definition_table() {
        let (p, sys) = parse_process("A(x) = x<x>.A(x)\nmain = A(y) | y(z)").unwrap();
        assert!(sys.get("A").is_some());
        let ProcessTerm::Par(children) = &p else { panic!("expected parallel") };
        assert!(matches!(&children[0], ProcessTerm::Call { ident, .. } if ident == "A"));
        assert!(matches!(&children[1], ProcessTerm::Input { .. }));

        // Definitions precede main; trailing ones are a syntax error.
        assert!(parse_process("main = 0\nA(x) = x<x>").is_err());
    }

    #[test]
    fn comments_and_omitted_continuations() {
        let src = "-- a tiny system\nmain = x<y> -- send y\n  | x(u).u<u>";
        let (p, _) = parse_process(src).unwrap();
        assert_eq!(p.to_string(), "x<y> | x(u).u<u>");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_process("main = x<y>.").unwrap_err();
        assert_eq!(
            err.to_string(),
            "1:13: unexpected end of input, expected a process"
        );
        let err = parse_process("main = x(y().0").unwrap_err();
        assert!(matches!(err, ParseError::Unexpected { line: 1, .. }), "{err}");
        let err = parse_process("main = 5").unwrap_err();
        assert_eq!(err, ParseError::InvalidToken { line: 1, col: 8, found: "5".into() });
    }

    #[test]
    fn semantic_checks() {
        let err = parse_process("A(x) = x<x>\nA(y) = y<y>\nmain = A(z)").unwrap_err();
        assert_eq!(err, ParseError::DuplicateDefinition("A".into()));

        let err = parse_process("A(x) = x<x>\nmain = A(y, z)").unwrap_err();
        assert_eq!(
            err,
            ParseError::ArityMismatch { ident: "A".into(), expected: 1, found: 2 }
        );

        let err = parse_process("main = F(a, b)").unwrap_err();
        assert_eq!(err, ParseError::UnknownIdentifier("F".into()));

        let err = parse_process("A(x) = x<x>\nmain = x<y> + A(x)").unwrap_err();
        assert!(matches!(err, ParseError::UnguardedChoice(_)), "{err}");

        let err = parse_process("A(x) = x<y>\nmain = A(z)").unwrap_err();
        assert_eq!(err, ParseError::OpenDefinition { ident: "A".into(), name: "y".into() });
    }

    #[test]
    fn mutual_recursion_resolves() {
        let src = "A(x) = x(y).B(y)\nB(x) = x<x>.A(x)\nmain = A(c)";
        let (p, sys) = parse_process(src).unwrap();
        assert_eq!(sys.len(), 2);
        assert!(matches!(p, ProcessTerm::Call { .. }));
    }

    mod properties {
        use proptest::prelude::*;

        use super::super::super::gen;
        use super::*;

        proptest! {
            /// Printing any well-formed process and reading it back yields
            /// the same tree, so the printer and the grammar agree on
            /// precedence.
            #[test]
            fn display_reparses_exactly(p in gen::process()) {
                let src = format!("main = {p}");
                let (q, sys) = parse_process(&src).unwrap();
                prop_assert!(sys.is_empty());
                prop_assert_eq!(q, p);
            }
        }
    }
}
