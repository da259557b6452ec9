//! First-order terms over a shared variable/function-symbol alphabet.
//!
//! Terms are the label language for graphs and rules: a term is either a
//! variable (spelled with a leading underscore, `_X`) or a function symbol
//! applied to zero or more terms (`f(a, g(_X))`, nullary symbols printed
//! without parentheses). Equality is syntactic; the interesting relations
//! (generality, isomorphism, unifiability) are all defined through
//! substitutions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A first-order term. Variables are identified by their full name,
/// including the leading underscore.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Fun(String, Vec<Term>),
}

impl Term {
    /// Variable term. The name must carry its leading underscore.
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// Function application.
    pub fn fun(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Fun(symbol.into(), args)
    }

    /// Nullary function symbol.
    pub fn constant(symbol: impl Into<String>) -> Term {
        Term::Fun(symbol.into(), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Root function symbol, if this is not a variable.
    pub fn head(&self) -> Option<&str> {
        match self {
            Term::Var(_) => None,
            Term::Fun(f, _) => Some(f),
        }
    }

    /// All variables occurring in the term, in left-to-right order without
    /// duplicates.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::Fun(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Fun(sym, args) => {
                write!(f, "{sym}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Error from [`Term::from_str`], with a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term syntax error at byte {offset}: {message}")]
pub struct TermParseError {
    pub offset: usize,
    pub message: String,
}

impl FromStr for Term {
    type Err = TermParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = TermParser { src: s.as_bytes(), pos: 0 };
        p.skip_ws();
        let t = p.term()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input after term"));
        }
        Ok(t)
    }
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TermParser<'a> {
    fn err(&self, message: &str) -> TermParseError {
        TermParseError { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, TermParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.pos += 1,
            _ => return Err(self.err("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn term(&mut self) -> Result<Term, TermParseError> {
        let name = self.ident()?;
        self.skip_ws();
        if name.starts_with('_') {
            return Ok(Term::Var(name));
        }
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut args = Vec::new();
            loop {
                self.skip_ws();
                args.push(self.term()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')' in argument list")),
                }
            }
            Ok(Term::Fun(name, args))
        } else {
            Ok(Term::Fun(name, Vec::new()))
        }
    }
}

/// A substitution: a finite map from variable names to terms. Application
/// replaces variables simultaneously, so the result of [`unify`] is kept
/// idempotent (no variable in the domain occurs in any image term).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_iter<I, S>(pairs: I) -> Substitution
    where
        I: IntoIterator<Item = (S, Term)>,
        S: Into<String>,
    {
        Substitution { map: pairs.into_iter().map(|(v, t)| (v.into(), t)).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, term: Term) {
        self.map.insert(var.into(), term);
    }

    /// Bindings sorted by variable name.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.map.iter().map(|(v, t)| (v.as_str(), t))
    }

    /// Apply the substitution to a term.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.map.get(v) {
                Some(bound) => bound.clone(),
                None => t.clone(),
            },
            Term::Fun(f, args) => {
                Term::Fun(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// True when every binding maps a variable to a variable, injectively.
    /// Such a substitution extends to a bijection on the variable universe.
    pub fn is_renaming(&self) -> bool {
        let mut seen = Vec::with_capacity(self.map.len());
        for t in self.map.values() {
            match t {
                Term::Var(v) => {
                    if seen.contains(&v.as_str()) {
                        return false;
                    }
                    seen.push(v);
                }
                Term::Fun(..) => return false,
            }
        }
        true
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} \u{21a6} {t}")?;
        }
        write!(f, "}}")
    }
}

// ---------------------------------------------------------------------------
// Incremental matching with undo. The graph-morphism search threads one
// binding environment through every vertex/edge label pair, so each primitive
// here extends a mutable map and records what it bound on a trail; the caller
// pops the trail to backtrack.
// ---------------------------------------------------------------------------

/// Extend a one-sided match: bind variables of `pattern` so that it becomes
/// syntactically equal to `subject`. Variables of `subject` are frozen and
/// never bound. Returns false (with bindings partially pushed) on failure;
/// the caller must roll back via the trail either way.
pub(crate) fn extend_specialize(
    pattern: &Term,
    subject: &Term,
    bind: &mut BTreeMap<String, Term>,
    trail: &mut Vec<String>,
) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => match bind.get(v) {
            Some(bound) => bound == subject,
            None => {
                bind.insert(v.clone(), subject.clone());
                trail.push(v.clone());
                true
            }
        },
        (Term::Fun(..), Term::Var(_)) => false,
        (Term::Fun(f, fa), Term::Fun(g, ga)) => {
            f == g
                && fa.len() == ga.len()
                && fa.iter().zip(ga).all(|(p, s)| extend_specialize(p, s, bind, trail))
        }
    }
}

/// Extend a variable renaming: `a` and `b` must be equal up to a bijective
/// variable-to-variable map, accumulated in `fwd`/`rev`.
pub(crate) fn extend_renaming(
    a: &Term,
    b: &Term,
    fwd: &mut BTreeMap<String, String>,
    rev: &mut BTreeMap<String, String>,
    trail: &mut Vec<String>,
) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match (fwd.get(x), rev.get(y)) {
            (Some(fx), Some(ry)) => fx == y && ry == x,
            (None, None) => {
                fwd.insert(x.clone(), y.clone());
                rev.insert(y.clone(), x.clone());
                trail.push(x.clone());
                true
            }
            _ => false,
        },
        (Term::Fun(f, fa), Term::Fun(g, ga)) => {
            f == g
                && fa.len() == ga.len()
                && fa.iter().zip(ga).all(|(x, y)| extend_renaming(x, y, fwd, rev, trail))
        }
        _ => false,
    }
}

/// Walk a triangular binding map: follow variable links until a non-variable
/// term or an unbound variable is reached.
fn walk<'a>(mut t: &'a Term, bind: &'a BTreeMap<String, Term>) -> &'a Term {
    while let Term::Var(v) = t {
        match bind.get(v) {
            Some(next) => t = next,
            None => break,
        }
    }
    t
}

fn occurs(var: &str, t: &Term, bind: &BTreeMap<String, Term>) -> bool {
    match walk(t, bind) {
        Term::Var(v) => v == var,
        Term::Fun(_, args) => args.iter().any(|a| occurs(var, a, bind)),
    }
}

/// Extend a unifier for `a` and `b` over a shared variable namespace.
/// Bindings are triangular (a bound variable's image may mention other bound
/// variables); resolve with [`resolve_binding`] once the whole match is done.
pub(crate) fn extend_unify(
    a: &Term,
    b: &Term,
    bind: &mut BTreeMap<String, Term>,
    trail: &mut Vec<String>,
) -> bool {
    let (ta, tb) = (walk(a, bind).clone(), walk(b, bind).clone());
    match (&ta, &tb) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), _) => {
            if occurs(x, &tb, bind) {
                return false;
            }
            bind.insert(x.clone(), tb);
            trail.push(x.clone());
            true
        }
        (_, Term::Var(y)) => {
            if occurs(y, &ta, bind) {
                return false;
            }
            bind.insert(y.clone(), ta);
            trail.push(y.clone());
            true
        }
        (Term::Fun(f, fa), Term::Fun(g, ga)) => {
            f == g
                && fa.len() == ga.len()
                && fa.iter().zip(ga).all(|(x, y)| extend_unify(x, y, bind, trail))
        }
    }
}

/// Resolve a triangular binding map into an idempotent substitution.
pub(crate) fn resolve_binding(bind: &BTreeMap<String, Term>) -> Substitution {
    fn deep(t: &Term, bind: &BTreeMap<String, Term>) -> Term {
        match walk(t, bind) {
            Term::Var(v) => Term::Var(v.clone()),
            Term::Fun(f, args) => {
                Term::Fun(f.clone(), args.iter().map(|a| deep(a, bind)).collect())
            }
        }
    }
    let mut out = Substitution::new();
    for var in bind.keys() {
        out.insert(var.clone(), deep(&Term::Var(var.clone()), bind));
    }
    out
}

/// Most general unifier of two terms over a shared variable namespace, with
/// occurs check. The result is idempotent and applies `apply(a) == apply(b)`.
pub fn unify(a: &Term, b: &Term) -> Option<Substitution> {
    let mut bind = BTreeMap::new();
    let mut trail = Vec::new();
    if extend_unify(a, b, &mut bind, &mut trail) {
        Some(resolve_binding(&bind))
    } else {
        None
    }
}

/// One-sided match: a substitution binding only variables of `pattern` such
/// that `apply(pattern) == subject`. Succeeding means `pattern` is at least
/// as general as `subject`. Variables of `subject` are treated as frozen
/// constants, so no occurs check is needed.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut bind = BTreeMap::new();
    let mut trail = Vec::new();
    if extend_specialize(pattern, subject, &mut bind, &mut trail) {
        Some(Substitution { map: bind })
    } else {
        None
    }
}

/// True when the terms are equal up to a bijective renaming of variables.
pub fn term_isomorphic(a: &Term, b: &Term) -> bool {
    let mut fwd = BTreeMap::new();
    let mut rev = BTreeMap::new();
    let mut trail = Vec::new();
    extend_renaming(a, b, &mut fwd, &mut rev, &mut trail)
}
