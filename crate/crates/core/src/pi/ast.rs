//! Process syntax: input/output prefixes under guarded choice, parallel
//! composition, restriction, and calls to recursively defined identifiers.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

pub type Name = String;

/// A process term. `Sum` is guarded choice: its branches must be prefixes
/// or nil (the parser enforces this; programmatic construction is expected
/// to respect it). `Call` refers to an equation of a [`RecursiveSystem`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessTerm {
    Nil,
    Input { chan: Name, binder: Name, cont: Box<ProcessTerm> },
    Output { chan: Name, datum: Name, cont: Box<ProcessTerm> },
    Par(Vec<ProcessTerm>),
    Sum(Vec<ProcessTerm>),
    Restrict { name: Name, body: Box<ProcessTerm> },
    Call { ident: String, args: Vec<Name> },
}

impl ProcessTerm {
    pub fn input(chan: impl Into<Name>, binder: impl Into<Name>, cont: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Input { chan: chan.into(), binder: binder.into(), cont: Box::new(cont) }
    }

    pub fn output(chan: impl Into<Name>, datum: impl Into<Name>, cont: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Output { chan: chan.into(), datum: datum.into(), cont: Box::new(cont) }
    }

    pub fn call<I>(ident: impl Into<String>, args: I) -> ProcessTerm
    where
        I: IntoIterator,
        I::Item: Into<Name>,
    {
        ProcessTerm::Call {
            ident: ident.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn restrict(name: impl Into<Name>, body: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Restrict { name: name.into(), body: Box::new(body) }
    }

    /// Names occurring free: channels and data of prefixes, call arguments,
    /// minus everything bound by an enclosing input binder or restriction.
    pub fn free_names(&self) -> BTreeSet<Name> {
        fn walk(p: &ProcessTerm, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
            let add = |n: &Name, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
                if !bound.contains(n) {
                    out.insert(n.clone());
                }
            };
            match p {
                ProcessTerm::Nil => {}
                ProcessTerm::Input { chan, binder, cont } => {
                    add(chan, bound, out);
                    bound.push(binder.clone());
                    walk(cont, bound, out);
                    bound.pop();
                }
                ProcessTerm::Output { chan, datum, cont } => {
                    add(chan, bound, out);
                    add(datum, bound, out);
                    walk(cont, bound, out);
                }
                ProcessTerm::Par(children) | ProcessTerm::Sum(children) => {
                    for c in children {
                        walk(c, bound, out);
                    }
                }
                ProcessTerm::Restrict { name, body } => {
                    bound.push(name.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
                ProcessTerm::Call { args, .. } => {
                    for a in args {
                        add(a, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// `p | q`, flattening nested parallel compositions.
impl std::ops::BitOr for ProcessTerm {
    type Output = ProcessTerm;
    fn bitor(self, rhs: ProcessTerm) -> ProcessTerm {
        let mut parts = match self {
            ProcessTerm::Par(v) => v,
            other => vec![other],
        };
        match rhs {
            ProcessTerm::Par(v) => parts.extend(v),
            other => parts.push(other),
        }
        ProcessTerm::Par(parts)
    }
}

/// `p + q`, flattening nested sums.
impl std::ops::Add for ProcessTerm {
    type Output = ProcessTerm;
    fn add(self, rhs: ProcessTerm) -> ProcessTerm {
        let mut parts = match self {
            ProcessTerm::Sum(v) => v,
            other => vec![other],
        };
        match rhs {
            ProcessTerm::Sum(v) => parts.extend(v),
            other => parts.push(other),
        }
        ProcessTerm::Sum(parts)
    }
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_par_level(self, f)
    }
}

// Printing follows the source grammar's precedence: `|` loosest, then `+`,
// then prefixing; `new` scopes over a sum. Continuations and odd shapes
// that would not reparse at their position are parenthesized.

fn fmt_par_level(p: &ProcessTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        ProcessTerm::Par(children) => {
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                match c {
                    ProcessTerm::Par(_) => {
                        write!(f, "(")?;
                        fmt_par_level(c, f)?;
                        write!(f, ")")?;
                    }
                    _ => fmt_sum_level(c, f)?,
                }
            }
            Ok(())
        }
        _ => fmt_sum_level(p, f),
    }
}

fn fmt_sum_level(p: &ProcessTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        ProcessTerm::Restrict { name, body } => {
            write!(f, "new {name}.")?;
            match &**body {
                ProcessTerm::Par(_) => {
                    write!(f, "(")?;
                    fmt_par_level(body, f)?;
                    write!(f, ")")
                }
                _ => fmt_sum_level(body, f),
            }
        }
        ProcessTerm::Sum(branches) => {
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                fmt_guarded_level(b, f)?;
            }
            Ok(())
        }
        _ => fmt_guarded_level(p, f),
    }
}

fn fmt_guarded_level(p: &ProcessTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        ProcessTerm::Nil => write!(f, "0"),
        ProcessTerm::Input { chan, binder, cont } => {
            write!(f, "{chan}({binder})")?;
            fmt_continuation(cont, f)
        }
        ProcessTerm::Output { chan, datum, cont } => {
            write!(f, "{chan}<{datum}>")?;
            fmt_continuation(cont, f)
        }
        ProcessTerm::Call { ident, args } => write!(f, "{ident}({})", args.join(", ")),
        other => {
            write!(f, "(")?;
            fmt_par_level(other, f)?;
            write!(f, ")")
        }
    }
}

fn fmt_continuation(cont: &ProcessTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match cont {
        ProcessTerm::Nil => Ok(()),
        ProcessTerm::Input { .. } | ProcessTerm::Output { .. } | ProcessTerm::Call { .. } => {
            write!(f, ".")?;
            fmt_guarded_level(cont, f)
        }
        other => {
            write!(f, ".(")?;
            fmt_par_level(other, f)?;
            write!(f, ")")
        }
    }
}

/// One recursive definition `A(x1, …, xn) = body`. Well-formedness (the
/// parser checks it) requires the body's free names to lie within the
/// formals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub formals: Vec<Name>,
    pub body: ProcessTerm,
}

/// A set of mutually recursive definitions, keyed by identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecursiveSystem {
    equations: BTreeMap<String, Equation>,
}

impl RecursiveSystem {
    pub fn new() -> RecursiveSystem {
        RecursiveSystem::default()
    }

    /// Insert or replace a definition.
    pub fn define<I>(&mut self, ident: impl Into<String>, formals: I, body: ProcessTerm)
    where
        I: IntoIterator,
        I::Item: Into<Name>,
    {
        self.equations.insert(
            ident.into(),
            Equation { formals: formals.into_iter().map(Into::into).collect(), body },
        );
    }

    pub fn get(&self, ident: &str) -> Option<&Equation> {
        self.equations.get(ident)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Equation)> {
        self.equations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }
}

impl fmt::Display for RecursiveSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ident, eq) in &self.equations {
            writeln!(f, "{ident}({}) = {}", eq.formals.join(", "), eq.body)?;
        }
        Ok(())
    }
}
