//! The label vocabulary shared by the process encoder and the rewrite rule
//! sets: constructors for every vertex and edge label, plus small
//! classifiers used when walking encoded graphs.

use crate::term::Term;

// ---- vertex labels ----

/// Root marker: every encoding has exactly one `go` vertex.
pub(crate) fn go() -> Term {
    Term::constant("go")
}

/// Parallel-composition vertex `t(p)`.
pub(crate) fn t_p() -> Term {
    Term::fun("t", vec![Term::constant("p")])
}

/// Choice vertex `t(s)`.
pub(crate) fn t_s() -> Term {
    Term::fun("t", vec![Term::constant("s")])
}

/// Input-prefix operator `t(in)`.
pub(crate) fn t_in() -> Term {
    Term::fun("t", vec![Term::constant("in")])
}

/// Output-prefix operator `t(out)`.
pub(crate) fn t_out() -> Term {
    Term::fun("t", vec![Term::constant("out")])
}

/// Constant-invocation vertex `t(call(A))`.
pub(crate) fn t_call(ident: &str) -> Term {
    Term::fun("t", vec![Term::fun("call", vec![Term::constant(ident)])])
}

/// Name vertex `v(atom)`; the atom is a constant for a free name and a
/// variable for a bound one.
pub(crate) fn v(atom: Term) -> Term {
    Term::fun("v", vec![atom])
}

pub(crate) fn free_name(name: &str) -> Term {
    v(Term::constant(name))
}

pub(crate) fn bound_name(k: u32) -> Term {
    v(Term::var(format!("_b{k}")))
}

/// Call-argument pointer vertex.
pub(crate) fn ptr() -> Term {
    Term::constant("ptr")
}

/// Garbage marker for discarded choice branches.
pub(crate) fn gc() -> Term {
    Term::constant("gc")
}

/// A vertex scheduled to be coalesced into the target of its d-edge; the
/// original label is kept inside.
pub(crate) fn merge(inner: Term) -> Term {
    Term::fun("merge", vec![inner])
}

// ---- edge labels ----

/// Structural (operator-tree) edge.
pub(crate) fn c() -> Term {
    Term::constant("c")
}

/// Merge edge: points a merge vertex at the vertex absorbing it.
pub(crate) fn d() -> Term {
    Term::constant("d")
}

/// Prefix-to-channel edge.
pub(crate) fn sync() -> Term {
    Term::constant("sync")
}

/// Prefix-to-argument edge.
pub(crate) fn arg() -> Term {
    Term::constant("arg")
}

/// Collapsed sync+arg edge used when channel and argument coincide.
pub(crate) fn arg_sync() -> Term {
    Term::constant("arg_sync")
}

/// Pointer-to-name edge.
pub(crate) fn ref_edge() -> Term {
    Term::constant("ref")
}

/// Call-to-pointer edge carrying the 0-based argument position, spelled
/// `idx(i0)`, `idx(i1)`, … so labels stay inside the term grammar.
pub(crate) fn idx(k: usize) -> Term {
    Term::fun("idx", vec![Term::constant(format!("i{k}"))])
}

// ---- classifiers ----

/// The atom under a name label: `v(atom)` → `atom`.
pub(crate) fn name_atom(label: &Term) -> Option<&Term> {
    match label {
        Term::Fun(f, args) if f == "v" && args.len() == 1 => Some(&args[0]),
        _ => None,
    }
}

/// The identifier under a call label: `t(call(A))` → `A`.
pub(crate) fn call_ident(label: &Term) -> Option<&str> {
    match label {
        Term::Fun(t, outer) if t == "t" && outer.len() == 1 => match &outer[0] {
            Term::Fun(c, inner) if c == "call" && inner.len() == 1 => match &inner[0] {
                Term::Fun(ident, args) if args.is_empty() => Some(ident),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// The position under an index edge label: `idx(i3)` → `3`.
pub(crate) fn idx_position(label: &Term) -> Option<usize> {
    match label {
        Term::Fun(f, args) if f == "idx" && args.len() == 1 => match &args[0] {
            Term::Fun(i, inner) if inner.is_empty() => i.strip_prefix('i')?.parse().ok(),
            _ => None,
        },
        _ => None,
    }
}
