//! Syntactic one-step reduction: the reference implementation the graph
//! pipeline is checked against.
//!
//! A step is either a communication between an input branch and an output
//! branch of two distinct parallel components (the receiving binder's
//! occurrences are replaced by the sent name), or the unfolding of one
//! top-level call by its definition. Successors come back canonicalized
//! and deduplicated, so congruent results of different redexes collapse.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Name, ProcessTerm, RecursiveSystem};
use super::canon::{canonical_form, extrude_top, simplify, uniquify};

/// What kind of step produced a successor: a communication, or the
/// unfolding of the named definition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    Com,
    Unfold(String),
}

/// Replace free occurrences of names according to `map`. The caller must
/// guarantee no binder of `p` is a key or value of `map` (always true for
/// uniquified terms), so substitution cannot capture.
fn subst_names(p: &ProcessTerm, map: &BTreeMap<Name, Name>) -> ProcessTerm {
    let get = |n: &Name| map.get(n).cloned().unwrap_or_else(|| n.clone());
    match p {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Input { chan, binder, cont } => {
            debug_assert!(!map.contains_key(binder));
            ProcessTerm::Input {
                chan: get(chan),
                binder: binder.clone(),
                cont: Box::new(subst_names(cont, map)),
            }
        }
        ProcessTerm::Output { chan, datum, cont } => ProcessTerm::Output {
            chan: get(chan),
            datum: get(datum),
            cont: Box::new(subst_names(cont, map)),
        },
        ProcessTerm::Par(children) => {
            ProcessTerm::Par(children.iter().map(|c| subst_names(c, map)).collect())
        }
        ProcessTerm::Sum(children) => {
            ProcessTerm::Sum(children.iter().map(|c| subst_names(c, map)).collect())
        }
        ProcessTerm::Restrict { name, body } => {
            debug_assert!(!map.contains_key(name));
            ProcessTerm::Restrict { name: name.clone(), body: Box::new(subst_names(body, map)) }
        }
        ProcessTerm::Call { ident, args } => {
            ProcessTerm::Call { ident: ident.clone(), args: args.iter().map(get).collect() }
        }
    }
}

fn rebuild(binders: &[Name], comps: Vec<ProcessTerm>) -> ProcessTerm {
    let core = match comps.len() {
        0 => ProcessTerm::Nil,
        1 => comps.into_iter().next().unwrap(),
        _ => ProcessTerm::Par(comps),
    };
    binders.iter().rev().fold(core, |acc, b| ProcessTerm::restrict(b.clone(), acc))
}

/// All one-step successors of `p` under `sys`, canonicalized. Every call
/// reachable at top level must be defined in `sys`.
pub fn oracle_step(p: &ProcessTerm, sys: &RecursiveSystem) -> Vec<(StepKind, ProcessTerm)> {
    let mut counter = 0;
    let u = uniquify(p, &mut Vec::new(), &mut counter);
    let (binders, comps) = extrude_top(simplify(u));

    let branches = |c: &ProcessTerm| -> Vec<ProcessTerm> {
        match c {
            ProcessTerm::Sum(bs) => bs.clone(),
            other => vec![other.clone()],
        }
    };

    let mut out: BTreeSet<(StepKind, ProcessTerm)> = BTreeSet::new();

    for i in 0..comps.len() {
        for j in 0..comps.len() {
            if i == j {
                continue;
            }
            for bi in branches(&comps[i]) {
                let ProcessTerm::Input { chan: ci, binder, cont: icont } = &bi else {
                    continue;
                };
                for bo in branches(&comps[j]) {
                    let ProcessTerm::Output { chan: co, datum, cont: ocont } = &bo else {
                        continue;
                    };
                    if ci != co {
                        continue;
                    }
                    let map = BTreeMap::from([(binder.clone(), datum.clone())]);
                    let received = subst_names(icont, &map);
                    let mut rest: Vec<ProcessTerm> = comps
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i && k != j)
                        .map(|(_, c)| c.clone())
                        .collect();
                    rest.push(received);
                    rest.push((**ocont).clone());
                    let succ = rebuild(&binders, rest);
                    out.insert((StepKind::Com, canonical_form(&succ)));
                }
            }
        }
    }

    for (i, c) in comps.iter().enumerate() {
        let ProcessTerm::Call { ident, args } = c else { continue };
        let eq = sys
            .get(ident)
            .unwrap_or_else(|| panic!("call to undefined identifier {ident}"));
        let body = uniquify(&eq.body, &mut Vec::new(), &mut counter);
        let map: BTreeMap<Name, Name> =
            eq.formals.iter().cloned().zip(args.iter().cloned()).collect();
        let unfolded = subst_names(&body, &map);
        let rest: Vec<ProcessTerm> = comps
            .iter()
            .enumerate()
            .map(|(k, c)| if k == i { unfolded.clone() } else { c.clone() })
            .collect();
        let succ = rebuild(&binders, rest);
        out.insert((StepKind::Unfold(ident.clone()), canonical_form(&succ)));
    }

    out.into_iter().collect()
}
