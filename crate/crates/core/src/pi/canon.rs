//! Canonical representatives of structural-congruence classes.
//!
//! Two processes are structurally congruent iff their canonical forms are
//! identical. The normal form is built in five steps: rename every binder
//! apart, collapse units and flatten the associative operators, lift all
//! par-reachable restrictions into one top chain (Milner-style standard
//! form, applied recursively under prefixes), sort the children of `|` and
//! `+` by a binder-name-independent serialization while choosing the
//! restriction-chain order that minimizes it, and finally rename binders to
//! `#0, #1, …` in pre-order. The `#` alphabet cannot be produced by the
//! parser, so canonical binders never collide with source names.

use super::ast::{Name, ProcessTerm};

/// Rename all binders to fresh `#u<n>` names, resolving shadowing. Free
/// names are untouched.
pub(crate) fn uniquify(
    p: &ProcessTerm,
    env: &mut Vec<(Name, Name)>,
    counter: &mut usize,
) -> ProcessTerm {
    fn lookup(env: &[(Name, Name)], n: &Name) -> Name {
        env.iter()
            .rev()
            .find(|(old, _)| old == n)
            .map(|(_, new)| new.clone())
            .unwrap_or_else(|| n.clone())
    }
    match p {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Input { chan, binder, cont } => {
            let chan = lookup(env, chan);
            let fresh = format!("#u{counter}");
            *counter += 1;
            env.push((binder.clone(), fresh.clone()));
            let cont = uniquify(cont, env, counter);
            env.pop();
            ProcessTerm::Input { chan, binder: fresh, cont: Box::new(cont) }
        }
        ProcessTerm::Output { chan, datum, cont } => ProcessTerm::Output {
            chan: lookup(env, chan),
            datum: lookup(env, datum),
            cont: Box::new(uniquify(cont, env, counter)),
        },
        ProcessTerm::Par(children) => {
            ProcessTerm::Par(children.iter().map(|c| uniquify(c, env, counter)).collect())
        }
        ProcessTerm::Sum(children) => {
            ProcessTerm::Sum(children.iter().map(|c| uniquify(c, env, counter)).collect())
        }
        ProcessTerm::Restrict { name, body } => {
            let fresh = format!("#u{counter}");
            *counter += 1;
            env.push((name.clone(), fresh.clone()));
            let body = uniquify(body, env, counter);
            env.pop();
            ProcessTerm::Restrict { name: fresh, body: Box::new(body) }
        }
        ProcessTerm::Call { ident, args } => ProcessTerm::Call {
            ident: ident.clone(),
            args: args.iter().map(|a| lookup(env, a)).collect(),
        },
    }
}

/// Unit and flattening laws: nested `|`/`+` are flattened, nil children
/// dropped, empty and single-child nodes unwrapped, and restrictions whose
/// name is unused removed.
pub(crate) fn simplify(p: ProcessTerm) -> ProcessTerm {
    match p {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Input { chan, binder, cont } => {
            ProcessTerm::Input { chan, binder, cont: Box::new(simplify(*cont)) }
        }
        ProcessTerm::Output { chan, datum, cont } => {
            ProcessTerm::Output { chan, datum, cont: Box::new(simplify(*cont)) }
        }
        ProcessTerm::Par(children) => {
            let mut flat = Vec::new();
            for c in children {
                match simplify(c) {
                    ProcessTerm::Nil => {}
                    ProcessTerm::Par(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            match flat.len() {
                0 => ProcessTerm::Nil,
                1 => flat.pop().unwrap(),
                _ => ProcessTerm::Par(flat),
            }
        }
        ProcessTerm::Sum(children) => {
            let mut flat = Vec::new();
            for c in children {
                match simplify(c) {
                    ProcessTerm::Nil => {}
                    ProcessTerm::Sum(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            match flat.len() {
                0 => ProcessTerm::Nil,
                1 => flat.pop().unwrap(),
                _ => ProcessTerm::Sum(flat),
            }
        }
        ProcessTerm::Restrict { name, body } => {
            let body = simplify(*body);
            if body.free_names().contains(&name) {
                ProcessTerm::Restrict { name, body: Box::new(body) }
            } else {
                body
            }
        }
        call @ ProcessTerm::Call { .. } => call,
    }
}

/// Split a term into its par-reachable restriction binders and parallel
/// components: the input is congruent to `new b1…bk.(c1 | … | cn)`. Only
/// sound on binder-distinct (uniquified) terms, where lifting can never
/// capture.
pub(crate) fn extrude_top(p: ProcessTerm) -> (Vec<Name>, Vec<ProcessTerm>) {
    fn go(p: ProcessTerm, binders: &mut Vec<Name>, comps: &mut Vec<ProcessTerm>) {
        match p {
            ProcessTerm::Restrict { name, body } => {
                binders.push(name);
                go(*body, binders, comps);
            }
            ProcessTerm::Par(children) => {
                for c in children {
                    go(c, binders, comps);
                }
            }
            ProcessTerm::Nil => {}
            other => comps.push(other),
        }
    }
    let mut binders = Vec::new();
    let mut comps = Vec::new();
    go(p, &mut binders, &mut comps);
    (binders, comps)
}

/// Rebuild the term in prenex form: every restriction binder floats to the
/// top, in traversal order. Requires binder-distinct input so no lift can
/// capture. Floating past a prefix is sound because a binder's position
/// relative to the prefixes above it is unobservable: `x(y).(new c.P)` and
/// `new c.x(y).P` have identical successors under reduction (distinctness
/// keeps `c` out of the outer prefix), and their encodings coincide.
fn lift_restrictions(p: ProcessTerm) -> ProcessTerm {
    fn strip(p: ProcessTerm, binders: &mut Vec<Name>) -> ProcessTerm {
        match p {
            ProcessTerm::Restrict { name, body } => {
                binders.push(name);
                strip(*body, binders)
            }
            ProcessTerm::Par(children) => {
                ProcessTerm::Par(children.into_iter().map(|c| strip(c, binders)).collect())
            }
            ProcessTerm::Sum(branches) => {
                ProcessTerm::Sum(branches.into_iter().map(|b| strip(b, binders)).collect())
            }
            ProcessTerm::Input { chan, binder, cont } => {
                ProcessTerm::Input { chan, binder, cont: Box::new(strip(*cont, binders)) }
            }
            ProcessTerm::Output { chan, datum, cont } => {
                ProcessTerm::Output { chan, datum, cont: Box::new(strip(*cont, binders)) }
            }
            leaf @ (ProcessTerm::Nil | ProcessTerm::Call { .. }) => leaf,
        }
    }
    let mut binders = Vec::new();
    let core = strip(p, &mut binders);
    binders.into_iter().rev().fold(core, |acc, v| ProcessTerm::restrict(v, acc))
}

/// Binder chains longer than this keep their given order instead of being
/// permuted; beyond it the factorial search is unreasonable and such terms
/// do not arise from realistic inputs.
const MAX_CHAIN_PERMUTE: usize = 7;

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for slot in 0..=rest.len() {
            let mut perm = rest.clone();
            perm.insert(slot, k - 1);
            out.push(perm);
        }
    }
    out.sort();
    out
}

fn name_ser(n: &Name, env: &[Name]) -> String {
    match env.iter().rposition(|e| e == n) {
        Some(i) => format!("^{}", env.len() - 1 - i),
        None => format!("'{n}"),
    }
}

/// Sort `|`/`+` children by a serialization in which bound names appear as
/// binder distances, making the order independent of binder naming, and
/// pick the restriction-chain permutation whose body serializes least.
/// Returns the reordered term together with its serialization.
fn order(p: &ProcessTerm, env: &mut Vec<Name>) -> (ProcessTerm, String) {
    match p {
        ProcessTerm::Nil => (ProcessTerm::Nil, "0".into()),
        ProcessTerm::Input { chan, binder, cont } => {
            let c = name_ser(chan, env);
            env.push(binder.clone());
            let (k, sk) = order(cont, env);
            env.pop();
            (
                ProcessTerm::Input { chan: chan.clone(), binder: binder.clone(), cont: Box::new(k) },
                format!("i({c},{sk})"),
            )
        }
        ProcessTerm::Output { chan, datum, cont } => {
            let c = name_ser(chan, env);
            let d = name_ser(datum, env);
            let (k, sk) = order(cont, env);
            (
                ProcessTerm::Output {
                    chan: chan.clone(),
                    datum: datum.clone(),
                    cont: Box::new(k),
                },
                format!("o({c},{d},{sk})"),
            )
        }
        ProcessTerm::Par(children) => {
            let mut pairs: Vec<(ProcessTerm, String)> =
                children.iter().map(|c| order(c, env)).collect();
            pairs.sort_by(|a, b| a.1.cmp(&b.1));
            let ser = format!(
                "p({})",
                pairs.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join(",")
            );
            (ProcessTerm::Par(pairs.into_iter().map(|(c, _)| c).collect()), ser)
        }
        ProcessTerm::Sum(children) => {
            let mut pairs: Vec<(ProcessTerm, String)> =
                children.iter().map(|c| order(c, env)).collect();
            pairs.sort_by(|a, b| a.1.cmp(&b.1));
            let ser = format!(
                "s({})",
                pairs.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join(",")
            );
            (ProcessTerm::Sum(pairs.into_iter().map(|(c, _)| c).collect()), ser)
        }
        ProcessTerm::Restrict { .. } => {
            let mut chain = Vec::new();
            let mut core = p;
            while let ProcessTerm::Restrict { name, body } = core {
                chain.push(name.clone());
                core = body;
            }
            let depth = env.len();
            let mut best: Option<(Vec<usize>, ProcessTerm, String)> = None;
            let perms = if chain.len() <= MAX_CHAIN_PERMUTE {
                permutations(chain.len())
            } else {
                vec![(0..chain.len()).collect()]
            };
            for perm in perms {
                env.extend(perm.iter().map(|&i| chain[i].clone()));
                let (c, sc) = order(core, env);
                env.truncate(depth);
                if best.as_ref().map(|(_, _, s)| sc < *s).unwrap_or(true) {
                    best = Some((perm, c, sc));
                }
            }
            let (perm, core, sc) = best.unwrap();
            let rebuilt = perm
                .iter()
                .rev()
                .fold(core, |acc, &i| ProcessTerm::restrict(chain[i].clone(), acc));
            (rebuilt, format!("{}{}{}", "n(".repeat(chain.len()), sc, ")".repeat(chain.len())))
        }
        ProcessTerm::Call { ident, args } => {
            let ser = format!(
                "c({ident}{})",
                args.iter().map(|a| format!(",{}", name_ser(a, env))).collect::<String>()
            );
            (p.clone(), ser)
        }
    }
}

/// Pre-order renaming of binders to `#0, #1, …`.
fn rename_binders(
    p: &ProcessTerm,
    counter: &mut usize,
    env: &mut Vec<(Name, Name)>,
) -> ProcessTerm {
    fn lookup(env: &[(Name, Name)], n: &Name) -> Name {
        env.iter()
            .rev()
            .find(|(old, _)| old == n)
            .map(|(_, new)| new.clone())
            .unwrap_or_else(|| n.clone())
    }
    match p {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Input { chan, binder, cont } => {
            let chan = lookup(env, chan);
            let fresh = format!("#{counter}");
            *counter += 1;
            env.push((binder.clone(), fresh.clone()));
            let cont = rename_binders(cont, counter, env);
            env.pop();
            ProcessTerm::Input { chan, binder: fresh, cont: Box::new(cont) }
        }
        ProcessTerm::Output { chan, datum, cont } => ProcessTerm::Output {
            chan: lookup(env, chan),
            datum: lookup(env, datum),
            cont: Box::new(rename_binders(cont, counter, env)),
        },
        ProcessTerm::Par(children) => ProcessTerm::Par(
            children.iter().map(|c| rename_binders(c, counter, env)).collect(),
        ),
        ProcessTerm::Sum(children) => ProcessTerm::Sum(
            children.iter().map(|c| rename_binders(c, counter, env)).collect(),
        ),
        ProcessTerm::Restrict { name, body } => {
            let fresh = format!("#{counter}");
            *counter += 1;
            env.push((name.clone(), fresh.clone()));
            let body = rename_binders(body, counter, env);
            env.pop();
            ProcessTerm::Restrict { name: fresh, body: Box::new(body) }
        }
        ProcessTerm::Call { ident, args } => ProcessTerm::Call {
            ident: ident.clone(),
            args: args.iter().map(|a| lookup(env, a)).collect(),
        },
    }
}

/// The canonical representative of `p`'s congruence class. Idempotent.
/// Identified: commutativity, associativity, and units of `|` and `+`,
/// renaming of bound names, reordering of adjacent restrictions, scope
/// extrusion, vacuous restriction, and restriction placement relative to
/// enclosing prefixes (see [`lift_restrictions`]). Two terms get equal
/// canonical forms exactly when these laws relate them — the same
/// identifications the graph encoding makes.
pub fn canonical_form(p: &ProcessTerm) -> ProcessTerm {
    let u = uniquify(p, &mut Vec::new(), &mut 0);
    let lifted = lift_restrictions(u);
    let s = simplify(lifted);
    let (ordered, _) = order(&s, &mut Vec::new());
    rename_binders(&ordered, &mut 0, &mut Vec::new())
}
