//! The rewrite strategies driving process execution on encoded graphs:
//! communication between an input and an output prefix, propagation of the
//! merge markers that communication leaves behind, garbage collection of
//! discarded choice branches, and unfolding of recursive definitions.
//!
//! Vertex coalescing is out of reach for injective-match rewriting, so
//! communication only *schedules* substitution: it marks the vertices to be
//! absorbed with `merge(·)` labels and points each at its destination. The
//! merge strategy then moves their edges across one at a time — fusing a
//! sync with an arg into an arg_sync when both land on the same pair — and
//! finally deletes the emptied marker. Abandoned branches get `gc` labels,
//! which the garbage strategy propagates down the operator tree, detaching
//! shared name vertices instead of deleting them.

use crate::dpo::{Rule, RuleBuilder};
use crate::labels;
use crate::pi::{Name, ProcessTerm, RecursiveSystem};
use crate::term::Term;

/// Which strategy a rule set implements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSetKind {
    Com,
    Merge,
    Gc,
    /// Unfolding of one defining equation.
    Unfold { equation: String },
}

/// A named family of rules applied together as one strategy.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub kind: RuleSetKind,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn name(&self) -> String {
        match &self.kind {
            RuleSetKind::Com => "com".into(),
            RuleSetKind::Merge => "merge".into(),
            RuleSetKind::Gc => "gc".into(),
            RuleSetKind::Unfold { equation } => format!("unfold[{equation}]"),
        }
    }

    /// Human-readable listing of every rule in the set.
    pub fn dump(&self) -> String {
        let mut out = format!("strategy {}\n", self.name());
        for rule in &self.rules {
            out.push('\n');
            out.push_str(&rule.dump());
        }
        out
    }
}

// ------------------------------------------------------------ communication

/// One communication rule. The base shape matches an input and an output
/// prefix under two distinct branches of the root composition, agreeing on
/// their channel vertex. `in_arg_sync`/`out_arg_sync` select the variants
/// where the respective prefix carries a collapsed arg_sync edge instead of
/// separate sync and arg edges (for an input that means binder = channel,
/// which the encoder never produces but hand-made graphs may contain).
fn com_variant(in_arg_sync: bool, out_arg_sync: bool) -> Rule {
    let name = match (in_arg_sync, out_arg_sync) {
        (false, false) => "com",
        (false, true) => "com/out-arg-sync",
        (true, false) => "com/in-arg-sync",
        (true, true) => "com/in-out-arg-sync",
    };
    let mut rb = RuleBuilder::new(name);
    let go = rb.keep(labels::go());
    let root = rb.keep(labels::t_p());
    let ts_in = rb.relabel(labels::t_s(), labels::gc());
    let ts_out = rb.relabel(labels::t_s(), labels::gc());
    let op_in = rb.remove(labels::t_in());
    let op_out = rb.remove(labels::t_out());
    // The channel vertex is absorbed into the sent name exactly when it
    // doubles as the input's binder and the output sends something else.
    let chan_label = labels::v(Term::var("_X"));
    let chan = if in_arg_sync && !out_arg_sync {
        rb.relabel(chan_label.clone(), labels::merge(chan_label))
    } else {
        rb.keep(chan_label)
    };
    let cont_in = rb.relabel(labels::t_p(), labels::merge(labels::t_p()));
    let cont_out = rb.relabel(labels::t_p(), labels::merge(labels::t_p()));

    rb.edge_keep(go, root, labels::c());
    // Both taken branches detach from the root: their leftovers become
    // garbage, and the root stays clear of the gc propagation.
    rb.edge_remove(root, ts_in, labels::c());
    rb.edge_remove(root, ts_out, labels::c());
    rb.edge_remove(ts_in, op_in, labels::c());
    rb.edge_remove(ts_out, op_out, labels::c());
    rb.edge_remove(op_in, cont_in, labels::c());
    rb.edge_remove(op_out, cont_out, labels::c());
    // Both continuations are absorbed into the root composition.
    rb.edge_add(cont_in, root, labels::d());
    rb.edge_add(cont_out, root, labels::d());

    let binder = if in_arg_sync {
        rb.edge_remove(op_in, chan, labels::arg_sync());
        chan
    } else {
        let binder_label = labels::v(Term::var("_Y"));
        let b = rb.relabel(binder_label.clone(), labels::merge(binder_label));
        rb.edge_remove(op_in, chan, labels::sync());
        rb.edge_remove(op_in, b, labels::arg());
        b
    };
    let sent = if out_arg_sync {
        rb.edge_remove(op_out, chan, labels::arg_sync());
        chan
    } else {
        let s = rb.keep(labels::v(Term::var("_Z")));
        rb.edge_remove(op_out, chan, labels::sync());
        rb.edge_remove(op_out, s, labels::arg());
        s
    };
    // The binder is absorbed into the sent name — unless they are the same
    // vertex (both prefixes collapsed), where the substitution is identity.
    if binder != sent {
        rb.edge_add(binder, sent, labels::d());
    }
    rb.build().expect("communication rule is well-formed")
}

/// The communication strategy: the base rule plus the three arg_sync
/// variants, so every syntactically possible redex shape has exactly one
/// applicable rule.
pub fn com_rules() -> RuleSet {
    RuleSet {
        kind: RuleSetKind::Com,
        rules: vec![
            com_variant(false, false),
            com_variant(false, true),
            com_variant(true, false),
            com_variant(true, true),
        ],
    }
}

// ------------------------------------------------------------------- merge

/// The two merge-marker families: d-anchored markers absorb into an
/// arbitrary target, ref-anchored `merge(ptr)` markers absorb into the name
/// their pointer referenced.
struct MergeFamily {
    prefix: &'static str,
    marker: Term,
    anchor: Term,
    target: Term,
}

fn merge_families() -> [MergeFamily; 2] {
    [
        MergeFamily {
            prefix: "merge",
            marker: labels::merge(Term::var("_W")),
            anchor: labels::d(),
            target: Term::var("_U"),
        },
        // The target pattern v(_U) keeps the anchor unambiguous: a pointer
        // may itself be referenced by inner call pointers through further
        // ref edges, but only its own ref edge reaches a name vertex.
        MergeFamily {
            prefix: "merge-ptr",
            marker: labels::merge(labels::ptr()),
            anchor: labels::ref_edge(),
            target: labels::v(Term::var("_U")),
        },
    ]
}

/// The merge strategy. Per family: move an edge from the marker onto its
/// target; when the target already holds an edge to the same neighbour,
/// fuse the pair instead ({sync, arg} in either order collapse to
/// arg_sync, equal labels collapse to one); once only the anchor remains,
/// delete the marker.
pub fn merge_rules() -> RuleSet {
    let mut rules = Vec::new();
    for family in merge_families() {
        let anchored = |rb: &mut RuleBuilder| {
            let m = rb.keep(family.marker.clone());
            let u = rb.keep(family.target.clone());
            rb.edge_keep(m, u, family.anchor.clone());
            (m, u)
        };

        let mut rb = RuleBuilder::new(format!("{}/move", family.prefix));
        let (m, u) = anchored(&mut rb);
        let n = rb.keep(Term::var("_N"));
        rb.edge_remove(m, n, Term::var("_E"));
        rb.edge_add(u, n, Term::var("_E"));
        rules.push(rb.build().expect("move rule is well-formed"));

        let fusions: [(&str, Term, Term, Option<Term>); 3] = [
            ("fuse-sync-arg", labels::sync(), labels::arg(), Some(labels::arg_sync())),
            ("fuse-arg-sync", labels::arg(), labels::sync(), Some(labels::arg_sync())),
            // Equal labels simply collapse: the moved edge disappears into
            // the one already present.
            ("fuse-equal", Term::var("_E"), Term::var("_E"), None),
        ];
        for (tag, moved, present, fused) in fusions {
            let mut rb = RuleBuilder::new(format!("{}/{tag}", family.prefix));
            let (m, u) = anchored(&mut rb);
            let n = rb.keep(Term::var("_N"));
            rb.edge_remove(m, n, moved);
            match fused {
                Some(result) => rb.edge_relabel(u, n, present, result),
                None => rb.edge_keep(u, n, present),
            }
            rules.push(rb.build().expect("fuse rule is well-formed"));
        }

        let mut rb = RuleBuilder::new(format!("{}/finish", family.prefix));
        let m = rb.remove(family.marker.clone());
        let u = rb.keep(family.target.clone());
        rb.edge_remove(m, u, family.anchor.clone());
        // The dangling condition holds the rule back until every other edge
        // has been moved off the marker.
        rules.push(rb.build().expect("finish rule is well-formed"));
    }
    RuleSet {
        kind: RuleSetKind::Merge,
        rules,
    }
}

// ---------------------------------------------------------------- garbage

/// The garbage-collection strategy: a gc vertex swallows adjacent operator
/// and pointer vertices (relabelling them gc and cutting the edge) and
/// detaches from adjacent name vertices, which stay alive for whoever else
/// uses them.
pub fn gc_rules() -> RuleSet {
    let mut rules = Vec::new();

    let mut rb = RuleBuilder::new("gc/operator");
    let g = rb.keep(labels::gc());
    let n = rb.relabel(Term::fun("t", vec![Term::var("_X")]), labels::gc());
    rb.edge_remove(g, n, Term::var("_E"));
    rules.push(rb.build().expect("operator gc rule is well-formed"));

    let mut rb = RuleBuilder::new("gc/name");
    let g = rb.keep(labels::gc());
    let n = rb.keep(labels::v(Term::var("_N")));
    rb.edge_remove(g, n, Term::var("_E"));
    rules.push(rb.build().expect("name gc rule is well-formed"));

    let mut rb = RuleBuilder::new("gc/pointer");
    let g = rb.keep(labels::gc());
    let n = rb.relabel(labels::ptr(), labels::gc());
    rb.edge_remove(g, n, Term::var("_E"));
    rules.push(rb.build().expect("pointer gc rule is well-formed"));

    RuleSet {
        kind: RuleSetKind::Gc,
        rules,
    }
}

// --------------------------------------------------------------- unfolding

/// A name in scope while splicing a definition body: formals resolve to the
/// matched pointer vertices, binders to right-hand vertices created on
/// first use.
enum SpliceBinding {
    Formal(usize),
    Lazy(Option<usize>),
}

struct Splicer<'a, 'rb> {
    rb: &'rb mut RuleBuilder,
    sys: &'a RecursiveSystem,
    fresh_next: usize,
}

impl Splicer<'_, '_> {
    fn fresh_name_vertex(&mut self) -> usize {
        let var = format!("_f{}", self.fresh_next);
        self.fresh_next += 1;
        self.rb.fresh_var(var.clone());
        self.rb.add(labels::v(Term::var(var)))
    }

    fn resolve(&mut self, name: &Name, env: &mut [(Name, SpliceBinding)]) -> usize {
        let i = env
            .iter()
            .rposition(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("definition body is not closed: free name {name}"));
        match env[i].1 {
            SpliceBinding::Formal(v) => v,
            SpliceBinding::Lazy(Some(v)) => v,
            SpliceBinding::Lazy(None) => {
                let v = self.fresh_name_vertex();
                env[i].1 = SpliceBinding::Lazy(Some(v));
                v
            }
        }
    }

    fn components(&mut self, p: &ProcessTerm, tp: usize, env: &mut Vec<(Name, SpliceBinding)>) {
        match p {
            ProcessTerm::Nil => {}
            ProcessTerm::Par(children) => {
                for c in children {
                    self.components(c, tp, env);
                }
            }
            ProcessTerm::Restrict { name, body } => {
                env.push((name.clone(), SpliceBinding::Lazy(None)));
                self.components(body, tp, env);
                env.pop();
            }
            other => {
                let mut branches = Vec::new();
                collect_branches(other, &mut branches);
                if branches.is_empty() {
                    return;
                }
                let ts = self.rb.add(labels::t_s());
                self.rb.edge_add(tp, ts, labels::c());
                for branch in branches {
                    self.branch(branch, ts, env);
                }
            }
        }
    }

    fn branch(&mut self, p: &ProcessTerm, ts: usize, env: &mut Vec<(Name, SpliceBinding)>) {
        match p {
            ProcessTerm::Input { chan, binder, cont } => {
                let op = self.rb.add(labels::t_in());
                self.rb.edge_add(ts, op, labels::c());
                let cv = self.resolve(chan, env);
                self.rb.edge_add(op, cv, labels::sync());
                let bv = self.fresh_name_vertex();
                self.rb.edge_add(op, bv, labels::arg());
                let cont_tp = self.rb.add(labels::t_p());
                self.rb.edge_add(op, cont_tp, labels::c());
                env.push((binder.clone(), SpliceBinding::Lazy(Some(bv))));
                self.components(cont, cont_tp, env);
                env.pop();
            }
            ProcessTerm::Output { chan, datum, cont } => {
                let op = self.rb.add(labels::t_out());
                self.rb.edge_add(ts, op, labels::c());
                let cv = self.resolve(chan, env);
                let dv = self.resolve(datum, env);
                if cv == dv {
                    self.rb.edge_add(op, cv, labels::arg_sync());
                } else {
                    self.rb.edge_add(op, cv, labels::sync());
                    self.rb.edge_add(op, dv, labels::arg());
                }
                let cont_tp = self.rb.add(labels::t_p());
                self.rb.edge_add(op, cont_tp, labels::c());
                self.components(cont, cont_tp, env);
            }
            ProcessTerm::Call { ident, args } => {
                let eq = self
                    .sys
                    .get(ident)
                    .unwrap_or_else(|| panic!("call to undefined identifier {ident}"));
                assert_eq!(
                    eq.formals.len(),
                    args.len(),
                    "call to {ident} with wrong arity"
                );
                let call = self.rb.add(labels::t_call(ident));
                self.rb.edge_add(ts, call, labels::c());
                for (k, a) in args.iter().enumerate() {
                    let pv = self.rb.add(labels::ptr());
                    self.rb.edge_add(call, pv, labels::idx(k));
                    let nv = self.resolve(a, env);
                    self.rb.edge_add(pv, nv, labels::ref_edge());
                }
            }
            ProcessTerm::Nil | ProcessTerm::Sum(_) => {
                unreachable!("branch collection leaves only guarded branches")
            }
            ProcessTerm::Par(_) | ProcessTerm::Restrict { .. } => {
                panic!("choice branch is not guarded: {p}")
            }
        }
    }
}

fn collect_branches<'p>(p: &'p ProcessTerm, out: &mut Vec<&'p ProcessTerm>) {
    match p {
        ProcessTerm::Sum(branches) => {
            for b in branches {
                collect_branches(b, out);
            }
        }
        ProcessTerm::Nil => {}
        other => out.push(other),
    }
}

/// One unfolding strategy per defining equation. The left-hand side matches
/// an invocation hanging off the root composition, with one pointer per
/// argument; the right-hand side splices in the encoded definition body,
/// wiring every use of a formal directly to the matched pointer. The
/// pointer turns into a ref-anchored merge marker, so the merge strategy
/// afterwards slides those uses onto the actual argument's name vertex.
pub fn unfold_rules(sys: &RecursiveSystem) -> Vec<RuleSet> {
    let mut sets = Vec::new();
    for (ident, eq) in sys.iter() {
        let mut rb = RuleBuilder::new(format!("unfold/{ident}"));
        let go = rb.keep(labels::go());
        let root = rb.keep(labels::t_p());
        let ts = rb.remove(labels::t_s());
        let call = rb.remove(labels::t_call(ident));
        rb.edge_keep(go, root, labels::c());
        rb.edge_remove(root, ts, labels::c());
        rb.edge_remove(ts, call, labels::c());

        let mut env: Vec<(Name, SpliceBinding)> = Vec::new();
        for (k, formal) in eq.formals.iter().enumerate() {
            let pv = rb.relabel(labels::ptr(), labels::merge(labels::ptr()));
            rb.edge_remove(call, pv, labels::idx(k));
            env.push((formal.clone(), SpliceBinding::Formal(pv)));
        }

        let mut splicer = Splicer {
            rb: &mut rb,
            sys,
            fresh_next: 0,
        };
        splicer.components(&eq.body, root, &mut env);

        sets.push(RuleSet {
            kind: RuleSetKind::Unfold {
                equation: ident.to_string(),
            },
            rules: vec![rb.build().expect("unfolding rule is well-formed")],
        });
    }
    sets
}
