//! Translation between process terms and labelled graphs.
//!
//! `encode` maps a process onto its graph form: a `go` marker anchors a root
//! `t(p)` vertex, each parallel component hangs off it as a `t(s)` vertex,
//! and each choice branch becomes a chain of prefix operators ending in
//! `t(p)` continuations. Names are shared vertices — constants when free,
//! variables when bound — so renaming bound names, reordering compositions,
//! and moving restrictions all disappear under graph isomorphism. `decode`
//! inverts the translation and doubles as a structural validator;
//! `simplify_view` produces a compact presentation graph for humans.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::labels;
use crate::lgraph::{GraphBuilder, LabelledGraph, VertexId};
use crate::pi::{Name, ProcessTerm, RecursiveSystem};
use crate::term::Term;

/// A process in graph form, together with the bookkeeping needed to read it
/// back: the `go` root and the vertex standing for each free name.
#[derive(Debug, Clone)]
pub struct EncodedProcess {
    pub graph: LabelledGraph,
    /// The unique vertex labelled `go`.
    pub root: VertexId,
    /// Free name → its shared vertex.
    pub name_table: BTreeMap<Name, VertexId>,
}

/// A structural invariant violated by a graph that was supposed to be a
/// process encoding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingFault {
    #[error("expected exactly one vertex labelled go, found {0}")]
    GoCount(usize),
    #[error("the root field does not reference the go vertex")]
    RootField,
    #[error("vertex {id} carries a label outside the encoding vocabulary: {label}")]
    Vocabulary { id: VertexId, label: Term },
    #[error("{label} vertex {id}: {detail}")]
    Shape {
        id: VertexId,
        label: Term,
        detail: String,
    },
    #[error("edge {a} -- {b} ({label}) is not part of any operator structure")]
    StrayEdge { a: VertexId, b: VertexId, label: Term },
    #[error("vertex {id} ({label}) is not reachable from the operator tree")]
    StrayVertex { id: VertexId, label: Term },
    #[error("name table entry for {name:?} does not match the graph's free-name vertices")]
    NameTable { name: String },
    #[error("bound name vertex {id} is used outside the scope of the input that binds it")]
    BinderScope { id: VertexId },
    #[error("call vertex {id} invokes {ident}, which has no defining equation")]
    UndefinedCall { id: VertexId, ident: String },
    #[error("call vertex {id} passes {found} arguments to {ident}, which takes {expected}")]
    CallArity {
        id: VertexId,
        ident: String,
        expected: usize,
        found: usize,
    },
}

// ---------------------------------------------------------------- encoding

struct Encoder<'a> {
    b: GraphBuilder,
    free: BTreeMap<Name, VertexId>,
    bound_next: u32,
    sys: &'a RecursiveSystem,
}

/// A name in scope: input binders get their vertex eagerly (the prefix
/// needs its arg edge either way), restrictions lazily, so that a
/// restriction nothing refers to leaves no trace in the graph.
type ScopeEntry = (Name, Option<VertexId>);

impl Encoder<'_> {
    fn fresh_bound(&mut self) -> VertexId {
        let k = self.bound_next;
        self.bound_next += 1;
        self.b.add_vertex(labels::bound_name(k))
    }

    fn resolve(&mut self, name: &Name, env: &mut [ScopeEntry]) -> VertexId {
        if let Some(i) = env.iter().rposition(|(n, _)| n == name) {
            if let Some(v) = env[i].1 {
                v
            } else {
                let v = self.fresh_bound();
                env[i].1 = Some(v);
                v
            }
        } else {
            if let Some(&v) = self.free.get(name) {
                return v;
            }
            let v = self.b.add_vertex(labels::free_name(name));
            self.free.insert(name.clone(), v);
            v
        }
    }

    /// Encode `p` as parallel components under the composition vertex `tp`.
    fn components(&mut self, p: &ProcessTerm, tp: VertexId, env: &mut Vec<ScopeEntry>) {
        match p {
            ProcessTerm::Nil => {}
            ProcessTerm::Par(children) => {
                for c in children {
                    self.components(c, tp, env);
                }
            }
            ProcessTerm::Restrict { name, body } => {
                env.push((name.clone(), None));
                self.components(body, tp, env);
                env.pop();
            }
            other => {
                let mut branches = Vec::new();
                collect_branches(other, &mut branches);
                // A choice whose branches are all 0 is 0 and leaves no vertex.
                if branches.is_empty() {
                    return;
                }
                let ts = self.b.add_vertex(labels::t_s());
                self.b.add_edge(tp, ts, labels::c());
                for branch in branches {
                    self.branch(branch, ts, env);
                }
            }
        }
    }

    /// Encode one guarded branch under the choice vertex `ts`.
    fn branch(&mut self, p: &ProcessTerm, ts: VertexId, env: &mut Vec<ScopeEntry>) {
        match p {
            ProcessTerm::Input { chan, binder, cont } => {
                let op = self.b.add_vertex(labels::t_in());
                self.b.add_edge(ts, op, labels::c());
                let cv = self.resolve(chan, env);
                self.b.add_edge(op, cv, labels::sync());
                // The binder is always a fresh vertex, distinct from the
                // channel even for x(x), so inputs never need arg_sync.
                let bv = self.fresh_bound();
                self.b.add_edge(op, bv, labels::arg());
                let cont_tp = self.b.add_vertex(labels::t_p());
                self.b.add_edge(op, cont_tp, labels::c());
                env.push((binder.clone(), Some(bv)));
                self.components(cont, cont_tp, env);
                env.pop();
            }
            ProcessTerm::Output { chan, datum, cont } => {
                let op = self.b.add_vertex(labels::t_out());
                self.b.add_edge(ts, op, labels::c());
                let cv = self.resolve(chan, env);
                let dv = self.resolve(datum, env);
                if cv == dv {
                    self.b.add_edge(op, cv, labels::arg_sync());
                } else {
                    self.b.add_edge(op, cv, labels::sync());
                    self.b.add_edge(op, dv, labels::arg());
                }
                let cont_tp = self.b.add_vertex(labels::t_p());
                self.b.add_edge(op, cont_tp, labels::c());
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
                let call = self.b.add_vertex(labels::t_call(ident));
                self.b.add_edge(ts, call, labels::c());
                for (k, a) in args.iter().enumerate() {
                    let pv = self.b.add_vertex(labels::ptr());
                    self.b.add_edge(call, pv, labels::idx(k));
                    let nv = self.resolve(a, env);
                    self.b.add_edge(pv, nv, labels::ref_edge());
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

/// Encode a process as a labelled graph. Bound names become fresh
/// variables `_b0, _b1, …` in first-use order; free names become shared
/// constant-labelled vertices. Panics on an unguarded choice or a call
/// that does not match `sys` (both are ruled out by the parser).
pub fn encode(p: &ProcessTerm, sys: &RecursiveSystem) -> EncodedProcess {
    let mut enc = Encoder {
        b: GraphBuilder::new(),
        free: BTreeMap::new(),
        bound_next: 0,
        sys,
    };
    let go = enc.b.add_vertex(labels::go());
    let root = enc.b.add_vertex(labels::t_p());
    enc.b.add_edge(go, root, labels::c());
    enc.components(p, root, &mut Vec::new());
    EncodedProcess {
        graph: enc.b.freeze(),
        root: go,
        name_table: enc.free,
    }
}

// ---------------------------------------------------------------- decoding

/// Readable bound names for decoding: `u0, u1, …`, skipping anything that
/// collides with a free name.
struct NameGen {
    used: BTreeSet<String>,
    next: usize,
}

impl NameGen {
    fn fresh(&mut self) -> Name {
        loop {
            let candidate = format!("u{}", self.next);
            self.next += 1;
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

struct Walker<'a> {
    g: &'a LabelledGraph,
    sys: Option<&'a RecursiveSystem>,
    /// Edges accounted for by the walk, in normalized key order.
    consumed: BTreeSet<(VertexId, VertexId)>,
    /// Structure vertices the walk has entered (cycle and coverage check).
    visited: BTreeSet<VertexId>,
    /// Name vertices referenced by some prefix, call, or binder.
    name_seen: BTreeSet<VertexId>,
    /// Vertices claimed as an input's binder.
    binders: BTreeSet<VertexId>,
    /// Bound vertices read back as restrictions, in first-use order.
    restricted: BTreeMap<VertexId, Name>,
    restricted_order: Vec<VertexId>,
    /// Free name → vertex, as observed while walking.
    free_seen: BTreeMap<Name, VertexId>,
    gen: NameGen,
}

type Fallible<T> = Result<T, EncodingFault>;

impl<'a> Walker<'a> {
    fn shape(&self, id: VertexId, detail: impl Into<String>) -> EncodingFault {
        EncodingFault::Shape {
            id,
            label: self.g.label(id).expect("shape fault on absent vertex").clone(),
            detail: detail.into(),
        }
    }

    fn consume(&mut self, a: VertexId, b: VertexId) {
        let key = if a < b { (a, b) } else { (b, a) };
        self.consumed.insert(key);
    }

    fn enter(&mut self, id: VertexId) -> Fallible<()> {
        if !self.visited.insert(id) {
            return Err(self.shape(id, "the operator tree visits this vertex twice"));
        }
        Ok(())
    }

    /// Incident edges of `id` as (neighbour, label) pairs in id order.
    fn edges_of(&self, id: VertexId) -> Vec<(VertexId, Term)> {
        self.g
            .neighbors(id)
            .iter()
            .map(|&n| (n, self.g.edge_label(id, n).expect("adjacent edge").clone()))
            .collect()
    }

    /// Read a use of a name vertex, producing the name it stands for.
    fn resolve_use(&mut self, id: VertexId, env: &[(VertexId, Name)]) -> Fallible<Name> {
        let label = self.g.label(id).expect("name use of absent vertex");
        let atom = labels::name_atom(label).ok_or_else(|| EncodingFault::Vocabulary {
            id,
            label: label.clone(),
        })?;
        self.name_seen.insert(id);
        match atom {
            Term::Fun(name, args) if args.is_empty() => {
                if let Some(&prev) = self.free_seen.get(name.as_str()) {
                    if prev != id {
                        return Err(EncodingFault::NameTable { name: name.clone() });
                    }
                } else {
                    self.free_seen.insert(name.clone(), id);
                }
                Ok(name.clone())
            }
            Term::Var(_) => {
                if let Some(i) = env.iter().rposition(|(v, _)| *v == id) {
                    return Ok(env[i].1.clone());
                }
                if self.binders.contains(&id) {
                    return Err(EncodingFault::BinderScope { id });
                }
                if let Some(name) = self.restricted.get(&id) {
                    return Ok(name.clone());
                }
                let name = self.gen.fresh();
                self.restricted.insert(id, name.clone());
                self.restricted_order.push(id);
                Ok(name)
            }
            _ => Err(EncodingFault::Vocabulary {
                id,
                label: label.clone(),
            }),
        }
    }

    /// Walk a composition vertex: its children are choice vertices.
    fn walk_tp(
        &mut self,
        tp: VertexId,
        parent: VertexId,
        env: &mut Vec<(VertexId, Name)>,
    ) -> Fallible<ProcessTerm> {
        self.enter(tp)?;
        let mut comps = Vec::new();
        for (n, label) in self.edges_of(tp) {
            if n == parent {
                continue;
            }
            if label != labels::c() {
                return Err(self.shape(tp, format!("carries a non-structural edge {label}")));
            }
            if self.g.label(n) != Some(&labels::t_s()) {
                return Err(self.shape(tp, format!("component child {n} is not labelled t(s)")));
            }
            self.consume(tp, n);
            comps.push(self.walk_ts(n, tp, env)?);
        }
        Ok(match comps.len() {
            0 => ProcessTerm::Nil,
            1 => comps.pop().unwrap(),
            _ => ProcessTerm::Par(comps),
        })
    }

    /// Walk a choice vertex: its children are prefix operators or calls.
    fn walk_ts(
        &mut self,
        ts: VertexId,
        parent: VertexId,
        env: &mut Vec<(VertexId, Name)>,
    ) -> Fallible<ProcessTerm> {
        self.enter(ts)?;
        let mut branches = Vec::new();
        for (n, label) in self.edges_of(ts) {
            if n == parent {
                continue;
            }
            if label != labels::c() {
                return Err(self.shape(ts, format!("carries a non-structural edge {label}")));
            }
            self.consume(ts, n);
            branches.push(self.walk_branch(n, ts, env)?);
        }
        if branches.is_empty() {
            return Err(self.shape(ts, "choice vertex has no branches"));
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            ProcessTerm::Sum(branches)
        })
    }

    fn walk_branch(
        &mut self,
        op: VertexId,
        parent: VertexId,
        env: &mut Vec<(VertexId, Name)>,
    ) -> Fallible<ProcessTerm> {
        let label = self
            .g
            .label(op)
            .expect("branch walk of absent vertex")
            .clone();
        if label == labels::t_in() || label == labels::t_out() {
            self.walk_prefix(op, parent, label == labels::t_in(), env)
        } else if let Some(ident) = labels::call_ident(&label) {
            let ident = ident.to_owned();
            self.walk_call(op, ident, env)
        } else {
            Err(self.shape(
                parent,
                format!("branch child {op} has label {label}, not an operator"),
            ))
        }
    }

    fn walk_prefix(
        &mut self,
        op: VertexId,
        parent: VertexId,
        is_input: bool,
        env: &mut Vec<(VertexId, Name)>,
    ) -> Fallible<ProcessTerm> {
        self.enter(op)?;
        let mut cont = None;
        let mut sync_target = None;
        let mut arg_target = None;
        let mut arg_sync_target = None;
        for (n, label) in self.edges_of(op) {
            if n == parent {
                continue;
            }
            if label == labels::c() {
                if self.g.label(n) != Some(&labels::t_p()) {
                    return Err(self.shape(op, format!("continuation {n} is not labelled t(p)")));
                }
                if cont.replace(n).is_some() {
                    return Err(self.shape(op, "more than one continuation"));
                }
            } else if label == labels::sync() {
                if sync_target.replace(n).is_some() {
                    return Err(self.shape(op, "more than one sync edge"));
                }
            } else if label == labels::arg() {
                if arg_target.replace(n).is_some() {
                    return Err(self.shape(op, "more than one arg edge"));
                }
            } else if label == labels::arg_sync() {
                if arg_sync_target.replace(n).is_some() {
                    return Err(self.shape(op, "more than one arg_sync edge"));
                }
            } else {
                return Err(self.shape(op, format!("unexpected edge label {label}")));
            }
            self.consume(op, n);
        }
        let cont = cont.ok_or_else(|| self.shape(op, "missing continuation"))?;
        let (chan_v, arg_v) = match (sync_target, arg_target, arg_sync_target) {
            (Some(s), Some(a), None) => (s, a),
            (None, None, Some(both)) => (both, both),
            _ => {
                return Err(self.shape(
                    op,
                    "needs either one sync and one arg edge or a single arg_sync edge",
                ))
            }
        };
        let chan = self.resolve_use(chan_v, env)?;
        if is_input {
            let binder = if arg_v == chan_v {
                // Channel doubling as binder only happens in hand-made
                // graphs; read it as the shadowing input x(x).
                chan.clone()
            } else {
                let label = self.g.label(arg_v).expect("binder vertex");
                match labels::name_atom(label) {
                    Some(Term::Var(_)) => {}
                    _ => {
                        return Err(self.shape(
                            op,
                            "input binder must be a variable-labelled name vertex",
                        ))
                    }
                }
                if self.restricted.contains_key(&arg_v) || !self.binders.insert(arg_v) {
                    return Err(EncodingFault::BinderScope { id: arg_v });
                }
                self.name_seen.insert(arg_v);
                self.gen.fresh()
            };
            env.push((arg_v, binder.clone()));
            let body = self.walk_tp(cont, op, env)?;
            env.pop();
            Ok(ProcessTerm::Input {
                chan,
                binder,
                cont: Box::new(body),
            })
        } else {
            let datum = self.resolve_use(arg_v, env)?;
            let body = self.walk_tp(cont, op, env)?;
            Ok(ProcessTerm::Output {
                chan,
                datum,
                cont: Box::new(body),
            })
        }
    }

    fn walk_call(
        &mut self,
        call: VertexId,
        ident: String,
        env: &mut Vec<(VertexId, Name)>,
    ) -> Fallible<ProcessTerm> {
        self.enter(call)?;
        let mut slots: BTreeMap<usize, VertexId> = BTreeMap::new();
        for (n, label) in self.edges_of(call) {
            if label == labels::c() {
                // Only the already-consumed edge up to the choice vertex:
                // calls have no continuation of their own.
                if !self.consumed.contains(&if call < n { (call, n) } else { (n, call) }) {
                    return Err(self.shape(call, "carries a structural edge besides its choice parent"));
                }
                continue;
            }
            let Some(k) = labels::idx_position(&label) else {
                return Err(self.shape(call, format!("unexpected edge label {label}")));
            };
            if self.g.label(n) != Some(&labels::ptr()) {
                return Err(self.shape(call, format!("argument {k} does not point at a ptr vertex")));
            }
            if slots.insert(k, n).is_some() {
                return Err(self.shape(call, format!("argument position {k} appears twice")));
            }
            self.consume(call, n);
        }
        let mut args = Vec::new();
        for (expect, (k, pv)) in slots.into_iter().enumerate() {
            if k != expect {
                return Err(self.shape(call, "argument positions are not contiguous from 0"));
            }
            args.push(self.walk_ptr(pv, call, env)?);
        }
        if let Some(sys) = self.sys {
            match sys.get(&ident) {
                None => {
                    return Err(EncodingFault::UndefinedCall { id: call, ident });
                }
                Some(eq) if eq.formals.len() != args.len() => {
                    return Err(EncodingFault::CallArity {
                        id: call,
                        ident,
                        expected: eq.formals.len(),
                        found: args.len(),
                    });
                }
                Some(_) => {}
            }
        }
        Ok(ProcessTerm::Call { ident, args })
    }

    fn walk_ptr(
        &mut self,
        pv: VertexId,
        call: VertexId,
        env: &mut Vec<(VertexId, Name)>,
    ) -> Fallible<Name> {
        self.enter(pv)?;
        let mut name = None;
        for (n, label) in self.edges_of(pv) {
            if n == call {
                continue;
            }
            if label != labels::ref_edge() {
                return Err(self.shape(pv, format!("unexpected edge label {label}")));
            }
            if name.replace(n).is_some() {
                return Err(self.shape(pv, "more than one ref edge"));
            }
            self.consume(pv, n);
        }
        let Some(nv) = name else {
            return Err(self.shape(pv, "missing ref edge"));
        };
        self.resolve_use(nv, env)
    }
}

fn analyze(e: &EncodedProcess, sys: Option<&RecursiveSystem>) -> Fallible<ProcessTerm> {
    let g = &e.graph;
    let go_vertices: Vec<VertexId> = g
        .vertices()
        .filter(|(_, l)| **l == labels::go())
        .map(|(id, _)| id)
        .collect();
    if go_vertices.len() != 1 {
        return Err(EncodingFault::GoCount(go_vertices.len()));
    }
    let go = go_vertices[0];
    if e.root != go {
        return Err(EncodingFault::RootField);
    }

    let used: BTreeSet<String> = g
        .vertices()
        .filter_map(|(_, l)| match labels::name_atom(l) {
            Some(Term::Fun(name, args)) if args.is_empty() => Some(name.clone()),
            _ => None,
        })
        .collect();
    let mut w = Walker {
        g,
        sys,
        consumed: BTreeSet::new(),
        visited: BTreeSet::new(),
        name_seen: BTreeSet::new(),
        binders: BTreeSet::new(),
        restricted: BTreeMap::new(),
        restricted_order: Vec::new(),
        free_seen: BTreeMap::new(),
        gen: NameGen { used, next: 0 },
    };

    w.enter(go)?;
    let root_edges = w.edges_of(go);
    let [(anchor, ref label)] = root_edges[..] else {
        return Err(w.shape(go, "must have exactly one neighbour"));
    };
    if *label != labels::c() || g.label(anchor) != Some(&labels::t_p()) {
        return Err(w.shape(go, "must anchor a t(p) vertex through a c edge"));
    }
    w.consume(go, anchor);
    let body = w.walk_tp(anchor, go, &mut Vec::new())?;

    for (a, b, label) in g.edges() {
        if !w.consumed.contains(&(a, b)) {
            return Err(EncodingFault::StrayEdge {
                a,
                b,
                label: label.clone(),
            });
        }
    }
    for (id, label) in g.vertices() {
        if !w.visited.contains(&id) && !w.name_seen.contains(&id) {
            return Err(EncodingFault::StrayVertex {
                id,
                label: label.clone(),
            });
        }
    }
    for (name, &id) in &w.free_seen {
        if e.name_table.get(name) != Some(&id) {
            return Err(EncodingFault::NameTable { name: name.clone() });
        }
    }
    for (name, &id) in &e.name_table {
        if w.free_seen.get(name) != Some(&id) {
            return Err(EncodingFault::NameTable { name: name.clone() });
        }
    }

    let term = w
        .restricted_order
        .iter()
        .rev()
        .fold(body, |acc, id| ProcessTerm::Restrict {
            name: w.restricted[id].clone(),
            body: Box::new(acc),
        });
    Ok(term)
}

/// Read an encoded process back into a term, choosing fresh readable bound
/// names and placing restrictions outermost. Faults identify the violated
/// encoding invariant; mid-pipeline graphs (merge/gc vertices) are
/// rejected.
pub fn decode(e: &EncodedProcess, sys: &RecursiveSystem) -> Result<ProcessTerm, EncodingFault> {
    analyze(e, Some(sys))
}

impl EncodedProcess {
    /// Check every structural invariant of an encoding without consulting
    /// defining equations.
    pub fn validate(&self) -> Result<(), EncodingFault> {
        analyze(self, None).map(|_| ())
    }

    /// Rebuild the bookkeeping fields for a graph produced by rewriting:
    /// locate the `go` root, recover the free-name table, and validate.
    pub fn from_graph(graph: LabelledGraph) -> Result<EncodedProcess, EncodingFault> {
        let go_vertices: Vec<VertexId> = graph
            .vertices()
            .filter(|(_, l)| **l == labels::go())
            .map(|(id, _)| id)
            .collect();
        if go_vertices.len() != 1 {
            return Err(EncodingFault::GoCount(go_vertices.len()));
        }
        let mut name_table = BTreeMap::new();
        for (id, label) in graph.vertices() {
            if let Some(Term::Fun(name, args)) = labels::name_atom(label) {
                if args.is_empty() && name_table.insert(name.clone(), id).is_some() {
                    return Err(EncodingFault::NameTable { name: name.clone() });
                }
            }
        }
        let e = EncodedProcess {
            root: go_vertices[0],
            graph,
            name_table,
        };
        e.validate()?;
        Ok(e)
    }
}

// ---------------------------------------------------------------- view

/// A compact presentation of an encoding: the `go` marker disappears,
/// pointer vertices give way to direct argument edges (keeping their idx
/// labels; with repeated arguments only the lowest position survives, the
/// graph being simple), and composition vertices that do not actually
/// branch — degree two or less — are contracted through. Presentation
/// only: the result is generally not a valid encoding.
pub fn simplify_view(e: &EncodedProcess) -> LabelledGraph {
    let mut g = e.graph.clone();

    // Drop the root marker.
    let mut b = g.to_builder();
    b.remove_vertex(e.root);

    // Splice pointers out: call --idx--> ptr --ref--> name becomes
    // call --idx--> name.
    let ptrs: Vec<VertexId> = g
        .vertices()
        .filter(|(_, l)| **l == labels::ptr())
        .map(|(id, _)| id)
        .collect();
    for pv in ptrs {
        let mut call = None;
        let mut name = None;
        let mut idx_label = None;
        for &n in g.neighbors(pv) {
            let label = g.edge_label(pv, n).unwrap();
            if labels::idx_position(label).is_some() {
                call = Some(n);
                idx_label = Some(label.clone());
            } else if *label == labels::ref_edge() {
                name = Some(n);
            }
        }
        b.remove_vertex(pv);
        if let (Some(c), Some(n), Some(l)) = (call, name, idx_label) {
            if !b.has_edge(c, n) {
                b.add_edge(c, n, l);
            }
        }
    }
    g = b.freeze();

    // Contract composition/choice vertices that do not branch.
    loop {
        let candidate = g.vertices().find(|(id, l)| {
            (**l == labels::t_p() || **l == labels::t_s()) && g.degree(*id) <= 2
        });
        let Some((id, _)) = candidate else { break };
        let neighbors: Vec<VertexId> = g.neighbors(id).to_vec();
        let mut b = g.to_builder();
        b.remove_vertex(id);
        if let [a, c] = neighbors[..] {
            if !b.has_edge(a, c) {
                b.add_edge(a, c, labels::c());
            }
        }
        g = b.freeze();
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lgraph::is_isomorphic;
    use crate::pi::{canonical_form, parse_process};

    fn parsed(src: &str) -> (ProcessTerm, RecursiveSystem) {
        parse_process(src).unwrap()
    }

    fn encoded(src: &str) -> EncodedProcess {
        let (p, sys) = parsed(src);
        encode(&p, &sys)
    }

    fn vertex_with(e: &EncodedProcess, label: &Term) -> VertexId {
        let mut hits = e.graph.vertices().filter(|(_, l)| *l == label);
        let (id, _) = hits.next().expect("label not present");
        assert!(hits.next().is_none(), "label {label} not unique");
        id
    }

    #[test]
    fn single_output_yields_seven_vertices() {
        let e = encoded("main = x<y>");
        assert_eq!(e.graph.vertex_count(), 7);
        assert_eq!(e.graph.edge_count(), 6);
        let mut labels_seen: Vec<String> =
            e.graph.vertices().map(|(_, l)| l.to_string()).collect();
        labels_seen.sort();
        assert_eq!(
            labels_seen,
            ["go", "t(out)", "t(p)", "t(p)", "t(s)", "v(x)", "v(y)"]
        );
        let out = vertex_with(&e, &labels::t_out());
        let x = e.name_table["x"];
        let y = e.name_table["y"];
        assert_eq!(e.graph.edge_label(out, x), Some(&labels::sync()));
        assert_eq!(e.graph.edge_label(out, y), Some(&labels::arg()));
        e.validate().unwrap();
    }

    #[test]
    fn nil_is_the_bare_root_pair() {
        let e = encoded("main = 0");
        assert_eq!(e.graph.vertex_count(), 2);
        assert_eq!(e.graph.edge_count(), 1);
        assert!(e.name_table.is_empty());
        let (_, sys) = parsed("main = 0");
        assert_eq!(decode(&e, &sys).unwrap(), ProcessTerm::Nil);
        let view = simplify_view(&e);
        assert_eq!(view.vertex_count(), 0);
        assert_eq!(view.edge_count(), 0);
    }

    #[test]
    fn prefixes_share_one_channel_vertex() {
        let e = encoded("main = x(z).z<w> | x<y>");
        let x = e.name_table["x"];
        // Exactly one vertex stands for x, and both prefixes reach it.
        assert_eq!(e.graph.degree(x), 2);
        let t_in = vertex_with(&e, &labels::t_in());
        assert_eq!(e.graph.edge_label(t_in, x), Some(&labels::sync()));
        let outs: Vec<VertexId> = e
            .graph
            .vertices()
            .filter(|(_, l)| **l == labels::t_out())
            .map(|(id, _)| id)
            .collect();
        assert!(outs.iter().any(|&o| e.graph.has_edge(o, x)));
        e.validate().unwrap();
    }

    #[test]
    fn coinciding_channel_and_argument_collapse_to_arg_sync() {
        let e = encoded("main = x<x>");
        let out = vertex_with(&e, &labels::t_out());
        let x = e.name_table["x"];
        assert_eq!(e.graph.edge_label(out, x), Some(&labels::arg_sync()));
        // An input binder is always fresh, so x(x) keeps sync and arg.
        let e = encoded("main = x(x).0");
        let op = vertex_with(&e, &labels::t_in());
        let x = e.name_table["x"];
        assert_eq!(e.graph.edge_label(op, x), Some(&labels::sync()));
        e.validate().unwrap();
    }

    #[test]
    fn calls_point_at_arguments_through_indexed_ptrs() {
        let e = encoded("A(x) = x(y).A(y)\nmain = A(q)");
        let call = vertex_with(&e, &labels::t_call("A"));
        let pv = vertex_with(&e, &labels::ptr());
        assert_eq!(e.graph.edge_label(call, pv), Some(&labels::idx(0)));
        assert_eq!(e.graph.edge_label(pv, e.name_table["q"]), Some(&labels::ref_edge()));
        e.validate().unwrap();

        let (p, sys) = parsed("A(x) = x(y).A(y)\nmain = A(q)");
        assert_eq!(
            canonical_form(&decode(&e, &sys).unwrap()),
            canonical_form(&p)
        );
    }

    #[test]
    fn repeated_call_arguments_stay_simple() {
        let e = encoded("A(x, y) = x<y>\nmain = A(q, q)");
        let call = vertex_with(&e, &labels::t_call("A"));
        // Two distinct ptr vertices, both referring to the same name.
        let ptrs: Vec<VertexId> = e
            .graph
            .vertices()
            .filter(|(_, l)| **l == labels::ptr())
            .map(|(id, _)| id)
            .collect();
        assert_eq!(ptrs.len(), 2);
        for pv in &ptrs {
            assert!(e.graph.has_edge(call, *pv));
            assert!(e.graph.has_edge(*pv, e.name_table["q"]));
        }
        e.validate().unwrap();
    }

    #[test]
    fn vacuous_restriction_and_nil_choice_leave_no_trace() {
        // An unused restriction allocates no vertex, so new x.p ~ p holds
        // on the nose; a choice of nils is likewise invisible.
        let plain = encoded("main = a<b>");
        let wrapped = encoded("main = new x.a<b>");
        assert!(is_isomorphic(&plain.graph, &wrapped.graph));
        let nil_sum = encoded("main = a<b> | 0 + 0");
        assert!(is_isomorphic(&plain.graph, &nil_sum.graph));
    }

    /// Binder positions (input binders and restrictions) in a term.
    fn binder_positions(p: &ProcessTerm) -> usize {
        match p {
            ProcessTerm::Nil | ProcessTerm::Call { .. } => 0,
            ProcessTerm::Input { cont, .. } => 1 + binder_positions(cont),
            ProcessTerm::Output { cont, .. } => binder_positions(cont),
            ProcessTerm::Par(cs) | ProcessTerm::Sum(cs) => cs.iter().map(binder_positions).sum(),
            ProcessTerm::Restrict { body, .. } => 1 + binder_positions(body),
        }
    }

    #[test]
    fn name_vertex_count_matches_free_names_plus_binders() {
        for src in [
            "main = x<y>",
            "main = new a.(a<b> | a(c))",
            "main = x(y).0",
            "main = new dead.x<y>",
            "main = x(u).(u<u> | new c.c<u>)",
            "main = a(b).b<q> + a<a>",
        ] {
            let (p, sys) = parsed(src);
            let e = encode(&p, &sys);
            let names = e
                .graph
                .vertices()
                .filter(|(_, l)| labels::name_atom(l).is_some())
                .count();
            let expected = p.free_names().len() + binder_positions(&canonical_form(&p));
            assert_eq!(names, expected, "name vertices for {src}");
        }
    }

    #[test]
    fn decode_round_trips_the_paper_shapes() {
        for src in [
            "main = x(z).z<w> | x<y>",
            "main = x(z).z<w> | x<y> + x<y>",
            "main = new c.(c<a> | c(b).b<b>)",
            "main = x(y).(new d.(d<y> | d(e).e<x>))",
        ] {
            let (p, sys) = parsed(src);
            let e = encode(&p, &sys);
            e.validate().unwrap();
            assert_eq!(
                canonical_form(&decode(&e, &sys).unwrap()),
                canonical_form(&p),
                "round trip of {src}"
            );
        }
    }

    #[test]
    fn faults_identify_the_broken_invariant() {
        let e = encoded("main = x(z).z<w> | x<y>");

        // A second go vertex.
        let mut b = e.graph.to_builder();
        b.add_vertex(labels::go());
        let broken = EncodedProcess {
            graph: b.freeze(),
            root: e.root,
            name_table: e.name_table.clone(),
        };
        assert_eq!(broken.validate(), Err(EncodingFault::GoCount(2)));

        // A mid-pipeline label.
        let ts = vertex_with(&e, &labels::t_in());
        let mut b = e.graph.to_builder();
        b.relabel_vertex(ts, labels::gc());
        let broken = EncodedProcess {
            graph: b.freeze(),
            root: e.root,
            name_table: e.name_table.clone(),
        };
        assert!(matches!(
            broken.validate(),
            Err(EncodingFault::Shape { .. })
        ));

        // A prefix missing its argument edge.
        let op = vertex_with(&e, &labels::t_in());
        let binder = *e
            .graph
            .neighbors(op)
            .iter()
            .find(|&&n| e.graph.edge_label(op, n) == Some(&labels::arg()))
            .unwrap();
        let mut b = e.graph.to_builder();
        b.remove_edge(op, binder);
        b.remove_vertex(binder);
        let broken = EncodedProcess {
            graph: b.freeze(),
            root: e.root,
            name_table: e.name_table.clone(),
        };
        match broken.validate() {
            Err(EncodingFault::Shape { id, .. }) => assert_eq!(id, op),
            other => panic!("expected a shape fault, got {other:?}"),
        }

        // A floating vertex no structure reaches.
        let mut b = e.graph.to_builder();
        b.add_vertex(labels::t_p());
        let broken = EncodedProcess {
            graph: b.freeze(),
            root: e.root,
            name_table: e.name_table.clone(),
        };
        assert!(matches!(
            broken.validate(),
            Err(EncodingFault::StrayVertex { .. })
        ));
    }

    #[test]
    fn from_graph_recovers_root_and_names() {
        let e = encoded("main = x(z).z<w> | x<y>");
        let rebuilt = EncodedProcess::from_graph(e.graph.clone()).unwrap();
        assert_eq!(rebuilt.root, e.root);
        assert_eq!(rebuilt.name_table, e.name_table);
    }

    #[test]
    fn simplified_view_contracts_unary_structure() {
        let e = encoded("main = x(z).z<w> | x<y>");
        let view = simplify_view(&e);
        assert!(view.vertices().all(|(_, l)| *l != labels::t_s()));
        assert!(view.vertices().all(|(_, l)| *l != labels::go()));

        let e = encoded("A(x) = x(y).A(y)\nmain = A(q)");
        let view = simplify_view(&e);
        assert!(view.vertices().all(|(_, l)| *l != labels::ptr()));
        let call = view
            .vertices()
            .find(|(_, l)| **l == labels::t_call("A"))
            .map(|(id, _)| id)
            .unwrap();
        let q = view
            .vertices()
            .find(|(_, l)| **l == labels::free_name("q"))
            .map(|(id, _)| id)
            .unwrap();
        assert_eq!(view.edge_label(call, q), Some(&labels::idx(0)));
    }

    mod properties {
        use proptest::prelude::*;

        use super::super::super::pi::gen;
        use super::*;

        /// Rewrites of `p` that stay within its congruence class.
        fn congruent_variant(p: &ProcessTerm, law: u8) -> ProcessTerm {
            match law {
                // 0-unit introduction.
                0 => ProcessTerm::Par(vec![p.clone(), ProcessTerm::Nil]),
                // Commutativity at the top.
                1 => match p.clone() {
                    ProcessTerm::Par(mut cs) => {
                        cs.reverse();
                        ProcessTerm::Par(cs)
                    }
                    ProcessTerm::Sum(mut bs) => {
                        bs.reverse();
                        ProcessTerm::Sum(bs)
                    }
                    other => other,
                },
                // Associativity: regroup into a nested composition.
                2 => match p.clone() {
                    ProcessTerm::Par(mut cs) if cs.len() >= 3 => {
                        let rest = cs.split_off(1);
                        cs.push(ProcessTerm::Par(rest));
                        ProcessTerm::Par(cs)
                    }
                    other => other,
                },
                // Alpha conversion via wholesale binder renaming.
                3 => crate::pi::canon::uniquify(p, &mut Vec::new(), &mut 500),
                // Vacuous restriction introduction.
                _ => ProcessTerm::Restrict {
                    name: "zz_unused".into(),
                    body: Box::new(p.clone()),
                },
            }
        }

        proptest! {
            #[test]
            fn structural_laws_preserve_the_encoding(p in gen::process(), law in 0u8..5) {
                let sys = RecursiveSystem::new();
                let variant = congruent_variant(&p, law);
                prop_assert!(is_isomorphic(
                    &encode(&p, &sys).graph,
                    &encode(&variant, &sys).graph
                ));
            }

            #[test]
            fn every_encoding_validates(p in gen::process()) {
                let sys = RecursiveSystem::new();
                prop_assert!(encode(&p, &sys).validate().is_ok());
            }

            #[test]
            fn decode_inverts_encode_up_to_congruence(p in gen::process()) {
                let sys = RecursiveSystem::new();
                let e = encode(&p, &sys);
                let back = decode(&e, &sys).unwrap();
                prop_assert_eq!(canonical_form(&back), canonical_form(&p));
            }

            #[test]
            fn name_vertices_count_free_names_plus_binders(p in gen::process()) {
                let sys = RecursiveSystem::new();
                let e = encode(&p, &sys);
                let names = e
                    .graph
                    .vertices()
                    .filter(|(_, l)| labels::name_atom(l).is_some())
                    .count();
                prop_assert_eq!(
                    names,
                    p.free_names().len() + binder_positions(&canonical_form(&p))
                );
            }
        }
    }
}
