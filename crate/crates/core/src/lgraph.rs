//! Simple undirected graphs whose vertices and edges carry first-order terms.
//!
//! Matching a pattern graph into a host graph threads one binding
//! environment through every vertex and edge label pair jointly, which is
//! equivalent to relating the two aggregate terms built from all labels at
//! once. Three relations are supported, selected by [`MatchMode`]:
//!
//! * `Specialize` — the host labels are instances of the pattern labels
//!   (pattern variables bind, host variables are frozen),
//! * `Iso` — labels are equal up to one bijective variable renaming,
//! * `Unify` — pattern and host labels are unifiable over a shared variable
//!   namespace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{
    extend_renaming, extend_specialize, extend_unify, resolve_binding, Substitution, Term,
};

/// Vertex identifier. Ids are stable for the lifetime of a graph and are
/// never recycled, including across the edit cycles of rewriting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An immutable term-labelled simple undirected graph. Assemble one with
/// [`GraphBuilder`]; rewriting edits go through [`LabelledGraph::to_builder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledGraph {
    vertices: BTreeMap<VertexId, Term>,
    edges: BTreeMap<(VertexId, VertexId), Term>,
    adjacency: BTreeMap<VertexId, Vec<VertexId>>,
    next_id: u32,
}

/// Mutable assembly state for a [`LabelledGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    vertices: BTreeMap<VertexId, Term>,
    edges: BTreeMap<(VertexId, VertexId), Term>,
    next_id: u32,
}

fn edge_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl GraphBuilder {
    pub fn new() -> GraphBuilder {
        GraphBuilder::default()
    }

    /// Add a vertex with a fresh id.
    pub fn add_vertex(&mut self, label: Term) -> VertexId {
        let id = VertexId(self.next_id);
        self.next_id += 1;
        self.vertices.insert(id, label);
        id
    }

    /// Add an edge between two existing vertices. Panics on loops, parallel
    /// edges, and absent endpoints: the callers construct graphs they have
    /// already checked, so a violation here is a bug.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, label: Term) {
        assert!(a != b, "loop edge on {a} rejected");
        assert!(self.vertices.contains_key(&a), "edge endpoint {a} absent");
        assert!(self.vertices.contains_key(&b), "edge endpoint {b} absent");
        let prev = self.edges.insert(edge_key(a, b), label);
        assert!(prev.is_none(), "parallel edge {a} -- {b} rejected");
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains_key(&edge_key(a, b))
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn label(&self, v: VertexId) -> Option<&Term> {
        self.vertices.get(&v)
    }

    /// Replace a vertex label in place.
    pub fn relabel_vertex(&mut self, v: VertexId, label: Term) {
        let slot = self.vertices.get_mut(&v).expect("relabel of absent vertex");
        *slot = label;
    }

    /// Remove an edge; panics if absent.
    pub fn remove_edge(&mut self, a: VertexId, b: VertexId) {
        let prev = self.edges.remove(&edge_key(a, b));
        assert!(prev.is_some(), "removal of absent edge {a} -- {b}");
    }

    /// Remove a vertex together with all incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) {
        let prev = self.vertices.remove(&v);
        assert!(prev.is_some(), "removal of absent vertex {v}");
        self.edges.retain(|&(a, b), _| a != v && b != v);
    }

    pub fn freeze(self) -> LabelledGraph {
        let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> =
            self.vertices.keys().map(|&v| (v, Vec::new())).collect();
        for &(a, b) in self.edges.keys() {
            adjacency.get_mut(&a).unwrap().push(b);
            adjacency.get_mut(&b).unwrap().push(a);
        }
        for nbrs in adjacency.values_mut() {
            nbrs.sort();
        }
        LabelledGraph {
            vertices: self.vertices,
            edges: self.edges,
            adjacency,
            next_id: self.next_id,
        }
    }
}

impl LabelledGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Reopen the graph for editing. Vertex ids and the fresh-id counter are
    /// preserved, so ids minted later never collide with past ones.
    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            next_id: self.next_id,
        }
    }

    /// Assemble a graph from explicit vertex ids. Edge keys must be in
    /// normalized (min, max) order over present vertices; `next_id` must
    /// exceed every id used.
    pub(crate) fn from_parts(
        vertices: BTreeMap<VertexId, Term>,
        edges: BTreeMap<(VertexId, VertexId), Term>,
        next_id: u32,
    ) -> LabelledGraph {
        for &(a, b) in edges.keys() {
            assert!(a < b, "edge key {a} -- {b} not normalized");
            assert!(
                vertices.contains_key(&a) && vertices.contains_key(&b),
                "edge {a} -- {b} on absent vertex"
            );
        }
        assert!(vertices.keys().all(|v| v.0 < next_id), "vertex id at or above next_id");
        GraphBuilder { vertices, edges, next_id }.freeze()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Term)> {
        self.vertices.iter().map(|(&v, t)| (v, t))
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, &Term)> {
        self.edges.iter().map(|(&(a, b), t)| (a, b, t))
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn label(&self, v: VertexId) -> Option<&Term> {
        self.vertices.get(&v)
    }

    pub fn edge_label(&self, a: VertexId, b: VertexId) -> Option<&Term> {
        self.edges.get(&edge_key(a, b))
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains_key(&edge_key(a, b))
    }

    /// Neighbours of a vertex in ascending id order.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    /// The connected component containing `v`, as an induced subgraph with
    /// the original vertex ids. Panics if `v` is absent.
    pub fn component_of(&self, v: VertexId) -> LabelledGraph {
        assert!(self.has_vertex(v), "component_of on absent vertex {v}");
        let mut seen = BTreeSet::new();
        let mut queue = vec![v];
        seen.insert(v);
        while let Some(u) = queue.pop() {
            for &w in self.neighbors(u) {
                if seen.insert(w) {
                    queue.push(w);
                }
            }
        }
        self.induced(&seen)
    }

    /// Induced subgraph on a vertex set, ids preserved.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> LabelledGraph {
        let vertices: BTreeMap<VertexId, Term> = self
            .vertices
            .iter()
            .filter(|(v, _)| keep.contains(v))
            .map(|(&v, t)| (v, t.clone()))
            .collect();
        let edges: BTreeMap<(VertexId, VertexId), Term> = self
            .edges
            .iter()
            .filter(|(&(a, b), _)| keep.contains(&a) && keep.contains(&b))
            .map(|(&k, t)| (k, t.clone()))
            .collect();
        let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> =
            vertices.keys().map(|&v| (v, Vec::new())).collect();
        for &(a, b) in edges.keys() {
            adjacency.get_mut(&a).unwrap().push(b);
            adjacency.get_mut(&b).unwrap().push(a);
        }
        for nbrs in adjacency.values_mut() {
            nbrs.sort();
        }
        LabelledGraph { vertices, edges, adjacency, next_id: self.next_id }
    }

    /// Plain-text dump: one `id: label` line per vertex, then one
    /// `a -- b: label` line per edge, both in sorted order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, t) in &self.vertices {
            out.push_str(&format!("{v}: {t}\n"));
        }
        for (&(a, b), t) in &self.edges {
            out.push_str(&format!("{a} -- {b}: {t}\n"));
        }
        out
    }

    /// Graphviz rendering of the graph itself (undirected).
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        out.push_str("  node [shape=ellipse fontname=\"monospace\"];\n");
        for (v, t) in &self.vertices {
            out.push_str(&format!("  n{v} [label=\"{}\"];\n", dot_escape(&t.to_string())));
        }
        for (&(a, b), t) in &self.edges {
            out.push_str(&format!(
                "  n{a} -- n{b} [label=\"{}\"];\n",
                dot_escape(&t.to_string())
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Cheap isomorphism invariant: the multiset of (label with every
    /// variable replaced by a wildcard, degree) pairs.
    pub fn skeleton(&self) -> BTreeMap<(String, usize), usize> {
        let mut out = BTreeMap::new();
        for (v, t) in &self.vertices {
            *out.entry((wildcard(t), self.degree(*v))).or_insert(0usize) += 1;
        }
        out
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn wildcard(t: &Term) -> String {
    match t {
        Term::Var(_) => "_".to_string(),
        Term::Fun(f, args) => {
            if args.is_empty() {
                f.clone()
            } else {
                let inner: Vec<String> = args.iter().map(wildcard).collect();
                format!("{f}({})", inner.join(","))
            }
        }
    }
}

/// How pattern labels are related to host labels during matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Host labels are instances of pattern labels; host variables frozen.
    Specialize,
    /// Labels equal up to a single bijective variable renaming.
    Iso,
    /// Labels unifiable over one shared variable namespace.
    Unify,
}

/// An injective structure-preserving map from a pattern graph into a host
/// graph, together with the label binding that makes every label pair fit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub binding: Substitution,
}

impl Morphism {
    pub fn image(&self, v: VertexId) -> Option<VertexId> {
        self.vertex_map.get(&v).copied()
    }

    /// Host vertex ids hit by the morphism, ascending.
    pub fn image_vertices(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self.vertex_map.values().copied().collect();
        out.sort();
        out
    }
}

enum BindState {
    Specialize { bind: BTreeMap<String, Term>, trail: Vec<String> },
    Iso { fwd: BTreeMap<String, String>, rev: BTreeMap<String, String>, trail: Vec<String> },
    Unify { bind: BTreeMap<String, Term>, trail: Vec<String> },
}

impl BindState {
    fn new(mode: MatchMode) -> BindState {
        match mode {
            MatchMode::Specialize => {
                BindState::Specialize { bind: BTreeMap::new(), trail: Vec::new() }
            }
            MatchMode::Iso => BindState::Iso {
                fwd: BTreeMap::new(),
                rev: BTreeMap::new(),
                trail: Vec::new(),
            },
            MatchMode::Unify => BindState::Unify { bind: BTreeMap::new(), trail: Vec::new() },
        }
    }

    fn checkpoint(&self) -> usize {
        match self {
            BindState::Specialize { trail, .. }
            | BindState::Iso { trail, .. }
            | BindState::Unify { trail, .. } => trail.len(),
        }
    }

    fn rollback(&mut self, mark: usize) {
        match self {
            BindState::Specialize { bind, trail } | BindState::Unify { bind, trail } => {
                while trail.len() > mark {
                    let v = trail.pop().unwrap();
                    bind.remove(&v);
                }
            }
            BindState::Iso { fwd, rev, trail } => {
                while trail.len() > mark {
                    let x = trail.pop().unwrap();
                    if let Some(y) = fwd.remove(&x) {
                        rev.remove(&y);
                    }
                }
            }
        }
    }

    fn extend(&mut self, pattern: &Term, host: &Term) -> bool {
        match self {
            BindState::Specialize { bind, trail } => {
                extend_specialize(pattern, host, bind, trail)
            }
            BindState::Iso { fwd, rev, trail } => extend_renaming(pattern, host, fwd, rev, trail),
            BindState::Unify { bind, trail } => extend_unify(pattern, host, bind, trail),
        }
    }

    fn finish(&self) -> Substitution {
        match self {
            BindState::Specialize { bind, .. } => {
                Substitution::from_iter(bind.iter().map(|(v, t)| (v.clone(), t.clone())))
            }
            BindState::Iso { fwd, .. } => Substitution::from_iter(
                fwd.iter().map(|(v, w)| (v.clone(), Term::Var(w.clone()))),
            ),
            BindState::Unify { bind, .. } => resolve_binding(bind),
        }
    }
}

struct MonoSearch<'a> {
    pattern: &'a LabelledGraph,
    host: &'a LabelledGraph,
    mode: MatchMode,
    map: BTreeMap<VertexId, VertexId>,
    used: BTreeSet<VertexId>,
    bind: BindState,
    found: Vec<Morphism>,
    limit: Option<usize>,
}

impl<'a> MonoSearch<'a> {
    /// Next pattern vertex to assign: the one with the most already-mapped
    /// neighbours, breaking ties by higher degree, then lower id. Anchoring
    /// to the mapped part keeps the candidate sets small.
    fn select_next(&self) -> Option<VertexId> {
        self.pattern
            .vertices()
            .map(|(v, _)| v)
            .filter(|v| !self.map.contains_key(v))
            .max_by_key(|&v| {
                let mapped_nbrs =
                    self.pattern.neighbors(v).iter().filter(|n| self.map.contains_key(n)).count();
                (mapped_nbrs, self.pattern.degree(v), std::cmp::Reverse(v))
            })
    }

    fn candidates(&self, p: VertexId) -> Vec<VertexId> {
        let anchored = self
            .pattern
            .neighbors(p)
            .iter()
            .find_map(|n| self.map.get(n).copied());
        match anchored {
            Some(h) => self.host.neighbors(h).to_vec(),
            None => self.host.vertices().map(|(v, _)| v).collect(),
        }
    }

    fn degree_ok(&self, p: VertexId, h: VertexId) -> bool {
        match self.mode {
            MatchMode::Iso => self.pattern.degree(p) == self.host.degree(h),
            _ => self.pattern.degree(p) <= self.host.degree(h),
        }
    }

    fn search(&mut self) {
        if let Some(limit) = self.limit {
            if self.found.len() >= limit {
                return;
            }
        }
        let p = match self.select_next() {
            Some(p) => p,
            None => {
                self.found.push(Morphism {
                    vertex_map: self.map.clone(),
                    binding: self.bind.finish(),
                });
                return;
            }
        };
        for h in self.candidates(p) {
            if self.used.contains(&h) || !self.degree_ok(p, h) {
                continue;
            }
            let mark = self.bind.checkpoint();
            let mut ok = self
                .bind
                .extend(self.pattern.label(p).unwrap(), self.host.label(h).unwrap());
            if ok {
                for &n in self.pattern.neighbors(p) {
                    let Some(&hn) = self.map.get(&n) else { continue };
                    match self.host.edge_label(h, hn) {
                        Some(host_label) => {
                            let pat_label = self.pattern.edge_label(p, n).unwrap();
                            if !self.bind.extend(pat_label, host_label) {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok {
                self.map.insert(p, h);
                self.used.insert(h);
                self.search();
                self.map.remove(&p);
                self.used.remove(&h);
            }
            self.bind.rollback(mark);
        }
    }
}

/// Enumerate every injective structure-preserving morphism from `pattern`
/// into `host` whose labels fit jointly under `mode`. In `Iso` mode the
/// graphs must have equal vertex and edge counts, so every result is a full
/// isomorphism. Deterministic order.
pub fn enumerate_monomorphisms(
    pattern: &LabelledGraph,
    host: &LabelledGraph,
    mode: MatchMode,
) -> Vec<Morphism> {
    enumerate_with_limit(pattern, host, mode, None)
}

fn enumerate_with_limit(
    pattern: &LabelledGraph,
    host: &LabelledGraph,
    mode: MatchMode,
    limit: Option<usize>,
) -> Vec<Morphism> {
    if pattern.vertex_count() > host.vertex_count() || pattern.edge_count() > host.edge_count() {
        return Vec::new();
    }
    if mode == MatchMode::Iso
        && (pattern.vertex_count() != host.vertex_count()
            || pattern.edge_count() != host.edge_count())
    {
        return Vec::new();
    }
    let mut s = MonoSearch {
        pattern,
        host,
        mode,
        map: BTreeMap::new(),
        used: BTreeSet::new(),
        bind: BindState::new(mode),
        found: Vec::new(),
        limit,
    };
    s.search();
    s.found
}

/// Whether two graphs are isomorphic: a vertex bijection preserving edges
/// with all labels equal up to one shared bijective variable renaming.
pub fn is_isomorphic(a: &LabelledGraph, b: &LabelledGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    if a.skeleton() != b.skeleton() {
        return false;
    }
    !enumerate_with_limit(a, b, MatchMode::Iso, Some(1)).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    /// Hand-built encoding shape of `x<y> | x<y>` (two unary sums over the
    /// shared names x and y), used as a host for matching tests.
    fn two_outputs_host() -> LabelledGraph {
        let mut g = GraphBuilder::new();
        let go = g.add_vertex(t("go"));
        let tp = g.add_vertex(t("t(p)"));
        let vx = g.add_vertex(t("v(x)"));
        let vy = g.add_vertex(t("v(y)"));
        g.add_edge(go, tp, t("c"));
        for _ in 0..2 {
            let ts = g.add_vertex(t("t(s)"));
            let out = g.add_vertex(t("t(out)"));
            let cont = g.add_vertex(t("t(p)"));
            g.add_edge(tp, ts, t("c"));
            g.add_edge(ts, out, t("c"));
            g.add_edge(out, cont, t("c"));
            g.add_edge(out, vx, t("sync"));
            g.add_edge(out, vy, t("arg"));
        }
        g.freeze()
    }

    #[test]
    fn single_name_pattern_finds_both_names() {
        let mut p = GraphBuilder::new();
        p.add_vertex(t("v(_X)"));
        let pattern = p.freeze();
        let host = two_outputs_host();
        let ms = enumerate_monomorphisms(&pattern, &host, MatchMode::Specialize);
        assert_eq!(ms.len(), 2);
        let mut bound: Vec<String> =
            ms.iter().map(|m| m.binding.get("_X").unwrap().to_string()).collect();
        bound.sort();
        assert_eq!(bound, ["x", "y"]);
    }

    #[test]
    fn shared_variable_forces_equal_labels() {
        let mut p = GraphBuilder::new();
        let a = p.add_vertex(t("v(_X)"));
        let b = p.add_vertex(t("v(_X)"));
        p.add_edge(a, b, t("c"));
        let pattern = p.freeze();

        let mut h = GraphBuilder::new();
        let va = h.add_vertex(t("v(a)"));
        let vb = h.add_vertex(t("v(b)"));
        h.add_edge(va, vb, t("c"));
        let host = h.freeze();

        assert!(enumerate_monomorphisms(&pattern, &host, MatchMode::Specialize).is_empty());

        // With distinct variables, both orientations match.
        let mut p2 = GraphBuilder::new();
        let a2 = p2.add_vertex(t("v(_X)"));
        let b2 = p2.add_vertex(t("v(_Y)"));
        p2.add_edge(a2, b2, t("c"));
        let pattern2 = p2.freeze();
        assert_eq!(enumerate_monomorphisms(&pattern2, &host, MatchMode::Specialize).len(), 2);
    }

    fn triangle() -> LabelledGraph {
        let mut g = GraphBuilder::new();
        let a = g.add_vertex(t("c"));
        let b = g.add_vertex(t("c"));
        let c = g.add_vertex(t("c"));
        g.add_edge(a, b, t("c"));
        g.add_edge(b, c, t("c"));
        g.add_edge(a, c, t("c"));
        g.freeze()
    }

    #[test]
    fn triangle_automorphisms() {
        let ms = enumerate_monomorphisms(&triangle(), &triangle(), MatchMode::Iso);
        assert_eq!(ms.len(), 6);
    }

    #[test]
    fn unify_mode_binds_host_variables_too() {
        let mut p = GraphBuilder::new();
        p.add_vertex(t("v(_X)"));
        let pattern = p.freeze();
        let mut h = GraphBuilder::new();
        h.add_vertex(t("v(_H)"));
        let host = h.freeze();
        let ms = enumerate_monomorphisms(&pattern, &host, MatchMode::Unify);
        assert_eq!(ms.len(), 1);
        // mgu of v(_X) and v(_H) binds one side to the other.
        assert_eq!(ms[0].binding.len(), 1);

        // Specialize also works (pattern var onto frozen host var) …
        assert_eq!(enumerate_monomorphisms(&pattern, &host, MatchMode::Specialize).len(), 1);
        // … but a function pattern cannot specialize onto a host variable,
        // while unification still can.
        let mut p2 = GraphBuilder::new();
        p2.add_vertex(t("v(g(a))"));
        let pattern2 = p2.freeze();
        assert!(enumerate_monomorphisms(&pattern2, &host, MatchMode::Specialize).is_empty());
        assert_eq!(enumerate_monomorphisms(&pattern2, &host, MatchMode::Unify).len(), 1);
    }

    #[test]
    fn isomorphism_respects_variable_identity() {
        // v(_A)-v(_A) is isomorphic to v(_B)-v(_B) but not to v(_B)-v(_C).
        fn pair(l1: &str, l2: &str) -> LabelledGraph {
            let mut g = GraphBuilder::new();
            let a = g.add_vertex(t(l1));
            let b = g.add_vertex(t(l2));
            g.add_edge(a, b, t("c"));
            g.freeze()
        }
        assert!(is_isomorphic(&pair("v(_A)", "v(_A)"), &pair("v(_B)", "v(_B)")));
        assert!(!is_isomorphic(&pair("v(_A)", "v(_A)"), &pair("v(_B)", "v(_C)")));
        assert!(!is_isomorphic(&pair("v(a)", "v(_A)"), &pair("v(b)", "v(_B)")));
        assert!(is_isomorphic(&pair("v(a)", "v(_A)"), &pair("v(_B)", "v(a)")));
    }

    #[test]
    fn component_extraction_preserves_ids() {
        let mut g = GraphBuilder::new();
        let a = g.add_vertex(t("a"));
        let b = g.add_vertex(t("b"));
        let c = g.add_vertex(t("gc"));
        g.add_edge(a, b, t("c"));
        let g = g.freeze();
        let comp = g.component_of(a);
        assert_eq!(comp.vertex_count(), 2);
        assert!(comp.has_vertex(a) && comp.has_vertex(b) && !comp.has_vertex(c));
        assert_eq!(comp.edge_count(), 1);
        // Fresh ids minted after extraction do not collide with dropped ones.
        let mut bld = comp.to_builder();
        let fresh = bld.add_vertex(t("d"));
        assert!(fresh != c && fresh.0 > c.0);
    }

    #[test]
    fn dump_is_sorted_and_stable() {
        let host = two_outputs_host();
        let dump = host.dump();
        let expected = "\
0: go\n1: t(p)\n2: v(x)\n3: v(y)\n4: t(s)\n5: t(out)\n6: t(p)\n7: t(s)\n8: t(out)\n9: t(p)\n\
0 -- 1: c\n1 -- 4: c\n1 -- 7: c\n2 -- 5: sync\n2 -- 8: sync\n3 -- 5: arg\n3 -- 8: arg\n\
4 -- 5: c\n5 -- 6: c\n7 -- 8: c\n8 -- 9: c\n";
        assert_eq!(dump, expected);
    }

    // -----------------------------------------------------------------
    // Brute-force cross-check: enumerate all injective vertex maps and
    // test label compatibility through the aggregate terms, then compare
    // against the backtracking search.
    // -----------------------------------------------------------------

    /// Aggregate the labels of a graph (or of a morphism image) into one
    /// term, pairing pattern positions with host positions.
    fn aggregates(
        pattern: &LabelledGraph,
        host: &LabelledGraph,
        map: &BTreeMap<VertexId, VertexId>,
    ) -> (Term, Term) {
        let mut pat_args = Vec::new();
        let mut host_args = Vec::new();
        for (v, label) in pattern.vertices() {
            pat_args.push(label.clone());
            host_args.push(host.label(map[&v]).unwrap().clone());
        }
        for (a, b, label) in pattern.edges() {
            pat_args.push(label.clone());
            host_args.push(host.edge_label(map[&a], map[&b]).unwrap().clone());
        }
        (Term::fun("assoc", pat_args), Term::fun("assoc", host_args))
    }

    fn brute_force_maps(
        pattern: &LabelledGraph,
        host: &LabelledGraph,
    ) -> Vec<BTreeMap<VertexId, VertexId>> {
        let pat: Vec<VertexId> = pattern.vertices().map(|(v, _)| v).collect();
        let hosts: Vec<VertexId> = host.vertices().map(|(v, _)| v).collect();
        let mut out = Vec::new();
        let mut current = BTreeMap::new();
        fn rec(
            i: usize,
            pat: &[VertexId],
            hosts: &[VertexId],
            pattern: &LabelledGraph,
            host: &LabelledGraph,
            current: &mut BTreeMap<VertexId, VertexId>,
            out: &mut Vec<BTreeMap<VertexId, VertexId>>,
        ) {
            if i == pat.len() {
                // Structure check: every pattern edge lands on a host edge.
                let ok = pattern
                    .edges()
                    .all(|(a, b, _)| host.has_edge(current[&a], current[&b]));
                if ok {
                    out.push(current.clone());
                }
                return;
            }
            for &h in hosts {
                if current.values().any(|&u| u == h) {
                    continue;
                }
                current.insert(pat[i], h);
                rec(i + 1, pat, hosts, pattern, host, current, out);
                current.remove(&pat[i]);
            }
        }
        rec(0, &pat, &hosts, pattern, host, &mut current, &mut out);
        out
    }

    fn check_against_brute_force(pattern: &LabelledGraph, host: &LabelledGraph) {
        use crate::term::{match_pattern, term_isomorphic, unify};
        for mode in [MatchMode::Specialize, MatchMode::Iso, MatchMode::Unify] {
            if mode == MatchMode::Iso
                && (pattern.vertex_count() != host.vertex_count()
                    || pattern.edge_count() != host.edge_count())
            {
                continue;
            }
            let expected: Vec<BTreeMap<VertexId, VertexId>> = brute_force_maps(pattern, host)
                .into_iter()
                .filter(|map| {
                    let (p, h) = aggregates(pattern, host, map);
                    match mode {
                        MatchMode::Specialize => match_pattern(&p, &h).is_some(),
                        MatchMode::Iso => term_isomorphic(&p, &h),
                        MatchMode::Unify => unify(&p, &h).is_some(),
                    }
                })
                .collect();
            let mut got: Vec<BTreeMap<VertexId, VertexId>> =
                enumerate_monomorphisms(pattern, host, mode)
                    .into_iter()
                    .map(|m| m.vertex_map)
                    .collect();
            let mut expected = expected;
            expected.sort();
            got.sort();
            assert_eq!(got, expected, "mode {mode:?} disagrees with brute force");
        }
    }

    #[test]
    fn search_agrees_with_brute_force_on_fixtures() {
        let host = two_outputs_host();
        let mut p1 = GraphBuilder::new();
        p1.add_vertex(t("v(_X)"));
        check_against_brute_force(&p1.freeze(), &host);

        let mut p2 = GraphBuilder::new();
        let s = p2.add_vertex(t("t(s)"));
        let o = p2.add_vertex(t("t(out)"));
        let x = p2.add_vertex(t("v(_X)"));
        let y = p2.add_vertex(t("v(_Y)"));
        p2.add_edge(s, o, t("c"));
        p2.add_edge(o, x, t("sync"));
        p2.add_edge(o, y, t("arg"));
        check_against_brute_force(&p2.freeze(), &host);

        check_against_brute_force(&triangle(), &triangle());
        check_against_brute_force(&host, &host);
    }

    #[test]
    fn search_agrees_with_brute_force_on_random_graphs() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let labels = ["a", "b", "v(_X)", "v(_Y)", "f(_X)", "c"];
        let mut rng = StdRng::seed_from_u64(7);
        for round in 0..120 {
            let mut h = GraphBuilder::new();
            let n = rng.random_range(1..=6);
            let hv: Vec<VertexId> = (0..n)
                .map(|_| h.add_vertex(t(labels[rng.random_range(0..labels.len())])))
                .collect();
            for i in 0..hv.len() {
                for j in i + 1..hv.len() {
                    if rng.random_bool(0.4) {
                        h.add_edge(hv[i], hv[j], t(labels[rng.random_range(0..labels.len())]));
                    }
                }
            }
            let host = h.freeze();

            let mut p = GraphBuilder::new();
            let pn = rng.random_range(1..=3.min(n));
            let pv: Vec<VertexId> = (0..pn)
                .map(|_| p.add_vertex(t(labels[rng.random_range(0..labels.len())])))
                .collect();
            for i in 0..pv.len() {
                for j in i + 1..pv.len() {
                    if rng.random_bool(0.5) {
                        p.add_edge(pv[i], pv[j], t(labels[rng.random_range(0..labels.len())]));
                    }
                }
            }
            let pattern = p.freeze();
            check_against_brute_force(&pattern, &host);
            let _ = round;
        }
    }
}
