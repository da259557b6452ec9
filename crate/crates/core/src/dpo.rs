//! Double-pushout rewriting over term-labelled simple graphs.
//!
//! A [`Rule`] is a span L ← K → R with injective embeddings: vertices and
//! edges present only in L are deleted, those only in R are created, and
//! interface (K) vertices may carry a relabel pair that rewrites their label
//! in place. Matches are found in `Specialize` mode, so rule variables bind
//! to host subterms and the binding instantiates the right-hand side.
//!
//! A match is applicable when it satisfies the dangling condition (a deleted
//! vertex's host image has no edges beyond the matched ones) and keeps the
//! result simple (an added edge never lands on a host pair that already has
//! a surviving edge). Both are checked by [`find_matches`] and re-checked by
//! [`apply_at`].

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;
use thiserror::Error;

use crate::lgraph::{
    enumerate_monomorphisms, LabelledGraph, MatchMode, Morphism, VertexId,
};
use crate::term::{extend_specialize, Substitution, Term};

#[derive(Debug, Clone)]
struct RuleVertex {
    left: Option<Term>,
    right: Option<Term>,
}

#[derive(Debug, Clone)]
struct RuleEdge {
    a: usize,
    b: usize,
    left: Option<Term>,
    right: Option<Term>,
}

/// A rewrite rule. Construct through [`RuleBuilder`]; construction validates
/// the span shape and rejects right-hand variables that are neither bound on
/// the left nor declared fresh.
#[derive(Debug, Clone)]
pub struct Rule {
    name: String,
    vertices: Vec<RuleVertex>,
    edges: Vec<RuleEdge>,
    fresh_vars: BTreeSet<String>,
    left_graph: LabelledGraph,
    right_graph: LabelledGraph,
}

/// Assembly state for a [`Rule`]. Vertex handles are rule-local indices,
/// shared between the L and R sides; the same handle names the same vertex
/// in the pattern, the interface, and the replacement.
#[derive(Debug, Clone)]
pub struct RuleBuilder {
    name: String,
    vertices: Vec<RuleVertex>,
    edges: Vec<RuleEdge>,
    fresh_vars: BTreeSet<String>,
}

/// Errors detected when a rule is assembled.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {rule}: edge endpoint {endpoint} out of range")]
    BadEndpoint { rule: String, endpoint: usize },
    #[error("rule {rule}: loop edge on vertex {vertex}")]
    LoopEdge { rule: String, vertex: usize },
    #[error("rule {rule}: duplicate edge between {a} and {b}")]
    DuplicateEdge { rule: String, a: usize, b: usize },
    #[error("rule {rule}: edge {a} -- {b} present on a side its endpoint {endpoint} is absent from")]
    EdgeOffSide { rule: String, a: usize, b: usize, endpoint: usize },
    #[error("rule {rule}: vertex {vertex} is on neither side")]
    EmptyVertex { rule: String, vertex: usize },
    #[error("rule {rule}: right-hand variable {var} is neither bound on the left nor declared fresh")]
    UnboundRightVar { rule: String, var: String },
    #[error("rule {rule}: fresh variable {var} also occurs on the left")]
    FreshVarNotFresh { rule: String, var: String },
}

impl RuleBuilder {
    pub fn new(name: impl Into<String>) -> RuleBuilder {
        RuleBuilder {
            name: name.into(),
            vertices: Vec::new(),
            edges: Vec::new(),
            fresh_vars: BTreeSet::new(),
        }
    }

    /// Interface vertex whose label is untouched.
    pub fn keep(&mut self, label: Term) -> usize {
        self.push_vertex(Some(label.clone()), Some(label))
    }

    /// Interface vertex relabelled from `left` to `right` on application.
    pub fn relabel(&mut self, left: Term, right: Term) -> usize {
        self.push_vertex(Some(left), Some(right))
    }

    /// Vertex matched and deleted (present only in L).
    pub fn remove(&mut self, label: Term) -> usize {
        self.push_vertex(Some(label), None)
    }

    /// Vertex created on application (present only in R).
    pub fn add(&mut self, label: Term) -> usize {
        self.push_vertex(None, Some(label))
    }

    fn push_vertex(&mut self, left: Option<Term>, right: Option<Term>) -> usize {
        self.vertices.push(RuleVertex { left, right });
        self.vertices.len() - 1
    }

    /// Edge present on both sides with an unchanged label.
    pub fn edge_keep(&mut self, a: usize, b: usize, label: Term) {
        self.edges.push(RuleEdge { a, b, left: Some(label.clone()), right: Some(label) });
    }

    /// Edge matched and deleted.
    pub fn edge_remove(&mut self, a: usize, b: usize, label: Term) {
        self.edges.push(RuleEdge { a, b, left: Some(label), right: None });
    }

    /// Edge created on application.
    pub fn edge_add(&mut self, a: usize, b: usize, label: Term) {
        self.edges.push(RuleEdge { a, b, left: None, right: Some(label) });
    }

    /// Edge kept between interface vertices but with its label rewritten
    /// (expressed in the span as delete-and-recreate on the same pair).
    pub fn edge_relabel(&mut self, a: usize, b: usize, left: Term, right: Term) {
        self.edges.push(RuleEdge { a, b, left: Some(left), right: Some(right) });
    }

    /// Declare a right-hand variable that is instantiated with a variable
    /// fresh for the host graph at every application.
    pub fn fresh_var(&mut self, var: impl Into<String>) {
        self.fresh_vars.insert(var.into());
    }

    pub fn build(self) -> Result<Rule, RuleError> {
        let RuleBuilder { name, vertices, edges, fresh_vars } = self;
        let rule_name = name.clone();
        for (i, v) in vertices.iter().enumerate() {
            if v.left.is_none() && v.right.is_none() {
                return Err(RuleError::EmptyVertex { rule: rule_name, vertex: i });
            }
        }
        let mut seen_pairs = BTreeSet::new();
        for e in &edges {
            for endpoint in [e.a, e.b] {
                if endpoint >= vertices.len() {
                    return Err(RuleError::BadEndpoint { rule: rule_name, endpoint });
                }
            }
            if e.a == e.b {
                return Err(RuleError::LoopEdge { rule: rule_name, vertex: e.a });
            }
            if !seen_pairs.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(RuleError::DuplicateEdge { rule: rule_name, a: e.a, b: e.b });
            }
            for endpoint in [e.a, e.b] {
                if e.left.is_some() && vertices[endpoint].left.is_none()
                    || e.right.is_some() && vertices[endpoint].right.is_none()
                {
                    return Err(RuleError::EdgeOffSide {
                        rule: rule_name,
                        a: e.a,
                        b: e.b,
                        endpoint,
                    });
                }
            }
        }

        let mut left_vars: BTreeSet<&str> = BTreeSet::new();
        for label in vertices
            .iter()
            .filter_map(|v| v.left.as_ref())
            .chain(edges.iter().filter_map(|e| e.left.as_ref()))
        {
            left_vars.extend(label.vars());
        }
        for var in &fresh_vars {
            if left_vars.contains(var.as_str()) {
                return Err(RuleError::FreshVarNotFresh { rule: rule_name, var: var.clone() });
            }
        }
        for label in vertices
            .iter()
            .filter_map(|v| v.right.as_ref())
            .chain(edges.iter().filter_map(|e| e.right.as_ref()))
        {
            for var in label.vars() {
                if !left_vars.contains(var) && !fresh_vars.contains(var) {
                    return Err(RuleError::UnboundRightVar {
                        rule: rule_name,
                        var: var.to_string(),
                    });
                }
            }
        }

        let left_graph = side_graph(&vertices, &edges, |v| v.left.as_ref(), |e| e.left.as_ref());
        let right_graph =
            side_graph(&vertices, &edges, |v| v.right.as_ref(), |e| e.right.as_ref());
        Ok(Rule { name, vertices, edges, fresh_vars, left_graph, right_graph })
    }
}

fn side_graph(
    vertices: &[RuleVertex],
    edges: &[RuleEdge],
    vlabel: impl Fn(&RuleVertex) -> Option<&Term>,
    elabel: impl Fn(&RuleEdge) -> Option<&Term>,
) -> LabelledGraph {
    let vs: BTreeMap<VertexId, Term> = vertices
        .iter()
        .enumerate()
        .filter_map(|(i, v)| vlabel(v).map(|t| (VertexId(i as u32), t.clone())))
        .collect();
    let es: BTreeMap<(VertexId, VertexId), Term> = edges
        .iter()
        .filter_map(|e| {
            elabel(e).map(|t| {
                let (a, b) = (VertexId(e.a.min(e.b) as u32), VertexId(e.a.max(e.b) as u32));
                ((a, b), t.clone())
            })
        })
        .collect();
    LabelledGraph::from_parts(vs, es, vertices.len() as u32)
}

impl Rule {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The pattern side L. Vertex ids are rule-local indices, shared with
    /// [`Rule::right`] and with match morphism domains.
    pub fn left(&self) -> &LabelledGraph {
        &self.left_graph
    }

    /// The replacement side R.
    pub fn right(&self) -> &LabelledGraph {
        &self.right_graph
    }

    /// The interface K: everything present on both sides, with the left
    /// labels. Edges whose label changes ride the span as delete-and-add,
    /// so they are not part of K.
    pub fn context(&self) -> LabelledGraph {
        let vs: BTreeMap<VertexId, Term> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.left.is_some() && v.right.is_some())
            .map(|(i, v)| (VertexId(i as u32), v.left.clone().unwrap()))
            .collect();
        let es: BTreeMap<(VertexId, VertexId), Term> = self
            .edges
            .iter()
            .filter(|e| e.left.is_some() && e.left == e.right)
            .map(|e| {
                let (a, b) = (VertexId(e.a.min(e.b) as u32), VertexId(e.a.max(e.b) as u32));
                ((a, b), e.left.clone().unwrap())
            })
            .collect();
        LabelledGraph::from_parts(vs, es, self.vertices.len() as u32)
    }

    /// Interface vertices whose label changes, as (id, left, right).
    pub fn relabels(&self) -> Vec<(VertexId, &Term, &Term)> {
        self.vertices
            .iter()
            .enumerate()
            .filter_map(|(i, v)| match (&v.left, &v.right) {
                (Some(l), Some(r)) if l != r => Some((VertexId(i as u32), l, r)),
                _ => None,
            })
            .collect()
    }

    pub fn fresh_vars(&self) -> impl Iterator<Item = &str> {
        self.fresh_vars.iter().map(String::as_str)
    }

    fn deleted_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.left.is_some() && v.right.is_none())
            .map(|(i, _)| i)
    }

    /// Diagnostic rendering of the span: L, K, and R in the graph dump
    /// format, with relabel pairs shown as `id: ⟨left, right⟩`.
    pub fn dump(&self) -> String {
        let mut out = format!("rule {}\n", self.name);
        out.push_str("L:\n");
        out.push_str(&self.left_graph.dump());
        out.push_str("K:\n");
        let context = self.context();
        for (i, v) in self.vertices.iter().enumerate() {
            match (&v.left, &v.right) {
                (Some(l), Some(r)) if l != r => {
                    out.push_str(&format!("{i}: \u{27e8}{l}, {r}\u{27e9}\n"));
                }
                (Some(l), Some(_)) => out.push_str(&format!("{i}: {l}\n")),
                _ => {}
            }
        }
        for (a, b, label) in context.edges() {
            out.push_str(&format!("{a} -- {b}: {label}\n"));
        }
        out.push_str("R:\n");
        out.push_str(&self.right_graph.dump());
        if !self.fresh_vars.is_empty() {
            let names: Vec<&str> = self.fresh_vars.iter().map(String::as_str).collect();
            out.push_str(&format!("fresh: {}\n", names.join(" ")));
        }
        out
    }
}

/// One recorded rewrite: rule name, the graph it was applied to, the match,
/// and the resulting graph. Replaying the rule at the recorded match on the
/// recorded source reproduces the result exactly.
#[derive(Debug, Clone)]
pub struct DirectDerivation {
    pub rule: String,
    pub source: LabelledGraph,
    pub matched: Morphism,
    pub result: LabelledGraph,
}

/// Errors from applying a rule at a given match.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("match is stale: it no longer embeds the rule's pattern in the host")]
    StaleMatch,
    #[error("dangling condition violated at host vertex {0}")]
    Dangling(VertexId),
    #[error("result would not be simple: host edge {0} -- {1} collides with an added edge")]
    NotSimple(VertexId, VertexId),
}

/// Errors from [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("normalization exceeded its step budget of {budget}")]
    BudgetExceeded { budget: usize },
}

/// All applicable matches of the rule's pattern in `host`, sorted by their
/// host image (ascending vertex-id sequence). Besides embedding the pattern,
/// an applicable match satisfies the dangling condition and never directs an
/// added edge onto a host pair whose edge survives the rewrite.
pub fn find_matches(rule: &Rule, host: &LabelledGraph) -> Vec<Morphism> {
    let mut ms: Vec<Morphism> = enumerate_monomorphisms(rule.left(), host, MatchMode::Specialize)
        .into_iter()
        .filter(|m| applicability(rule, host, m).is_ok())
        .collect();
    ms.sort_by_key(|m| m.image_vertices());
    ms
}

fn applicability(rule: &Rule, host: &LabelledGraph, m: &Morphism) -> Result<(), ApplyError> {
    for v in rule.deleted_vertices() {
        let hv = m.image(VertexId(v as u32)).ok_or(ApplyError::StaleMatch)?;
        // Injectivity maps the pattern's edges at v onto distinct host edges
        // at hv, so equality of degrees says exactly that no foreign edge
        // would dangle.
        if host.degree(hv) != rule.left().degree(VertexId(v as u32)) {
            return Err(ApplyError::Dangling(hv));
        }
    }
    for e in &rule.edges {
        if e.left.is_none() && e.right.is_some() {
            let (Some(ha), Some(hb)) =
                (m.image(VertexId(e.a as u32)), m.image(VertexId(e.b as u32)))
            else {
                continue; // endpoint created by the rule; cannot collide
            };
            if host.has_edge(ha, hb) {
                return Err(ApplyError::NotSimple(ha, hb));
            }
        }
    }
    Ok(())
}

/// Verify the match still embeds L in `host` and rebuild its binding.
fn verify_match(
    rule: &Rule,
    host: &LabelledGraph,
    m: &Morphism,
) -> Result<BTreeMap<String, Term>, ApplyError> {
    let left = rule.left();
    let mut images = BTreeSet::new();
    let mut bind = BTreeMap::new();
    let mut trail = Vec::new();
    for (v, label) in left.vertices() {
        let hv = m.image(v).ok_or(ApplyError::StaleMatch)?;
        if !images.insert(hv) {
            return Err(ApplyError::StaleMatch);
        }
        let host_label = host.label(hv).ok_or(ApplyError::StaleMatch)?;
        if !extend_specialize(label, host_label, &mut bind, &mut trail) {
            return Err(ApplyError::StaleMatch);
        }
    }
    for (a, b, label) in left.edges() {
        let (ha, hb) = (m.image(a).unwrap(), m.image(b).unwrap());
        let host_label = host.edge_label(ha, hb).ok_or(ApplyError::StaleMatch)?;
        if !extend_specialize(label, host_label, &mut bind, &mut trail) {
            return Err(ApplyError::StaleMatch);
        }
    }
    Ok(bind)
}

/// Apply `rule` at the given match. Fails if the match is stale for this
/// host or violates the dangling or simplicity conditions.
pub fn apply_at(
    rule: &Rule,
    host: &LabelledGraph,
    m: &Morphism,
) -> Result<LabelledGraph, ApplyError> {
    let bind = verify_match(rule, host, m)?;
    applicability(rule, host, m)?;

    // Instantiation for right-hand labels: the match binding extended with a
    // host-fresh variable for every declared fresh variable.
    let mut sigma = Substitution::from_iter(bind);
    if !rule.fresh_vars.is_empty() {
        let mut used: BTreeSet<String> = BTreeSet::new();
        for (_, label) in host.vertices() {
            used.extend(label.vars().into_iter().map(String::from));
        }
        for (_, _, label) in host.edges() {
            used.extend(label.vars().into_iter().map(String::from));
        }
        let mut k = 0;
        for fresh in &rule.fresh_vars {
            let name = loop {
                let candidate = format!("_b{k}");
                k += 1;
                if !used.contains(&candidate) {
                    break candidate;
                }
            };
            used.insert(name.clone());
            sigma.insert(fresh.clone(), Term::Var(name));
        }
    }

    let mut out = host.to_builder();
    // Deletions: edges first, then vertices (whose incident edges are all
    // deleted edges, by the dangling condition).
    for e in &rule.edges {
        if e.left.is_some() && e.left != e.right {
            let (ha, hb) =
                (m.image(VertexId(e.a as u32)).unwrap(), m.image(VertexId(e.b as u32)).unwrap());
            out.remove_edge(ha, hb);
        }
    }
    for v in rule.deleted_vertices() {
        out.remove_vertex(m.image(VertexId(v as u32)).unwrap());
    }
    // Interface labels: uniformly σ(right); for untouched vertices this
    // coincides with the host label the match bound.
    let mut placed: BTreeMap<usize, VertexId> = BTreeMap::new();
    for (i, v) in rule.vertices.iter().enumerate() {
        match (&v.left, &v.right) {
            (Some(_), Some(r)) => {
                let hv = m.image(VertexId(i as u32)).unwrap();
                out.relabel_vertex(hv, sigma.apply(r));
                placed.insert(i, hv);
            }
            (None, Some(r)) => {
                let hv = out.add_vertex(sigma.apply(r));
                placed.insert(i, hv);
            }
            _ => {}
        }
    }
    for e in &rule.edges {
        if let Some(r) = &e.right {
            if e.left.as_ref() == Some(r) {
                continue; // kept edge, already in the host
            }
            out.add_edge(placed[&e.a], placed[&e.b], sigma.apply(r));
        }
    }
    Ok(out.freeze())
}

/// Apply every rule at every applicable match, one rewrite per derivation.
pub fn apply_all_once(rules: &[Rule], host: &LabelledGraph) -> Vec<DirectDerivation> {
    let mut out = Vec::new();
    for rule in rules {
        for m in find_matches(rule, host) {
            let result = apply_at(rule, host, &m).expect("found match must apply");
            out.push(DirectDerivation {
                rule: rule.name.clone(),
                source: host.clone(),
                matched: m,
                result,
            });
        }
    }
    out
}

/// How [`normalize`] picks among the applicable (rule, match) pairs.
pub enum MatchOrder<'a> {
    /// Lowest rule index, then lexicographically smallest match image.
    Deterministic,
    /// Uniformly random choice each step, for confluence testing.
    Random(&'a mut dyn RngCore),
}

/// Rewrite with the given rules until none applies, returning the normal
/// form and the number of rewrites performed. Exceeding `budget` rewrites
/// is an error.
pub fn normalize(
    rules: &[Rule],
    host: &LabelledGraph,
    budget: usize,
    mut order: MatchOrder,
) -> Result<(LabelledGraph, usize), NormalizeError> {
    let mut current = host.clone();
    let mut steps = 0usize;
    loop {
        let chosen = match &mut order {
            MatchOrder::Deterministic => rules.iter().find_map(|rule| {
                find_matches(rule, &current).into_iter().next().map(|m| (rule, m))
            }),
            MatchOrder::Random(rng) => {
                let mut all: Vec<(&Rule, Morphism)> = Vec::new();
                for rule in rules {
                    for m in find_matches(rule, &current) {
                        all.push((rule, m));
                    }
                }
                if all.is_empty() {
                    None
                } else {
                    let i = (rng.next_u64() % all.len() as u64) as usize;
                    Some(all.swap_remove(i))
                }
            }
        };
        let Some((rule, m)) = chosen else {
            return Ok((current, steps));
        };
        if steps == budget {
            return Err(NormalizeError::BudgetExceeded { budget });
        }
        current = apply_at(rule, &current, &m).expect("found match must apply");
        steps += 1;
    }
}
