//! Execution-space exploration: run the full reduction pipeline per
//! transition and collect the reachable states up to isomorphism.
//!
//! One transition of an encoded process is a complete pipeline: apply a
//! single communication or unfolding rule, propagate the resulting merge
//! markers to a normal form, garbage-collect the discarded branches, and
//! prune to the root's connected component. Exploration runs this
//! breadth-first from the initial encoding, comparing every successor
//! against the known states by label-aware isomorphism (with a cheap
//! label/degree-multiset prefilter), so each class of congruent processes
//! appears exactly once and repeated behaviour closes into cycles.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dpo::{apply_all_once, normalize, MatchOrder, NormalizeError};
use crate::encode::{decode, encode, simplify_view, EncodedProcess, EncodingFault};
use crate::labels;
use crate::lgraph::{dot_escape, is_isomorphic, LabelledGraph};
use crate::pi::{canonical_form, ProcessTerm, RecursiveSystem, StepKind};
use crate::rules::{com_rules, gc_rules, merge_rules, unfold_rules, RuleSet, RuleSetKind};

/// The rule sets driving one transition pipeline: communication and
/// unfolding generate successors, merge and garbage collection settle them.
pub struct Strategies {
    pub com: RuleSet,
    pub merge: RuleSet,
    pub gc: RuleSet,
    pub unfolds: Vec<RuleSet>,
}

impl Strategies {
    pub fn for_system(sys: &RecursiveSystem) -> Self {
        Strategies {
            com: com_rules(),
            merge: merge_rules(),
            gc: gc_rules(),
            unfolds: unfold_rules(sys),
        }
    }
}

/// The intermediate graphs of one transition pipeline, in order: the source
/// encoding, the graph right after the communication or unfolding step
/// (merge markers and garbage labels present), the merge normal form
/// (garbage still present), and the garbage-collection normal form before
/// pruning.
#[derive(Debug, Clone)]
pub struct PipelineChain {
    pub source: LabelledGraph,
    pub stepped: LabelledGraph,
    pub merged: LabelledGraph,
    pub collected: LabelledGraph,
}

/// One completed transition pipeline.
#[derive(Debug, Clone)]
pub struct PipelineTrace {
    pub kind: StepKind,
    /// Name of the rule whose match started the pipeline.
    pub rule: String,
    pub chain: PipelineChain,
    /// The settled successor: the root component, revalidated.
    pub result: EncodedProcess,
    /// Canonical form of the decoded successor.
    pub term: ProcessTerm,
    /// Normalization steps consumed settling this transition.
    pub steps: usize,
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("rewrite budget of {budget} steps exhausted")]
    Budget { budget: usize },
    /// A settled successor failed to validate or decode — the pipeline
    /// chain that produced it is attached for inspection.
    #[error("transition via {rule} produced a broken encoding: {fault}")]
    Validation {
        rule: String,
        fault: EncodingFault,
        chain: Box<PipelineChain>,
    },
}

fn settle(
    source: &LabelledGraph,
    kind: StepKind,
    rule: String,
    stepped: LabelledGraph,
    sys: &RecursiveSystem,
    strategies: &Strategies,
    budget: usize,
    mut rng: Option<&mut StdRng>,
) -> Result<PipelineTrace, StepError> {
    let budget_err = |_: NormalizeError| StepError::Budget { budget };
    let merge_order = match rng.as_deref_mut() {
        Some(r) => MatchOrder::Random(r),
        None => MatchOrder::Deterministic,
    };
    let (merged, merge_steps) =
        normalize(&strategies.merge.rules, &stepped, budget, merge_order).map_err(budget_err)?;
    let gc_order = match rng.as_deref_mut() {
        Some(r) => MatchOrder::Random(r),
        None => MatchOrder::Deterministic,
    };
    let (collected, gc_steps) =
        normalize(&strategies.gc.rules, &merged, budget - merge_steps, gc_order)
            .map_err(budget_err)?;

    let chain = PipelineChain {
        source: source.clone(),
        stepped,
        merged,
        collected,
    };
    let broken = |fault: EncodingFault| StepError::Validation {
        rule: rule.clone(),
        fault,
        chain: Box::new(chain.clone()),
    };

    let go = chain
        .collected
        .vertices()
        .find(|(_, l)| **l == labels::go())
        .map(|(id, _)| id)
        .ok_or_else(|| broken(EncodingFault::GoCount(0)))?;
    let result = EncodedProcess::from_graph(chain.collected.component_of(go)).map_err(broken)?;
    let term = canonical_form(&decode(&result, sys).map_err(broken)?);
    Ok(PipelineTrace {
        kind,
        rule,
        chain,
        result,
        term,
        steps: merge_steps + gc_steps,
    })
}

/// Run every enabled communication and unfolding step on `state` and settle
/// each one into a validated successor. `budget` bounds the total
/// normalization steps across all returned pipelines. Successors are not
/// deduplicated here.
pub fn step_traced(
    state: &EncodedProcess,
    sys: &RecursiveSystem,
    strategies: &Strategies,
    budget: usize,
) -> Result<Vec<PipelineTrace>, StepError> {
    step_traced_seeded(state, sys, strategies, budget, None)
}

/// [`step_traced`] with an optional seed: when given, the settling
/// normalizations pick their matches in seeded-random order instead of the
/// deterministic one. Confluence makes the settled successors isomorphic
/// either way; the seed exists to let tests and users check exactly that.
pub fn step_traced_seeded(
    state: &EncodedProcess,
    sys: &RecursiveSystem,
    strategies: &Strategies,
    budget: usize,
    seed: Option<u64>,
) -> Result<Vec<PipelineTrace>, StepError> {
    let mut rng = seed.map(StdRng::seed_from_u64);
    let mut out = Vec::new();
    let mut used = 0usize;
    let sets = std::iter::once(&strategies.com).chain(strategies.unfolds.iter());
    for set in sets {
        let kind = match &set.kind {
            RuleSetKind::Com => StepKind::Com,
            RuleSetKind::Unfold { equation } => StepKind::Unfold(equation.clone()),
            other => unreachable!("{other:?} is not a transition strategy"),
        };
        for derivation in apply_all_once(&set.rules, &state.graph) {
            let trace = settle(
                &state.graph,
                kind.clone(),
                derivation.rule,
                derivation.result,
                sys,
                strategies,
                budget - used,
                rng.as_mut(),
            )?;
            used += trace.steps;
            out.push(trace);
        }
    }
    Ok(out)
}

/// The successor list of `state` before deduplication: one settled encoding
/// per enabled communication or unfolding match.
pub fn step_pipeline(
    state: &EncodedProcess,
    sys: &RecursiveSystem,
    strategies: &Strategies,
    budget: usize,
) -> Result<Vec<(StepKind, EncodedProcess)>, StepError> {
    Ok(step_traced(state, sys, strategies, budget)?
        .into_iter()
        .map(|t| (t.kind, t.result))
        .collect())
}

/// Exploration bounds. Recursive definitions make the space potentially
/// infinite, so every run is bounded; hitting a bound is recorded on the
/// result, not an error.
#[derive(Debug, Clone)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_depth: usize,
    /// Total normalization steps across the whole exploration.
    pub step_budget: usize,
    /// Worker threads settling one breadth-first level's transitions.
    /// Results are consumed in frontier order, so the explored space does
    /// not depend on this value.
    pub jobs: usize,
    /// Randomize the settling match order, deriving one stream per state
    /// from this seed. The space keeps its shape (settling is confluent up
    /// to isomorphism); state representatives may differ.
    pub seed: Option<u64>,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_states: 10_000,
            max_depth: 1_000,
            step_budget: 1_000_000,
            jobs: 1,
            seed: None,
        }
    }
}

/// Which exploration bound cut the run short.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    States,
    Depth,
    Steps,
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Limit::States => "state limit",
            Limit::Depth => "depth limit",
            Limit::Steps => "step budget",
        })
    }
}

/// One state of an execution space: a settled encoding and its decoded
/// canonical form. Ids are dense, in breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct SpaceState {
    pub id: usize,
    pub encoded: EncodedProcess,
    pub term: ProcessTerm,
}

/// One transition of an execution space. A communication edge stands for a
/// whole settled pipeline; an unfolding edge names the definition it
/// expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub kind: StepKind,
}

/// The reachable states of a process up to isomorphism, with one edge per
/// distinct (source, target, kind) transition.
#[derive(Debug, Clone)]
pub struct ExecutionSpace {
    pub states: Vec<SpaceState>,
    pub edges: Vec<Transition>,
    pub initial: usize,
    /// Set when exploration stopped at a bound, naming the bound that fired.
    pub truncated: Option<Limit>,
}

type Skeleton = BTreeMap<(String, usize), usize>;

struct StateStore {
    states: Vec<SpaceState>,
    by_skeleton: HashMap<Skeleton, Vec<usize>>,
}

impl StateStore {
    fn new() -> Self {
        StateStore {
            states: Vec::new(),
            by_skeleton: HashMap::new(),
        }
    }

    fn find(&self, graph: &LabelledGraph) -> Option<usize> {
        let bucket = self.by_skeleton.get(&graph.skeleton())?;
        bucket
            .iter()
            .copied()
            .find(|&id| is_isomorphic(graph, &self.states[id].encoded.graph))
    }

    fn insert(&mut self, encoded: EncodedProcess, term: ProcessTerm) -> usize {
        let id = self.states.len();
        self.by_skeleton
            .entry(encoded.graph.skeleton())
            .or_default()
            .push(id);
        self.states.push(SpaceState { id, encoded, term });
        id
    }
}

/// Settle every frontier state's transitions, in frontier order. With more
/// than one worker the frontier is split into contiguous chunks settled
/// concurrently; the caller still sees results in frontier order.
fn expand_level(
    frontier: &[usize],
    store: &StateStore,
    sys: &RecursiveSystem,
    strategies: &Strategies,
    budget: usize,
    jobs: usize,
    seed: Option<u64>,
) -> Vec<Result<Vec<PipelineTrace>, StepError>> {
    // One seed stream per state, derived from its id: worker count and
    // level composition cannot change what any state's settling sees.
    let expand = |id: &usize| {
        let state_seed = seed.map(|s| s ^ (*id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        step_traced_seeded(&store.states[*id].encoded, sys, strategies, budget, state_seed)
    };
    if jobs <= 1 || frontier.len() <= 1 {
        return frontier.iter().map(expand).collect();
    }
    let chunk = frontier.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = frontier
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(expand).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("exploration worker panicked"))
            .collect()
    })
}

/// Explore the execution space of `p` breadth-first from its encoding.
/// Truncation by a limit is recorded on the result; a pipeline producing an
/// invalid encoding is a library defect and panics.
pub fn explore(p: &ProcessTerm, sys: &RecursiveSystem, limits: &ExploreLimits) -> ExecutionSpace {
    assert!(
        limits.max_states > 0 && limits.max_depth > 0 && limits.step_budget > 0,
        "exploration limits must be positive"
    );
    let strategies = Strategies::for_system(sys);
    let initial = encode(p, sys);
    let term = canonical_form(&decode(&initial, sys).expect("fresh encodings decode"));

    let mut store = StateStore::new();
    store.insert(initial, term);
    let mut edges: Vec<Transition> = Vec::new();
    let mut seen_edges: BTreeSet<(usize, usize, StepKind)> = BTreeSet::new();
    let mut truncated = None;
    let mut remaining = limits.step_budget;
    let mut frontier = vec![0usize];
    let mut depth = 0usize;

    'explore: while !frontier.is_empty() {
        if depth == limits.max_depth {
            truncated = Some(Limit::Depth);
            break;
        }
        let results = expand_level(
            &frontier,
            &store,
            sys,
            &strategies,
            remaining,
            limits.jobs,
            limits.seed,
        );
        let mut next = Vec::new();
        for (source, result) in frontier.iter().copied().zip(results) {
            let traces = match result {
                Ok(traces) => traces,
                Err(StepError::Budget { .. }) => {
                    truncated = Some(Limit::Steps);
                    break 'explore;
                }
                Err(fault @ StepError::Validation { .. }) => {
                    panic!("exploration produced a broken state: {fault}")
                }
            };
            for trace in traces {
                if trace.steps > remaining {
                    truncated = Some(Limit::Steps);
                    break 'explore;
                }
                remaining -= trace.steps;
                let target = match store.find(&trace.result.graph) {
                    Some(id) => id,
                    None => {
                        if store.states.len() == limits.max_states {
                            truncated = Some(Limit::States);
                            break 'explore;
                        }
                        let id = store.insert(trace.result, trace.term);
                        next.push(id);
                        id
                    }
                };
                if seen_edges.insert((source, target, trace.kind.clone())) {
                    edges.push(Transition {
                        from: source,
                        to: target,
                        kind: trace.kind,
                    });
                }
            }
        }
        frontier = next;
        depth += 1;
    }

    ExecutionSpace {
        states: store.states,
        edges,
        initial: 0,
        truncated,
    }
}

// ---------------------------------------------------------------- exports

fn kind_string(kind: &StepKind) -> String {
    match kind {
        StepKind::Com => "com".into(),
        StepKind::Unfold(ident) => format!("unfold({ident})"),
    }
}

/// Serialized form of an execution space.
#[derive(Debug, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub states: Vec<StateDoc>,
    pub edges: Vec<EdgeDoc>,
    pub initial: usize,
    pub truncated: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: usize,
    pub term: String,
    pub graph: GraphDoc,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<GraphEdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: u32,
    pub label: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphEdgeDoc {
    pub a: u32,
    pub b: u32,
    pub label: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: usize,
    pub to: usize,
    pub kind: String,
}

impl SpaceDoc {
    pub fn from_space(space: &ExecutionSpace) -> Self {
        let states = space
            .states
            .iter()
            .map(|s| StateDoc {
                id: s.id,
                term: s.term.to_string(),
                graph: GraphDoc {
                    vertices: s
                        .encoded
                        .graph
                        .vertices()
                        .map(|(v, l)| VertexDoc {
                            id: v.0,
                            label: l.to_string(),
                        })
                        .collect(),
                    edges: s
                        .encoded
                        .graph
                        .edges()
                        .map(|(a, b, l)| GraphEdgeDoc {
                            a: a.0,
                            b: b.0,
                            label: l.to_string(),
                        })
                        .collect(),
                },
            })
            .collect();
        let edges = space
            .edges
            .iter()
            .map(|e| EdgeDoc {
                from: e.from,
                to: e.to,
                kind: kind_string(&e.kind),
            })
            .collect();
        SpaceDoc {
            states,
            edges,
            initial: space.initial,
            truncated: space.truncated.is_some(),
        }
    }
}

/// Render the space as JSON with stable key order and dense ids.
pub fn export_json(space: &ExecutionSpace) -> String {
    let mut text = serde_json::to_string_pretty(&SpaceDoc::from_space(space))
        .expect("space serialization cannot fail");
    text.push('\n');
    text
}

/// How much of each state a DOT export shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotDetail {
    /// State ids only.
    Ids,
    /// State ids with the decoded canonical term.
    Decoded,
    /// Each state as a cluster holding its simplified encoding.
    SimplifiedGraphs,
}

/// Render the space as a deterministic DOT digraph: communication edges
/// solid, unfolding edges dashed and labelled with the definition name, the
/// initial state double-bordered.
pub fn export_dot(space: &ExecutionSpace, detail: DotDetail) -> String {
    let mut out = String::from("digraph space {\n");
    match detail {
        DotDetail::Ids | DotDetail::Decoded => {
            out.push_str("  node [shape=box];\n");
            for s in &space.states {
                let label = match detail {
                    DotDetail::Ids => s.id.to_string(),
                    _ => format!("{}: {}", s.id, s.term),
                };
                let marker = if s.id == space.initial {
                    ", peripheries=2"
                } else {
                    ""
                };
                out.push_str(&format!(
                    "  s{} [label=\"{}\"{marker}];\n",
                    s.id,
                    dot_escape(&label)
                ));
            }
            for e in &space.edges {
                out.push_str(&format!("  s{} -> s{}{};\n", e.from, e.to, edge_attrs(e)));
            }
        }
        DotDetail::SimplifiedGraphs => {
            out.push_str("  compound=true;\n  node [shape=plaintext];\n");
            for s in &space.states {
                let view = simplify_view(&s.encoded);
                out.push_str(&format!("  subgraph cluster_s{} {{\n", s.id));
                out.push_str(&format!("    label=\"{}\";\n", s.id));
                if s.id == space.initial {
                    out.push_str("    peripheries=2;\n");
                }
                out.push_str(&format!(
                    "    s{}_anchor [shape=point, style=invis];\n",
                    s.id
                ));
                for (v, l) in view.vertices() {
                    out.push_str(&format!(
                        "    s{}_v{} [label=\"{}\"];\n",
                        s.id,
                        v.0,
                        dot_escape(&l.to_string())
                    ));
                }
                for (a, b, l) in view.edges() {
                    out.push_str(&format!(
                        "    s{}_v{} -> s{}_v{} [dir=none, label=\"{}\"];\n",
                        s.id,
                        a.0,
                        s.id,
                        b.0,
                        dot_escape(&l.to_string())
                    ));
                }
                out.push_str("  }\n");
            }
            for e in &space.edges {
                let mut attrs = edge_attrs(e);
                let clusters = format!("ltail=cluster_s{}, lhead=cluster_s{}", e.from, e.to);
                if attrs.is_empty() {
                    attrs = format!(" [{clusters}]");
                } else {
                    attrs.insert_str(attrs.len() - 1, &format!(", {clusters}"));
                }
                out.push_str(&format!(
                    "  s{}_anchor -> s{}_anchor{attrs};\n",
                    e.from, e.to
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

fn edge_attrs(e: &Transition) -> String {
    match &e.kind {
        StepKind::Com => String::new(),
        StepKind::Unfold(ident) => {
            format!(" [style=dashed, label=\"{}\"]", dot_escape(ident))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pi::{oracle_step, parse_process};

    fn space_of(src: &str) -> (ExecutionSpace, RecursiveSystem) {
        let (p, sys) = parse_process(src).unwrap();
        let space = explore(&p, &sys, &ExploreLimits::default());
        (space, sys)
    }

    fn canon(src: &str) -> ProcessTerm {
        let (p, _) = parse_process(src).unwrap();
        canonical_form(&p)
    }

    #[test]
    fn running_example_space_has_two_states_and_one_com_edge() {
        let (space, _) = space_of("main = x(z).z<w> | x<y> + x<y>");
        assert_eq!(space.states.len(), 2);
        assert_eq!(space.edges.len(), 1);
        assert_eq!(space.edges[0].kind, StepKind::Com);
        assert_eq!(space.initial, 0);
        assert!(space.truncated.is_none());
        assert_eq!(space.states[1].term, canon("main = y<w>"));
    }

    #[test]
    fn running_example_successors_are_parallel_and_isomorphic() {
        let (p, sys) = parse_process("main = x(z).z<w> | x<y> + x<y>").unwrap();
        let strategies = Strategies::for_system(&sys);
        let e = encode(&p, &sys);
        let succ = step_pipeline(&e, &sys, &strategies, 1_000_000).unwrap();
        assert_eq!(succ.len(), 2);
        assert!(succ.iter().all(|(k, _)| *k == StepKind::Com));
        assert!(is_isomorphic(&succ[0].1.graph, &succ[1].1.graph));
    }

    #[test]
    fn empty_process_space_is_a_single_silent_state() {
        let (space, sys) = space_of("main = 0");
        assert_eq!(space.states.len(), 1);
        assert!(space.edges.is_empty());
        let strategies = Strategies::for_system(&sys);
        let succ =
            step_pipeline(&space.states[0].encoded, &sys, &strategies, 1_000_000).unwrap();
        assert!(succ.is_empty());
    }

    #[test]
    fn recursive_pingpong_closes_into_an_unfold_diamond() {
        let src = "A(x) = x(y).A(y)\nB(x) = x<x>.B(x)\nmain = A(x) | B(x)";
        let (space, sys) = space_of(src);
        assert_eq!(space.states.len(), 4);
        assert_eq!(space.edges.len(), 5);
        let unfolds: Vec<&Transition> = space
            .edges
            .iter()
            .filter(|e| matches!(e.kind, StepKind::Unfold(_)))
            .collect();
        assert_eq!(unfolds.len(), 4);
        let com: Vec<&Transition> = space
            .edges
            .iter()
            .filter(|e| e.kind == StepKind::Com)
            .collect();
        assert_eq!(com.len(), 1);
        // Communication closes the cycle back to the initial state.
        assert_eq!(com[0].to, space.initial);

        // Before any communication can happen, both call sites unfold.
        let (p, _) = parse_process(src).unwrap();
        let strategies = Strategies::for_system(&sys);
        let succ = step_pipeline(&encode(&p, &sys), &sys, &strategies, 1_000_000).unwrap();
        assert_eq!(succ.len(), 2);
        assert!(succ.iter().all(|(k, _)| matches!(k, StepKind::Unfold(_))));
    }

    #[test]
    fn states_are_pairwise_non_isomorphic_and_reinsertable() {
        let (space, sys) = space_of("A(x) = x(y).A(y)\nB(x) = x<x>.B(x)\nmain = A(x) | B(x)");
        for a in &space.states {
            for b in &space.states {
                if a.id != b.id {
                    assert!(!is_isomorphic(&a.encoded.graph, &b.encoded.graph));
                }
            }
        }
        // Re-encoding a decoded state lands on a graph isomorphic to it.
        for s in &space.states {
            let again = encode(&decode(&s.encoded, &sys).unwrap(), &sys);
            assert!(is_isomorphic(&again.graph, &s.encoded.graph));
        }
    }

    #[test]
    fn non_truncated_leaves_are_terminal_for_the_reference_stepper() {
        let (space, sys) = space_of("main = x(z).z<w> | x<y> + x<y>");
        assert!(space.truncated.is_none());
        for s in &space.states {
            if space.edges.iter().all(|e| e.from != s.id) {
                assert!(oracle_step(&s.term, &sys).is_empty());
            }
        }
    }

    #[test]
    fn each_limit_reports_itself() {
        let src = "A(x) = x(y).A(y)\nB(x) = x<x>.B(x)\nmain = A(x) | B(x)";
        let (p, sys) = parse_process(src).unwrap();

        let mut limits = ExploreLimits {
            max_states: 1,
            ..ExploreLimits::default()
        };
        let space = explore(&p, &sys, &limits);
        assert_eq!(space.truncated, Some(Limit::States));
        assert_eq!(space.states.len(), 1);

        limits = ExploreLimits {
            max_depth: 1,
            ..ExploreLimits::default()
        };
        let space = explore(&p, &sys, &limits);
        assert_eq!(space.truncated, Some(Limit::Depth));
        assert_eq!(space.states.len(), 3);

        limits = ExploreLimits {
            step_budget: 1,
            ..ExploreLimits::default()
        };
        let space = explore(&p, &sys, &limits);
        assert_eq!(space.truncated, Some(Limit::Steps));
    }

    #[test]
    fn exploration_does_not_depend_on_worker_count() {
        let src = "A(x) = x(y).A(y)\nB(x) = x<x>.B(x)\nmain = A(x) | B(x)";
        let (p, sys) = parse_process(src).unwrap();
        let solo = explore(&p, &sys, &ExploreLimits::default());
        let limits = ExploreLimits {
            jobs: 4,
            ..ExploreLimits::default()
        };
        let pooled = explore(&p, &sys, &limits);
        assert_eq!(export_json(&solo), export_json(&pooled));
    }

    #[test]
    fn seeded_match_order_keeps_the_space_shape() {
        let src = "A(x) = x(y).A(y)\nB(x) = x<x>.B(x)\nmain = A(x) | B(x)";
        let (p, sys) = parse_process(src).unwrap();
        let plain = explore(&p, &sys, &ExploreLimits::default());
        let limits = ExploreLimits {
            seed: Some(0xBADCAB),
            ..ExploreLimits::default()
        };
        let seeded = explore(&p, &sys, &limits);
        assert_eq!(seeded.states.len(), plain.states.len());
        assert_eq!(seeded.edges.len(), plain.edges.len());
        // Same seed, same output; the states also pair up isomorphically.
        assert_eq!(export_json(&seeded), export_json(&explore(&p, &sys, &limits)));
        for s in &seeded.states {
            assert!(plain
                .states
                .iter()
                .any(|t| is_isomorphic(&s.encoded.graph, &t.encoded.graph)));
        }
    }

    #[test]
    fn json_export_round_trips_and_is_deterministic() {
        let (space, _) = space_of("main = x(z).z<w> | x<y> + x<y>");
        let text = export_json(&space);
        let doc: SpaceDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.states.len(), 2);
        assert_eq!(doc.edges.len(), 1);
        assert_eq!(doc.edges[0].kind, "com");
        assert_eq!(doc.initial, 0);
        assert!(!doc.truncated);

        let (again, _) = space_of("main = x(z).z<w> | x<y> + x<y>");
        assert_eq!(text, export_json(&again));
    }

    #[test]
    fn nil_json_names_one_state_and_no_edges() {
        let (space, _) = space_of("main = 0");
        let doc: SpaceDoc = serde_json::from_str(&export_json(&space)).unwrap();
        assert_eq!(doc.states.len(), 1);
        assert_eq!(doc.states[0].id, 0);
        assert!(doc.edges.is_empty());
        assert_eq!(doc.initial, 0);
        assert!(!doc.truncated);
    }

    #[test]
    fn dot_export_draws_solid_com_and_dashed_unfold_edges() {
        let (space, _) = space_of("main = x(z).z<w> | x<y> + x<y>");
        let dot = export_dot(&space, DotDetail::Ids);
        assert_eq!(dot.matches("->").count(), 1);
        assert!(!dot.contains("dashed"));
        assert!(dot.contains("peripheries=2"));

        let (space, _) = space_of("A(x) = x(y).A(y)\nB(x) = x<x>.B(x)\nmain = A(x) | B(x)");
        let dot = export_dot(&space, DotDetail::Decoded);
        assert!(dot.contains("style=dashed, label=\"A\""));
        assert!(dot.contains("style=dashed, label=\"B\""));

        let clustered = export_dot(&space, DotDetail::SimplifiedGraphs);
        assert!(clustered.contains("subgraph cluster_s0"));
        assert!(clustered.contains("lhead=cluster_s"));
        assert_eq!(clustered, export_dot(&space, DotDetail::SimplifiedGraphs));
    }

    #[test]
    fn one_state_dot_has_no_edges() {
        let (space, _) = space_of("main = 0");
        let dot = export_dot(&space, DotDetail::Decoded);
        assert!(!dot.contains("->"));
        assert_eq!(dot.matches("label=").count(), 1);
    }

    #[test]
    fn broken_pipeline_output_reports_the_chain() {
        // Smuggle an unexpected vertex into a valid-looking host: tethered
        // to a name the continuation keeps alive, it survives the pipeline
        // into the successor and fails its validation.
        let (p, sys) = parse_process("main = x(z).z<w> | x<y>").unwrap();
        let e = encode(&p, &sys);
        let mut b = e.graph.to_builder();
        let kept = e
            .graph
            .vertices()
            .find(|(_, l)| **l == labels::free_name("w"))
            .map(|(id, _)| id)
            .unwrap();
        let intruder = b.add_vertex(crate::term::Term::constant("intruder"));
        b.add_edge(kept, intruder, crate::term::Term::constant("tether"));
        let host = EncodedProcess {
            graph: b.freeze(),
            root: e.root,
            name_table: e.name_table.clone(),
        };
        let strategies = Strategies::for_system(&sys);
        let err = step_traced(&host, &sys, &strategies, 1_000_000).unwrap_err();
        match err {
            StepError::Validation { chain, .. } => {
                assert!(chain
                    .stepped
                    .vertices()
                    .any(|(_, l)| *l == crate::term::Term::constant("intruder")));
            }
            other => panic!("expected a validation fault, got {other}"),
        }
    }
}
