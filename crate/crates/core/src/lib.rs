//! Execution spaces for pi-calculus processes via term-labelled graph
//! rewriting.
//!
//! Processes are encoded as simple undirected graphs whose vertices and
//! edges carry first-order terms. Communication, the cleanup of its debris,
//! and the unfolding of recursive definitions are all double-pushout rewrite
//! rules over these graphs; the reachable states, deduplicated up to
//! label-aware isomorphism, form the execution space.

pub mod dpo;
pub mod encode;
mod labels;
pub mod lgraph;
pub mod pi;
pub mod rules;
pub mod space;
pub mod term;

pub use encode::{decode, encode, simplify_view, EncodedProcess, EncodingFault};
pub use rules::{com_rules, gc_rules, merge_rules, unfold_rules, RuleSet, RuleSetKind};
pub use space::{
    explore, export_dot, export_json, step_pipeline, step_traced, step_traced_seeded, DotDetail,
    ExecutionSpace, ExploreLimits, Limit, PipelineChain, PipelineTrace, SpaceDoc, SpaceState,
    StepError, Strategies, Transition,
};

pub use dpo::{
    apply_all_once, apply_at, find_matches, normalize, ApplyError, DirectDerivation, MatchOrder,
    NormalizeError, Rule, RuleBuilder, RuleError,
};
pub use lgraph::{
    enumerate_monomorphisms, is_isomorphic, GraphBuilder, LabelledGraph, MatchMode, Morphism,
    VertexId,
};
pub use pi::{
    canonical_form, oracle_step, parse_process, Equation, Name, ParseError, ProcessTerm,
    RecursiveSystem, StepKind,
};
pub use term::{
    match_pattern, term_isomorphic, unify, Substitution, Term, TermParseError,
};
