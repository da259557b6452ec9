//! Process-calculus front half: syntax, the textual DSL, structural
//! congruence, and the syntactic one-step reduction oracle.

pub mod ast;
pub mod canon;
pub mod oracle;
pub mod parser;

pub use ast::{Equation, Name, ProcessTerm, RecursiveSystem};
pub use canon::canonical_form;
pub use oracle::{oracle_step, StepKind};
pub use parser::{parse_process, ParseError};

/// Random well-formed processes for property tests: closed guarded shapes
/// over a small name pool, without calls.
#[cfg(test)]
pub(crate) mod gen {
    use proptest::prelude::*;

    use super::ast::ProcessTerm;

    pub(crate) fn name() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "x", "y"]).prop_map(String::from)
    }

    fn prefix(inner: BoxedStrategy<ProcessTerm>) -> impl Strategy<Value = ProcessTerm> {
        (any::<bool>(), name(), name(), inner).prop_map(|(out, chan, n, cont)| {
            if out {
                ProcessTerm::output(chan, n, cont)
            } else {
                ProcessTerm::input(chan, n, cont)
            }
        })
    }

    pub(crate) fn process() -> impl Strategy<Value = ProcessTerm> {
        let leaf = prop_oneof![
            1 => Just(ProcessTerm::Nil),
            3 => (name(), name()).prop_map(|(c, d)| ProcessTerm::output(c, d, ProcessTerm::Nil)),
            3 => (name(), name()).prop_map(|(c, b)| ProcessTerm::input(c, b, ProcessTerm::Nil)),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                (name(), name(), inner.clone()).prop_map(|(c, b, k)| ProcessTerm::input(c, b, k)),
                (name(), name(), inner.clone()).prop_map(|(c, d, k)| ProcessTerm::output(c, d, k)),
                prop::collection::vec(inner.clone(), 2..4).prop_map(ProcessTerm::Par),
                prop::collection::vec(prefix(inner.clone()), 2..4).prop_map(ProcessTerm::Sum),
                (name(), inner).prop_map(|(n, b)| ProcessTerm::restrict(n, b)),
            ]
        })
    }
}
