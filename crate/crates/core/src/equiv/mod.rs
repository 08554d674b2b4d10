//! Bounded equivalence checking.
//!
//! Both properties are evaluated on every trace of a fixed length over the
//! union of their signals. Comparing the two pass sets gives the relation.

mod check;
mod eval;
mod trace;

pub use check::{
    check_relation, free_signals, temporal_span, BoundConfig, EquivError, Relation, RelationReport, DEFAULT_CAP,
};
pub use eval::{eval_assertion, sequence_matches, verdict, EvalError, SeqMatches, Verdict, View, MAX_TRACE_LEN};
pub use trace::Trace;
