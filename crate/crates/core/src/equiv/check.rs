use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{EvalError, Program, Scratch, MAX_TRACE_LEN};
use super::trace::Trace;
use crate::sva::{AssertionUnit, Clock, DelaySpec, Node};

/// Default cap on signals × cycles.
pub const DEFAULT_CAP: usize = 22;

/// Bounds for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConfig {
    /// Trace length. `None` picks the longest temporal span plus two.
    pub length: Option<usize>,
    /// Largest allowed signals × cycles product.
    pub cap: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            length: None,
            cap: DEFAULT_CAP,
        }
    }
}

/// How the pass set of the generated property relates to the reference's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    Equivalent,
    /// Generated passes strictly fewer traces (it implies the reference).
    Tightening,
    /// Generated passes strictly more traces.
    Widening,
    NoRelationship,
    Unsupported,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Equivalent,
        Relation::Tightening,
        Relation::Widening,
        Relation::NoRelationship,
        Relation::Unsupported,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Equivalent => "Equivalent",
            Relation::Tightening => "Tightening",
            Relation::Widening => "Widening",
            Relation::NoRelationship => "NoRelationship",
            Relation::Unsupported => "Unsupported",
        }
    }

    /// The relation seen from the other side.
    pub fn swapped(self) -> Relation {
        match self {
            Relation::Tightening => Relation::Widening,
            Relation::Widening => Relation::Tightening,
            r => r,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: Relation,
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "S")]
    pub signal_count: usize,
    pub signals: Vec<String>,
    /// First trace, in enumeration order, passed by the generated property only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_gen_only: Option<Trace>,
    /// First trace passed by the reference only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_ref_only: Option<Trace>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivError {
    #[error("clocking differs: {gen} vs {reference}")]
    ClockMismatch { gen: Clock, reference: Clock },
    #[error("{signals} signals over {length} cycles exceeds the budget of {cap}")]
    BudgetExceeded { signals: usize, length: usize, cap: usize },
    #[error("trace length {length} is shorter than the required {required}")]
    LengthTooShort { length: usize, required: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Longest run, in cycles, that a sequence match can occupy. Unbounded
/// ranges and goto repetitions count at their lower bound.
fn seq_cycles(node: &Node) -> usize {
    match node {
        Node::Delay(n, x) => *n as usize + seq_cycles(x),
        Node::DelayRange(r, x) => r.hi_or(r.lo) as usize + seq_cycles(x),
        Node::Concat(spec, a, b) => {
            let k = match spec {
                DelaySpec::Fixed(n) => *n,
                DelaySpec::Range(r) => r.hi_or(r.lo),
            } as usize;
            (seq_cycles(a) + k + seq_cycles(b)).saturating_sub(1)
        }
        Node::RepeatConsec(n, x) => *n as usize * seq_cycles(x),
        Node::RepeatRange(r, x) => r.hi_or(r.lo) as usize * seq_cycles(x),
        Node::RepeatGoto(n, _) | Node::RepeatNonConsec(n, _) => *n as usize,
        Node::Within(_, r) => seq_cycles(r),
        Node::LocalVarAssign { seq, .. } => seq_cycles(seq),
        Node::LocalVarDecl(_, x) => seq_cycles(x),
        _ => 1,
    }
}

/// Number of cycles after the start cycle that a property looks at.
///
/// ```
/// use svakit::equiv::temporal_span;
/// use svakit::sva::parse;
///
/// assert_eq!(temporal_span(&parse("@(posedge clk) a |-> b").unwrap().body), 0);
/// assert_eq!(temporal_span(&parse("@(posedge clk) a ##1 b |=> ##[1:2] c").unwrap().body), 4);
/// ```
pub fn temporal_span(node: &Node) -> usize {
    match node {
        Node::ImplOverlap(s, p) => seq_cycles(s).saturating_sub(1) + temporal_span(p),
        Node::ImplNonOverlap(s, p) => seq_cycles(s) + temporal_span(p),
        Node::PropNot(p) | Node::LocalVarDecl(_, p) => temporal_span(p),
        Node::PropAnd(p, q) | Node::PropOr(p, q) | Node::Until(p, q) => temporal_span(p).max(temporal_span(q)),
        seq => seq_cycles(seq).saturating_sub(1),
    }
}

fn collect_signals(node: &Node, out: &mut BTreeSet<String>) {
    node.walk(&mut |n| match n {
        Node::Atom(name) => {
            out.insert(name.clone());
        }
        Node::Sample(call) => {
            out.insert(call.arg.clone());
        }
        _ => {}
    });
}

/// Free signals of a unit: every name read by the body or the disable
/// condition. The clock itself is implicit.
pub fn free_signals(unit: &AssertionUnit) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_signals(&unit.body, &mut out);
    if let Some(d) = &unit.disable {
        collect_signals(d, &mut out);
    }
    out
}

#[derive(Clone, Copy)]
struct Witnesses {
    gen_only: Option<u64>,
    ref_only: Option<u64>,
}

impl Witnesses {
    const NONE: Witnesses = Witnesses {
        gen_only: None,
        ref_only: None,
    };

    fn merge(self, other: Witnesses) -> Witnesses {
        let min = |a: Option<u64>, b: Option<u64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        Witnesses {
            gen_only: min(self.gen_only, other.gen_only),
            ref_only: min(self.ref_only, other.ref_only),
        }
    }
}

const CHUNK: u64 = 1 << 12;

/// Decides how the generated property relates to the reference one by
/// evaluating both on every trace of the chosen length.
///
/// ```
/// use svakit::equiv::{check_relation, BoundConfig, Relation};
/// use svakit::sva::parse;
///
/// let gen = parse("@(posedge clk) a |=> b").unwrap();
/// let reference = parse("@(posedge clk) a |-> ##1 b").unwrap();
/// let report = check_relation(&gen, &reference, &BoundConfig::default()).unwrap();
/// assert_eq!(report.relation, Relation::Equivalent);
/// ```
pub fn check_relation(
    gen: &AssertionUnit,
    reference: &AssertionUnit,
    cfg: &BoundConfig,
) -> Result<RelationReport, EquivError> {
    if gen.clock != reference.clock {
        return Err(EquivError::ClockMismatch {
            gen: gen.clock.clone(),
            reference: reference.clock.clone(),
        });
    }
    let mut names = free_signals(gen);
    names.extend(free_signals(reference));
    let signals: Vec<String> = names.into_iter().collect();
    let span = temporal_span(&gen.body).max(temporal_span(&reference.body));
    let length = match cfg.length {
        Some(l) if l < span + 1 => {
            return Err(EquivError::LengthTooShort {
                length: l,
                required: span + 1,
            })
        }
        Some(l) => l,
        None => span + 2,
    };
    let report = |relation, witnesses: Witnesses| RelationReport {
        relation,
        length,
        signal_count: signals.len(),
        signals: signals.clone(),
        witness_gen_only: witnesses.gen_only.map(|i| Trace::from_index(&signals, length, i)),
        witness_ref_only: witnesses.ref_only.map(|i| Trace::from_index(&signals, length, i)),
    };
    if gen.body.uses_local_vars() || reference.body.uses_local_vars() {
        return Ok(report(Relation::Unsupported, Witnesses::NONE));
    }
    let bits = signals.len() * length;
    if bits > cfg.cap || bits >= 64 || length > MAX_TRACE_LEN {
        return Err(EquivError::BudgetExceeded {
            signals: signals.len(),
            length,
            cap: cfg.cap,
        });
    }
    let gen_prog = Program::compile(gen, &signals, length)?;
    let ref_prog = Program::compile(reference, &signals, length)?;
    let total = 1u64 << bits;
    let wave_mask = (1u64 << length) - 1;
    let chunks = total.div_ceil(CHUNK);
    let found = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut waves = vec![0u64; signals.len()];
            let mut scratch = Scratch::default();
            let mut w = Witnesses::NONE;
            let end = ((chunk + 1) * CHUNK).min(total);
            for index in chunk * CHUNK..end {
                for (s, wave) in waves.iter_mut().enumerate() {
                    *wave = (index >> (s * length)) & wave_mask;
                }
                let g = gen_prog.passes(&waves, &mut scratch);
                let r = ref_prog.passes(&waves, &mut scratch);
                if g && !r && w.gen_only.is_none() {
                    w.gen_only = Some(index);
                } else if r && !g && w.ref_only.is_none() {
                    w.ref_only = Some(index);
                }
                if w.gen_only.is_some() && w.ref_only.is_some() {
                    break;
                }
            }
            w
        })
        .reduce(|| Witnesses::NONE, Witnesses::merge);
    let relation = match (found.gen_only, found.ref_only) {
        (None, None) => Relation::Equivalent,
        (None, Some(_)) => Relation::Tightening,
        (Some(_), None) => Relation::Widening,
        (Some(_), Some(_)) => Relation::NoRelationship,
    };
    Ok(report(relation, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::parse;

    fn rel(gen: &str, reference: &str) -> Relation {
        let g = parse(&format!("@(posedge clk) {gen}")).unwrap();
        let r = parse(&format!("@(posedge clk) {reference}")).unwrap();
        check_relation(&g, &r, &BoundConfig::default()).unwrap().relation
    }

    #[test]
    fn basic_relations() {
        assert_eq!(rel("a |=> b", "a |-> ##1 b"), Relation::Equivalent);
        assert_eq!(rel("a |-> b && c", "a |-> b"), Relation::Tightening);
        assert_eq!(rel("a |-> b || c", "a |-> b"), Relation::Widening);
        assert_eq!(rel("a |-> b", "a |-> c"), Relation::NoRelationship);
        assert_eq!(rel("logic v; (a, v = b) |=> c == v", "a |-> c"), Relation::Unsupported);
    }

    #[test]
    fn witnesses_separate_the_properties() {
        let g = parse("@(posedge clk) a |-> b").unwrap();
        let r = parse("@(posedge clk) a |-> c").unwrap();
        let rep = check_relation(&g, &r, &BoundConfig::default()).unwrap();
        let gw = rep.witness_gen_only.unwrap();
        let rw = rep.witness_ref_only.unwrap();
        assert!(super::super::eval_assertion(&g, &gw).unwrap());
        assert!(!super::super::eval_assertion(&r, &gw).unwrap());
        assert!(super::super::eval_assertion(&r, &rw).unwrap());
        assert!(!super::super::eval_assertion(&g, &rw).unwrap());
    }

    #[test]
    fn errors() {
        let g = parse("@(posedge clk) a").unwrap();
        let r = parse("@(negedge clk) a").unwrap();
        assert!(matches!(
            check_relation(&g, &r, &BoundConfig::default()),
            Err(EquivError::ClockMismatch { .. })
        ));
        let r = parse("@(posedge clk) a |-> ##3 b").unwrap();
        let cfg = BoundConfig {
            length: Some(3),
            cap: 22,
        };
        assert_eq!(
            check_relation(&g, &r, &cfg),
            Err(EquivError::LengthTooShort { length: 3, required: 4 })
        );
        let cfg = BoundConfig { length: None, cap: 8 };
        assert!(matches!(
            check_relation(&g, &r, &cfg),
            Err(EquivError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn spans() {
        let span = |t: &str| temporal_span(&parse(&format!("@(posedge clk) {t}")).unwrap().body);
        assert_eq!(span("a"), 0);
        assert_eq!(span("a[*3]"), 2);
        assert_eq!(span("a ##[1:$] b"), 1);
        assert_eq!(span("a |=> b[->2]"), 2);
        assert_eq!(span("a ##0 b"), 0);
    }
}
