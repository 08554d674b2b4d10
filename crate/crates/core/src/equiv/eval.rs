//! Finite-trace semantics.
//!
//! Every judgment is made in one of two views. In the weak view the trace is
//! imagined to continue with cycles on which every boolean holds; in the
//! strong view it continues with cycles on which none does. Negation swaps
//! the views, and so does the antecedent of an implication, which sits in a
//! negative position. An obligation still pending when the trace ends is
//! therefore satisfied weakly and violated strongly.
//!
//! Sequences denote sets of match positions. A match of a sequence started
//! at cycle `t` is recorded by the cycle just after its last cycle, so the
//! empty match is `t` itself.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trace::Trace;
use crate::sva::{AssertionUnit, Node, RelOp, SampleFn, Sort};

/// Longest trace the evaluator accepts (cycles are packed into `u64`).
pub const MAX_TRACE_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum View {
    Weak,
    Strong,
}

impl View {
    pub fn dual(self) -> View {
        match self {
            View::Weak => View::Strong,
            View::Strong => View::Weak,
        }
    }

    fn is_weak(self) -> bool {
        self == View::Weak
    }
}

/// Weak and strong judgments of a property at one start cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds_weak: bool,
    pub holds_strong: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("signal '{0}' is not present in the trace")]
    MissingSignal(String),
    #[error("local variables are not supported by the evaluator")]
    Unsupported,
    #[error("trace must have between 1 and {MAX_TRACE_LEN} cycles, got {0}")]
    TraceLength(usize),
    #[error("expected a sequence, found a property")]
    NotASequence,
}

/// Set of match positions. Positions past the last representable bit
/// collapse onto it; they are far beyond any trace the evaluator accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Ends(u128);

const TOP: usize = 127;

impl Ends {
    fn single(pos: usize) -> Ends {
        Ends(1 << pos.min(TOP))
    }

    fn is_empty(self) -> bool {
        self.0 == 0
    }

    fn contains(self, pos: usize) -> bool {
        pos <= TOP && self.0 >> pos & 1 == 1
    }

    fn insert(&mut self, pos: usize) {
        self.0 |= 1 << pos.min(TOP);
    }

    fn remove(self, pos: usize) -> Ends {
        if pos > TOP {
            self
        } else {
            Ends(self.0 & !(1 << pos))
        }
    }

    fn union(self, other: Ends) -> Ends {
        Ends(self.0 | other.0)
    }

    fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }
}

/// Boolean expression over signal indices, evaluated a whole waveform at a
/// time.
#[derive(Debug, Clone)]
enum BoolExpr {
    Sig(usize),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Eq(Box<BoolExpr>, Box<BoolExpr>),
    Rose(usize),
    Fell(usize),
    Stable(usize),
    Past(usize, u32),
}

impl BoolExpr {
    /// Bit `c` of the result is the value at cycle `c`. Values before
    /// cycle 0 are taken as 0.
    fn mask(&self, waves: &[u64], full: u64) -> u64 {
        match self {
            BoolExpr::Sig(s) => waves[*s],
            BoolExpr::Not(x) => !x.mask(waves, full) & full,
            BoolExpr::And(a, b) => a.mask(waves, full) & b.mask(waves, full),
            BoolExpr::Or(a, b) => a.mask(waves, full) | b.mask(waves, full),
            BoolExpr::Eq(a, b) => !(a.mask(waves, full) ^ b.mask(waves, full)) & full,
            BoolExpr::Rose(s) => waves[*s] & !(waves[*s] << 1) & full,
            BoolExpr::Fell(s) => !waves[*s] & (waves[*s] << 1) & full,
            BoolExpr::Stable(s) => !(waves[*s] ^ (waves[*s] << 1)) & full,
            BoolExpr::Past(s, n) => {
                if *n as usize >= 64 {
                    0
                } else {
                    (waves[*s] << n) & full
                }
            }
        }
    }
}

/// Sequence/property tree with booleans factored out into letters and `$`
/// bounds resolved against the trace length.
#[derive(Debug, Clone)]
enum Expr {
    Letter(usize),
    Delay { lo: usize, hi: usize, body: Box<Expr> },
    Concat { lo: usize, hi: usize, lhs: Box<Expr>, rhs: Box<Expr> },
    Repeat { lo: usize, hi: usize, body: Box<Expr> },
    Goto { count: usize, letter: usize },
    NonConsec { count: usize, letter: usize },
    Within(Box<Expr>, Box<Expr>),
    ImplOverlap(Box<Expr>, Box<Expr>),
    ImplNonOverlap(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Until(Box<Expr>, Box<Expr>),
    /// A sequence whose match sets are memoized per trace under this id.
    Cached(usize, Box<Expr>),
}

impl Expr {
    fn is_sequence(&self) -> bool {
        if let Expr::Cached(_, e) = self {
            return e.is_sequence();
        }
        !matches!(
            self,
            Expr::ImplOverlap(..) | Expr::ImplNonOverlap(..) | Expr::Not(_) | Expr::And(..) | Expr::Or(..) | Expr::Until(..)
        )
    }

    /// Upper bound on the length of any match.
    fn max_len(&self, len: usize) -> usize {
        match self {
            Expr::Letter(_) => 1,
            Expr::Delay { hi, body, .. } => hi.saturating_add(body.max_len(len)),
            Expr::Concat { hi, lhs, rhs, .. } => lhs.max_len(len).saturating_add(*hi).saturating_add(rhs.max_len(len)),
            Expr::Repeat { hi, body, .. } => hi.saturating_mul(body.max_len(len)),
            Expr::Goto { count, .. } => count.saturating_mul(len + 1),
            Expr::NonConsec { count, .. } => count.saturating_mul(len + 1).saturating_add(len),
            Expr::Within(_, r) => r.max_len(len),
            Expr::Cached(_, e) => e.max_len(len),
            _ => 0,
        }
    }

    /// Furthest cycle offset, relative to the start, that a property's
    /// verdict can depend on.
    fn reach(&self, len: usize) -> usize {
        match self {
            Expr::ImplOverlap(s, p) => s.max_len(len).saturating_sub(1).saturating_add(p.reach(len)),
            Expr::ImplNonOverlap(s, p) => s.max_len(len).saturating_add(p.reach(len)),
            Expr::Not(p) => p.reach(len),
            Expr::And(p, q) | Expr::Or(p, q) => p.reach(len).max(q.reach(len)),
            Expr::Until(..) => len,
            Expr::Cached(_, e) => e.reach(len),
            seq => seq.max_len(len).saturating_sub(1),
        }
    }
}

/// A unit compiled against a fixed signal order and trace length.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    letters: Vec<BoolExpr>,
    body: Expr,
    disable: Option<BoolExpr>,
    len: usize,
    reach: usize,
    cached: usize,
}

struct Compiler<'a> {
    signals: &'a [String],
    letters: Vec<BoolExpr>,
    len: usize,
    cached: usize,
}

impl Compiler<'_> {
    fn signal(&self, name: &str) -> Result<usize, EvalError> {
        self.signals
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| EvalError::MissingSignal(name.to_string()))
    }

    fn boolean(&self, node: &Node) -> Result<BoolExpr, EvalError> {
        let b = |n: &Node| self.boolean(n).map(Box::new);
        Ok(match node {
            Node::Atom(name) => BoolExpr::Sig(self.signal(name)?),
            Node::Not(x) => BoolExpr::Not(b(x)?),
            Node::And(x, y) => BoolExpr::And(b(x)?, b(y)?),
            Node::Or(x, y) => BoolExpr::Or(b(x)?, b(y)?),
            Node::Rel(RelOp::Eq, x, y) => BoolExpr::Eq(b(x)?, b(y)?),
            Node::Rel(RelOp::Ne, x, y) => BoolExpr::Not(Box::new(BoolExpr::Eq(b(x)?, b(y)?))),
            Node::Sample(call) => {
                let s = self.signal(&call.arg)?;
                match call.func {
                    SampleFn::Rose => BoolExpr::Rose(s),
                    SampleFn::Fell => BoolExpr::Fell(s),
                    SampleFn::Stable => BoolExpr::Stable(s),
                    SampleFn::Past => BoolExpr::Past(s, call.lookback()),
                }
            }
            _ => unreachable!("boolean() called on a temporal node"),
        })
    }

    fn letter(&mut self, node: &Node) -> Result<usize, EvalError> {
        let expr = self.boolean(node)?;
        self.letters.push(expr);
        Ok(self.letters.len() - 1)
    }

    fn expr(&mut self, node: &Node) -> Result<Expr, EvalError> {
        if node.sort() == Sort::Bool {
            return Ok(Expr::Letter(self.letter(node)?));
        }
        let expr = self.temporal(node)?;
        if node.sort() == Sort::Seq {
            self.cached += 1;
            return Ok(Expr::Cached(self.cached - 1, Box::new(expr)));
        }
        Ok(expr)
    }

    fn temporal(&mut self, node: &Node) -> Result<Expr, EvalError> {
        let horizon = self.len as u32;
        let sub = |c: &mut Self, n: &Node| c.expr(n).map(Box::new);
        Ok(match node {
            Node::Delay(n, body) => Expr::Delay {
                lo: *n as usize,
                hi: *n as usize,
                body: sub(self, body)?,
            },
            Node::DelayRange(r, body) => Expr::Delay {
                lo: r.lo as usize,
                hi: r.hi_or(horizon) as usize,
                body: sub(self, body)?,
            },
            Node::Concat(spec, l, r) => Expr::Concat {
                lo: spec.lo() as usize,
                hi: spec.hi_or(horizon) as usize,
                lhs: sub(self, l)?,
                rhs: sub(self, r)?,
            },
            Node::RepeatConsec(n, body) => Expr::Repeat {
                lo: *n as usize,
                hi: *n as usize,
                body: sub(self, body)?,
            },
            Node::RepeatRange(r, body) => Expr::Repeat {
                lo: r.lo as usize,
                hi: r.hi_or(horizon) as usize,
                body: sub(self, body)?,
            },
            Node::RepeatGoto(n, b) => Expr::Goto {
                count: *n as usize,
                letter: self.letter(b)?,
            },
            Node::RepeatNonConsec(n, b) => Expr::NonConsec {
                count: *n as usize,
                letter: self.letter(b)?,
            },
            Node::Within(l, r) => Expr::Within(sub(self, l)?, sub(self, r)?),
            Node::ImplOverlap(s, p) => Expr::ImplOverlap(sub(self, s)?, sub(self, p)?),
            Node::ImplNonOverlap(s, p) => Expr::ImplNonOverlap(sub(self, s)?, sub(self, p)?),
            Node::PropNot(p) => Expr::Not(sub(self, p)?),
            Node::PropAnd(p, q) => Expr::And(sub(self, p)?, sub(self, q)?),
            Node::PropOr(p, q) => Expr::Or(sub(self, p)?, sub(self, q)?),
            Node::Until(p, q) => Expr::Until(sub(self, p)?, sub(self, q)?),
            Node::LocalVarDecl(..) | Node::LocalVarAssign { .. } => return Err(EvalError::Unsupported),
            Node::Atom(_) | Node::Not(_) | Node::And(..) | Node::Or(..) | Node::Rel(..) | Node::Sample(_) => {
                unreachable!("boolean nodes are handled above")
            }
        })
    }
}

fn check_len(len: usize) -> Result<(), EvalError> {
    if len == 0 || len > MAX_TRACE_LEN {
        Err(EvalError::TraceLength(len))
    } else {
        Ok(())
    }
}

impl Program {
    pub(crate) fn compile(unit: &AssertionUnit, signals: &[String], len: usize) -> Result<Program, EvalError> {
        check_len(len)?;
        if unit.body.uses_local_vars() {
            return Err(EvalError::Unsupported);
        }
        let mut c = Compiler {
            signals,
            letters: Vec::new(),
            len,
            cached: 0,
        };
        let body = c.expr(&unit.body)?;
        let disable = unit.disable.as_ref().map(|d| c.boolean(d)).transpose()?;
        let reach = body.reach(len);
        Ok(Program {
            letters: c.letters,
            body,
            disable,
            len,
            reach,
            cached: c.cached,
        })
    }

    /// Evaluates the assertion on the waveforms `waves` (one mask per signal).
    /// Every start cycle must pass, unless the disable condition fires
    /// somewhere inside that attempt.
    pub(crate) fn passes(&self, waves: &[u64], scratch: &mut Scratch) -> bool {
        let mut ctx = self.context(waves, scratch);
        let disable = self.disable.as_ref().map_or(0, |d| d.mask(waves, ctx.full));
        (0..self.len).all(|t| {
            let window_end = t.saturating_add(self.reach).min(self.len - 1);
            let window = (u64::MAX >> (63 - window_end)) & !((1u64 << t) - 1);
            disable & window != 0 || ctx.holds(&self.body, t, View::Weak)
        })
    }

    fn context<'a>(&self, waves: &[u64], scratch: &'a mut Scratch) -> Ctx<'a> {
        let full = if self.len == 64 { u64::MAX } else { (1u64 << self.len) - 1 };
        scratch.letters.clear();
        scratch.letters.extend(self.letters.iter().map(|l| l.mask(waves, full)));
        let slots = self.cached * 2 * MEMO_ROW;
        if scratch.memo.len() < slots {
            scratch.memo.resize(slots, (0, Ends::default()));
        }
        scratch.stamp = scratch.stamp.wrapping_add(1);
        if scratch.stamp == 0 {
            scratch.memo.fill((0, Ends::default()));
            scratch.stamp = 1;
        }
        Ctx {
            letters: &scratch.letters,
            memo: &mut scratch.memo,
            stamp: scratch.stamp,
            len: self.len,
            full,
        }
    }
}

const MEMO_ROW: usize = TOP;

/// Buffers reused across evaluations. Memo entries are valid only when
/// their stamp equals the current one, so moving to a new trace costs a
/// single increment.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    letters: Vec<u64>,
    memo: Vec<(u32, Ends)>,
    stamp: u32,
}

struct Ctx<'a> {
    letters: &'a [u64],
    memo: &'a mut [(u32, Ends)],
    stamp: u32,
    len: usize,
    full: u64,
}

impl Ctx<'_> {
    fn letter(&self, i: usize, c: usize, view: View) -> bool {
        if c >= self.len {
            view.is_weak()
        } else {
            self.letters[i] >> c & 1 == 1
        }
    }

    /// Whether the letter at `c` satisfies the negation of letter `i`.
    /// Past the end both a boolean and its negation share the view's value.
    fn letter_not(&self, i: usize, c: usize, view: View) -> bool {
        if c >= self.len {
            view.is_weak()
        } else {
            self.letters[i] >> c & 1 == 0
        }
    }

    fn present(&self, c: usize, view: View) -> bool {
        c < self.len || view.is_weak()
    }

    fn matches(&mut self, e: &Expr, start: usize, view: View) -> Ends {
        if start >= TOP {
            return if view.is_weak() { Ends::single(TOP) } else { Ends::default() };
        }
        match e {
            Expr::Cached(id, inner) => {
                let slot = (id * 2 + usize::from(view.is_weak())) * MEMO_ROW + start;
                if self.memo[slot].0 == self.stamp {
                    return self.memo[slot].1;
                }
                let ends = self.matches(inner, start, view);
                self.memo[slot] = (self.stamp, ends);
                ends
            }
            Expr::Letter(i) => {
                if self.letter(*i, start, view) {
                    Ends::single(start + 1)
                } else {
                    Ends::default()
                }
            }
            Expr::Delay { lo, hi, body } => {
                if !self.present(start, view) {
                    return Ends::default();
                }
                // `##k s` behaves as `1 ##k s`
                self.concat_tail(Ends::single(start + 1), start, *lo, *hi, body, view)
            }
            Expr::Concat { lo, hi, lhs, rhs } => {
                let left = self.matches(lhs, start, view);
                self.concat_tail(left, start, *lo, *hi, rhs, view)
            }
            Expr::Repeat { lo, hi, body } => {
                let mut cur = Ends::single(start);
                let mut acc = Ends::default();
                for i in 0..=*hi {
                    if i >= *lo {
                        acc = acc.union(cur);
                    }
                    if i == *hi {
                        break;
                    }
                    let next = cur.iter().fold(Ends::default(), |s, x| s.union(self.matches(body, x, view)));
                    if next.is_empty() || (next == cur && i >= *lo) {
                        break;
                    }
                    cur = next;
                }
                acc
            }
            Expr::Goto { count, letter } => self.goto(start, *count, *letter, view),
            Expr::NonConsec { count, letter } => {
                let ends = self.goto(start, *count, *letter, view);
                let mut out = ends;
                for e in ends.iter() {
                    let mut j = e;
                    while j < e + self.len && j < TOP && self.letter_not(*letter, j, view) {
                        out.insert(j + 1);
                        j += 1;
                    }
                }
                out
            }
            Expr::Within(l, r) => {
                let outer = self.matches(r, start, view);
                let Some(last) = outer.iter().last() else {
                    return outer;
                };
                // earliest end of an inner match beginning at each cycle
                let inner_min: Vec<Option<usize>> =
                    (start..=last).map(|t| self.matches(l, t, view).min()).collect();
                let mut out = Ends::default();
                for n in outer.iter() {
                    let contained = inner_min[..=n - start].iter().any(|m| m.is_some_and(|m| m <= n));
                    if contained {
                        out.insert(n);
                    }
                }
                out
            }
            _ => unreachable!("matches() called on a property"),
        }
    }

    /// Extends every match in `left` by `##[lo:hi] rhs`.
    fn concat_tail(&mut self, left: Ends, start: usize, lo: usize, hi: usize, rhs: &Expr, view: View) -> Ends {
        let mut out = Ends::default();
        for n in left.iter() {
            for k in lo..=hi {
                if k == 0 {
                    // fusion needs a non-empty match on both sides
                    if n == start {
                        continue;
                    }
                    out = out.union(self.matches(rhs, n - 1, view).remove(n - 1));
                } else {
                    out = out.union(self.matches(rhs, n + k - 1, view));
                }
                if n + k >= TOP {
                    break;
                }
            }
        }
        out
    }

    fn goto(&mut self, start: usize, count: usize, letter: usize, view: View) -> Ends {
        let mut cur = Ends::single(start);
        for _ in 0..count {
            let mut next = Ends::default();
            for x in cur.iter() {
                let mut c = x;
                while c <= x + self.len && c < TOP {
                    if self.letter(letter, c, view) {
                        next.insert(c + 1);
                    }
                    if !self.letter_not(letter, c, view) {
                        break;
                    }
                    c += 1;
                }
            }
            if next.is_empty() {
                return next;
            }
            cur = next;
        }
        cur
    }

    fn holds(&mut self, e: &Expr, t: usize, view: View) -> bool {
        if t >= self.len {
            return view.is_weak();
        }
        match e {
            Expr::ImplOverlap(s, p) => self
                .matches(s, t, view.dual())
                .iter()
                .filter(|&n| n > t)
                .all(|n| self.holds(p, n - 1, view)),
            Expr::ImplNonOverlap(s, p) => self.matches(s, t, view.dual()).iter().all(|n| self.holds(p, n, view)),
            Expr::Not(p) => !self.holds(p, t, view.dual()),
            Expr::And(p, q) => self.holds(p, t, view) && self.holds(q, t, view),
            Expr::Or(p, q) => self.holds(p, t, view) || self.holds(q, t, view),
            Expr::Until(p, q) => {
                for k in t..self.len {
                    if self.holds(q, k, view) {
                        return true;
                    }
                    if !self.holds(p, k, view) {
                        return false;
                    }
                }
                view.is_weak()
            }
            seq => !self.matches(seq, t, view).is_empty(),
        }
    }
}

fn waves_for(signals: &[String], trace: &Trace) -> Vec<u64> {
    (0..signals.len()).map(|s| trace.wave_mask(s)).collect()
}

fn trace_program(unit: &AssertionUnit, trace: &Trace) -> Result<Program, EvalError> {
    check_len(trace.len())?;
    Program::compile(unit, &trace.signals, trace.len())
}

/// Checks the assertion on every start cycle of `trace` under weak
/// end-of-trace semantics.
///
/// ```
/// use svakit::equiv::{eval_assertion, Trace};
/// use svakit::sva::parse;
///
/// let unit = parse("@(posedge clk) a |-> ##1 b").unwrap();
/// let failing = Trace::from_waves(&[("a", &[1, 0]), ("b", &[0, 0])]);
/// assert!(!eval_assertion(&unit, &failing).unwrap());
/// // the obligation at cycle 1 is still pending when the trace ends
/// let pending = Trace::from_waves(&[("a", &[1]), ("b", &[0])]);
/// assert!(eval_assertion(&unit, &pending).unwrap());
/// ```
pub fn eval_assertion(unit: &AssertionUnit, trace: &Trace) -> Result<bool, EvalError> {
    let program = trace_program(unit, trace)?;
    Ok(program.passes(&waves_for(&trace.signals, trace), &mut Scratch::default()))
}

/// Weak and strong verdicts of the body at `start`, ignoring the disable
/// condition.
pub fn verdict(unit: &AssertionUnit, trace: &Trace, start: usize) -> Result<Verdict, EvalError> {
    let program = trace_program(unit, trace)?;
    let waves = waves_for(&trace.signals, trace);
    let mut scratch = Scratch::default();
    let mut ctx = program.context(&waves, &mut scratch);
    Ok(Verdict {
        holds_weak: ctx.holds(&program.body, start, View::Weak),
        holds_strong: ctx.holds(&program.body, start, View::Strong),
    })
}

/// Matches of a sequence started at `start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqMatches {
    /// The sequence can match without consuming any cycle.
    pub empty: bool,
    /// Last cycle of each non-empty match, ascending. Cycles at or past the
    /// trace length only occur in the weak view.
    pub ends: Vec<usize>,
}

/// Computes the match set of a sequence on `trace` from `start`.
pub fn sequence_matches(seq: &Node, trace: &Trace, start: usize, view: View) -> Result<SeqMatches, EvalError> {
    check_len(trace.len())?;
    if seq.uses_local_vars() {
        return Err(EvalError::Unsupported);
    }
    let mut c = Compiler {
        signals: &trace.signals,
        letters: Vec::new(),
        len: trace.len(),
        cached: 0,
    };
    let expr = c.expr(seq)?;
    if !expr.is_sequence() {
        return Err(EvalError::NotASequence);
    }
    let program = Program {
        letters: c.letters,
        body: expr,
        disable: None,
        len: trace.len(),
        reach: 0,
        cached: c.cached,
    };
    let waves = waves_for(&trace.signals, trace);
    let mut scratch = Scratch::default();
    let mut ctx = program.context(&waves, &mut scratch);
    let ends = ctx.matches(&program.body, start, view);
    Ok(SeqMatches {
        empty: ends.contains(start),
        ends: ends.iter().filter(|&n| n > start).map(|n| n - 1).collect(),
    })
}
