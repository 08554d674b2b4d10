//! Annotation support: constraint contexts, rule-based reasoning traces,
//! description validation, and the provider-driven annotation loop.
//!
//! Descriptions mark signal names with backticks. That convention is what
//! lets [`validate_svad`] check them against the assertion's interface.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::{Provider, ProviderError};
use crate::sva::{AnalysisProfile, AssertionUnit, Edge, Node, NodeKind, RelOp, SampleFn, Upper};

/// Prompt section listing what a description may mention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintContext {
    pub allowed_signals: Vec<String>,
    pub clock: String,
    pub disable: Option<String>,
    pub sysfuncs: Vec<String>,
    pub rendered: String,
}

fn backticked<'a>(names: impl IntoIterator<Item = &'a String>) -> String {
    names.into_iter().map(|n| format!("`{n}`")).collect::<Vec<_>>().join(", ")
}

fn construct_token(kind: NodeKind) -> Option<&'static str> {
    Some(match kind {
        NodeKind::ImplOverlap => "|->",
        NodeKind::ImplNonOverlap => "|=>",
        NodeKind::Delay | NodeKind::DelayRange | NodeKind::SeqConcat => "##",
        NodeKind::RepeatConsec | NodeKind::RepeatRange => "[*]",
        NodeKind::RepeatGoto => "[->]",
        NodeKind::RepeatNonConsec => "[=]",
        NodeKind::PropNot => "not",
        NodeKind::PropAnd => "and",
        NodeKind::PropOr => "or",
        NodeKind::Until => "until",
        NodeKind::Within => "within",
        NodeKind::LocalVarDecl | NodeKind::LocalVarAssign => "local variable",
        _ => return None,
    })
}

/// Renders the constraint section for a profile.
///
/// ```
/// use svakit::annotate::build_context;
/// use svakit::sva::{analyze, parse};
///
/// let unit = parse("@(posedge clk) disable iff (rst) $rose(a) |-> b").unwrap();
/// let ctx = build_context(&analyze(&unit));
/// assert!(ctx.rendered.contains("Allowed signals: `a`, `b`"));
/// assert!(ctx.rendered.contains("Disable condition"));
/// ```
pub fn build_context(profile: &AnalysisProfile) -> ConstraintContext {
    let clock = format!("{} of `{}`", edge_phrase(profile.clock.edge), profile.clock.signal);
    let allowed: Vec<String> = profile.signals.iter().cloned().collect();
    let sysfuncs: Vec<String> = profile.sysfuncs.iter().cloned().collect();
    let mut lines = Vec::new();
    if !allowed.is_empty() {
        lines.push(format!("Allowed signals: {}", backticked(&allowed)));
    }
    lines.push(format!("Clock: {clock} (@({}))", profile.clock));
    let disable = profile.disable.as_ref().map(|text| {
        format!(
            "the check is abandoned while disable iff ({text}) holds, over {}",
            backticked(&profile.disable_signals)
        )
    });
    if let Some(d) = &disable {
        lines.push(format!("Disable condition: {d}"));
    }
    if !sysfuncs.is_empty() {
        lines.push(format!("Sampling functions: {}", sysfuncs.join(", ")));
    }
    let constructs: BTreeSet<&str> = profile.op_counts.keys().filter_map(|k| construct_token(*k)).collect();
    if !constructs.is_empty() {
        lines.push(format!(
            "Temporal constructs: {}",
            constructs.into_iter().collect::<Vec<_>>().join(", ")
        ));
    }
    if !profile.locals.is_empty() {
        let locals: Vec<&str> = profile.locals.iter().map(String::as_str).collect();
        lines.push(format!("Local variables (do not rename): {}", locals.join(", ")));
    }
    lines.push("Mention signals only by these names, wrapped in backticks.".into());
    ConstraintContext {
        allowed_signals: allowed,
        clock,
        disable,
        sysfuncs,
        rendered: lines.join("\n"),
    }
}

fn edge_phrase(edge: Edge) -> &'static str {
    match edge {
        Edge::Posedge => "rising edge",
        Edge::Negedge => "falling edge",
    }
}

/// One reasoning step: a temporal intent and the operator that expresses it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotStep {
    pub intent: String,
    pub construct: String,
    /// Child indices from the body root to the node that produced the step.
    #[serde(default)]
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CotTrace {
    pub steps: Vec<CotStep>,
}

impl fmt::Display for CotTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{}. {} -> {}", i + 1, s.intent, s.construct)?;
        }
        Ok(())
    }
}

fn cycles(n: u32) -> String {
    if n == 1 {
        "1 cycle".into()
    } else {
        format!("{n} cycles")
    }
}

fn delay_intent(lo: u32, hi: Upper) -> String {
    match hi {
        Upper::Finite(h) if h == lo && lo == 0 => "in the same cycle".into(),
        Upper::Finite(h) if h == lo => format!("after {}", cycles(lo)),
        Upper::Finite(h) => format!("between {lo} and {h} cycles later"),
        Upper::Unbounded => format!("at least {} later", cycles(lo)),
    }
}

fn step_for(node: &Node) -> Option<(String, String)> {
    let step = match node {
        Node::ImplOverlap(..) => ("overlapping implication".into(), "|->".into()),
        Node::ImplNonOverlap(..) => ("non-overlapping implication".into(), "|=>".into()),
        Node::Delay(n, _) => (delay_intent(*n, Upper::Finite(*n)), format!("##{n}")),
        Node::DelayRange(r, _) => (delay_intent(r.lo, r.hi), format!("##[{r}]")),
        Node::Concat(spec, ..) => (delay_intent(spec.lo(), upper_of(spec)), spec.to_string()),
        Node::RepeatConsec(n, _) => (format!("holds for {n} consecutive cycles"), format!("[*{n}]")),
        Node::RepeatRange(r, _) => {
            let intent = match r.hi {
                Upper::Finite(h) => format!("holds for between {} and {h} consecutive cycles", r.lo),
                Upper::Unbounded => format!("holds for at least {} consecutive cycles", r.lo),
            };
            (intent, format!("[*{r}]"))
        }
        Node::RepeatGoto(n, _) => (format!("occurs {n} times, ending on the last occurrence"), format!("[->{n}]")),
        Node::RepeatNonConsec(n, _) => (format!("occurs {n} times, not necessarily consecutively"), format!("[={n}]")),
        Node::Sample(call) => {
            let intent = match call.func {
                SampleFn::Rose => format!("`{}` rises from 0 to 1", call.arg),
                SampleFn::Fell => format!("`{}` falls from 1 to 0", call.arg),
                SampleFn::Stable => format!("`{}` keeps its previous value", call.arg),
                SampleFn::Past => format!("value of `{}` {} earlier", call.arg, cycles(call.lookback())),
            };
            (intent, call.to_string())
        }
        Node::PropNot(_) => ("the property must not hold".into(), "not".into()),
        Node::PropAnd(..) => ("both properties must hold".into(), "and".into()),
        Node::PropOr(..) => ("at least one property must hold".into(), "or".into()),
        Node::Until(..) => ("the left side holds until the right side holds".into(), "until".into()),
        Node::Within(..) => ("the left sequence occurs inside the right sequence".into(), "within".into()),
        Node::LocalVarDecl(v, _) => (format!("declare local variable {v}"), format!("logic {v}")),
        Node::LocalVarAssign { var, value, .. } => {
            (format!("capture a value into local variable {var}"), format!("{var} = {value}"))
        }
        _ => return None,
    };
    Some(step)
}

fn upper_of(spec: &crate::sva::DelaySpec) -> Upper {
    match spec {
        crate::sva::DelaySpec::Fixed(n) => Upper::Finite(*n),
        crate::sva::DelaySpec::Range(r) => r.hi,
    }
}

fn collect_steps(node: &Node, path: &mut Vec<usize>, out: &mut Vec<CotStep>) {
    if let Some((intent, construct)) = step_for(node) {
        out.push(CotStep {
            intent,
            construct,
            path: path.clone(),
        });
    }
    for (i, child) in node.children().into_iter().enumerate() {
        path.push(i);
        collect_steps(child, path, out);
        path.pop();
    }
}

/// Derives the reasoning trace: one step per temporal, property, or
/// sampling node, in pre-order. A body with none of those yields a single
/// step for its boolean condition.
///
/// ```
/// use svakit::annotate::build_cot;
/// use svakit::sva::parse;
///
/// let cot = build_cot(&parse("@(posedge clk) a ##3 b |-> c").unwrap());
/// let pairs: Vec<_> = cot.steps.iter().map(|s| (s.intent.as_str(), s.construct.as_str())).collect();
/// assert_eq!(pairs, [("overlapping implication", "|->"), ("after 3 cycles", "##3")]);
/// ```
pub fn build_cot(unit: &AssertionUnit) -> CotTrace {
    let mut steps = Vec::new();
    collect_steps(&unit.body, &mut Vec::new(), &mut steps);
    if steps.is_empty() {
        steps.push(CotStep {
            intent: "the boolean condition holds in every checked cycle".into(),
            construct: unit.body.to_string(),
            path: Vec::new(),
        });
    }
    CotTrace { steps }
}

/// A natural-language description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvadText {
    pub prose: String,
    pub language: String,
}

impl SvadText {
    pub fn new(prose: impl Into<String>) -> Self {
        SvadText {
            prose: prose.into(),
            language: "en".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Empty,
    UnknownSignal(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => f.write_str("the description is empty"),
            Violation::UnknownSignal(s) => write!(f, "`{s}` is not an allowed signal name"),
        }
    }
}

/// Backticked spans of `prose`, in order of first appearance.
pub fn mentioned_names(prose: &str) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    prose
        .split('`')
        .skip(1)
        .step_by(2)
        .map(str::trim)
        .filter(|s| seen.insert(*s))
        .collect()
}

/// Checks that the description is non-empty and only mentions allowed
/// names.
pub fn validate_svad(svad: &SvadText, profile: &AnalysisProfile) -> Result<(), Vec<Violation>> {
    if svad.prose.trim().is_empty() {
        return Err(vec![Violation::Empty]);
    }
    let allowed = profile.allowed_names();
    let bad: Vec<Violation> = mentioned_names(&svad.prose)
        .into_iter()
        .filter(|n| !allowed.contains(*n))
        .map(|n| Violation::UnknownSignal(n.to_string()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

pub const DEFAULT_ANNOTATION_TEMPLATE: &str = "\
You are writing a precise English description of a SystemVerilog assertion.
State the trigger, the expected response, and the exact timing.

Constraints:
{context}

Reasoning steps derived from the assertion structure:
{cot}
Assertion:
{sva}

Reply with the description only.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotateConfig {
    pub template: String,
    /// Extra requests after a rejected description.
    pub retries: u32,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            template: DEFAULT_ANNOTATION_TEMPLATE.into(),
            retries: 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("description rejected after all retries: {}", join_violations(.violations))]
    Exhausted { violations: Vec<Violation> },
    #[error("template is missing the {0} placeholder")]
    Template(&'static str),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Fills every named placeholder, failing if any is absent from the template.
pub(crate) fn fill(template: &str, pairs: &[(&'static str, &str)]) -> Result<String, &'static str> {
    let mut out = template.to_string();
    for (key, value) in pairs {
        if !out.contains(key) {
            return Err(key);
        }
        out = out.replace(key, value);
    }
    Ok(out)
}

/// The first-attempt annotation prompt.
pub fn annotation_prompt(
    unit: &AssertionUnit,
    ctx: &ConstraintContext,
    cot: &CotTrace,
    template: &str,
) -> Result<String, AnnotateError> {
    fill(
        template,
        &[
            ("{context}", &ctx.rendered),
            ("{cot}", &cot.to_string()),
            ("{sva}", &unit.to_string()),
        ],
    )
    .map_err(AnnotateError::Template)
}

/// Requests a description and validates it, re-asking with the violations
/// appended when it mentions names outside the context.
pub fn annotate_svad(
    unit: &AssertionUnit,
    profile: &AnalysisProfile,
    ctx: &ConstraintContext,
    cot: &CotTrace,
    provider: &dyn Provider,
    cfg: &AnnotateConfig,
) -> Result<SvadText, AnnotateError> {
    let base = annotation_prompt(unit, ctx, cot, &cfg.template)?;
    let mut prompt = base.clone();
    let mut last = Vec::new();
    for _ in 0..=cfg.retries {
        let svad = SvadText::new(provider.complete(&prompt)?.trim());
        match validate_svad(&svad, profile) {
            Ok(()) => return Ok(svad),
            Err(v) => {
                prompt = format!(
                    "{base}\n\nYour previous description was rejected:\n{}\nRewrite it using only the allowed names.",
                    v.iter().map(|x| format!("- {x}")).collect::<Vec<_>>().join("\n")
                );
                last = v;
            }
        }
    }
    Err(AnnotateError::Exhausted { violations: last })
}

/// Rule-based English description of a unit, used for offline corpora.
///
/// ```
/// use svakit::annotate::describe;
/// use svakit::sva::parse;
///
/// let text = describe(&parse("@(posedge clk) a |=> b").unwrap());
/// assert_eq!(
///     text.prose,
///     "On every rising edge of `clk`, whenever `a` is high, `b` is high starting one cycle later."
/// );
/// ```
pub fn describe(unit: &AssertionUnit) -> SvadText {
    let d = Describer {
        locals: unit.declared_locals(),
    };
    let mut prose = format!("On every {} of `{}`", edge_phrase(unit.clock.edge), unit.clock.signal);
    if let Some(cond) = &unit.disable {
        prose.push_str(&format!(" and unless {}", d.boolean(cond)));
    }
    prose.push_str(", ");
    prose.push_str(&d.property(&unit.body));
    prose.push('.');
    SvadText::new(prose)
}

fn later(lo: u32, hi: Upper) -> String {
    match hi {
        Upper::Finite(h) if h == lo && lo == 0 => "in the same cycle".into(),
        Upper::Finite(h) if h == lo => format!("{} later", cycles(lo)),
        Upper::Finite(h) => format!("{lo} to {h} cycles later"),
        Upper::Unbounded => format!("{} or more later", cycles(lo)),
    }
}

fn ordinal(n: u32) -> String {
    let suffix = match (n % 10, n % 100) {
        (1, 11) | (2, 12) | (3, 13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

struct Describer<'a> {
    locals: Vec<&'a str>,
}

impl Describer<'_> {
    /// Signals are backticked; local variables are not signals.
    fn name(&self, a: &str) -> String {
        if self.locals.contains(&a) {
            a.to_string()
        } else {
            format!("`{a}`")
        }
    }

    fn boolean(&self, node: &Node) -> String {
        match node {
            Node::Atom(a) => format!("{} is high", self.name(a)),
            Node::Not(x) => match x.as_ref() {
                Node::Atom(a) => format!("{} is low", self.name(a)),
                other => format!("it is not the case that {}", self.boolean(other)),
            },
            Node::And(a, b) => format!("{} and {}", self.boolean(a), self.boolean(b)),
            Node::Or(a, b) => format!("either {} or {}", self.boolean(a), self.boolean(b)),
            Node::Rel(op, a, b) => {
                let verb = if *op == RelOp::Eq { "equals" } else { "differs from" };
                format!("({}) {verb} ({})", self.operand(a), self.operand(b))
            }
            Node::Sample(call) => match call.func {
                SampleFn::Rose => format!("`{}` rises", call.arg),
                SampleFn::Fell => format!("`{}` falls", call.arg),
                SampleFn::Stable => format!("`{}` is stable", call.arg),
                SampleFn::Past => format!("`{}` was high {} earlier", call.arg, cycles(call.lookback())),
            },
            other => self.sequence(other),
        }
    }

    fn operand(&self, node: &Node) -> String {
        match node {
            Node::Atom(a) => self.name(a),
            Node::Sample(_) => node.to_string(),
            other => self.boolean(other),
        }
    }

    fn sequence(&self, node: &Node) -> String {
        match node {
            Node::Delay(n, x) => format!("{}, {}", later(*n, Upper::Finite(*n)), self.sequence(x)),
            Node::DelayRange(r, x) => format!("{}, {}", later(r.lo, r.hi), self.sequence(x)),
            Node::Concat(spec, a, b) => format!("{}, then {}, {}", self.sequence(a), later(spec.lo(), upper_of(spec)), self.sequence(b)),
            Node::RepeatConsec(n, x) => format!("{} for {} in a row", self.sequence(x), cycles(*n)),
            Node::RepeatRange(r, x) => match r.hi {
                Upper::Finite(h) => format!("{} for {} to {h} cycles in a row", self.sequence(x), r.lo),
                Upper::Unbounded => format!("{} for at least {} in a row", self.sequence(x), cycles(r.lo)),
            },
            Node::RepeatGoto(n, x) => format!("{} for the {} time", self.boolean(x), ordinal(*n)),
            Node::RepeatNonConsec(n, x) => format!("{} on {n} not necessarily consecutive cycles", self.boolean(x)),
            Node::Within(a, b) => format!("({}) occurs within ({})", self.sequence(a), self.sequence(b)),
            Node::LocalVarAssign { seq, var, value } => {
                format!("{}, saving ({}) into {var}", self.sequence(seq), self.operand(value))
            }
            other => self.boolean(other),
        }
    }

    fn property(&self, node: &Node) -> String {
        match node {
            Node::ImplOverlap(s, p) if matches!(**p, Node::Delay(..) | Node::DelayRange(..)) => {
                format!("whenever {}, counting from that cycle, {}", self.sequence(s), self.property(p))
            }
            Node::ImplOverlap(s, p) => format!("whenever {}, {} in the same cycle", self.sequence(s), self.property(p)),
            Node::ImplNonOverlap(s, p) => format!("whenever {}, {} starting one cycle later", self.sequence(s), self.property(p)),
            Node::PropNot(p) => format!("it never happens that {}", self.property(p)),
            Node::PropAnd(p, q) => format!("both ({}) and ({})", self.property(p), self.property(q)),
            Node::PropOr(p, q) => format!("either ({}) or ({})", self.property(p), self.property(q)),
            Node::Until(p, q) => format!("({}) keeps holding until ({})", self.property(p), self.property(q)),
            Node::LocalVarDecl(v, p) => format!("using a local variable {v}, {}", self.property(p)),
            other => self.sequence(other),
        }
    }
}
