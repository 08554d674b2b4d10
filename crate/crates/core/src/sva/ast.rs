use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// Upper end of a cycle range. `Unbounded` is written `$`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Upper {
    Finite(u32),
    Unbounded,
}

/// A `lo:hi` cycle range as used by `##[lo:hi]` and `[*lo:hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Range {
    pub lo: u32,
    pub hi: Upper,
}

impl Range {
    pub fn new(lo: u32, hi: Upper) -> Self {
        Range { lo, hi }
    }

    pub fn is_ordered(&self) -> bool {
        match self.hi {
            Upper::Finite(hi) => self.lo <= hi,
            Upper::Unbounded => true,
        }
    }

    /// Concrete upper bound, with `$` replaced by `horizon`.
    pub fn hi_or(&self, horizon: u32) -> u32 {
        match self.hi {
            Upper::Finite(hi) => hi,
            Upper::Unbounded => horizon.max(self.lo),
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Upper::Finite(hi) => write!(f, "{}:{}", self.lo, hi),
            Upper::Unbounded => write!(f, "{}:$", self.lo),
        }
    }
}

/// The delay between the two operands of a binary `##`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DelaySpec {
    Fixed(u32),
    Range(Range),
}

impl DelaySpec {
    pub fn lo(&self) -> u32 {
        match self {
            DelaySpec::Fixed(n) => *n,
            DelaySpec::Range(r) => r.lo,
        }
    }

    pub fn hi_or(&self, horizon: u32) -> u32 {
        match self {
            DelaySpec::Fixed(n) => *n,
            DelaySpec::Range(r) => r.hi_or(horizon),
        }
    }
}

impl fmt::Display for DelaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelaySpec::Fixed(n) => write!(f, "##{n}"),
            DelaySpec::Range(r) => write!(f, "##[{r}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Posedge,
    Negedge,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Edge::Posedge => "posedge",
            Edge::Negedge => "negedge",
        })
    }
}

/// The clocking event of an assertion unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clock {
    pub edge: Edge,
    pub signal: String,
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.edge, self.signal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelOp {
    Eq,
    Ne,
}

impl RelOp {
    pub fn as_str(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
        }
    }
}

/// Sampled-value system functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SampleFn {
    Rose,
    Fell,
    Stable,
    Past,
}

impl SampleFn {
    pub fn name(self) -> &'static str {
        match self {
            SampleFn::Rose => "$rose",
            SampleFn::Fell => "$fell",
            SampleFn::Stable => "$stable",
            SampleFn::Past => "$past",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "$rose" => SampleFn::Rose,
            "$fell" => SampleFn::Fell,
            "$stable" => SampleFn::Stable,
            "$past" => SampleFn::Past,
            _ => return None,
        })
    }
}

/// A call such as `$rose(a)` or `$past(a, 2)`. `cycles` is only set for an
/// explicit `$past` delay.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleCall {
    pub func: SampleFn,
    pub arg: String,
    pub cycles: Option<u32>,
}

impl SampleCall {
    /// Number of cycles looked back; `$past` defaults to one.
    pub fn lookback(&self) -> u32 {
        match self.func {
            SampleFn::Past => self.cycles.unwrap_or(1),
            _ => 1,
        }
    }
}

impl fmt::Display for SampleCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cycles {
            Some(n) => write!(f, "{}({}, {})", self.func.name(), self.arg, n),
            None => write!(f, "{}({})", self.func.name(), self.arg),
        }
    }
}

/// The node kinds of the property tree. Depth, operator counts, and the
/// chain-of-thought templates are all keyed on these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Atom,
    Not,
    And,
    Or,
    RelOp,
    SysFunc,
    Delay,
    DelayRange,
    RepeatConsec,
    RepeatRange,
    RepeatGoto,
    RepeatNonConsec,
    SeqConcat,
    ImplOverlap,
    ImplNonOverlap,
    PropNot,
    PropAnd,
    PropOr,
    Until,
    Within,
    LocalVarDecl,
    LocalVarAssign,
}

impl NodeKind {
    pub const ALL: [NodeKind; 22] = [
        NodeKind::Atom,
        NodeKind::Not,
        NodeKind::And,
        NodeKind::Or,
        NodeKind::RelOp,
        NodeKind::SysFunc,
        NodeKind::Delay,
        NodeKind::DelayRange,
        NodeKind::RepeatConsec,
        NodeKind::RepeatRange,
        NodeKind::RepeatGoto,
        NodeKind::RepeatNonConsec,
        NodeKind::SeqConcat,
        NodeKind::ImplOverlap,
        NodeKind::ImplNonOverlap,
        NodeKind::PropNot,
        NodeKind::PropAnd,
        NodeKind::PropOr,
        NodeKind::Until,
        NodeKind::Within,
        NodeKind::LocalVarDecl,
        NodeKind::LocalVarAssign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Atom => "Atom",
            NodeKind::Not => "Not",
            NodeKind::And => "And",
            NodeKind::Or => "Or",
            NodeKind::RelOp => "RelOp",
            NodeKind::SysFunc => "SysFunc",
            NodeKind::Delay => "Delay",
            NodeKind::DelayRange => "DelayRange",
            NodeKind::RepeatConsec => "RepeatConsec",
            NodeKind::RepeatRange => "RepeatRange",
            NodeKind::RepeatGoto => "RepeatGoto",
            NodeKind::RepeatNonConsec => "RepeatNonConsec",
            NodeKind::SeqConcat => "SeqConcat",
            NodeKind::ImplOverlap => "ImplOverlap",
            NodeKind::ImplNonOverlap => "ImplNonOverlap",
            NodeKind::PropNot => "PropNot",
            NodeKind::PropAnd => "PropAnd",
            NodeKind::PropOr => "PropOr",
            NodeKind::Until => "Until",
            NodeKind::Within => "Within",
            NodeKind::LocalVarDecl => "LocalVarDecl",
            NodeKind::LocalVarAssign => "LocalVarAssign",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Static sort of an expression. Every boolean is a sequence of length one
/// and every sequence can stand as a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Bool,
    Seq,
    Prop,
}

impl Sort {
    pub fn describe(self) -> &'static str {
        match self {
            Sort::Bool => "boolean",
            Sort::Seq => "sequence",
            Sort::Prop => "property",
        }
    }
}

/// A parsed property. Parentheses never appear as nodes.
///
/// Prefix delays (`##2 b`) are [`Node::Delay`] / [`Node::DelayRange`] with a
/// single operand; the binary form (`a ##2 b`) is [`Node::Concat`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Atom(String),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Rel(RelOp, Box<Node>, Box<Node>),
    Sample(SampleCall),
    Delay(u32, Box<Node>),
    DelayRange(Range, Box<Node>),
    Concat(DelaySpec, Box<Node>, Box<Node>),
    RepeatConsec(u32, Box<Node>),
    RepeatRange(Range, Box<Node>),
    RepeatGoto(u32, Box<Node>),
    RepeatNonConsec(u32, Box<Node>),
    ImplOverlap(Box<Node>, Box<Node>),
    ImplNonOverlap(Box<Node>, Box<Node>),
    PropNot(Box<Node>),
    PropAnd(Box<Node>, Box<Node>),
    PropOr(Box<Node>, Box<Node>),
    Until(Box<Node>, Box<Node>),
    Within(Box<Node>, Box<Node>),
    LocalVarDecl(String, Box<Node>),
    LocalVarAssign {
        seq: Box<Node>,
        var: String,
        value: Box<Node>,
    },
}

impl Node {
    pub fn atom(name: impl Into<String>) -> Node {
        Node::Atom(name.into())
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            Node::Atom(_) => NodeKind::Atom,
            Node::Not(_) => NodeKind::Not,
            Node::And(..) => NodeKind::And,
            Node::Or(..) => NodeKind::Or,
            Node::Rel(..) => NodeKind::RelOp,
            Node::Sample(_) => NodeKind::SysFunc,
            Node::Delay(..) => NodeKind::Delay,
            Node::DelayRange(..) => NodeKind::DelayRange,
            Node::Concat(..) => NodeKind::SeqConcat,
            Node::RepeatConsec(..) => NodeKind::RepeatConsec,
            Node::RepeatRange(..) => NodeKind::RepeatRange,
            Node::RepeatGoto(..) => NodeKind::RepeatGoto,
            Node::RepeatNonConsec(..) => NodeKind::RepeatNonConsec,
            Node::ImplOverlap(..) => NodeKind::ImplOverlap,
            Node::ImplNonOverlap(..) => NodeKind::ImplNonOverlap,
            Node::PropNot(_) => NodeKind::PropNot,
            Node::PropAnd(..) => NodeKind::PropAnd,
            Node::PropOr(..) => NodeKind::PropOr,
            Node::Until(..) => NodeKind::Until,
            Node::Within(..) => NodeKind::Within,
            Node::LocalVarDecl(..) => NodeKind::LocalVarDecl,
            Node::LocalVarAssign { .. } => NodeKind::LocalVarAssign,
        }
    }

    pub fn children(&self) -> Vec<&Node> {
        match self {
            Node::Atom(_) | Node::Sample(_) => vec![],
            Node::Not(x)
            | Node::Delay(_, x)
            | Node::DelayRange(_, x)
            | Node::RepeatConsec(_, x)
            | Node::RepeatRange(_, x)
            | Node::RepeatGoto(_, x)
            | Node::RepeatNonConsec(_, x)
            | Node::PropNot(x)
            | Node::LocalVarDecl(_, x) => vec![x],
            Node::And(a, b)
            | Node::Or(a, b)
            | Node::Rel(_, a, b)
            | Node::Concat(_, a, b)
            | Node::ImplOverlap(a, b)
            | Node::ImplNonOverlap(a, b)
            | Node::PropAnd(a, b)
            | Node::PropOr(a, b)
            | Node::Until(a, b)
            | Node::Within(a, b) => vec![a, b],
            Node::LocalVarAssign { seq, value, .. } => vec![seq, value],
        }
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn sort(&self) -> Sort {
        match self {
            Node::Atom(_) | Node::Not(_) | Node::And(..) | Node::Or(..) | Node::Rel(..) | Node::Sample(_) => {
                Sort::Bool
            }
            Node::Delay(..)
            | Node::DelayRange(..)
            | Node::Concat(..)
            | Node::RepeatConsec(..)
            | Node::RepeatRange(..)
            | Node::RepeatGoto(..)
            | Node::RepeatNonConsec(..)
            | Node::Within(..)
            | Node::LocalVarAssign { .. } => Sort::Seq,
            Node::ImplOverlap(..)
            | Node::ImplNonOverlap(..)
            | Node::PropNot(_)
            | Node::PropAnd(..)
            | Node::PropOr(..)
            | Node::Until(..) => Sort::Prop,
            Node::LocalVarDecl(_, body) => body.sort(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Node)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    pub fn contains_kind(&self, kind: NodeKind) -> bool {
        let mut found = false;
        self.walk(&mut |n| found |= n.kind() == kind);
        found
    }

    /// True when the tree uses local variables, which the equivalence
    /// checker does not model.
    pub fn uses_local_vars(&self) -> bool {
        self.contains_kind(NodeKind::LocalVarDecl) || self.contains_kind(NodeKind::LocalVarAssign)
    }

    fn payload(&self) -> Option<Payload<'_>> {
        Some(match self {
            Node::Atom(name) => Payload::Name(name),
            Node::Sample(call) => Payload::Call {
                func: call.func.name(),
                arg: &call.arg,
                cycles: call.cycles,
            },
            Node::Rel(op, ..) => Payload::Op(op.as_str()),
            Node::Delay(n, _) | Node::RepeatConsec(n, _) | Node::RepeatGoto(n, _) | Node::RepeatNonConsec(n, _) => {
                Payload::Count(*n)
            }
            Node::DelayRange(r, _) | Node::RepeatRange(r, _) => Payload::Bounds(bounds(r)),
            Node::Concat(DelaySpec::Fixed(n), ..) => Payload::Count(*n),
            Node::Concat(DelaySpec::Range(r), ..) => Payload::Bounds(bounds(r)),
            Node::LocalVarDecl(name, _) | Node::LocalVarAssign { var: name, .. } => Payload::Name(name),
            _ => return None,
        })
    }
}

fn bounds(r: &Range) -> [Option<u32>; 2] {
    [
        Some(r.lo),
        match r.hi {
            Upper::Finite(hi) => Some(hi),
            Upper::Unbounded => None,
        },
    ]
}

#[derive(Serialize)]
#[serde(untagged)]
enum Payload<'a> {
    Name(&'a str),
    Op(&'static str),
    Count(u32),
    /// `[lo, hi]`; `null` for an unbounded upper end.
    Bounds([Option<u32>; 2]),
    Call {
        func: &'static str,
        arg: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        cycles: Option<u32>,
    },
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let payload = self.payload();
        let children = self.children();
        let mut len = 1;
        if payload.is_some() {
            len += 1;
        }
        if !children.is_empty() {
            len += 1;
        }
        let mut st = serializer.serialize_struct("Node", len)?;
        st.serialize_field("kind", self.kind().name())?;
        if let Some(p) = payload {
            st.serialize_field("payload", &p)?;
        }
        if !children.is_empty() {
            st.serialize_field("children", &children)?;
        }
        st.end()
    }
}

/// One clocked assertion: `@(edge clk) [disable iff (expr)] property`.
#[derive(Debug, Clone)]
pub struct AssertionUnit {
    pub clock: Clock,
    pub disable: Option<Node>,
    pub body: Node,
    pub source: String,
}

impl AssertionUnit {
    /// Local variables declared at the head of the body.
    pub fn declared_locals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut node = &self.body;
        while let Node::LocalVarDecl(name, inner) = node {
            out.push(name.as_str());
            node = inner;
        }
        out
    }
}

/// Units compare by tree; the original source text is ignored.
impl PartialEq for AssertionUnit {
    fn eq(&self, other: &Self) -> bool {
        self.clock == other.clock && self.disable == other.disable && self.body == other.body
    }
}

impl Eq for AssertionUnit {}

impl Serialize for AssertionUnit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AssertionUnit", 4)?;
        st.serialize_field("clock", &self.clock)?;
        st.serialize_field("disable", &self.disable)?;
        st.serialize_field("body", &self.body)?;
        st.serialize_field("source", &self.source)?;
        st.end()
    }
}
