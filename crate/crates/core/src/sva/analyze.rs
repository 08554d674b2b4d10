use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ast::{AssertionUnit, Clock, Node, NodeKind};

/// Difficulty tier derived from AST depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    D1,
    D2,
    D3,
    D4,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::D1, Tier::D2, Tier::D3, Tier::D4];

    /// Depths of four and beyond share the top tier.
    pub fn from_depth(depth: usize) -> Tier {
        match depth {
            0 | 1 => Tier::D1,
            2 => Tier::D2,
            3 => Tier::D3,
            _ => Tier::D4,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::D1 => "D1",
            Tier::D2 => "D2",
            Tier::D3 => "D3",
            Tier::D4 => "D4",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "D1" | "d1" => Ok(Tier::D1),
            "D2" | "d2" => Ok(Tier::D2),
            "D3" | "d3" => Ok(Tier::D3),
            "D4" | "d4" => Ok(Tier::D4),
            _ => Err(format!("unknown tier '{s}' (expected D1..D4)")),
        }
    }
}

/// Construct families that make up a category label, in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ImplOv,
    ImplNov,
    Delay,
    RepConsec,
    RepGoto,
    RepNonconsec,
    Sampling,
    Until,
    Within,
    Lvar,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::ImplOv,
        Family::ImplNov,
        Family::Delay,
        Family::RepConsec,
        Family::RepGoto,
        Family::RepNonconsec,
        Family::Sampling,
        Family::Until,
        Family::Within,
        Family::Lvar,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Family::ImplOv => "impl_ov",
            Family::ImplNov => "impl_nov",
            Family::Delay => "delay",
            Family::RepConsec => "rep_consec",
            Family::RepGoto => "rep_goto",
            Family::RepNonconsec => "rep_nonconsec",
            Family::Sampling => "sampling",
            Family::Until => "until",
            Family::Within => "within",
            Family::Lvar => "lvar",
        }
    }

    pub fn of(kind: NodeKind) -> Option<Family> {
        Some(match kind {
            NodeKind::ImplOverlap => Family::ImplOv,
            NodeKind::ImplNonOverlap => Family::ImplNov,
            NodeKind::Delay | NodeKind::DelayRange | NodeKind::SeqConcat => Family::Delay,
            NodeKind::RepeatConsec | NodeKind::RepeatRange => Family::RepConsec,
            NodeKind::RepeatGoto => Family::RepGoto,
            NodeKind::RepeatNonConsec => Family::RepNonconsec,
            NodeKind::SysFunc => Family::Sampling,
            NodeKind::Until => Family::Until,
            NodeKind::Within => Family::Within,
            NodeKind::LocalVarDecl | NodeKind::LocalVarAssign => Family::Lvar,
            _ => return None,
        })
    }
}

/// Label used when no construct family is present.
pub const BOOLEAN_CATEGORY: &str = "bool";

/// Category label for a set of families: `|`-joined in fixed order.
pub fn category_label(families: &BTreeSet<Family>) -> String {
    if families.is_empty() {
        return BOOLEAN_CATEGORY.to_string();
    }
    families.iter().map(|f| f.label()).collect::<Vec<_>>().join("|")
}

/// Signals and structure extracted from one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisProfile {
    pub clock: Clock,
    /// Canonical text of the disable condition.
    pub disable: Option<String>,
    pub disable_signals: BTreeSet<String>,
    pub signals: BTreeSet<String>,
    pub locals: BTreeSet<String>,
    pub sysfuncs: BTreeSet<String>,
    pub op_counts: BTreeMap<NodeKind, usize>,
    pub depth: usize,
    pub tier: Tier,
    pub category: String,
}

impl AnalysisProfile {
    /// Every name an annotation may mention: design signals, disable
    /// signals, and the clock.
    pub fn allowed_names(&self) -> BTreeSet<String> {
        let mut all = self.signals.clone();
        all.extend(self.disable_signals.iter().cloned());
        all.insert(self.clock.signal.clone());
        all
    }

    pub fn families(&self) -> BTreeSet<Family> {
        self.op_counts.keys().filter_map(|k| Family::of(*k)).collect()
    }
}

fn collect_names(node: &Node, out: &mut BTreeSet<String>) {
    node.walk(&mut |n| match n {
        Node::Atom(name) => {
            out.insert(name.clone());
        }
        Node::Sample(call) => {
            out.insert(call.arg.clone());
        }
        Node::LocalVarAssign { var, .. } | Node::LocalVarDecl(var, _) => {
            out.insert(var.clone());
        }
        _ => {}
    });
}

/// Extracts the profile of a well-formed unit.
///
/// Each identifier lands in exactly one bucket, checked in this order:
/// clock, disable condition, local variable, design signal.
pub fn analyze(unit: &AssertionUnit) -> AnalysisProfile {
    let clock_name = &unit.clock.signal;

    let mut disable_signals = BTreeSet::new();
    if let Some(cond) = &unit.disable {
        collect_names(cond, &mut disable_signals);
    }
    disable_signals.remove(clock_name);

    let mut locals = BTreeSet::new();
    unit.body.walk(&mut |n| {
        if let Node::LocalVarDecl(name, _) | Node::LocalVarAssign { var: name, .. } = n {
            locals.insert(name.clone());
        }
    });
    locals.retain(|v| v != clock_name && !disable_signals.contains(v));

    let mut signals = BTreeSet::new();
    collect_names(&unit.body, &mut signals);
    signals.retain(|s| s != clock_name && !disable_signals.contains(s) && !locals.contains(s));

    let mut sysfuncs = BTreeSet::new();
    let mut op_counts = BTreeMap::new();
    unit.body.walk(&mut |n| {
        *op_counts.entry(n.kind()).or_insert(0) += 1;
        if let Node::Sample(call) = n {
            sysfuncs.insert(call.func.name().to_string());
        }
    });

    let families = op_counts.keys().filter_map(|k| Family::of(*k)).collect();
    let depth = unit.body.depth();
    AnalysisProfile {
        clock: unit.clock.clone(),
        disable: unit.disable.as_ref().map(|d| d.to_string()),
        disable_signals,
        signals,
        locals,
        sysfuncs,
        op_counts,
        depth,
        tier: Tier::from_depth(depth),
        category: category_label(&families),
    }
}
