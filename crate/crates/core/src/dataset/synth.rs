//! Seeded synthesis of assertion corpora with exact depth tiers.

use std::collections::{BTreeMap, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::DatasetRecord;
use crate::annotate::describe;
use crate::equiv::{free_signals, temporal_span};
use crate::sva::{
    analyze, normalize, parse, AssertionUnit, Clock, DelaySpec, Edge, Family, Node, Range, RelOp, SampleCall,
    SampleFn, Sort, Tier, Upper,
};

/// Weight key for the plain logical connectives (`!`, `&&`, `||`, `==`,
/// `!=`, `not`, `and`, `or`).
pub const BOOLEAN_OPS: &str = "bool";

const SIGNAL_POOL: [&str; 8] = ["req", "ack", "gnt", "valid", "ready", "busy", "done", "err"];
const DISABLE_SIGNAL: &str = "rst";
const MAX_DEPTH: usize = 8;
const ATTEMPTS: usize = 2000;
const UNIQUE_ATTEMPTS: usize = 50;

/// What to synthesize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    /// Number of records per tier.
    pub tiers: BTreeMap<Tier, usize>,
    /// Relative weight per construct family label, plus [`BOOLEAN_OPS`].
    /// A weight of zero disables the construct.
    pub weights: BTreeMap<String, f64>,
    /// Size of the signal pool (1 to 8).
    pub max_signals: usize,
    /// Largest delay, repetition, or `$past` count.
    pub max_delay: u32,
    /// Upper bound on signals × trace length for each property, so every
    /// record stays checkable.
    pub budget: usize,
    /// Probability of adding `disable iff (rst)`.
    pub disable_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let mut weights: BTreeMap<String, f64> = Family::ALL
            .iter()
            .filter(|f| **f != Family::Lvar)
            .map(|f| (f.label().to_string(), 1.0))
            .collect();
        weights.insert(BOOLEAN_OPS.into(), 1.0);
        SynthSpec {
            tiers: Tier::ALL.iter().map(|t| (*t, 10)).collect(),
            weights,
            max_signals: 3,
            max_delay: 3,
            budget: 18,
            disable_rate: 0.2,
        }
    }
}

impl SynthSpec {
    pub fn with_counts(counts: [usize; 4]) -> Self {
        SynthSpec {
            tiers: Tier::ALL.iter().copied().zip(counts).collect(),
            ..SynthSpec::default()
        }
    }

    fn weight(&self, key: &str) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("tier {tier} cannot be reached with the enabled constructs")]
    Unsatisfiable { tier: Tier },
    #[error("no property for tier {tier} fits the budget of {budget}")]
    Budget { tier: Tier, budget: usize },
    #[error("unknown construct weight '{0}'")]
    UnknownWeight(String),
    #[error("invalid weight {value} for '{key}'")]
    BadWeight { key: String, value: f64 },
    #[error("local variables cannot be synthesized")]
    LocalVariables,
    #[error("max_signals must be between 1 and {}", SIGNAL_POOL.len())]
    Signals,
    #[error("synthesized text failed its self-check: {0}")]
    SelfCheck(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Con {
    Atom,
    Sample,
    Not,
    And,
    Or,
    Rel,
    Delay,
    DelayRange,
    Concat,
    Repeat,
    RepeatRange,
    Goto,
    NonConsec,
    Within,
    ImplOv,
    ImplNov,
    Until,
    PropNot,
    PropAnd,
    PropOr,
}

use Sort::{Bool, Prop, Seq};

impl Con {
    const ALL: [Con; 20] = [
        Con::Atom,
        Con::Sample,
        Con::Not,
        Con::And,
        Con::Or,
        Con::Rel,
        Con::Delay,
        Con::DelayRange,
        Con::Concat,
        Con::Repeat,
        Con::RepeatRange,
        Con::Goto,
        Con::NonConsec,
        Con::Within,
        Con::ImplOv,
        Con::ImplNov,
        Con::Until,
        Con::PropNot,
        Con::PropAnd,
        Con::PropOr,
    ];

    fn key(self) -> Option<&'static str> {
        Some(match self {
            Con::Atom => return None,
            Con::Sample => Family::Sampling.label(),
            Con::Not | Con::And | Con::Or | Con::Rel | Con::PropNot | Con::PropAnd | Con::PropOr => BOOLEAN_OPS,
            Con::Delay | Con::DelayRange | Con::Concat => Family::Delay.label(),
            Con::Repeat | Con::RepeatRange => Family::RepConsec.label(),
            Con::Goto => Family::RepGoto.label(),
            Con::NonConsec => Family::RepNonconsec.label(),
            Con::Within => Family::Within.label(),
            Con::ImplOv => Family::ImplOv.label(),
            Con::ImplNov => Family::ImplNov.label(),
            Con::Until => Family::Until.label(),
        })
    }

    fn sort(self) -> Sort {
        match self {
            Con::Atom | Con::Sample | Con::Not | Con::And | Con::Or | Con::Rel => Bool,
            Con::Delay
            | Con::DelayRange
            | Con::Concat
            | Con::Repeat
            | Con::RepeatRange
            | Con::Goto
            | Con::NonConsec
            | Con::Within => Seq,
            Con::ImplOv | Con::ImplNov | Con::Until | Con::PropNot | Con::PropAnd | Con::PropOr => Prop,
        }
    }

    fn slots(self) -> &'static [Sort] {
        match self {
            Con::Atom | Con::Sample => &[],
            Con::Not => &[Bool],
            Con::And | Con::Or | Con::Rel => &[Bool, Bool],
            Con::Delay | Con::DelayRange | Con::Repeat | Con::RepeatRange => &[Seq],
            Con::Concat | Con::Within => &[Seq, Seq],
            Con::Goto | Con::NonConsec => &[Bool],
            Con::ImplOv | Con::ImplNov => &[Seq, Prop],
            Con::Until | Con::PropAnd | Con::PropOr => &[Prop, Prop],
            Con::PropNot => &[Prop],
        }
    }
}

fn sort_index(s: Sort) -> usize {
    match s {
        Bool => 0,
        Seq => 1,
        Prop => 2,
    }
}

struct Gen<'a, R> {
    spec: &'a SynthSpec,
    rng: &'a mut R,
    enabled: Vec<(Con, f64)>,
    /// `reach[sort][d]`: some node of at most that sort has depth exactly `d`.
    reach: [[bool; MAX_DEPTH + 1]; 3],
}

fn capabilities(enabled: &[(Con, f64)]) -> [[bool; MAX_DEPTH + 1]; 3] {
    let mut reach = [[false; MAX_DEPTH + 1]; 3];
    for row in reach.iter_mut() {
        row[1] = true;
    }
    for d in 2..=MAX_DEPTH {
        for (con, _) in enabled {
            if con.slots().iter().any(|s| reach[sort_index(*s)][d - 1]) {
                reach[sort_index(con.sort())][d] = true;
            }
        }
        reach[1][d] |= reach[0][d];
        reach[2][d] |= reach[1][d];
    }
    reach
}

fn enabled_constructs(spec: &SynthSpec) -> Result<Vec<(Con, f64)>, SynthError> {
    for (key, &value) in &spec.weights {
        let known = key == BOOLEAN_OPS || Family::ALL.iter().any(|f| f.label() == key);
        if !known {
            return Err(SynthError::UnknownWeight(key.clone()));
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(SynthError::BadWeight {
                key: key.clone(),
                value,
            });
        }
        if key == Family::Lvar.label() && value > 0.0 {
            return Err(SynthError::LocalVariables);
        }
    }
    if spec.max_signals == 0 || spec.max_signals > SIGNAL_POOL.len() {
        return Err(SynthError::Signals);
    }
    Ok(Con::ALL
        .iter()
        .filter_map(|&c| {
            let w = c.key().map_or(1.0, |k| spec.weight(k));
            (w > 0.0).then_some((c, w))
        })
        .collect())
}

fn depths_for(tier: Tier) -> &'static [usize] {
    match tier {
        Tier::D1 => &[1],
        Tier::D2 => &[2],
        Tier::D3 => &[3],
        Tier::D4 => &[4, 5],
    }
}

impl<R: Rng> Gen<'_, R> {
    fn can(&self, sort: Sort, d: usize) -> bool {
        d <= MAX_DEPTH && self.reach[sort_index(sort)][d]
    }

    fn signal(&mut self) -> String {
        SIGNAL_POOL[..self.spec.max_signals]
            .choose(self.rng)
            .expect("pool is non-empty")
            .to_string()
    }

    fn small(&mut self, lo: u32) -> u32 {
        self.rng.random_range(lo..=self.spec.max_delay.max(lo))
    }

    fn range(&mut self, lo_min: u32) -> Range {
        let top = self.spec.max_delay.max(lo_min + 1);
        let lo = self.rng.random_range(lo_min..top);
        let hi = if self.rng.random_bool(0.1) {
            Upper::Unbounded
        } else {
            Upper::Finite(self.rng.random_range(lo + 1..=top))
        };
        Range { lo, hi }
    }

    /// A node of sort at most `slot` whose depth is exactly `d`.
    fn node(&mut self, slot: Sort, d: usize) -> Node {
        let choices: Vec<(Con, f64)> = self
            .enabled
            .iter()
            .copied()
            .filter(|(c, _)| c.sort() <= slot)
            .filter(|(c, _)| {
                if d == 1 {
                    c.slots().is_empty()
                } else {
                    c.slots().iter().any(|s| self.can(*s, d - 1))
                }
            })
            .collect();
        let con = choices
            .choose_weighted(self.rng, |c| c.1)
            .expect("depth was checked reachable")
            .0;
        let slots = con.slots();
        let deep: Vec<usize> = (0..slots.len()).filter(|&i| self.can(slots[i], d - 1)).collect();
        let deep = deep.choose(self.rng).copied().unwrap_or(0);
        let kids: Vec<Node> = slots
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let depth = if i == deep {
                    d - 1
                } else {
                    let options: Vec<usize> = (1..d).filter(|&k| self.can(s, k)).collect();
                    *options.choose(self.rng).expect("depth 1 is always reachable")
                };
                self.node(s, depth)
            })
            .collect();
        self.build(con, kids)
    }

    fn build(&mut self, con: Con, kids: Vec<Node>) -> Node {
        let mut kids = kids.into_iter().map(Box::new);
        let mut next = || kids.next().expect("arity matches slots");
        match con {
            Con::Atom => Node::Atom(self.signal()),
            Con::Sample => {
                let func = *[SampleFn::Rose, SampleFn::Fell, SampleFn::Stable, SampleFn::Past]
                    .choose(self.rng)
                    .expect("non-empty");
                let cycles = (func == SampleFn::Past && self.rng.random_bool(0.5)).then(|| self.small(1));
                Node::Sample(SampleCall {
                    func,
                    arg: self.signal(),
                    cycles,
                })
            }
            Con::Not => Node::Not(next()),
            Con::And => Node::And(next(), next()),
            Con::Or => Node::Or(next(), next()),
            Con::Rel => {
                let op = if self.rng.random_bool(0.5) { RelOp::Eq } else { RelOp::Ne };
                Node::Rel(op, next(), next())
            }
            Con::Delay => Node::Delay(self.small(1), next()),
            Con::DelayRange => Node::DelayRange(self.range(0), next()),
            Con::Concat => {
                let spec = if self.rng.random_bool(0.7) {
                    DelaySpec::Fixed(self.small(0))
                } else {
                    DelaySpec::Range(self.range(0))
                };
                Node::Concat(spec, next(), next())
            }
            Con::Repeat => Node::RepeatConsec(self.small(1), next()),
            Con::RepeatRange => Node::RepeatRange(self.range(1), next()),
            Con::Goto => Node::RepeatGoto(self.small(1), next()),
            Con::NonConsec => Node::RepeatNonConsec(self.small(1), next()),
            Con::Within => Node::Within(next(), next()),
            Con::ImplOv => Node::ImplOverlap(next(), next()),
            Con::ImplNov => Node::ImplNonOverlap(next(), next()),
            Con::Until => Node::Until(next(), next()),
            Con::PropNot => Node::PropNot(next()),
            Con::PropAnd => Node::PropAnd(next(), next()),
            Con::PropOr => Node::PropOr(next(), next()),
        }
    }

    fn unit(&mut self, tier: Tier) -> Result<AssertionUnit, SynthError> {
        let depths: Vec<usize> = depths_for(tier).iter().copied().filter(|&d| self.can(Prop, d)).collect();
        if depths.is_empty() {
            return Err(SynthError::Unsatisfiable { tier });
        }
        for _ in 0..ATTEMPTS {
            let d = *depths.choose(self.rng).expect("non-empty");
            let body = self.node(Prop, d);
            let disable = self
                .rng
                .random_bool(self.spec.disable_rate.clamp(0.0, 1.0))
                .then(|| Node::atom(DISABLE_SIGNAL));
            let mut unit = AssertionUnit {
                clock: Clock {
                    edge: Edge::Posedge,
                    signal: "clk".into(),
                },
                disable,
                body,
                source: String::new(),
            };
            let cost = free_signals(&unit).len() * (temporal_span(&unit.body) + 2);
            if cost > self.spec.budget {
                continue;
            }
            unit.source = normalize(&unit);
            return Ok(unit);
        }
        Err(SynthError::Budget {
            tier,
            budget: self.spec.budget,
        })
    }
}

/// Draws one property of the requested tier.
pub fn synth_unit(spec: &SynthSpec, tier: Tier, rng: &mut impl Rng) -> Result<AssertionUnit, SynthError> {
    let enabled = enabled_constructs(spec)?;
    let reach = capabilities(&enabled);
    Gen {
        spec,
        rng,
        enabled,
        reach,
    }
    .unit(tier)
}

/// Generates a corpus: tiers in order D1 to D4, each with its requested
/// count. Descriptions come from the offline rule-based describer. Every
/// record is re-parsed and re-analyzed before it is accepted.
///
/// ```
/// use svakit::dataset::{synth_corpus, SynthSpec};
///
/// let corpus = synth_corpus(&SynthSpec::with_counts([2, 2, 2, 2]), 7).unwrap();
/// assert_eq!(corpus.len(), 8);
/// ```
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<Vec<DatasetRecord>, SynthError> {
    let enabled = enabled_constructs(spec)?;
    let reach = capabilities(&enabled);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gen = Gen {
        spec,
        rng: &mut rng,
        enabled,
        reach,
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (&tier, &count) in &spec.tiers {
        for _ in 0..count {
            let mut unit = gen.unit(tier)?;
            for _ in 0..UNIQUE_ATTEMPTS {
                if !seen.contains(&unit.source) {
                    break;
                }
                unit = gen.unit(tier)?;
            }
            seen.insert(unit.source.clone());
            let reparsed = parse(&unit.source).map_err(|_| SynthError::SelfCheck(unit.source.clone()))?;
            if reparsed != unit || analyze(&reparsed).tier != tier || normalize(&reparsed) != unit.source {
                return Err(SynthError::SelfCheck(unit.source));
            }
            out.push(DatasetRecord::from_unit(&reparsed, describe(&reparsed)));
        }
    }
    Ok(out)
}

/// Scales family weights by refinement multipliers. A family takes the
/// largest multiplier among the categories that contain it; the
/// `bool` category scales the plain connectives.
pub fn apply_refinement(spec: &SynthSpec, multipliers: &[(String, f64)]) -> SynthSpec {
    let mut out = spec.clone();
    for (key, weight) in out.weights.iter_mut() {
        let m = multipliers
            .iter()
            .filter(|(cat, _)| cat.split('|').any(|f| f == key))
            .map(|(_, m)| *m)
            .fold(1.0, f64::max);
        *weight *= m;
    }
    out
}
