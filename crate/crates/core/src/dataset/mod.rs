//! Corpus records, JSON Lines storage, de-duplication, and the stratified
//! train/bench split.

mod synth;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotate::{build_cot, CotStep, CotTrace, SvadText};
use crate::sva::{analyze, normalize, parse, AnalysisProfile, AssertionUnit, Diagnostic, Tier};

pub use synth::{apply_refinement, synth_corpus, synth_unit, SynthError, SynthSpec, BOOLEAN_OPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Bench,
    #[default]
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Bench => "bench",
            Split::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One aligned (SVA, description, reasoning trace) entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub id: String,
    pub sva: String,
    pub normalized: String,
    pub svad: SvadText,
    pub cot: CotTrace,
    pub profile: AnalysisProfile,
    pub split: Split,
}

/// Fields that make two records the same property.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DedupKey {
    pub normalized: String,
    pub clock: String,
    pub disable: Option<String>,
}

impl DatasetRecord {
    /// Builds a record from already-parsed source.
    pub fn from_unit(unit: &AssertionUnit, svad: SvadText) -> Self {
        let normalized = normalize(unit);
        let profile = analyze(unit);
        let id = record_id(&normalized, &profile);
        DatasetRecord {
            id,
            sva: unit.source.clone(),
            normalized,
            svad,
            cot: build_cot(unit),
            profile,
            split: Split::Unassigned,
        }
    }

    pub fn new(sva: &str, svad: SvadText) -> Result<Self, Vec<Diagnostic>> {
        Ok(DatasetRecord::from_unit(&parse(sva)?, svad))
    }

    pub fn key(&self) -> DedupKey {
        DedupKey {
            normalized: self.normalized.clone(),
            clock: self.profile.clock.to_string(),
            disable: self.profile.disable.clone(),
        }
    }

    pub fn tier(&self) -> Tier {
        self.profile.tier
    }

    pub fn category(&self) -> &str {
        &self.profile.category
    }
}

/// First 16 hex digits of SHA-256 over the normalized text, clock, and
/// disable condition.
fn record_id(normalized: &str, profile: &AnalysisProfile) -> String {
    let mut h = Sha256::new();
    h.update(normalized.as_bytes());
    h.update([0x1f]);
    h.update(profile.clock.to_string().as_bytes());
    h.update([0x1f]);
    h.update(profile.disable.as_deref().unwrap_or("").as_bytes());
    hex::encode(h.finalize())[..16].to_string()
}

/// Keeps the first record for each key, preserving order.
///
/// ```
/// use svakit::annotate::SvadText;
/// use svakit::dataset::{dedup, DatasetRecord};
///
/// let recs: Vec<_> = ["@(posedge clk) a|->b", "@(posedge clk) a |-> b", "@(negedge clk) a |-> b"]
///     .iter()
///     .map(|s| DatasetRecord::new(s, SvadText::new("x")).unwrap())
///     .collect();
/// assert_eq!(dedup(recs).len(), 2);
/// ```
pub fn dedup(records: Vec<DatasetRecord>) -> Vec<DatasetRecord> {
    let mut seen = HashSet::new();
    records.into_iter().filter(|r| seen.insert(r.key())).collect()
}

/// A fraction in (0, 1), kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BenchFraction {
    num: u64,
    den: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid fraction '{0}': expected a value strictly between 0 and 1, like 0.1 or 1/10")]
pub struct FractionError(String);

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl BenchFraction {
    pub fn new(num: u64, den: u64) -> Result<Self, FractionError> {
        if den == 0 || num == 0 || num >= den {
            return Err(FractionError(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(BenchFraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `n × self`, rounded half up.
    pub fn of(self, n: usize) -> usize {
        let n = n as u128;
        ((2 * n * self.num as u128 + self.den as u128) / (2 * self.den as u128)) as usize
    }

    /// Signed distance `count - n × self`, scaled by the denominator.
    fn excess(self, count: usize, n: usize) -> i128 {
        count as i128 * self.den as i128 - n as i128 * self.num as i128
    }
}

impl Default for BenchFraction {
    fn default() -> Self {
        BenchFraction { num: 1, den: 10 }
    }
}

impl FromStr for BenchFraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FractionError(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return BenchFraction::new(n, d).map_err(|_| bad());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) || !(int.is_empty() || int == "0") {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let num = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        BenchFraction::new(num, den).map_err(|_| bad())
    }
}

impl fmt::Display for BenchFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl TryFrom<String> for BenchFraction {
    type Error = FractionError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BenchFraction> for String {
    fn from(f: BenchFraction) -> String {
        f.to_string()
    }
}

/// Splits records into (train, bench), stratified by (tier, category).
///
/// Each stratum gets `round(n × fraction)` bench records. When those
/// roundings do not add up to the rounded global target, the largest strata
/// whose rounding went the other way absorb the difference, one record
/// each. Membership is drawn with a seeded shuffle; both outputs keep input
/// order.
pub fn stratified_split(
    records: &[DatasetRecord],
    fraction: BenchFraction,
    seed: u64,
) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    let mut strata: BTreeMap<(Tier, &str), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry((r.tier(), r.category())).or_default().push(i);
    }
    let mut quota: Vec<(usize, usize)> = strata
        .values()
        .map(|members| (members.len(), fraction.of(members.len())))
        .collect();
    let target = fraction.of(records.len()) as i64;
    let mut diff = target - quota.iter().map(|q| q.1 as i64).sum::<i64>();
    let mut order: Vec<usize> = (0..quota.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(quota[i].0));
    for i in order {
        if diff == 0 {
            break;
        }
        let (n, b) = quota[i];
        let e = fraction.excess(b, n);
        if diff > 0 && e < 0 && b < n {
            quota[i].1 += 1;
            diff -= 1;
        } else if diff < 0 && e > 0 && b > 0 {
            quota[i].1 -= 1;
            diff += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_bench = vec![false; records.len()];
    for (members, (_, b)) in strata.values().zip(&quota) {
        let mut members = members.clone();
        members.sort_by(|&x, &y| records[x].id.cmp(&records[y].id).then(x.cmp(&y)));
        members.shuffle(&mut rng);
        for &i in &members[..*b] {
            in_bench[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut bench = Vec::new();
    for (r, b) in records.iter().zip(in_bench) {
        let mut r = r.clone();
        if b {
            r.split = Split::Bench;
            bench.push(r);
        } else {
            r.split = Split::Train;
            train.push(r);
        }
    }
    (train, bench)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CotLine {
    intent: String,
    construct: String,
}

/// On-disk shape of a record.
#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    id: String,
    sva: String,
    normalized: String,
    svad: String,
    cot: Vec<CotLine>,
    tier: Tier,
    category: String,
    split: Split,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: sva does not parse: {}", .diagnostics.first().map(ToString::to_string).unwrap_or_default())]
    Parse { line: usize, diagnostics: Vec<Diagnostic> },
    #[error("line {line}: field '{field}' does not match the sva")]
    Inconsistent { line: usize, field: &'static str },
}

impl DatasetRecord {
    /// One JSON object, fields in the stable order
    /// `id, sva, normalized, svad, cot, tier, category, split`.
    pub fn to_json_line(&self) -> String {
        let line = RecordLine {
            id: self.id.clone(),
            sva: self.sva.clone(),
            normalized: self.normalized.clone(),
            svad: self.svad.prose.clone(),
            cot: self
                .cot
                .steps
                .iter()
                .map(|s| CotLine {
                    intent: s.intent.clone(),
                    construct: s.construct.clone(),
                })
                .collect(),
            tier: self.profile.tier,
            category: self.profile.category.clone(),
            split: self.split,
        };
        serde_json::to_string(&line).expect("record serializes")
    }

    /// Parses a line and checks every derived field against the sva.
    pub fn from_json_line(text: &str, line: usize) -> Result<Self, DatasetError> {
        let raw: RecordLine = serde_json::from_str(text).map_err(|e| DatasetError::Json {
            line,
            message: e.to_string(),
        })?;
        let unit = parse(&raw.sva).map_err(|diagnostics| DatasetError::Parse { line, diagnostics })?;
        let mut rec = DatasetRecord::from_unit(&unit, SvadText::new(raw.svad));
        let bad = |field| DatasetError::Inconsistent { line, field };
        if rec.normalized != raw.normalized {
            return Err(bad("normalized"));
        }
        if rec.id != raw.id {
            return Err(bad("id"));
        }
        if rec.profile.tier != raw.tier {
            return Err(bad("tier"));
        }
        if rec.profile.category != raw.category {
            return Err(bad("category"));
        }
        let derived: Vec<CotLine> = rec
            .cot
            .steps
            .iter()
            .map(|s| CotLine {
                intent: s.intent.clone(),
                construct: s.construct.clone(),
            })
            .collect();
        if derived != raw.cot {
            // keep an edited trace as given; node paths are unknown for it
            rec.cot = CotTrace {
                steps: raw
                    .cot
                    .into_iter()
                    .map(|c| CotStep {
                        intent: c.intent,
                        construct: c.construct,
                        path: Vec::new(),
                    })
                    .collect(),
            };
        }
        rec.split = raw.split;
        Ok(rec)
    }
}

pub fn write_jsonl(mut out: impl Write, records: &[DatasetRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Reads records, skipping blank lines.
pub fn read_jsonl(input: impl BufRead) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(DatasetRecord::from_json_line(&line, i + 1)?);
    }
    Ok(out)
}
