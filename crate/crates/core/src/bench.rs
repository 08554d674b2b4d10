//! Benchmark execution, metrics, error attribution, refinement signals,
//! and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetRecord;
use crate::equiv::{check_relation, BoundConfig, EquivError, Relation};
use crate::gate::{check_syntax, classify_error, ErrorLabel, SyntaxCheck};
use crate::generate::{generate_with_repair, GenConfig, GenError, DEFAULT_GENERATION_TEMPLATE};
use crate::provider::Provider;
use crate::sva::{Diagnostic, Tier};

/// Floor used for SER when computing refinement multipliers.
pub const SER_EPSILON: f64 = 1e-6;

/// Relation columns of the attribution matrix, in report order.
pub const RELATION_COLUMNS: [Relation; 4] = [
    Relation::Equivalent,
    Relation::Widening,
    Relation::Tightening,
    Relation::NoRelationship,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub bound: BoundConfig,
    pub template: String,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            bound: BoundConfig::default(),
            template: DEFAULT_GENERATION_TEMPLATE.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SyntaxOutcome {
    Pass,
    Fail { label: ErrorLabel, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResult {
    pub id: String,
    pub tier: Tier,
    pub category: String,
    pub candidate: String,
    pub syntax: SyntaxOutcome,
    /// Present exactly when the syntax check passed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relation: Option<Relation>,
    pub rounds: usize,
}

impl SampleResult {
    pub fn passed(&self) -> bool {
        self.syntax == SyntaxOutcome::Pass
    }
}

fn failure(diags: &[Diagnostic]) -> SyntaxOutcome {
    SyntaxOutcome::Fail {
        label: classify_error(diags).unwrap_or(ErrorLabel::OtherError),
        message: diags.first().map(|d| d.to_string()).unwrap_or_default(),
    }
}

/// Relation for a checker outcome. A clocking mismatch means the candidate
/// cannot be the reference property; anything the checker cannot decide
/// is reported as unsupported.
fn relation_of(result: Result<crate::equiv::RelationReport, EquivError>) -> Relation {
    match result {
        Ok(r) => r.relation,
        Err(EquivError::ClockMismatch { .. }) => Relation::NoRelationship,
        Err(_) => Relation::Unsupported,
    }
}

/// Scores one record with a single generation pass.
pub fn run_sample(record: &DatasetRecord, provider: &dyn Provider, cfg: &BenchConfig) -> SampleResult {
    let gen_cfg = GenConfig::single_pass(cfg.template.clone());
    let mut result = SampleResult {
        id: record.id.clone(),
        tier: record.profile.tier,
        category: record.profile.category.clone(),
        candidate: String::new(),
        syntax: SyntaxOutcome::Pass,
        relation: None,
        rounds: 1,
    };
    let outcome = match generate_with_repair(&record.svad, provider, &gen_cfg) {
        Ok(o) => o,
        Err(e) => {
            let diag = Diagnostic {
                line: 1,
                col: 1,
                token: String::new(),
                message: match e {
                    GenError::Provider { source, .. } => format!("provider request failed: {source}"),
                    other => other.to_string(),
                },
            };
            result.syntax = failure(&[diag]);
            return result;
        }
    };
    result.rounds = outcome.rounds;
    result.candidate = outcome.final_text.clone();
    let gen_unit = match check_syntax(&outcome.final_text) {
        SyntaxCheck::Pass(u) => u,
        SyntaxCheck::Fail(_) => {
            result.syntax = failure(outcome.last_diagnostics());
            return result;
        }
    };
    let relation = match crate::sva::parse(&record.sva) {
        Ok(reference) => relation_of(check_relation(&gen_unit, &reference, &cfg.bound)),
        Err(_) => Relation::Unsupported,
    };
    result.relation = Some(relation);
    result
}

/// Runs every record in single-pass mode. Requests run concurrently up to
/// the provider's in-flight limit; results are sorted by record id.
pub fn run_benchmark(records: &[DatasetRecord], provider: &dyn Provider, cfg: &BenchConfig) -> Vec<SampleResult> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let threads = provider.max_in_flight().clamp(1, cores);
    let run = || -> Vec<SampleResult> { records.par_iter().map(|r| run_sample(r, provider, cfg)).collect() };
    let mut results = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(_) => records.iter().map(|r| run_sample(r, provider, cfg)).collect(),
    };
    results.sort_by(|a, b| a.id.cmp(&b.id));
    results
}

/// One JSON object per line, in the given order.
pub fn results_to_jsonl(results: &[SampleResult]) -> String {
    results
        .iter()
        .map(|r| serde_json::to_string(r).expect("result serializes") + "\n")
        .collect()
}

/// Parses [`results_to_jsonl`] output. Blank lines are skipped; errors
/// carry the 1-based line number.
pub fn results_from_jsonl(text: &str) -> Result<Vec<SampleResult>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}

/// Scope of a statistics row.
pub const OVERALL: &str = "overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierStats {
    /// `D1` to `D4`, or `overall`.
    pub tier: String,
    pub n_total: usize,
    pub n_pass: usize,
    pub n_eq: usize,
    pub spr: f64,
    /// Absent when nothing passed the syntax check.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ser: Option<f64>,
}

impl TierStats {
    pub fn from_counts(tier: impl Into<String>, n_total: usize, n_pass: usize, n_eq: usize) -> Self {
        TierStats {
            tier: tier.into(),
            n_total,
            n_pass,
            n_eq,
            spr: if n_total == 0 { 0.0 } else { n_pass as f64 / n_total as f64 },
            ser: (n_pass > 0).then(|| n_eq as f64 / n_pass as f64),
        }
    }
}

fn counts<'a>(results: impl Iterator<Item = &'a SampleResult>) -> (usize, usize, usize) {
    results.fold((0, 0, 0), |(t, p, e), r| {
        (
            t + 1,
            p + usize::from(r.passed()),
            e + usize::from(r.relation == Some(Relation::Equivalent)),
        )
    })
}

/// Per-tier statistics for the tiers present, followed by the overall row.
///
/// ```
/// use svakit::bench::{compute_metrics, SampleResult, SyntaxOutcome};
/// use svakit::equiv::Relation;
/// use svakit::sva::Tier;
///
/// let sample = |pass: bool, eq: bool| SampleResult {
///     id: String::new(),
///     tier: Tier::D1,
///     category: "bool".into(),
///     candidate: String::new(),
///     syntax: if pass { SyntaxOutcome::Pass } else {
///         SyntaxOutcome::Fail { label: svakit::gate::ErrorLabel::OtherError, message: String::new() }
///     },
///     relation: pass.then(|| if eq { Relation::Equivalent } else { Relation::Widening }),
///     rounds: 1,
/// };
/// let mut results: Vec<_> = (0..6).map(|_| sample(true, true)).collect();
/// results.extend((0..2).map(|_| sample(true, false)));
/// results.extend((0..2).map(|_| sample(false, false)));
/// let stats = compute_metrics(&results);
/// assert_eq!(stats[0].spr, 0.8);
/// assert_eq!(stats[0].ser, Some(0.75));
/// ```
pub fn compute_metrics(results: &[SampleResult]) -> Vec<TierStats> {
    let mut out = Vec::new();
    for tier in Tier::ALL {
        let (t, p, e) = counts(results.iter().filter(|r| r.tier == tier));
        if t > 0 {
            out.push(TierStats::from_counts(tier.as_str(), t, p, e));
        }
    }
    let (t, p, e) = counts(results.iter());
    out.push(TierStats::from_counts(OVERALL, t, p, e));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntaxRow {
    pub tier: Tier,
    pub n_total: usize,
    /// Failure rate per label over all samples, in [`ErrorLabel::ALL`] order.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub tier: Tier,
    /// Syntax-passed samples with a decided relation.
    pub n_decided: usize,
    /// Rates in [`RELATION_COLUMNS`] order.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub syntax: Vec<SyntaxRow>,
    pub relation: Vec<RelationRow>,
    /// Syntax-passed samples the checker could not decide, per tier.
    pub unsupported: BTreeMap<Tier, usize>,
}

/// Builds both attribution matrices. Tiers without samples (or without
/// decided relations) have no row.
pub fn attribution(results: &[SampleResult]) -> Attribution {
    let mut syntax = Vec::new();
    let mut relation = Vec::new();
    let mut unsupported = BTreeMap::new();
    for tier in Tier::ALL {
        let rows: Vec<&SampleResult> = results.iter().filter(|r| r.tier == tier).collect();
        if rows.is_empty() {
            continue;
        }
        let mut label_counts = [0usize; 7];
        for r in &rows {
            if let SyntaxOutcome::Fail { label, .. } = &r.syntax {
                label_counts[label.index()] += 1;
            }
        }
        let n = rows.len() as f64;
        syntax.push(SyntaxRow {
            tier,
            n_total: rows.len(),
            rates: label_counts.iter().map(|&c| c as f64 / n).collect(),
        });
        let unsup = rows.iter().filter(|r| r.relation == Some(Relation::Unsupported)).count();
        if unsup > 0 {
            unsupported.insert(tier, unsup);
        }
        let decided: Vec<Relation> = rows
            .iter()
            .filter_map(|r| r.relation)
            .filter(|r| *r != Relation::Unsupported)
            .collect();
        if !decided.is_empty() {
            let d = decided.len() as f64;
            relation.push(RelationRow {
                tier,
                n_decided: decided.len(),
                rates: RELATION_COLUMNS
                    .iter()
                    .map(|c| decided.iter().filter(|r| *r == c).count() as f64 / d)
                    .collect(),
            });
        }
    }
    Attribution {
        syntax,
        relation,
        unsupported,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("SER threshold must be in (0, 1], got {0}")]
    Threshold(f64),
    #[error("minimum support must be at least 1")]
    Support,
    #[error("csv error: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSignal {
    pub category: String,
    pub support: usize,
    pub ser: f64,
    pub multiplier: f64,
}

/// Weight multipliers for structure categories that score below the SER
/// threshold: `clamp(threshold / max(SER, ε), 1, 4)`. Categories with fewer
/// than `min_support` samples are skipped; a category with no syntax-valid
/// sample counts as SER 0.
pub fn refinement_signal(
    results: &[SampleResult],
    ser_threshold: f64,
    min_support: usize,
) -> Result<Vec<RefinementSignal>, BenchError> {
    if !(ser_threshold > 0.0 && ser_threshold <= 1.0) {
        return Err(BenchError::Threshold(ser_threshold));
    }
    if min_support == 0 {
        return Err(BenchError::Support);
    }
    let mut by_cat: BTreeMap<&str, Vec<&SampleResult>> = BTreeMap::new();
    for r in results {
        by_cat.entry(&r.category).or_default().push(r);
    }
    Ok(by_cat
        .into_iter()
        .filter(|(_, rows)| rows.len() >= min_support)
        .filter_map(|(cat, rows)| {
            let (t, p, e) = counts(rows.into_iter());
            let ser = if p == 0 { 0.0 } else { e as f64 / p as f64 };
            (ser < ser_threshold).then(|| RefinementSignal {
                category: cat.to_string(),
                support: t,
                ser,
                multiplier: (ser_threshold / ser.max(SER_EPSILON)).clamp(1.0, 4.0),
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub stats: Vec<TierStats>,
    pub attribution: Attribution,
    pub bound: BoundConfig,
    pub refinement: Vec<RefinementSignal>,
}

impl BenchmarkReport {
    pub fn build(
        results: &[SampleResult],
        bound: BoundConfig,
        ser_threshold: f64,
        min_support: usize,
    ) -> Result<Self, BenchError> {
        Ok(BenchmarkReport {
            stats: compute_metrics(results),
            attribution: attribution(results),
            bound,
            refinement: refinement_signal(results, ser_threshold, min_support)?,
        })
    }
}

/// Rounds to one decimal place.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Mean of percentage-point deltas, rounded to one decimal.
///
/// ```
/// assert_eq!(svakit::bench::mean_delta(&[24.5, 26.0, 17.5]), Some(22.7));
/// ```
pub fn mean_delta(deltas: &[f64]) -> Option<f64> {
    (!deltas.is_empty()).then(|| round1(deltas.iter().sum::<f64>() / deltas.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineDelta {
    pub name: String,
    /// SER difference in percentage points, ours minus baseline, per tier,
    /// rounded to one decimal.
    pub ser_delta_pp: BTreeMap<String, f64>,
    /// Mean over D2 to D4, rounded to one decimal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_d2_d4: Option<f64>,
}

/// SER deltas against a named baseline for the tiers both sides report.
pub fn baseline_delta(ours: &[TierStats], name: &str, baseline: &[TierStats]) -> BaselineDelta {
    let mut raw = BTreeMap::new();
    for s in ours {
        let other = baseline.iter().find(|b| b.tier == s.tier);
        if let (Some(a), Some(b)) = (s.ser, other.and_then(|b| b.ser)) {
            raw.insert(s.tier.clone(), (a - b) * 100.0);
        }
    }
    let hard: Vec<f64> = ["D2", "D3", "D4"].iter().filter_map(|t| raw.get(*t).copied()).collect();
    BaselineDelta {
        name: name.to_string(),
        mean_d2_d4: if hard.len() == 3 { mean_delta(&hard) } else { None },
        ser_delta_pp: raw.into_iter().map(|(t, d)| (t, round1(d))).collect(),
    }
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    #[serde(flatten)]
    report: &'a BenchmarkReport,
    baselines: Vec<BaselineDelta>,
}

fn pct(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

/// Renders the report as (JSON, Markdown). Baselines add SER delta columns.
pub fn render_report(report: &BenchmarkReport, baselines: &[(String, Vec<TierStats>)]) -> (String, String) {
    let deltas: Vec<BaselineDelta> = baselines
        .iter()
        .map(|(name, stats)| baseline_delta(&report.stats, name, stats))
        .collect();
    let json = serde_json::to_string_pretty(&ReportDocument {
        report,
        baselines: deltas.clone(),
    })
    .expect("report serializes");

    let mut md = String::new();
    md.push_str("# Benchmark report\n\n");
    md.push_str("| Tier | N | Pass | Eq | SPR (%) | SER (%) |");
    for d in &deltas {
        let _ = write!(md, " Δ SER vs {} (pp) |", d.name);
    }
    md.push_str("\n|---|---|---|---|---|---|");
    md.push_str(&"---|".repeat(deltas.len()));
    md.push('\n');
    for s in &report.stats {
        let ser = s.ser.map_or("n/a".to_string(), pct);
        let _ = write!(md, "| {} | {} | {} | {} | {} | {} |", s.tier, s.n_total, s.n_pass, s.n_eq, pct(s.spr), ser);
        for d in &deltas {
            let cell = d.ser_delta_pp.get(&s.tier).map_or("n/a".to_string(), |v| format!("{:+.1}", v));
            let _ = write!(md, " {cell} |");
        }
        md.push('\n');
    }
    for d in &deltas {
        if let Some(m) = d.mean_d2_d4 {
            let _ = writeln!(md, "\nMean SER improvement over {} on D2 to D4: {:+.1} pp", d.name, m);
        }
    }

    md.push_str("\n## Syntax error attribution (share of all samples)\n\n| Label |");
    for row in &report.attribution.syntax {
        let _ = write!(md, " {} |", row.tier);
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(report.attribution.syntax.len()));
    md.push('\n');
    for label in ErrorLabel::ALL {
        let _ = write!(md, "| {label} |");
        for row in &report.attribution.syntax {
            let _ = write!(md, " {} |", pct(row.rates[label.index()]));
        }
        md.push('\n');
    }

    md.push_str("\n## Relation attribution (share of syntax-passed samples)\n\n| Relation |");
    for row in &report.attribution.relation {
        let _ = write!(md, " {} |", row.tier);
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(report.attribution.relation.len()));
    md.push('\n');
    for (i, rel) in RELATION_COLUMNS.iter().enumerate() {
        let _ = write!(md, "| {rel} |");
        for row in &report.attribution.relation {
            let _ = write!(md, " {} |", pct(row.rates[i]));
        }
        md.push('\n');
    }
    if !report.attribution.unsupported.is_empty() {
        md.push_str("\nUndecided by the checker:");
        for (tier, n) in &report.attribution.unsupported {
            let _ = write!(md, " {tier}: {n};");
        }
        md.pop();
        md.push('\n');
    }

    let _ = write!(
        md,
        "\nBounds: trace length {}, cap {} signal-cycles.\n",
        report.bound.length.map_or("auto".to_string(), |l| l.to_string()),
        report.bound.cap
    );
    if !report.refinement.is_empty() {
        md.push_str("\n## Refinement signals\n\n| Category | Support | SER (%) | Weight × |\n|---|---|---|---|\n");
        for r in &report.refinement {
            let _ = writeln!(md, "| {} | {} | {} | {:.2} |", r.category, r.support, pct(r.ser), r.multiplier);
        }
    }
    (json, md)
}

/// Attribution matrices as CSV text: (syntax, relation). Rows are labels or
/// relations; columns are tiers.
pub fn attribution_csv(attr: &Attribution) -> Result<(String, String), BenchError> {
    let csv_err = |e: csv::Error| BenchError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string()];
    header.extend(attr.syntax.iter().map(|r| r.tier.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for label in ErrorLabel::ALL {
        let mut rec = vec![label.to_string()];
        rec.extend(attr.syntax.iter().map(|r| r.rates[label.index()].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let syntax = String::from_utf8(w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))?)
        .expect("csv output is utf-8");

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["relation".to_string()];
    header.extend(attr.relation.iter().map(|r| r.tier.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, rel) in RELATION_COLUMNS.iter().enumerate() {
        let mut rec = vec![rel.to_string()];
        rec.extend(attr.relation.iter().map(|r| r.rates[i].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let relation = String::from_utf8(w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok((syntax, relation))
}
