//! Acceptance suite: one PASS/FAIL line per criterion on stdout.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Mutex;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use svakit::annotate::SvadText;
use svakit::bench::{
    attribution, baseline_delta, compute_metrics, mean_delta, refinement_signal, run_benchmark, BenchConfig,
    SampleResult, SyntaxOutcome, TierStats, RELATION_COLUMNS,
};
use svakit::dataset::{dedup, stratified_split, synth_corpus, write_jsonl, BenchFraction, DatasetRecord, SynthSpec};
use svakit::equiv::{check_relation, sequence_matches, BoundConfig, Relation, Trace, View};
use svakit::gate::{check_syntax, classify_error, ErrorLabel, SyntaxCheck};
use svakit::generate::{generate_with_repair, render_prompt, GenConfig, GenStatus, DEFAULT_GENERATION_TEMPLATE};
use svakit::provider::{Provider, ProviderError, ReplayProvider};
use svakit::sva::{analyze, normalize, parse, AssertionUnit, Diagnostic, Tier};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const VALID: &str = include_str!("fixtures/valid.sva");
const MALFORMED: &str = include_str!("fixtures/malformed.tsv");

fn fixture_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn unit(text: &str) -> AssertionUnit {
    parse(text).unwrap_or_else(|d| panic!("{text}: {d:?}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn synth(counts: [usize; 4], seed: u64) -> Vec<DatasetRecord> {
    synth_corpus(&SynthSpec::with_counts(counts), seed).expect("corpus synthesizes")
}

// Direct semantics for the four relation fixtures. Signals are indexed
// a=0, b=1, c=2; an obligation past the end of the trace is met.
fn direct_pass(name: &str, t: &[[bool; 3]]) -> bool {
    let len = t.len();
    (0..len).all(|i| {
        let (a, b, c) = (t[i][0], t[i][1], t[i][2]);
        match name {
            "a |=> b" | "a |-> ##1 b" => !a || i + 1 >= len || t[i + 1][1],
            "a |-> b && c" => !a || (b && c),
            "a |-> b || c" => !a || b || c,
            "a |-> b" => !a || b,
            "a |-> c" => !a || c,
            _ => unreachable!("{name}"),
        }
    })
}

fn direct_relation(gen: &str, reference: &str, len: usize) -> Relation {
    let (mut gen_only, mut ref_only) = (false, false);
    for idx in 0u32..(1 << (3 * len)) {
        let t: Vec<[bool; 3]> = (0..len)
            .map(|c| [0, 1, 2].map(|s| idx >> (s * len + c) & 1 == 1))
            .collect();
        match (direct_pass(gen, &t), direct_pass(reference, &t)) {
            (true, false) => gen_only = true,
            (false, true) => ref_only = true,
            _ => {}
        }
    }
    match (gen_only, ref_only) {
        (false, false) => Relation::Equivalent,
        (false, true) => Relation::Tightening,
        (true, false) => Relation::Widening,
        (true, true) => Relation::NoRelationship,
    }
}

fn clocked(body: &str) -> AssertionUnit {
    unit(&format!("@(posedge clk) {body}"))
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let corpus = synth([50, 50, 60, 60], 1);
    let bound = BoundConfig {
        length: None,
        cap: 18,
    };
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|r| {
            let u = unit(&r.sva);
            match check_relation(&u, &u, &bound) {
                Ok(rep) if rep.relation == Relation::Equivalent => None,
                other => Some(format!("{}: {other:?}", r.sva)),
            }
        })
        .collect();
    ensure(failures.is_empty(), || format!("reflexivity failed: {:?}", &failures[..failures.len().min(3)]))?;
    let elapsed = started.elapsed().as_secs_f64();

    let fixtures = [
        ("a |=> b", "a |-> ##1 b", Relation::Equivalent),
        ("a |-> b && c", "a |-> b", Relation::Tightening),
        ("a |-> b || c", "a |-> b", Relation::Widening),
        ("a |-> b", "a |-> c", Relation::NoRelationship),
    ];
    for (gen, reference, expected) in fixtures {
        let got = check_relation(&clocked(gen), &clocked(reference), &BoundConfig::default())
            .map_err(|e| e.to_string())?
            .relation;
        ensure(got == expected, || format!("{gen} vs {reference}: {got}, expected {expected}"))?;
        for len in 2..=4 {
            let cfg = BoundConfig {
                length: Some(len),
                cap: 22,
            };
            let got = check_relation(&clocked(gen), &clocked(reference), &cfg).map_err(|e| e.to_string())?;
            let oracle = direct_relation(gen, reference, len);
            ensure(got.relation == oracle, || {
                format!("{gen} vs {reference} at L={len}: {} but direct evaluation gives {oracle}", got.relation)
            })?;
        }
    }
    ensure(elapsed < 60.0, || format!("reflexive suite took {elapsed:.1} s"))?;
    Ok(format!(
        "{} reflexive properties Equivalent in {elapsed:.1} s; 4 fixtures match direct evaluation at L=2..4",
        corpus.len()
    ))
}

fn criterion_2() -> Outcome {
    let spec = SynthSpec {
        max_signals: 2,
        budget: 12,
        disable_rate: 0.0,
        ..SynthSpec::with_counts([60, 80, 80, 80])
    };
    let corpus = synth_corpus(&spec, 2).map_err(|e| e.to_string())?;
    let bodies: Vec<String> = corpus.iter().map(|r| unit(&r.sva).body.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pairs = Vec::new();
    for _ in 0..700 {
        let x = &bodies[rng.random_range(0..bodies.len())];
        let y = &bodies[rng.random_range(0..bodies.len())];
        let gen = match rng.random_range(0..3) {
            0 => y.clone(),
            1 => format!("({x}) and ({y})"),
            _ => format!("({x}) or ({y})"),
        };
        pairs.push((clocked(x), clocked(&gen)));
    }
    let bound = BoundConfig {
        length: None,
        cap: 16,
    };
    let tally = Mutex::new(BTreeMap::<String, usize>::new());
    let violations: Vec<String> = pairs
        .par_iter()
        .filter_map(|(p, q)| {
            let fwd = check_relation(p, q, &bound).map(|r| r.relation);
            let back = check_relation(q, p, &bound).map(|r| r.relation);
            let key = match &fwd {
                Ok(r) => r.to_string(),
                Err(_) => "error".to_string(),
            };
            *tally.lock().unwrap().entry(key).or_default() += 1;
            match (fwd, back) {
                (Ok(a), Ok(b)) if a.swapped() == b => None,
                (Err(a), Err(b)) if a == b => None,
                (f, b) => Some(format!("{p} / {q}: {f:?} vs {b:?}")),
            }
        })
        .collect();
    ensure(violations.is_empty(), || format!("{} violations, e.g. {}", violations.len(), violations[0]))?;
    let tally = tally.into_inner().unwrap();
    let decided: usize = tally.iter().filter(|(k, _)| *k != "error").map(|(_, v)| v).sum();
    ensure(decided >= 500, || format!("only {decided} decided pairs"))?;
    for rel in RELATION_COLUMNS {
        ensure(tally.get(rel.as_str()).copied().unwrap_or(0) > 0, || format!("no {rel} pair in {tally:?}"))?;
    }
    Ok(format!("{decided} decided pairs, zero violations; {tally:?}"))
}

struct Chain {
    lead: Option<(u32, u32)>,
    atoms: Vec<(usize, bool)>,
    gaps: Vec<(u32, u32)>,
}

impl Chain {
    fn random(rng: &mut ChaCha8Rng) -> Chain {
        let n = rng.random_range(1..=3);
        let range = |rng: &mut ChaCha8Rng| {
            let lo = rng.random_range(0..=3);
            (lo, lo + rng.random_range(0..=2))
        };
        Chain {
            lead: rng.random_bool(0.3).then(|| range(rng)),
            atoms: (0..n).map(|_| (rng.random_range(0..2), rng.random_bool(0.3))).collect(),
            gaps: (1..n).map(|_| range(rng)).collect(),
        }
    }

    fn text(&self) -> String {
        let delay = |(lo, hi): (u32, u32)| {
            if lo == hi {
                format!("##{lo} ")
            } else {
                format!("##[{lo}:{hi}] ")
            }
        };
        let atom = |(s, neg): (usize, bool)| format!("{}{}", if neg { "!" } else { "" }, ["a", "b"][s]);
        let mut out = self.lead.map(delay).unwrap_or_default();
        out.push_str(&atom(self.atoms[0]));
        for (g, a) in self.gaps.iter().zip(&self.atoms[1..]) {
            out.push(' ');
            out.push_str(&delay(*g));
            out.push_str(&atom(*a));
        }
        out
    }

    // Every choice of delays, each atom checked at the cycle the choice
    // places it on.
    fn ends(&self, trace: &Trace, start: usize, view: View) -> BTreeSet<usize> {
        let holds = |(s, neg): (usize, bool), cycle: usize| {
            if cycle >= trace.len() {
                return view == View::Weak;
            }
            trace.values[cycle][trace.signal_index(["a", "b"][s]).unwrap()] != neg
        };
        let mut frontier: BTreeSet<usize> = match self.lead {
            None => [start].into(),
            Some((lo, hi)) => (lo..=hi).map(|d| start + d as usize).collect(),
        };
        frontier.retain(|&c| holds(self.atoms[0], c));
        for (&(lo, hi), &atom) in self.gaps.iter().zip(&self.atoms[1..]) {
            frontier = frontier
                .iter()
                .flat_map(|&c| (lo..=hi).map(move |d| c + d as usize))
                .filter(|&c| holds(atom, c))
                .collect();
        }
        frontier
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chains: Vec<Chain> = (0..105).map(|_| Chain::random(&mut rng)).collect();
    let signals = vec!["a".to_string(), "b".to_string()];
    let compared = std::sync::atomic::AtomicUsize::new(0);
    let mismatches: Vec<String> = chains
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, chain)| {
            let text = chain.text();
            let node = clocked(&text).body;
            let len = 8;
            let start = i % 3;
            let mut bad = Vec::new();
            for index in 0u64..(1 << (signals.len() * len)) {
                let trace = Trace::from_index(&signals, len, index);
                for view in [View::Weak, View::Strong] {
                    let got = sequence_matches(&node, &trace, start, view).expect("chain evaluates");
                    let want = chain.ends(&trace, start, view);
                    if got.empty || got.ends.iter().copied().collect::<BTreeSet<_>>() != want {
                        bad.push(format!("{text} on trace {index} ({view:?}): {:?} vs {want:?}", got.ends));
                    }
                }
            }
            compared.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            bad.into_iter().take(1)
        })
        .collect();
    ensure(mismatches.is_empty(), || format!("{} mismatches, e.g. {}", mismatches.len(), mismatches[0]))?;
    Ok(format!(
        "{} delay chains agree with direct enumeration on all 2^16 traces (S=2, L=8), both views",
        compared.into_inner()
    ))
}

fn echo_provider(records: &[DatasetRecord]) -> ReplayProvider {
    let mut replay = ReplayProvider::default();
    for r in records {
        let prompt = render_prompt(&r.svad, None, DEFAULT_GENERATION_TEMPLATE).unwrap();
        replay.insert(&prompt, vec![format!("```systemverilog\n{}\n```", r.sva)]);
    }
    replay
}

fn criterion_4() -> Outcome {
    let records = synth([10, 10, 10, 10], 4);
    let results = run_benchmark(&records, &echo_provider(&records), &BenchConfig::default());
    ensure(results.len() == 40, || format!("{} results", results.len()))?;
    let stats = compute_metrics(&results);
    let tiers: Vec<&str> = stats.iter().map(|s| s.tier.as_str()).collect();
    ensure(tiers == ["D1", "D2", "D3", "D4", "overall"], || format!("tiers {tiers:?}"))?;
    for s in &stats {
        ensure(s.spr == 1.0 && s.ser == Some(1.0), || format!("{s:?}"))?;
    }
    Ok("40 echoed references: SPR 1.0 and SER 1.0 on D1 to D4".into())
}

fn sample(tier: Tier, category: &str, syntax: Option<ErrorLabel>, relation: Option<Relation>) -> SampleResult {
    SampleResult {
        id: String::new(),
        tier,
        category: category.into(),
        candidate: String::new(),
        syntax: match syntax {
            None => SyntaxOutcome::Pass,
            Some(label) => SyntaxOutcome::Fail {
                label,
                message: String::new(),
            },
        },
        relation,
        rounds: 1,
    }
}

fn criterion_5() -> Outcome {
    // (tier, failed, eq, widening, tightening, none, unsupported)
    let plan = [
        (Tier::D1, 1, 7, 1, 0, 1, 0),
        (Tier::D2, 3, 6, 0, 2, 0, 1),
        (Tier::D3, 5, 2, 1, 1, 1, 0),
        (Tier::D4, 4, 0, 0, 0, 0, 0),
    ];
    let mut results = Vec::new();
    for &(tier, fail, eq, wid, tight, none, unsup) in &plan {
        results.extend((0..fail).map(|_| sample(tier, "x", Some(ErrorLabel::TimingOperatorError), None)));
        for (n, rel) in [
            (eq, Relation::Equivalent),
            (wid, Relation::Widening),
            (tight, Relation::Tightening),
            (none, Relation::NoRelationship),
            (unsup, Relation::Unsupported),
        ] {
            results.extend((0..n).map(|_| sample(tier, "x", None, Some(rel))));
        }
    }
    let stats = compute_metrics(&results);
    let mut totals = (0, 0, 0);
    for &(tier, fail, eq, wid, tight, none, unsup) in &plan {
        let passed = eq + wid + tight + none + unsup;
        let total = fail + passed;
        totals = (totals.0 + total, totals.1 + passed, totals.2 + eq);
        let s = stats.iter().find(|s| s.tier == tier.as_str()).ok_or("missing tier")?;
        let want_ser = (passed > 0).then(|| eq as f64 / passed as f64);
        ensure(
            (s.n_total, s.n_pass, s.n_eq) == (total, passed, eq)
                && s.spr == passed as f64 / total as f64
                && s.ser == want_ser,
            || format!("{s:?}"),
        )?;
    }
    let overall = stats.last().unwrap();
    ensure(
        overall.spr == totals.1 as f64 / totals.0 as f64 && overall.ser == Some(totals.2 as f64 / totals.1 as f64),
        || format!("{overall:?}"),
    )?;
    let attr = attribution(&results);
    for row in &attr.relation {
        let sum: f64 = row.rates.iter().sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("{} row sums to {sum}", row.tier))?;
    }
    ensure(attr.relation.len() == 3, || "D4 has no passed sample and must have no relation row".into())?;
    let d2 = &attr.relation[1];
    ensure(d2.rates == vec![0.75, 0.0, 0.25, 0.0], || format!("D2 row {:?}", d2.rates))?;

    let mean = mean_delta(&[24.5, 26.0, 17.5]);
    ensure(mean == Some(22.7), || format!("mean {mean:?}"))?;
    let as_stats = |sers: [f64; 3]| -> Vec<TierStats> {
        ["D2", "D3", "D4"]
            .iter()
            .zip(sers)
            .map(|(t, ser)| TierStats {
                tier: t.to_string(),
                n_total: 1000,
                n_pass: 1000,
                n_eq: 0,
                spr: 1.0,
                ser: Some(ser),
            })
            .collect()
    };
    let via_report = baseline_delta(&as_stats([0.892, 0.791, 0.621]), "b", &as_stats([0.647, 0.531, 0.446]));
    ensure(via_report.mean_d2_d4 == Some(22.7), || format!("{via_report:?}"))?;

    let mut ser_02 = vec![sample(Tier::D2, "rep", None, Some(Relation::Equivalent))];
    ser_02.extend((0..4).map(|_| sample(Tier::D2, "rep", None, Some(Relation::Widening))));
    let sig = refinement_signal(&ser_02, 0.5, 1).map_err(|e| e.to_string())?;
    ensure(sig.len() == 1 && (sig[0].multiplier - 2.5).abs() < 1e-12, || format!("{sig:?}"))?;
    Ok("SPR/SER exact on 4 tiers and overall; relation rows sum to 1; deltas 24.5/26.0/17.5 average +22.7".into())
}

fn criterion_6() -> Outcome {
    let base = synth([8, 8, 8, 8], 6);
    let mut noisy = base.clone();
    for r in &base {
        let spaced = r.sva.replace(' ', "  ");
        noisy.push(DatasetRecord::new(&spaced, SvadText::new("dup")).map_err(|e| format!("{e:?}"))?);
    }
    let once = dedup(noisy);
    let twice = dedup(once.clone());
    ensure(once == twice, || "dedup is not idempotent".into())?;
    let keys: HashSet<_> = once.iter().map(|r| r.key()).collect();
    ensure(keys.len() == once.len() && once.len() == base.len(), || {
        format!("{} records, {} keys, {} originals", once.len(), keys.len(), base.len())
    })?;

    let fraction: BenchFraction = "0.1".parse().unwrap();
    let mut checked = Vec::new();
    for (counts, seed) in [([10, 0, 0, 0], 10), ([10, 10, 10, 10], 11), ([40, 60, 50, 50], 12), ([250; 4], 13)] {
        let corpus = synth(counts, seed);
        let (train, bench) = stratified_split(&corpus, fraction, 99);
        ensure(train.len() + bench.len() == corpus.len(), || "split lost records".into())?;
        let mut strata: BTreeMap<(Tier, String), (usize, usize)> = BTreeMap::new();
        for r in &corpus {
            strata.entry((r.tier(), r.category().to_string())).or_default().0 += 1;
        }
        for r in &bench {
            strata.get_mut(&(r.tier(), r.category().to_string())).unwrap().1 += 1;
        }
        for ((tier, cat), (n, b)) in &strata {
            let ideal = *n as f64 / 10.0;
            ensure((*b as f64 - ideal).abs() <= 1.0, || format!("{tier}/{cat}: {b} of {n} in bench"))?;
        }
        let target = fraction.of(corpus.len());
        ensure(bench.len() == target, || format!("bench {} of {}, expected {target}", bench.len(), corpus.len()))?;

        let bytes = |seed: u64| {
            let (t, b) = stratified_split(&corpus, fraction, seed);
            let mut buf = Vec::new();
            write_jsonl(&mut buf, &t).unwrap();
            write_jsonl(&mut buf, &b).unwrap();
            buf
        };
        ensure(bytes(99) == bytes(99), || "split is not byte-reproducible".into())?;
        checked.push(format!("{}→{}/{}", corpus.len(), train.len(), bench.len()));
    }
    Ok(format!("dedup idempotent with unique keys; splits {}", checked.join(", ")))
}

fn criterion_7() -> Outcome {
    let corpus = synth([60, 60, 60, 60], 7);
    let hand: Vec<&str> = fixture_lines(VALID).collect();
    ensure(hand.len() >= 50, || format!("{} hand fixtures", hand.len()))?;
    let texts = corpus.iter().map(|r| r.sva.as_str()).chain(hand.iter().copied());
    let mut n = 0;
    for text in texts {
        let first = parse(text).map_err(|d| format!("{text}: {}", d[0]))?;
        let canon = normalize(&first);
        let second = parse(&canon).map_err(|d| format!("{canon}: {}", d[0]))?;
        ensure(normalize(&second) == canon, || format!("{text} → {canon} → {}", normalize(&second)))?;
        ensure(
            format!("{:?}", first.body) == format!("{:?}", second.body) && first.disable == second.disable,
            || format!("tree changed through {canon}"),
        )?;
        n += 1;
    }
    let depths = [
        ("@(posedge clk) a |-> b", 2, Tier::D2),
        ("@(posedge clk) disable iff (rst) $rose(a) |-> b", 2, Tier::D2),
        ("@(posedge clk) a", 1, Tier::D1),
        ("@(posedge clk) a ##1 b |-> not (c until d)", 4, Tier::D4),
    ];
    for (text, depth, tier) in depths {
        let p = analyze(&unit(text));
        ensure((p.depth, p.tier) == (depth, tier), || format!("{text}: depth {} tier {}", p.depth, p.tier))?;
    }
    Ok(format!("{n} properties ({} hand-written) are fixed points; 4 depth examples match", hand.len()))
}

fn criterion_8() -> Outcome {
    let mut per_label: BTreeMap<ErrorLabel, usize> = BTreeMap::new();
    for line in fixture_lines(MALFORMED) {
        let (label, text) = line.split_once('\t').ok_or_else(|| format!("bad fixture line {line}"))?;
        let expected: ErrorLabel = label.parse().map_err(|_| format!("unknown label {label}"))?;
        let SyntaxCheck::Fail(diags) = check_syntax(text) else {
            return Err(format!("{text} passed the syntax check"));
        };
        let got = classify_error(&diags).map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("{text}: {got}, expected {expected} ({})", diags[0]))?;
        let again = match check_syntax(text) {
            SyntaxCheck::Fail(d) => classify_error(&d).ok(),
            SyntaxCheck::Pass(_) => None,
        };
        ensure(again == Some(got), || format!("{text}: nondeterministic"))?;
        *per_label.entry(expected).or_default() += 1;
    }
    for label in ErrorLabel::ALL {
        let n = per_label.get(&label).copied().unwrap_or(0);
        ensure(n >= 3, || format!("only {n} fixtures for {label}"))?;
    }
    let total: usize = per_label.values().sum();
    Ok(format!("{total} malformed fixtures, 100% agreement, at least 3 per label"))
}

/// Remembers every prompt it forwards.
struct Recording<P> {
    inner: P,
    prompts: Mutex<Vec<String>>,
}

impl<P: Provider> Provider for Recording<P> {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        self.prompts.lock().unwrap().push(prompt.to_string());
        self.inner.complete(prompt)
    }
}

fn diags_of(text: &str) -> Vec<Diagnostic> {
    check_syntax(text).diagnostics().to_vec()
}

fn criterion_9() -> Outcome {
    let svad = SvadText::new("whenever `a` is high, `b` is high one cycle later");
    let fence = |s: &str| format!("```\n{s}\n```");
    let template = DEFAULT_GENERATION_TEMPLATE;

    // Round 2 is only answered if its prompt carries round 1's diagnostics
    // exactly as the checker produced them.
    let bad = "@(posedge clk) a |-> |=> b";
    let good = "@(posedge clk) a |=> b";
    let mut replay = ReplayProvider::default();
    replay.insert(&render_prompt(&svad, None, template).unwrap(), vec![fence(bad)]);
    let round2 = render_prompt(&svad, Some((bad, &diags_of(bad))), template).unwrap();
    replay.insert(&round2, vec![fence(good)]);
    let out = generate_with_repair(&svad, &replay, &GenConfig::default()).map_err(|e| e.to_string())?;
    ensure(out.status == GenStatus::Passed && out.rounds == 2, || format!("{:?} after {}", out.status, out.rounds))?;
    for d in &diags_of(bad) {
        ensure(out.log[1].prompt.contains(&d.to_string()), || format!("round 2 lacks `{d}`"))?;
    }

    let bads = ["@(posedge clk) a ##", "@(posedge clk) a & b", "@(posedge clk) $rose(a, b)"];
    let mut replay = ReplayProvider::default();
    let mut prior: Option<&str> = None;
    for b in bads {
        let d = prior.map(diags_of).unwrap_or_default();
        let prompt = render_prompt(&svad, prior.map(|p| (p, d.as_slice())), template).unwrap();
        replay.insert(&prompt, vec![fence(b)]);
        prior = Some(b);
    }
    let cfg = GenConfig::default();
    let out = generate_with_repair(&svad, &replay, &cfg).map_err(|e| e.to_string())?;
    ensure(out.status == GenStatus::Exhausted && out.rounds == 3 && out.rounds <= cfg.max_rounds, || {
        format!("{:?} after {}", out.status, out.rounds)
    })?;
    let labels: Vec<_> = out.log.iter().map(|r| r.label).collect();
    let expected = [
        Some(ErrorLabel::TimingOperatorError),
        Some(ErrorLabel::BooleanOperatorError),
        Some(ErrorLabel::SvaKeywordFunctionError),
    ];
    ensure(labels == expected, || format!("labels {labels:?}"))?;
    for k in 1..out.log.len() {
        for d in &out.log[k - 1].diagnostics {
            ensure(out.log[k].prompt.contains(&d.to_string()), || format!("round {} lacks `{d}`", k + 1))?;
        }
    }

    let single = Recording {
        inner: svakit::provider::FixedProvider::new([fence(bad)]),
        prompts: Mutex::new(Vec::new()),
    };
    let out = generate_with_repair(&svad, &single, &GenConfig::single_pass(template)).map_err(|e| e.to_string())?;
    ensure(out.rounds == 1, || format!("single pass took {} rounds", out.rounds))?;
    let records = synth([3, 3, 3, 3], 9);
    let _ = run_benchmark(&records, &single, &BenchConfig::default());
    let prompts = single.prompts.into_inner().unwrap();
    ensure(prompts.len() == 13, || format!("{} requests for 13 single-pass runs", prompts.len()))?;
    ensure(prompts.iter().all(|p| !p.contains("rejected") && !p.contains(bad)), || {
        "single-pass prompt embedded feedback".into()
    })?;
    Ok("replayed repair passes in round 2 with verbatim feedback; 3-round exhaustion; single pass never feeds back".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("equivalence identity suite", criterion_1),
        ("relation symmetry", criterion_2),
        ("delay-chain oracle", criterion_3),
        ("echo benchmark", criterion_4),
        ("metrics arithmetic", criterion_5),
        ("dataset pipeline", criterion_6),
        ("parser round-trip", criterion_7),
        ("error taxonomy", criterion_8),
        ("repair loop", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match &result {
            Ok(detail) => println!("PASS  {}. {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => println!("FAIL  {}. {name} ({secs:.1} s): {why}", i + 1),
        }
        if result.is_err() {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
