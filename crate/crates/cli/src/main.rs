mod config;

use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use svakit::annotate::{
    annotate_svad, build_context, build_cot, describe, AnnotateConfig, SvadText, DEFAULT_ANNOTATION_TEMPLATE,
};
use svakit::bench::{
    attribution_csv, results_from_jsonl, results_to_jsonl, run_benchmark, render_report, BenchConfig,
    BenchmarkReport, TierStats,
};
use svakit::dataset::{
    apply_refinement, dedup, read_jsonl, stratified_split, synth_corpus, write_jsonl, BenchFraction, DatasetRecord,
    SynthSpec,
};
use svakit::equiv::{check_relation, Relation};
use svakit::gate::{check_syntax, classify_error, SyntaxCheck};
use svakit::generate::{generate_with_repair, GenConfig, GenStatus, DEFAULT_GENERATION_TEMPLATE};
use svakit::provider::{from_spec, Provider};
use svakit::sva::{analyze, normalize, parse, AssertionUnit, Diagnostic, Node, Tier};

use config::CliConfig;

/// Exit code for a verdict other than the hoped-for one.
const EXIT_VERDICT: u8 = 3;

#[derive(Parser)]
#[command(name = "svakit", version, about = "SystemVerilog assertion tooling: parse, curate, generate, and check")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Shared options. Flags override environment variables, which override
/// the config file, which overrides the built-in defaults.
#[derive(Args)]
struct Global {
    /// JSON config file.
    #[arg(long, global = true, env = "SVAKIT_CONFIG")]
    config: Option<PathBuf>,
    /// Provider: `http`, `replay:<file>`, or `fixed:<file>` [default: http]
    #[arg(long, global = true, env = "SVAKIT_PROVIDER")]
    provider: Option<String>,
    /// Chat completion endpoint for the http provider.
    #[arg(long, global = true, env = "SVAKIT_ENDPOINT")]
    endpoint: Option<String>,
    /// Model name for the http provider.
    #[arg(long, global = true, env = "SVAKIT_MODEL")]
    model: Option<String>,
    /// Bearer token for the http provider.
    #[arg(long, global = true, env = "SVAKIT_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
    /// Request timeout in seconds [default: 60]
    #[arg(long, global = true, env = "SVAKIT_TIMEOUT")]
    timeout: Option<u64>,
    /// Random seed [default: 0]
    #[arg(long, global = true, env = "SVAKIT_SEED")]
    seed: Option<u64>,
    /// Trace length for equivalence checks [default: longest span + 2]
    #[arg(long, global = true, env = "SVAKIT_TRACE_LENGTH")]
    length: Option<usize>,
    /// Largest signals × cycles product for equivalence checks [default: 22]
    #[arg(long, global = true, env = "SVAKIT_CAP")]
    cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a property and print its syntax tree.
    Parse { input: PathBuf },
    /// Print the canonical form of a property.
    Normalize { input: PathBuf },
    /// Print depth, tier, category, and signals of a property.
    Analyze {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a natural-language description of a property.
    Annotate {
        input: PathBuf,
        /// Use the built-in rule-based describer instead of the provider.
        #[arg(long)]
        rule_based: bool,
        /// Print the description with its context and reasoning steps as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Dataset curation.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Syntax-check a property. Exits 3 when it fails.
    Check {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the error label for a property's diagnostics.
    Classify {
        /// Property text to parse.
        input: Option<PathBuf>,
        /// JSON list of diagnostics to classify instead.
        #[arg(long, conflicts_with = "input")]
        diagnostics: Option<PathBuf>,
    },
    /// Compare a generated property with a reference. Exits 0 on
    /// Equivalent and 3 on any other relation.
    Equiv {
        generated: PathBuf,
        reference: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a property from a description, repairing syntax errors.
    /// Exits 3 when every round fails.
    Generate {
        /// File holding the description.
        input: PathBuf,
        /// Request limit [default: 3]
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Write the per-round log as JSON.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Benchmark runs and reports.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Merge JSONL datasets and drop duplicate properties.
    Dedup {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Stratified train/bench split.
    Split {
        input: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        bench: PathBuf,
        /// Bench share, as a decimal or `n/d` [default: 0.1]
        #[arg(long)]
        fraction: Option<BenchFraction>,
    },
    /// Synthesize a corpus of properties with rule-based descriptions.
    Synth {
        #[arg(short, long)]
        output: PathBuf,
        /// Records per tier as D1,D2,D3,D4 [default: 10,10,10,10]
        #[arg(long, value_parser = parse_counts)]
        counts: Option<[usize; 4]>,
        /// JSON synthesis spec, replacing the one in the config.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Refinement signals from `bench report` to reweight the spec.
        #[arg(long)]
        refine: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Generate one candidate per record and score it.
    Run {
        /// Bench split JSONL [default: `dataset` from the config]
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Results JSONL.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Aggregate results into report.json, report.md, CSV matrices, and
    /// refinement signals.
    Report {
        results: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Baseline stats as `name=file.json` (a JSON list of tier stats).
        #[arg(long, value_parser = parse_baseline)]
        baseline: Vec<(String, PathBuf)>,
        /// SER threshold for refinement [default: 0.5]
        #[arg(long)]
        ser_threshold: Option<f64>,
        /// Minimum category support for refinement [default: 10]
        #[arg(long)]
        min_support: Option<usize>,
    },
}

fn parse_counts(s: &str) -> Result<[usize; 4], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected four comma-separated counts".to_string())
}

fn parse_baseline(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected name=file")?;
    if name.is_empty() {
        return Err("baseline name is empty".into());
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

impl Global {
    fn apply(&self, cfg: &mut CliConfig) {
        if let Some(p) = &self.provider {
            cfg.provider = p.clone();
        }
        if let Some(e) = &self.endpoint {
            cfg.http.endpoint = e.clone();
        }
        if let Some(m) = &self.model {
            cfg.http.model = m.clone();
        }
        if let Some(k) = &self.api_key {
            cfg.http.api_key = Some(k.clone());
        }
        if let Some(t) = self.timeout {
            cfg.http.timeout_secs = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(l) = self.length {
            cfg.bound.length = Some(l);
        }
        if let Some(c) = self.cap {
            cfg.bound.cap = c;
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn diag_lines(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

fn parse_file(path: &Path) -> Result<AssertionUnit> {
    let text = read_input(path)?;
    parse(text.trim()).map_err(|d| anyhow!("{} does not parse:\n{}", path.display(), diag_lines(&d).trim_end()))
}

fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_jsonl(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn write_dataset(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn outline(node: &Node, indent: usize, out: &mut String) {
    out.push_str(&format!("{:indent$}{}  {}\n", "", node.kind(), node, indent = indent * 2));
    for c in node.children() {
        outline(c, indent + 1, out);
    }
}

fn provider(cfg: &CliConfig) -> Result<Box<dyn Provider>> {
    from_spec(&cfg.provider, &cfg.http).context("setting up the provider")
}

fn run(cli: Cli, cfg: CliConfig) -> Result<u8> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Parse { input } => {
            let unit = parse_file(&input)?;
            let mut out = format!("clock  {}\n", unit.clock);
            if let Some(d) = &unit.disable {
                out.push_str(&format!("disable  {d}\n"));
            }
            outline(&unit.body, 0, &mut out);
            stdout.write_all(out.as_bytes())?;
        }
        Command::Normalize { input } => {
            let unit = parse_file(&input)?;
            writeln!(stdout, "{}", normalize(&unit))?;
        }
        Command::Analyze { input, json } => {
            let profile = analyze(&parse_file(&input)?);
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&profile)?)?;
            } else {
                let join = |s: &std::collections::BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
                writeln!(stdout, "depth: {}", profile.depth)?;
                writeln!(stdout, "tier: {}", profile.tier)?;
                writeln!(stdout, "category: {}", profile.category)?;
                writeln!(stdout, "clock: {}", profile.clock)?;
                writeln!(stdout, "signals: {}", join(&profile.signals))?;
                if let Some(d) = &profile.disable {
                    writeln!(stdout, "disable: {d}")?;
                }
                if !profile.sysfuncs.is_empty() {
                    writeln!(stdout, "sampling functions: {}", join(&profile.sysfuncs))?;
                }
                if !profile.locals.is_empty() {
                    writeln!(stdout, "local variables: {}", join(&profile.locals))?;
                }
            }
        }
        Command::Annotate { input, rule_based, json } => {
            let unit = parse_file(&input)?;
            let profile = analyze(&unit);
            let ctx = build_context(&profile);
            let cot = build_cot(&unit);
            let svad = if rule_based {
                describe(&unit)
            } else {
                let acfg = AnnotateConfig {
                    template: config::template(cfg.templates.annotation.as_deref(), DEFAULT_ANNOTATION_TEMPLATE)?,
                    retries: cfg.annotate_retries,
                };
                annotate_svad(&unit, &profile, &ctx, &cot, provider(&cfg)?.as_ref(), &acfg)?
            };
            if json {
                let doc = serde_json::json!({ "svad": svad, "cot": cot, "context": ctx.rendered });
                writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                writeln!(stdout, "{}", svad.prose)?;
            }
        }
        Command::Dataset(cmd) => dataset(cmd, &cfg)?,
        Command::Check { input, json } => {
            let text = read_input(&input)?;
            let result = check_syntax(text.trim());
            let diags = result.diagnostics();
            let label = classify_error(diags).ok();
            if json {
                let doc = serde_json::json!({
                    "status": if result.is_pass() { "pass" } else { "fail" },
                    "label": label,
                    "diagnostics": diags,
                });
                writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else if let SyntaxCheck::Pass(unit) = &result {
                writeln!(stdout, "PASS {}", normalize(unit))?;
            } else {
                writeln!(stdout, "FAIL {}", label.map_or("", |l| l.as_str()))?;
                stdout.write_all(diag_lines(diags).as_bytes())?;
            }
            if !result.is_pass() {
                return Ok(EXIT_VERDICT);
            }
        }
        Command::Classify { input, diagnostics } => {
            let diags: Vec<Diagnostic> = match (input, diagnostics) {
                (_, Some(path)) => serde_json::from_str(&read_input(&path)?)
                    .with_context(|| format!("{} is not a JSON list of diagnostics", path.display()))?,
                (Some(path), None) => match check_syntax(read_input(&path)?.trim()) {
                    SyntaxCheck::Pass(_) => bail!("{} passes the syntax check; nothing to classify", path.display()),
                    SyntaxCheck::Fail(d) => d,
                },
                (None, None) => bail!("give a property file or --diagnostics"),
            };
            writeln!(stdout, "{}", classify_error(&diags)?)?;
        }
        Command::Equiv {
            generated,
            reference,
            json,
        } => {
            let gen = parse_file(&generated)?;
            let reference = parse_file(&reference)?;
            let report = check_relation(&gen, &reference, &cfg.bound)?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(stdout, "{}", report.relation)?;
                writeln!(stdout, "L = {}, S = {}", report.length, report.signal_count)?;
                if let Some(t) = &report.witness_gen_only {
                    write!(stdout, "\npassed by the generated property only:\n{t}")?;
                }
                if let Some(t) = &report.witness_ref_only {
                    write!(stdout, "\npassed by the reference only:\n{t}")?;
                }
            }
            if report.relation != Relation::Equivalent {
                return Ok(EXIT_VERDICT);
            }
        }
        Command::Generate { input, max_rounds, log } => {
            let svad = SvadText::new(read_input(&input)?.trim());
            let gcfg = GenConfig {
                template: config::template(cfg.templates.generation.as_deref(), DEFAULT_GENERATION_TEMPLATE)?,
                max_rounds: max_rounds.unwrap_or(cfg.max_rounds),
            };
            let outcome = generate_with_repair(&svad, provider(&cfg)?.as_ref(), &gcfg)?;
            if let Some(path) = log {
                write_file(&path, &serde_json::to_string_pretty(&outcome)?)?;
            }
            writeln!(stdout, "{}", outcome.final_text)?;
            if outcome.status == GenStatus::Exhausted {
                eprintln!("no candidate passed after {} rounds:", outcome.rounds);
                eprint!("{}", diag_lines(outcome.last_diagnostics()));
                return Ok(EXIT_VERDICT);
            }
        }
        Command::Bench(cmd) => bench(cmd, &cfg)?,
    }
    Ok(0)
}

fn dataset(cmd: DatasetCommand, cfg: &CliConfig) -> Result<()> {
    match cmd {
        DatasetCommand::Dedup { inputs, output } => {
            let mut all = Vec::new();
            for p in &inputs {
                all.extend(read_dataset(p)?);
            }
            let total = all.len();
            let kept = dedup(all);
            write_dataset(&output, &kept)?;
            eprintln!("kept {} of {} records", kept.len(), total);
        }
        DatasetCommand::Split {
            input,
            train,
            bench,
            fraction,
        } => {
            let records = read_dataset(&input)?;
            let (tr, be) = stratified_split(&records, fraction.unwrap_or(cfg.split_fraction), cfg.seed);
            write_dataset(&train, &tr)?;
            write_dataset(&bench, &be)?;
            eprintln!("train {}, bench {}", tr.len(), be.len());
        }
        DatasetCommand::Synth {
            output,
            counts,
            spec,
            refine,
        } => {
            let mut spec: SynthSpec = match spec {
                Some(p) => serde_json::from_str(&read_input(&p)?)
                    .with_context(|| format!("invalid synthesis spec {}", p.display()))?,
                None => cfg.synth.clone(),
            };
            if let Some(c) = counts {
                spec.tiers = Tier::ALL.iter().copied().zip(c).collect();
            }
            if let Some(p) = refine {
                let signals: Vec<svakit::bench::RefinementSignal> = serde_json::from_str(&read_input(&p)?)
                    .with_context(|| format!("invalid refinement file {}", p.display()))?;
                let pairs: Vec<(String, f64)> = signals.into_iter().map(|s| (s.category, s.multiplier)).collect();
                spec = apply_refinement(&spec, &pairs);
            }
            let records = synth_corpus(&spec, cfg.seed)?;
            write_dataset(&output, &records)?;
            eprintln!("wrote {} records", records.len());
        }
    }
    Ok(())
}

fn bench(cmd: BenchCommand, cfg: &CliConfig) -> Result<()> {
    match cmd {
        BenchCommand::Run { dataset, output } => {
            let path = dataset
                .or_else(|| cfg.dataset.clone())
                .ok_or_else(|| anyhow!("no dataset given (--dataset or `dataset` in the config)"))?;
            let records = read_dataset(&path)?;
            let bcfg = BenchConfig {
                bound: cfg.bound,
                template: config::template(cfg.templates.generation.as_deref(), DEFAULT_GENERATION_TEMPLATE)?,
            };
            let results = run_benchmark(&records, provider(cfg)?.as_ref(), &bcfg);
            write_file(&output, &results_to_jsonl(&results))?;
            for s in svakit::bench::compute_metrics(&results) {
                let ser = s.ser.map_or("n/a".into(), |v| format!("{:.1}%", v * 100.0));
                eprintln!("{}: SPR {:.1}% SER {} (n = {})", s.tier, s.spr * 100.0, ser, s.n_total);
            }
        }
        BenchCommand::Report {
            results,
            out_dir,
            baseline,
            ser_threshold,
            min_support,
        } => {
            let text = read_input(&results)?;
            let results = results_from_jsonl(&text)
                .map_err(|(line, e)| anyhow!("{} line {line}: {e}", results.display()))?;
            let report = BenchmarkReport::build(
                &results,
                cfg.bound,
                ser_threshold.unwrap_or(cfg.refinement.ser_threshold),
                min_support.unwrap_or(cfg.refinement.min_support),
            )?;
            let mut baselines = Vec::new();
            for (name, path) in baseline {
                let stats: Vec<TierStats> = serde_json::from_str(&read_input(&path)?)
                    .with_context(|| format!("invalid baseline {}", path.display()))?;
                baselines.push((name, stats));
            }
            let (json, md) = render_report(&report, &baselines);
            let (syntax_csv, relation_csv) = attribution_csv(&report.attribution)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            write_file(&out_dir.join("report.json"), &json)?;
            write_file(&out_dir.join("report.md"), &md)?;
            write_file(&out_dir.join("syntax_attribution.csv"), &syntax_csv)?;
            write_file(&out_dir.join("relation_attribution.csv"), &relation_csv)?;
            write_file(
                &out_dir.join("refinement.json"),
                &serde_json::to_string_pretty(&report.refinement)?,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match CliConfig::load(cli.global.config.as_deref()).and_then(|mut cfg| {
        cli.global.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(cli, cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
