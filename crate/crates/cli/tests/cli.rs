use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use svakit::dataset::read_jsonl;
use svakit::generate::{render_prompt, DEFAULT_GENERATION_TEMPLATE};
use svakit::provider::ReplayProvider;
use tempfile::TempDir;

const ENV: [&str; 9] = [
    "SVAKIT_CONFIG",
    "SVAKIT_PROVIDER",
    "SVAKIT_ENDPOINT",
    "SVAKIT_MODEL",
    "SVAKIT_API_KEY",
    "SVAKIT_TIMEOUT",
    "SVAKIT_SEED",
    "SVAKIT_TRACE_LENGTH",
    "SVAKIT_CAP",
];

fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_svakit"));
    for v in ENV {
        c.env_remove(v);
    }
    c
}

fn run(args: &[&str]) -> Output {
    cmd().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn analyze_prints_profile() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.sva", "@(posedge clk) req |-> ##[1:3] ack");
    let o = run(&["analyze", &f]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("depth: 3"), "{out}");
    assert!(out.contains("tier: D3"));
    assert!(out.contains("signals: ack, req"));
}

#[test]
fn equiv_exit_codes() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.sva", "@(posedge clk) a |=> b");
    let r = write(&dir, "r.sva", "@(posedge clk) a |-> ##1 b");
    let o = run(&["equiv", &g, &r]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Equivalent\n"));

    let w = write(&dir, "w.sva", "@(posedge clk) a |-> b||c");
    let base = write(&dir, "b.sva", "@(posedge clk) a |-> b");
    let o = run(&["equiv", "--json", &w, &base]);
    assert_eq!(code(&o), 3);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["relation"], "Widening");
    assert!(doc["witness_gen_only"].is_object());

    let o = run(&["--cap", "2", "equiv", &w, &base]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["equiv", "only-one.sva"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn missing_file_is_operational_failure() {
    let o = run(&["normalize", "/nonexistent/x.sva"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
}

#[test]
fn normalize_matches_library() {
    let dir = TempDir::new().unwrap();
    let text = "@(posedge clk) disable iff (rst) (a&&b)|->##[0:2]c";
    let f = write(&dir, "p.sva", text);
    let o = run(&["normalize", &f]);
    let unit = svakit::sva::parse(text).unwrap();
    assert_eq!(stdout(&o), format!("{}\n", svakit::sva::normalize(&unit)));
}

#[test]
fn check_and_classify() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.sva", "@(posedge clk) $rose(a, b) |-> c");
    let o = run(&["check", "--json", &bad]);
    assert_eq!(code(&o), 3);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["status"], "fail");
    assert_eq!(doc["label"], "SvaKeywordFunctionError");

    let o = run(&["classify", &bad]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "SvaKeywordFunctionError"));

    let diags = write(
        &dir,
        "d.json",
        r###"[{"line":1,"col":3,"token":"##","message":"expected delay bound after '##'"}]"###,
    );
    let o = run(&["classify", "--diagnostics", &diags]);
    assert_eq!(stdout(&o).trim(), "TimingOperatorError");

    let good = write(&dir, "good.sva", "@(posedge clk) a");
    assert_eq!(code(&run(&["check", &good])), 0);
    assert_eq!(code(&run(&["classify", &good])), 1);
}

#[test]
fn synth_split_dedup_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.jsonl"), path(&dir, "b.jsonl"));
    for out in [&a, &b] {
        let o = run(&["--seed", "7", "dataset", "synth", "-o", out, "--counts", "10,10,10,10"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let (tr, be) = (path(&dir, "train.jsonl"), path(&dir, "bench.jsonl"));
    assert_eq!(code(&run(&["dataset", "split", &a, "--train", &tr, "--bench", &be])), 0);
    let read = |p: &str| read_jsonl(fs::read(p).unwrap().as_slice()).unwrap();
    assert_eq!(read(&tr).len() + read(&be).len(), 40);
    assert_eq!(read(&be).len(), 4);

    let d = path(&dir, "d.jsonl");
    assert_eq!(code(&run(&["dataset", "dedup", &a, &b, "-o", &d])), 0);
    assert_eq!(read(&d).len(), 40);
}

#[test]
fn config_precedence() {
    let dir = TempDir::new().unwrap();
    let synth = |extra: &[&str], env_seed: Option<&str>, out: &str| {
        let mut c = cmd();
        if let Some(s) = env_seed {
            c.env("SVAKIT_SEED", s);
        }
        let o = c.args(extra).args(["dataset", "synth", "-o", out, "--counts", "3,3,3,3"]).output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let seeded = |s: &str| synth(&["--seed", s], None, &path(&dir, &format!("seed{s}.jsonl")));
    let (s1, s2, s3) = (seeded("1"), seeded("2"), seeded("3"));
    assert_ne!(s1, s2);

    let cfg = write(&dir, "cfg.json", r#"{"seed": 1}"#);
    assert_eq!(synth(&["--config", &cfg], None, &path(&dir, "c.jsonl")), s1);
    assert_eq!(synth(&["--config", &cfg], Some("2"), &path(&dir, "e.jsonl")), s2);
    assert_eq!(synth(&["--config", &cfg, "--seed", "3"], Some("2"), &path(&dir, "f.jsonl")), s3);

    let bad = write(&dir, "bad.json", r#"{"sed": 1}"#);
    assert_eq!(code(&run(&["--config", &bad, "normalize", "x"])), 2);
    let bad = write(&dir, "bad2.json", r#"{"refinement": {"ser_threshold": 0}}"#);
    assert_eq!(code(&run(&["--config", &bad, "normalize", "x"])), 2);
}

#[test]
fn generate_repairs_and_exhausts() {
    let dir = TempDir::new().unwrap();
    let svad = write(&dir, "svad.txt", "whenever `a` is high, `b` is high one cycle later");
    let fixed = write(
        &dir,
        "fixed.json",
        r#"["```\n@(posedge clk) a |-> |=> b\n```", "```\n@(posedge clk) a |=> b\n```"]"#,
    );
    let log = path(&dir, "log.json");
    let provider = format!("fixed:{fixed}");
    let o = run(&["--provider", &provider, "generate", &svad, "--log", &log]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "@(posedge clk) a |=> b\n");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(doc["rounds"], 2);

    let broken = write(&dir, "broken.json", r#"["```\n@(posedge clk) a ##\n```"]"#);
    let provider = format!("fixed:{broken}");
    let o = run(&["--provider", &provider, "generate", &svad, "--max-rounds", "2"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn bench_echo_run_and_report() {
    let dir = TempDir::new().unwrap();
    let data = path(&dir, "data.jsonl");
    assert_eq!(code(&run(&["--seed", "4", "dataset", "synth", "-o", &data, "--counts", "3,3,3,3"])), 0);
    let records = read_jsonl(fs::read(&data).unwrap().as_slice()).unwrap();

    let mut replay = ReplayProvider::default();
    for r in &records {
        let prompt = render_prompt(&r.svad, None, DEFAULT_GENERATION_TEMPLATE).unwrap();
        replay.insert(&prompt, vec![format!("```\n{}\n```", r.sva)]);
    }
    let replay_file = write(&dir, "replay.json", &replay.to_json());
    let results = path(&dir, "results.jsonl");
    let provider = format!("replay:{replay_file}");
    let o = run(&["--provider", &provider, "bench", "run", "--dataset", &data, "-o", &results]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let baseline = write(
        &dir,
        "base.json",
        r#"[{"tier":"D2","n_total":1,"n_pass":1,"n_eq":0,"spr":1.0,"ser":0.5}]"#,
    );
    let out_dir = path(&dir, "report");
    let base_arg = format!("small={baseline}");
    let o = run(&["bench", "report", &results, "--out-dir", &out_dir, "--baseline", &base_arg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = Path::new(&out_dir);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for s in report["stats"].as_array().unwrap() {
        assert_eq!((s["spr"].as_f64(), s["ser"].as_f64()), (Some(1.0), Some(1.0)), "{s}");
    }
    assert_eq!(report["baselines"][0]["ser_delta_pp"]["D2"], 50.0);
    let md = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("| overall | 12 | 12 | 12 | 100.0 | 100.0 | n/a |"), "{md}");
    for f in ["syntax_attribution.csv", "relation_attribution.csv", "refinement.json"] {
        assert!(PathBuf::from(&out_dir).join(f).exists(), "{f}");
    }
}
