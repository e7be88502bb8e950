//! Command-line behavior: exit codes, caching and artifact layout.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"
seed = 5
[input]
accounts = "corpus/accounts.jsonl"
posts = "corpus/posts.jsonl"
[topics]
k = 6
iterations = 30
fold_in_iterations = 10
[synth]
n_legit = 16
n_bots = 8
n_crowdturfers = 8
posts_per_account = { min = 30, max = 34 }
vocab_size_per_topic = 40
campaign_vocab_size = 20
"#;

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// A temporary directory holding `small.toml` and a synthetic corpus.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("small.toml"), SMALL).unwrap();
        let f = Fixture { dir };
        let out = f.run(&["--config", "small.toml", "synth", "--out-dir", "corpus"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        f
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_authlab"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest_statuses(path: &Path) -> Vec<(String, String)> {
    let v: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    v["run"]["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["stage"].as_str().unwrap().to_string(), s["status"].as_str().unwrap().to_string()))
        .collect()
}

fn first_line(path: &Path) -> Value {
    let text = fs::read_to_string(path).unwrap();
    serde_json::from_str(text.lines().next().unwrap()).unwrap()
}

#[test]
fn synth_writes_corpus_and_truth() {
    let f = Fixture::new();
    for name in ["accounts.jsonl", "posts.jsonl", "truth.jsonl"] {
        assert!(f.path("corpus").join(name).is_file(), "{name}");
    }
    let accounts = fs::read_to_string(f.path("corpus/accounts.jsonl")).unwrap();
    // Header plus one line per account.
    assert_eq!(accounts.lines().count(), 1 + 32);
    let h = first_line(&f.path("corpus/truth.jsonl"));
    assert_eq!(h["header"]["artifact"], "truth");
    assert_eq!(h["header"]["config"]["synth"]["n_bots"], 8);
}

#[test]
fn second_run_is_all_cache_hits_with_identical_outputs() {
    let f = Fixture::new();
    let a = f.run(&["--config", "small.toml", "run", "--out-dir", "o"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let first = manifest_statuses(&f.path("o/run_manifest.json"));
    assert!(first.iter().all(|(_, s)| s == "computed"), "{first:?}");
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["ingest", "fit-topics", "features", "similarity-bag-of-words", "score", "aggregate", "report"]
    );
    let snapshot = |rel: &str| fs::read(f.path("o").join(rel)).unwrap();
    let files = ["scores.jsonl", "topics.jsonl", "model.lda", "reports/topic_0.svg", "reports/index.json"];
    let before: Vec<Vec<u8>> = files.iter().map(|r| snapshot(r)).collect();
    let b = f.run(&["--config", "small.toml", "run", "--out-dir", "o"]);
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    let second = manifest_statuses(&f.path("o/run_manifest.json"));
    assert_eq!(second.len(), first.len());
    assert!(second.iter().all(|(_, s)| s == "cached"), "{second:?}");
    for (r, bytes) in files.iter().zip(&before) {
        assert_eq!(&snapshot(r), bytes, "{r}");
    }
    // Every artifact records the same configuration hash.
    let hash = first_line(&f.path("o/scores.jsonl"))["header"]["config_hash"].clone();
    assert_eq!(first_line(&f.path("o/topics.jsonl"))["header"]["config_hash"], hash);
    let svg = fs::read_to_string(f.path("o/reports/topic_0.svg")).unwrap();
    assert!(svg.contains(hash.as_str().unwrap()));
    let model = fs::read_to_string(f.path("o/model.lda")).unwrap();
    assert!(model.contains(hash.as_str().unwrap()));
}

#[test]
fn changing_a_setting_reruns_only_dependent_stages() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["--config", "small.toml", "run", "--out-dir", "o"])), 0);
    fs::write(f.path("k5.toml"), SMALL.replace("[topics]", "[classify]\nk = 5\n[topics]")).unwrap();
    let out = f.run(&["--config", "k5.toml", "run", "--out-dir", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let st = manifest_statuses(&f.path("o/run_manifest.json"));
    let status = |n: &str| st.iter().find(|s| s.0 == n).unwrap().1.clone();
    for cached in ["ingest", "fit-topics", "features", "similarity-bag-of-words"] {
        assert_eq!(status(cached), "cached", "{cached}");
    }
    for redone in ["score", "aggregate", "report"] {
        assert_eq!(status(redone), "computed", "{redone}");
    }
}

#[test]
fn corrupt_similarity_cache_is_ignored_with_a_warning() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["--config", "small.toml", "run", "--out-dir", "o"])), 0);
    let scores = fs::read(f.path("o/scores.jsonl")).unwrap();
    let cache = f.path("o/similarity-bag-of-words.bin");
    let mut bytes = fs::read(&cache).unwrap();
    bytes[0..8].copy_from_slice(b"GARBAGE!");
    fs::write(&cache, &bytes).unwrap();
    let out = f.run(&["--config", "small.toml", "run", "--out-dir", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("ignoring corrupt similarity cache"), "{}", stderr(&out));
    let st = manifest_statuses(&f.path("o/run_manifest.json"));
    assert!(st.contains(&("similarity-bag-of-words".into(), "computed".into())), "{st:?}");
    assert_eq!(fs::read(f.path("o/scores.jsonl")).unwrap(), scores);
    assert_eq!(&fs::read(&cache).unwrap()[0..8], b"AUTHSIM1");

    // A truncated cache is handled the same way.
    fs::write(&cache, &bytes[..40]).unwrap();
    let out = f.run(&["--config", "small.toml", "similarity", "--out-dir", "o"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("ignoring corrupt similarity cache"));
}

#[test]
fn edited_output_invalidates_its_stamp() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["--config", "small.toml", "run", "--out-dir", "o"])), 0);
    let good = fs::read(f.path("o/topics.jsonl")).unwrap();
    fs::write(f.path("o/topics.jsonl"), b"tampered\n").unwrap();
    assert_eq!(code(&f.run(&["--config", "small.toml", "run", "--out-dir", "o"])), 0);
    let st = manifest_statuses(&f.path("o/run_manifest.json"));
    assert!(st.contains(&("aggregate".into(), "computed".into())), "{st:?}");
    assert_eq!(fs::read(f.path("o/topics.jsonl")).unwrap(), good);
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    // Configuration errors.
    assert_eq!(code(&f.run(&["--config", "missing.toml", "ingest"])), 2);
    fs::write(f.path("bad.toml"), "[topics]\nkk = 1\n").unwrap();
    assert_eq!(code(&f.run(&["--config", "bad.toml", "ingest"])), 2);
    assert_eq!(code(&f.run(&["--no-such-flag"])), 2);
    assert_eq!(code(&f.run(&["--config", "small.toml", "score", "--kind", "nope"])), 2);
    assert_eq!(code(&f.run(&["--config", "small.toml", "ingest", "--stem", "klingon"])), 2);
    assert_eq!(code(&f.run(&["--config", "small.toml", "report", "--topics", "9", "--out-dir", "r"])), 2);
    assert_eq!(code(&f.run(&["--config", "small.toml", "--threads", "0", "ingest"])), 2);
    assert_eq!(
        code(&f.run(&["--config", "small.toml", "candidates", "--clusters", "999", "--out-dir", "c"])),
        2
    );
    // Data errors.
    assert_eq!(code(&f.run(&["--config", "small.toml", "ingest", "--accounts", "nope.jsonl"])), 3);
    fs::write(f.path("broken.jsonl"), "{\"id\": \"x\"\n").unwrap();
    let out = f.run(&["--config", "small.toml", "ingest", "--accounts", "broken.jsonl"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("broken.jsonl:1"), "{}", stderr(&out));
    assert_eq!(code(&f.run(&["--config", "small.toml", "ingest", "--min-posts", "1000"])), 3);
    // Stage failure: the output directory cannot be created.
    fs::write(f.path("blocker"), "").unwrap();
    let out = f.run(&["--config", "small.toml", "ingest", "--out-dir", "blocker/sub"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    // Help is not an error.
    assert_eq!(code(&f.run(&["--help"])), 0);
}

#[test]
fn failed_run_names_the_stage_in_its_manifest() {
    let f = Fixture::new();
    fs::write(f.path("bins.toml"), format!("{SMALL}[report]\nbins = 0\n")).unwrap();
    let out = f.run(&["--config", "bins.toml", "run", "--out-dir", "o"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("stage `report`"), "{}", stderr(&out));
    let st = manifest_statuses(&f.path("o/run_manifest.json"));
    assert_eq!(st.last().unwrap(), &("report".to_string(), "failed".to_string()));
    // Earlier artifacts are kept.
    assert!(f.path("o/scores.jsonl").is_file());
}

#[test]
fn report_subcommand_writes_into_out_dir() {
    let f = Fixture::new();
    let out = f.run(&["--config", "small.toml", "report", "--topics", "0,2", "--bins", "4", "--out-dir", "r"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(f.path("r"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("topic_") || n == "index.json")
        .collect();
    names.sort();
    assert_eq!(names, ["index.json", "topic_0.json", "topic_0.svg", "topic_2.json", "topic_2.svg"]);
    let report: Value = serde_json::from_slice(&fs::read(f.path("r/topic_2.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["bin_edges"].as_array().unwrap().len(), 5);
    let index: Value = serde_json::from_slice(&fs::read(f.path("r/index.json")).unwrap()).unwrap();
    let ranked = index["topics"].as_array().unwrap();
    assert_eq!(ranked.len(), 2);
    assert_eq!(ranked[0]["rank"], 1);
}

#[test]
fn stage_subcommands_honor_out_paths() {
    let f = Fixture::new();
    let ok = |args: &[&str]| {
        let out = f.run(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    };
    ok(&["--config", "small.toml", "fit-topics", "--k", "4", "--iters", "10", "--out", "m/model.lda", "--out-dir", "s"]);
    let model = fs::read_to_string(f.path("m/model.lda")).unwrap();
    assert!(model.starts_with("AUTHLAB-LDA 1\n"));
    assert!(model.contains("\nk 4\n"));
    ok(&["--config", "small.toml", "features", "--out", "feat.jsonl", "--out-dir", "s"]);
    let features = fs::read_to_string(f.path("feat.jsonl")).unwrap();
    assert_eq!(features.lines().count(), 1 + 32);
    ok(&["--config", "small.toml", "similarity", "--kind", "profile-prop", "--out", "sim.bin", "--out-dir", "s"]);
    assert!(fs::read(f.path("sim.bin")).unwrap().starts_with(b"AUTHSIM1"));
    ok(&["--config", "small.toml", "score", "--k", "2", "--kind", "profile-prop", "--out", "sc.jsonl", "--out-dir", "s"]);
    let scores = fs::read_to_string(f.path("sc.jsonl")).unwrap();
    assert_eq!(scores.lines().count(), 1 + 32);
    let h = first_line(&f.path("sc.jsonl"));
    assert_eq!(h["header"]["config"]["classify"]["k"], 2);
    ok(&["--config", "small.toml", "candidates", "--clusters", "4", "--per-cluster", "2", "--out", "cand.jsonl", "--out-dir", "s"]);
    ok(&["--config", "small.toml", "similarity", "--kind", "profile-prop", "--raw-features", "--out", "raw.bin", "--out-dir", "s"]);
    assert_ne!(fs::read(f.path("raw.bin")).unwrap(), fs::read(f.path("sim.bin")).unwrap());
    let cand = fs::read_to_string(f.path("cand.jsonl")).unwrap();
    assert_eq!(cand.lines().count(), 1 + 4);
    ok(&["--config", "small.toml", "aggregate", "--out", "agg.jsonl", "--out-dir", "s"]);
    assert_eq!(fs::read_to_string(f.path("agg.jsonl")).unwrap().lines().count(), 1 + 6);
}

#[test]
fn eval_writes_exact_columns_and_sidecars() {
    let f = Fixture::new();
    let out = f.run(&[
        "--config",
        "small.toml",
        "eval",
        "--fractions",
        "0.3,0.5",
        "--repeats",
        "2",
        "--ks",
        "1,3",
        "--kinds",
        "bag-of-words,common-posts",
        "--out",
        "res/results.csv",
        "--out-dir",
        "e",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(f.path("res/results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "kind,k,fraction,repeat,auc,f1,train_size,test_size");
    assert_eq!(lines.count(), 2 * 2 * 2 * 2);
    let summary = fs::read_to_string(f.path("res/results.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2 * 2);
    let meta: Value = serde_json::from_slice(&fs::read(f.path("res/results.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["header"]["artifact"], "eval_results");
    // Same seed, same table.
    let again = f.run(&[
        "--config",
        "small.toml",
        "--threads",
        "3",
        "eval",
        "--fractions",
        "0.3,0.5",
        "--repeats",
        "2",
        "--ks",
        "1,3",
        "--kinds",
        "bag-of-words,common-posts",
        "--out",
        "res/again.csv",
        "--out-dir",
        "e",
    ]);
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read_to_string(f.path("res/again.csv")).unwrap(), csv);
}
