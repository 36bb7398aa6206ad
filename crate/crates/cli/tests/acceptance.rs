//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its PASS/FAIL line even when an earlier one fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use claimforge::annotate::paraphrase::ParaphraseProvider;
use claimforge::annotate::EntityProvider;
use claimforge::datagen::{generate, is_held_out, read_dataset, Example, Resources};
use claimforge::eval::{fleiss_kappa, ranking_accuracy, RankingItem};
use claimforge::scoring::{ConstantScorer, LookupScorer, RandomScorer};
use claimforge::{GenConfig, Label};
use claimforge_cli::{run, Cli};
use clap::Parser;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde_json::{json, Value};

const SEED: &str = "1337";

fn cli(args: &[&str]) -> Result<Value, String> {
    let parsed = Cli::try_parse_from(std::iter::once("claimforge").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    run(parsed, &mut out).map_err(|e| format!("{e:#}"))?;
    Ok(serde_json::from_slice(&out).unwrap_or(Value::Null))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let f = Fixture { dir };
        cli(&["synth", "--docs", "100", "--seed", SEED, "--out", p(&f.corpus()), "--table", p(&f.table())]).unwrap();
        f
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.path().join(name)
    }

    fn corpus(&self) -> std::path::PathBuf {
        self.path("corpus.jsonl")
    }

    fn table(&self) -> std::path::PathBuf {
        self.path("table.jsonl")
    }

    fn generate(&self, name: &str, extra: &[&str]) -> Result<(Vec<u8>, Vec<u8>), String> {
        let (out, corpus, table) = (self.path(&format!("{name}.jsonl")), self.corpus(), self.table());
        let mut args = vec![
            "generate", "--corpus", p(&corpus), "--out", p(&out), "--seed", SEED,
            "--paraphrase-table", p(&table), "--balance", "0.5",
        ];
        args.extend_from_slice(extra);
        cli(&args)?;
        let manifest = self.path(&format!("{name}.manifest.json"));
        Ok((
            std::fs::read(&out).map_err(|e| e.to_string())?,
            std::fs::read(&manifest).map_err(|e| e.to_string())?,
        ))
    }

    fn examples(&self, name: &str) -> Vec<Example> {
        read_dataset(self.path(&format!("{name}.jsonl"))).unwrap()
    }
}

fn determinism(f: &Fixture) -> Result<String, String> {
    let start = Instant::now();
    let a = f.generate("run1", &["--threads", "1"])?;
    let b = f.generate("run2", &["--threads", "8"])?;
    let c = f.generate("run3", &["--threads", "8"])?;
    let elapsed = start.elapsed();
    ensure(a.0 == b.0 && b.0 == c.0, || "dataset bytes differ".into())?;
    ensure(a.1 == b.1 && b.1 == c.1, || "manifest bytes differ".into())?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{} bytes identical over 3 runs (1 and 8 threads) in {elapsed:.2?}", a.0.len()))
}

fn balance(f: &Fixture) -> Result<String, String> {
    let examples = f.examples("run1");
    let neg = examples.iter().filter(|e| e.label == Label::Inconsistent).count();
    let frac = neg as f64 / examples.len() as f64;
    ensure(examples.len() >= 500, || format!("only {} examples", examples.len()))?;
    ensure((frac - 0.5).abs() <= 0.02, || format!("negative fraction {frac}"))?;
    Ok(format!("negative fraction {frac:.4} over {} examples", examples.len()))
}

fn properties() -> Result<String, String> {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1200,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let tally = std::cell::Cell::new(oracles::Tally::default());
    runner
        .run(&oracles::fuzz_case(), |case| {
            let mut t = tally.get();
            let r = oracles::check_transform_case(&case, &mut t);
            tally.set(t);
            r.map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())?;
    let t = tally.get();
    ensure(t.claims >= 1000, || format!("{t:?}"))?;
    Ok(format!(
        "{} claims, {} swaps, {} negations, {} noisy",
        t.claims, t.swaps, t.negations, t.noisy
    ))
}

fn span_metadata(f: &Fixture) -> Result<String, String> {
    // every id in the balanced noisy dataset has a twin in the raw noise-free run
    let corpus = claimforge::synth::corpus(100, SEED.parse().unwrap());
    let res = Resources {
        entities: EntityProvider::Builtin,
        paraphrase: ParaphraseProvider::OfflineTable(corpus.table()),
    };
    let config = GenConfig {
        seed: SEED.parse().unwrap(),
        noise_p: 0.0,
        ..GenConfig::default()
    };
    let clean = generate(&corpus.documents(), &config, &res).map_err(|e| e.to_string())?.examples;
    let noisy = f.examples("run1");
    let checked = oracles::check_span_metadata(&noisy, &clean)?;
    let singles = noisy.iter().filter(|e| e.transform.is_single_edit()).count();
    ensure(checked == singles && checked > 0, || format!("{checked} of {singles}"))?;
    let with_noise = noisy
        .iter()
        .filter(|e| e.transform.is_single_edit() && !e.noise_positions.is_empty())
        .count();
    Ok(format!("{checked}/{singles} single-edit examples match ({with_noise} noisy)"))
}

fn metrics() -> Result<String, String> {
    for seed in 0..200 {
        oracles::check_metrics(seed).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    let k = fleiss_kappa(&[vec!['C', 'C', 'C'], vec!['C', 'C', 'I']]).map_err(|e| e.to_string())?;
    ensure(k.kappa == -0.2, || format!("kappa {}", k.kappa))?;
    Ok("200 instances within 1e-12, kappa hand case -0.2".into())
}

fn ranking(f: &Fixture) -> Result<String, String> {
    let examples = f.examples("run1");
    let mut items: Vec<RankingItem> = Vec::new();
    let mut seen = BTreeSet::new();
    for e in examples.iter().filter(|e| e.label == Label::Inconsistent && e.claim != e.original_claim) {
        let sentence: String = e.text.chars().skip(e.extraction_span.start).take(e.extraction_span.len()).collect();
        if seen.insert((sentence.clone(), e.claim.clone())) {
            items.push(RankingItem {
                article_sentence: sentence,
                claim_positive: e.original_claim.clone(),
                claim_negative: e.claim.clone(),
            });
        }
    }
    let mut i = 0;
    while items.len() < 1000 {
        items.push(RankingItem {
            article_sentence: format!("Filler sentence {i}."),
            claim_positive: format!("Filler sentence {i}."),
            claim_negative: format!("Filler sentence {}.", i + 1),
        });
        i += 1;
    }
    items.truncate(1000);
    let mut lookup = LookupScorer::new(0.5);
    for it in &items {
        lookup.insert(&it.article_sentence, &it.claim_positive, 1.0);
        lookup.insert(&it.article_sentence, &it.claim_negative, 0.0);
    }
    let oracle = ranking_accuracy(&lookup, &items).map_err(|e| e.to_string())?;
    let constant = ranking_accuracy(&ConstantScorer(0.5), &items).map_err(|e| e.to_string())?;
    let random = ranking_accuracy(&RandomScorer { seed: 7 }, &items).map_err(|e| e.to_string())?;
    ensure(oracle == 1.0, || format!("oracle {oracle}"))?;
    ensure(constant == 0.5, || format!("constant {constant}"))?;
    ensure((random - 0.5).abs() <= 0.05, || format!("random {random}"))?;
    Ok(format!("oracle {oracle}, constant {constant}, random {random:.3} over {} pairs", items.len()))
}

fn closed_loop() -> Result<String, String> {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (corpus, table, data, model) = (
        dir.path().join("c.jsonl"),
        dir.path().join("t.jsonl"),
        dir.path().join("d.jsonl"),
        dir.path().join("m.json"),
    );
    cli(&["synth", "--docs", "850", "--seed", "11", "--out", p(&corpus), "--table", p(&table)])?;
    let manifest = cli(&[
        "generate", "--corpus", p(&corpus), "--out", p(&data), "--seed", "11", "--paraphrase-table", p(&table),
        "--balance", "0.5",
    ])?;
    let n = manifest["example_count"].as_u64().unwrap_or(0);
    let trained = cli(&["train-baseline", "--data", p(&data), "--out", p(&model), "--held-out", "0.2", "--seed", "3"])?;
    let elapsed = start.elapsed();

    let examples = read_dataset(&data).map_err(|e| e.to_string())?;
    let train: BTreeSet<&str> = examples
        .iter()
        .filter(|e| !is_held_out(&e.doc_id, 0.2, 3))
        .map(|e| e.doc_id.as_str())
        .collect();
    let test: BTreeSet<&str> = examples
        .iter()
        .filter(|e| is_held_out(&e.doc_id, 0.2, 3))
        .map(|e| e.doc_id.as_str())
        .collect();
    ensure(train.is_disjoint(&test) && !test.is_empty(), || "split is not document-disjoint".into())?;
    ensure((9000..=11000).contains(&n), || format!("{n} examples"))?;
    let ba = trained["held_out"]["balanced_accuracy"].as_f64().unwrap_or(0.0);
    ensure(ba >= 0.60, || format!("held-out balanced accuracy {ba}"))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{n} examples, {} held-out docs, balanced accuracy {ba:.4} in {elapsed:.2?}",
        test.len()
    ))
}

fn known_confusion(f: &Fixture) -> Result<String, String> {
    let examples = f.examples("run1");
    let pick = |label: Label, k: usize| -> Vec<Example> {
        examples.iter().filter(|e| e.label == label).take(k).cloned().collect()
    };
    let (cons, incons) = (pick(Label::Consistent, 6), pick(Label::Inconsistent, 4));
    let subset: Vec<Example> = cons.iter().chain(&incons).cloned().collect();
    let data = f.path("subset.jsonl");
    claimforge::datagen::write_dataset(&subset, &data).map_err(|e| e.to_string())?;
    // consistent: 5 right, 1 wrong; inconsistent: 3 right, 1 wrong
    let mut lines = String::new();
    for (i, e) in cons.iter().enumerate() {
        let p = if i == 0 { 0.2 } else { 0.8 };
        lines.push_str(&format!("{}\n", json!({"id": e.id, "p_consistent": p})));
    }
    for (i, e) in incons.iter().enumerate() {
        let p = if i == 0 { 0.7 } else { 0.1 };
        lines.push_str(&format!("{}\n", json!({"id": e.id, "p_consistent": p})));
    }
    let pred = f.path("pred.jsonl");
    std::fs::write(&pred, lines).map_err(|e| e.to_string())?;
    let report = cli(&["evaluate", "--data", p(&data), "--pred", p(&pred)])?;
    let ba = report["balanced_accuracy"].as_f64().unwrap_or(f64::NAN);
    let f1 = report["f1"].as_f64().unwrap_or(f64::NAN);
    // recalls 5/6 and 3/4; INCONSISTENT is positive: tp 3, fp 1, fn 1
    let (want_ba, want_f1) = (19.0 / 24.0, 6.0 / 8.0);
    ensure((ba - want_ba).abs() <= 1e-12, || format!("balanced accuracy {ba}, want {want_ba}"))?;
    ensure((f1 - want_f1).abs() <= 1e-12, || format!("f1 {f1}, want {want_f1}"))?;
    Ok(format!("balanced accuracy {ba} (19/24), f1 {f1} (3/4)"))
}

fn main() {
    let fixture = Fixture::new();
    type Check<'a> = Box<dyn Fn() -> Result<String, String> + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("deterministic generation", Box::new(|| determinism(&fixture))),
        ("label balance", Box::new(|| balance(&fixture))),
        ("transform properties", Box::new(properties)),
        ("span metadata", Box::new(|| span_metadata(&fixture))),
        ("metric oracles", Box::new(metrics)),
        ("ranking sanity", Box::new(|| ranking(&fixture))),
        ("closed loop", Box::new(closed_loop)),
        ("known confusion", Box::new(|| known_confusion(&fixture))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
