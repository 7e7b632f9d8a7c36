//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use kblink::corpus::{category_stats, corpus_stats, load_corpus, load_predictions, Document, Mention};
use kblink::kb::load_kb;
use kblink::linker::{
    context_score, filter_candidates, generate_candidates, graph_score, link_document, to_prediction,
    FilterToggles,
};
use kblink::text::{ARABIC_KAF, ARABIC_YEH, PERSIAN_KAF, PERSIAN_YEH, TATWEEL, ZWNJ};
use kblink::{f1, normalize, Decision, KnowledgeBase, LinkerConfig, NerType, Normalizer, PosCategory, ReferenceLists};
use oracles::{dense_cosine, graph_by_pairs, RawKb, PUBLISHED_F1};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn mini_kb() -> (KnowledgeBase, ReferenceLists) {
    let f = fixtures();
    load_kb(&f.join("mini_kb.jsonl"), &f.join("mini_lists.json"), Normalizer::Persian).unwrap()
}

fn mini_corpus() -> Vec<Document> {
    load_corpus(&fixtures().join("mini_corpus.jsonl")).unwrap()
}

fn raw_kb() -> RawKb {
    let f = fixtures();
    RawKb::from_fixture(
        &std::fs::read_to_string(f.join("mini_kb.jsonl")).unwrap(),
        &std::fs::read_to_string(f.join("mini_lists.json")).unwrap(),
    )
}

fn within_second(start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    check!(took < Duration::from_secs(1), "took {took:?}, limit 1 s");
    Ok(took)
}

fn published_f1() -> Outcome {
    let start = Instant::now();
    let mut n = 0;
    for (name, row) in PUBLISHED_F1 {
        for (p, r, printed) in [(row[0], row[1], row[2]), (row[3], row[4], row[5])] {
            let got = f1(p, r).map_err(|e| e.to_string())?;
            check!((got - printed).abs() <= 1e-4, "{name}: f1({p}, {r}) = {got:.6}, printed {printed}");
            n += 1;
        }
    }
    check!(n == 22, "expected 22 triples, checked {n}");
    let took = within_second(start)?;
    Ok(format!("{n}/22 triples within 1e-4 in {took:?}"))
}

fn pipeline_golden() -> Outcome {
    let (kb, lists) = mini_kb();
    let docs = mini_corpus();
    let golden = load_predictions(&fixtures().join("golden_predictions.jsonl")).map_err(|e| e.to_string())?;
    check!(golden.len() == docs.len() && docs.len() == 12, "expected 12 documents");
    let start = Instant::now();
    let preds: Vec<_> = docs
        .iter()
        .map(|d| to_prediction(d, &link_document(d, &kb, &lists, &LinkerConfig::default())))
        .collect();
    let took = within_second(start)?;
    let mut mentions = 0;
    for (p, g) in preds.iter().zip(&golden) {
        check!(p.id == g.id && p.mentions.len() == g.mentions.len(), "document {} misaligned", p.id);
        for (pm, gm) in p.mentions.iter().zip(&g.mentions) {
            let at = format!("{} `{}`", p.id, pm.surface);
            check!(pm.prediction == gm.prediction, "{at}: {} vs golden {}", pm.prediction, gm.prediction);
            check!((pm.score - gm.score).abs() < 1e-9, "{at}: score {} vs {}", pm.score, gm.score);
            check!(pm.ambiguity.len() == gm.ambiguity.len(), "{at}: ambiguity length");
            for (a, b) in pm.ambiguity.iter().zip(&gm.ambiguity) {
                check!(a.id == b.id && (a.score - b.score).abs() < 1e-9, "{at}: ambiguity {} vs {}", a.id, b.id);
            }
            mentions += 1;
        }
    }
    Ok(format!("{mentions} mentions in 12 documents match the golden trace; linked in {took:?}"))
}

fn cosine_oracle() -> Outcome {
    let (kb, lists) = mini_kb();
    let raw = raw_kb();
    let mut vocab: Vec<String> =
        raw.articles.values().flat_map(|a| a.split_whitespace().map(str::to_owned)).collect();
    vocab.extend(["ناشناخته", "پیام", "و", "از", "Google"].map(String::from));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let cases = 64;
    for case in 0..cases {
        let id = raw.ids.choose(&mut rng).unwrap();
        let e = kb.entity(id).unwrap();
        let surface = e.canonical_label.clone();
        let mut words: Vec<String> =
            (0..rng.gen_range(0..30)).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
        if case % 8 == 0 {
            words = raw.articles[id].split_whitespace().map(str::to_owned).collect();
        }
        let at = rng.gen_range(0..=words.len());
        let prefix: String = words[..at].iter().map(|w| format!("{w} ")).collect();
        let start = prefix.chars().count();
        let end = start + surface.chars().count();
        let text = format!("{prefix}{surface} {}", words[at..].join(" "));
        let doc = Document {
            id: format!("c{case}"),
            category: String::new(),
            text: text.clone(),
            mentions: vec![Mention::new(start, end, surface)],
        };
        let got = context_score(&doc.mentions[0], &doc, e, &kb, &lists, &LinkerConfig::default());
        let want = dense_cosine(&raw, &raw.context(&text, start, end), &raw.terms(&raw.articles[id.as_str()]));
        worst = worst.max((got - want).abs());
        check!((got - want).abs() < 1e-9, "case {case} ({id}): {got} vs oracle {want}");
    }
    Ok(format!("{cases} randomized fixtures, max |diff| = {worst:.1e}"))
}

fn graph_oracle() -> Outcome {
    let (kb, lists) = mini_kb();
    let raw = raw_kb();
    let cfg = LinkerConfig::default();
    let mut checked = 0;
    for d in mini_corpus() {
        let generated: Vec<BTreeSet<String>> = d.mentions.iter().map(|m| generate_candidates(m, &kb)).collect();
        let kept: Vec<BTreeSet<String>> = d
            .mentions
            .iter()
            .zip(&generated)
            .map(|(m, c)| filter_candidates(c, m, &d, &kb, &lists, &cfg).kept)
            .collect();
        for sets in [&generated, &kept] {
            for (i, scores) in graph_by_pairs(&raw, sets).iter().enumerate() {
                for (id, want) in scores {
                    let got = graph_score(id, i, sets, &kb);
                    check!(got == *want, "{} mention {i} {id}: {got} vs {want}", d.id);
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} candidate scores equal pair enumeration"))
}

fn nil_threshold() -> Outcome {
    let (kb, lists) = mini_kb();
    let docs = mini_corpus();
    let mut counts = Vec::new();
    let mut nil_sets: Vec<BTreeSet<(String, usize)>> = Vec::new();
    let taus = [0.0, 0.05, 0.2, 0.5, 1.1];
    let mut total = 0;
    for tau in taus {
        let cfg = LinkerConfig { nil_threshold: tau, ..Default::default() };
        let mut nils = BTreeSet::new();
        total = 0;
        for d in &docs {
            for (i, r) in link_document(d, &kb, &lists, &cfg).iter().enumerate() {
                total += 1;
                let kept = filter_candidates(&generate_candidates(&d.mentions[i], &kb), &d.mentions[i], d, &kb, &lists, &cfg).kept;
                if r.decision == Decision::Nil {
                    check!(tau > 0.0 || kept.is_empty(), "tau=0 produced NIL for {} mention {i}", d.id);
                    nils.insert((d.id.clone(), i));
                }
            }
        }
        counts.push(nils.len());
        nil_sets.push(nils);
    }
    for w in nil_sets.windows(2) {
        check!(w[0].is_subset(&w[1]), "NIL set not monotone in tau: {counts:?}");
    }
    check!(*counts.last().unwrap() == total, "tau=1.1 left {} of {total} linked", total - counts.last().unwrap());
    Ok(format!("NIL counts over tau {taus:?}: {counts:?} of {total}"))
}

fn filter_contractive() -> Outcome {
    let (kb, lists) = mini_kb();
    let ids: Vec<String> = kb.entities.keys().cloned().collect();
    let words = ["سینما", "روزنامه", "خورشید", "هتل", "بازی", "تهران", "فیلم", "بهار"];
    let ner = prop::option::of(prop::sample::select(vec![
        NerType::Per, NerType::Loc, NerType::Org, NerType::Work, NerType::Other, NerType::Unknown,
    ]));
    let pos = prop::option::of(prop::sample::select(vec![
        PosCategory::ProperNoun, PosCategory::CommonNoun, PosCategory::Other, PosCategory::Unknown,
    ]));
    let strategy = (
        prop::sample::subsequence(ids.clone(), 0..=ids.len()),
        ner,
        pos,
        prop::array::uniform4(any::<bool>()),
        prop::collection::vec(prop::sample::select(words.to_vec()), 0..6),
    );
    let mut runner = TestRunner::new(PropConfig { cases: 1000, failure_persistence: None, ..PropConfig::default() });
    let result = runner.run(&strategy, |(cands, ner, pos, toggles, ws)| {
        let cands: BTreeSet<String> = cands.into_iter().collect();
        let text = format!("x {}", ws.join(" "));
        let mention = Mention { ner_type: ner, pos_tag: pos, ..Mention::new(0, 1, "x") };
        let doc = Document { id: "p".into(), category: String::new(), text, mentions: vec![mention.clone()] };
        let toggles = FilterToggles { type_check: toggles[0], pos: toggles[1], popularity: toggles[2], class: toggles[3] };
        let run = |t: FilterToggles| {
            filter_candidates(&cands, &mention, &doc, &kb, &lists, &LinkerConfig { filters: t, ..Default::default() })
        };
        let f = run(toggles);
        prop_assert!(f.kept.is_subset(&cands));
        prop_assert!(f.penalties.values().all(|p| *p > 0.0 && *p < 1.0));
        let off = run(FilterToggles::NONE);
        prop_assert_eq!(&off.kept, &cands);
        prop_assert!(off.penalties.is_empty());
        // switching any one filter on never grows the kept set
        let mut weaker = Vec::new();
        if toggles.type_check { weaker.push(FilterToggles { type_check: false, ..toggles }); }
        if toggles.pos { weaker.push(FilterToggles { pos: false, ..toggles }); }
        if toggles.popularity { weaker.push(FilterToggles { popularity: false, ..toggles }); }
        if toggles.class { weaker.push(FilterToggles { class: false, ..toggles }); }
        for w in weaker {
            prop_assert!(f.kept.is_subset(&run(w).kept));
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("1000 random filter configurations contractive; all-off is identity with unit penalties".into())
}

fn normalization() -> Outcome {
    let mut runner = TestRunner::new(PropConfig { cases: 1000, failure_persistence: None, ..PropConfig::default() });
    runner
        .run(&"\\PC{0,40}", |s| {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let (kb, _) = mini_kb();
    let mut labels = 0;
    for e in kb.entities.values() {
        for l in std::iter::once(&e.canonical_label).chain(&e.variant_labels) {
            check!(kb.lookup_alias(l).contains(&e.id), "alias `{l}` does not return {}", e.id);
            labels += 1;
        }
    }

    for (from, to) in [(ARABIC_KAF, PERSIAN_KAF), (ARABIC_YEH, PERSIAN_YEH)] {
        check!(normalize(&from.to_string()) == to.to_string(), "U+{:04X} not mapped", from as u32);
        let word = format!("ب{from}ب");
        let out: Vec<char> = normalize(&word).chars().collect();
        check!(out == ['ب', to, 'ب'], "U+{:04X} inside a word not mapped", from as u32);
    }
    let removed = ('\u{064B}'..='\u{0652}').chain([TATWEEL, ZWNJ]);
    for c in removed {
        let out: Vec<char> = normalize(&format!("ب{c}ب")).chars().collect();
        check!(out == ['ب', 'ب'], "U+{:04X} not removed", c as u32);
    }
    check!(normalize("علي") == "علی", "Arabic yeh example");
    Ok(format!("1000 idempotence cases; {labels} labels round-trip; codepoint mappings verified"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kblink")).args(args).output().map_err(|e| e.to_string())?;
    check!(out.status.success(), "kblink {:?} failed: {}", args, String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let f = fixtures();
    let p = |name: &str| dir.path().join(name).display().to_string();
    let fx = |name: &str| f.join(name).display().to_string();
    run_cli(&["build-index", "--kb", &fx("mini_kb.jsonl"), "--lists", &fx("mini_lists.json"), "--out", &p("kb.idx")])?;
    let outputs: Vec<Vec<u8>> = [("1", "a"), ("8", "b"), ("1", "c")]
        .iter()
        .map(|(jobs, name)| {
            let out = p(name);
            run_cli(&["link", "--index", &p("kb.idx"), "--corpus", &fx("mini_corpus.jsonl"), "--out", &out, "--jobs", jobs])?;
            std::fs::read(&out).map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    check!(!outputs[0].is_empty(), "empty prediction file");
    check!(outputs[0] == outputs[1], "--jobs 1 and --jobs 8 outputs differ");
    check!(outputs[0] == outputs[2], "consecutive --jobs 1 runs differ");
    Ok(format!("{} byte prediction file identical across --jobs 1/8 and reruns", outputs[0].len()))
}

fn stats_shape() -> Outcome {
    let (kb, _) = mini_kb();
    let docs = mini_corpus();
    let reference: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("mini_corpus_stats.json")).unwrap()).unwrap();
    let compare = |got: &kblink::CorpusStats, want: &serde_json::Value, scope: &str| -> Result<(), String> {
        let got = serde_json::to_value(got).unwrap();
        for k in ["documents", "sentences", "words", "entities", "candidates"] {
            check!(got[k] == want[k], "{scope} {k}: {} vs {}", got[k], want[k]);
        }
        for k in ["words_per_article", "entities_per_article", "candidates_per_mention"] {
            let (a, b) = (got[k].as_f64().unwrap(), want[k].as_f64().unwrap());
            check!((a - b).abs() < 1e-12, "{scope} {k}: {a} vs {b}");
        }
        Ok(())
    };
    let total = corpus_stats(&docs, &kb);
    compare(&total, &reference["total"], "total")?;
    for (cat, s) in category_stats(&docs, &kb) {
        compare(&s, &reference["per_category"][&cat], &cat)?;
    }
    let table = total.render_table();
    let rows = ["Documents", "Sentences", "Words", "Entities", "Candidates", "Words per article",
        "Entities per article", "Candidates per Entity mentions"];
    for r in rows {
        check!(table.lines().any(|l| l.starts_with(r)), "table lacks row `{r}`");
    }
    Ok(format!(
        "{} docs / {} words / {} mentions / {} candidates match; {} table rows rendered",
        total.documents, total.words, total.entities, total.candidates, rows.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1", "published F1 arithmetic", published_f1),
        ("AC2", "pipeline oracle equivalence", pipeline_golden),
        ("AC3", "cosine oracle", cosine_oracle),
        ("AC4", "graph-score oracle", graph_oracle),
        ("AC5", "NIL threshold properties", nil_threshold),
        ("AC6", "filter contractiveness", filter_contractive),
        ("AC7", "normalization and alias properties", normalization),
        ("AC8", "determinism across worker counts", determinism),
        ("AC9", "stats reproduction shape", stats_shape),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
