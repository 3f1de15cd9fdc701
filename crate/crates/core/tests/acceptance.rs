//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic;
use std::path::Path;
use std::time::Instant;

use common::*;
use ghosteval::annotation::{
    build_style_pages, confusion_matrix, fluency_score, match_stats, AnnotationLabel,
    LineAnnotation, LineTask, PageLayout, StyleMatchAnnotation, StyleMatchPage, VerseRef,
};
use ghosteval::corpus::{Provenance, Verse};
use ghosteval::evalmerge::merged_similarity;
use ghosteval::generator::{frame_verse, CheckpointPoint, GenerationMode, NGramModel};
use ghosteval::pipeline::{Pipeline, PipelineConfig};
use ghosteval::rhyme::{detect_rhymes, entropy_weight, EntropyNormalization, PronouncingDictionary, RhymeParams};
use ghosteval::similarity::TfIdfIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ngram_oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2017);
    let mut queries = 0;
    for _ in 0..50 {
        let vocab = rng.gen_range(2..10);
        let corpus = random_corpus(&mut rng, 200, vocab);
        let order = rng.gen_range(1..=9);
        let model = NGramModel::train(&corpus, order).map_err(|e| e.to_string())?;
        let framed: Vec<Vec<&str>> = corpus.iter().map(frame_verse).collect();
        let mut pool = model.vocabulary().to_vec();
        pool.push("never-seen".into());
        for q in 0..60 {
            let ctx: Vec<&str> = if q % 3 == 0 {
                (0..rng.gen_range(0..=10)).map(|_| pool.choose(&mut rng).unwrap().as_str()).collect()
            } else {
                let seq = framed.choose(&mut rng).unwrap();
                let end = rng.gen_range(1..=seq.len());
                seq[end.saturating_sub(rng.gen_range(1..=9))..end].to_vec()
            };
            let got = model.next_token_distribution(&ctx);
            let (level, counts) = ngram_oracle(&corpus, order, &ctx);
            ensure!(got.level == level, "level {:?} vs {:?} for {ctx:?}", got.level, level);
            let total: u64 = counts.iter().map(|c| c.1).sum();
            let probs = got.probabilities();
            ensure!(probs.len() == counts.len(), "support differs for {ctx:?}");
            for ((t1, p), (t2, c)) in probs.iter().zip(&counts) {
                ensure!(t1 == t2, "token {t1} vs {t2}");
                ensure!((p - *c as f64 / total as f64).abs() <= 1e-12, "p({t1}) differs");
            }
            queries += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    Ok(format!("{queries} queries on 50 corpora in {elapsed:.2?}"))
}

fn overfit_reproduction() -> Result<String, String> {
    let v = Verse::from_text("t", "v", GOLDEN_VERSE, Provenance::Authentic).unwrap();
    let model = NGramModel::train(std::slice::from_ref(&v), 9).map_err(|e| e.to_string())?;
    let g = model
        .generate_verse("t", "g", 9, 0, 1100, GenerationMode::Greedy)
        .map_err(|e| e.to_string())?;
    ensure!(g.to_text() == v.to_text(), "regenerated:\n{}", g.to_text());
    Ok(format!("{} tokens reproduced", g.token_count))
}

fn similarity_identities() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut checked = 0;
    for round in 0..20 {
        let n = rng.gen_range(2..=50);
        let training: Vec<Verse> = (0..n)
            .map(|i| {
                let mut words: Vec<String> = (0..rng.gen_range(3..15))
                    .map(|_| format!("w{}", rng.gen_range(0..30)))
                    .collect();
                words.push(format!("own{round}x{i}"));
                verse(&format!("v{i}"), &words.join(" "))
            })
            .collect();
        let index = TfIdfIndex::build(&training).map_err(|e| e.to_string())?;
        for t in &training {
            let s = index.max_similarity(t).value;
            ensure!((s - 1.0).abs() <= 1e-9, "training verse scored {s}");
        }
        let disjoint = verse("d", "zz1 zz2 zz3");
        let s = index.max_similarity(&disjoint);
        ensure!(s.value == 0.0 && s.degenerate, "disjoint scored {}", s.value);
        for _ in 0..5 {
            let words: Vec<String> = (0..rng.gen_range(1..20))
                .map(|_| format!("w{}", rng.gen_range(0..35)))
                .collect();
            let c = verse("c", &words.join(" "));
            let (got, want) = (index.max_similarity(&c).value, dense_max_cosine(&training, &c));
            ensure!((got - want).abs() <= 1e-12, "{got} vs dense {want}");
            checked += 1;
        }
    }
    Ok(format!("{checked} candidates matched dense cosine"))
}

fn entropy_weighting() -> Result<String, String> {
    let w = |t: &str| entropy_weight(&verse("v", t), EntropyNormalization::LogTokens);
    ensure!(w("solo") == 0.0, "single token");
    ensure!(w("same same same same") == 0.0, "one distinct token");
    ensure!(w("all tokens are distinct here") == 1.0, "distinct");
    ensure!((w("a a b c") - 0.75).abs() <= 1e-12, "{{a,a,b,c}} gave {}", w("a a b c"));
    let text = ["yeah yeah yeah yeah"; 8].join("\n");
    let a = detect_rhymes(&verse("r", &text), &PronouncingDictionary::bundled(), &RhymeParams::default())
        .map_err(|e| e.to_string())?;
    ensure!(a.density > 0.5, "raw density {}", a.density);
    ensure!(a.weighted_density < 0.05, "weighted {}", a.weighted_density);
    Ok(format!("repetitive verse raw {:.3} weighted {:.3}", a.density, a.weighted_density))
}

fn rhyme_golden() -> Result<String, String> {
    let dict = PronouncingDictionary::bundled();
    let params = RhymeParams::default();
    let run = |t: &str| detect_rhymes(&verse("g", t), &dict, &params).map_err(|e| e.to_string());
    let a = run(GOLDEN_VERSE)?;
    ensure!(
        a.total_syllables == 80 && a.rhymed_syllables == 14 && a.density == 0.175,
        "{}/{} = {}",
        a.rhymed_syllables,
        a.total_syllables,
        a.density
    );
    let internal = run(INTERNAL_RHYME_LINE)?;
    let same_line = internal
        .rhyme_pairs
        .iter()
        .filter(|p| internal.syllables[p.first].line == internal.syllables[p.second].line)
        .count();
    ensure!(same_line >= 3, "internal pairs {same_line}");
    let four = run(FOUR_SYLLABLE_LINE)?;
    let longest = four.rhyme_pairs.iter().map(|p| p.length).max().unwrap_or(0);
    ensure!(longest >= 4, "longest span {longest}");
    let poly = run(POLYSYLLABIC_COUPLET)?;
    let multi = poly.rhyme_pairs.iter().filter(|p| p.length >= 2).count();
    ensure!(multi >= 1, "no multi-syllable rhyme across the couplet");
    Ok(format!(
        "golden 14/80; internal pairs {same_line}; longest span {longest}; polysyllabic pairs {multi}"
    ))
}

fn point(x: f64, rd: f64, sim: f64) -> CheckpointPoint {
    CheckpointPoint {
        x,
        avg_rhyme_density: rd,
        avg_max_similarity: sim,
        verse_refs: vec![],
    }
}

fn regression_merge() -> Result<String, String> {
    let s: Vec<_> = (1..=9).map(|n| point(n as f64, 0.01 * n as f64, 0.05 * n as f64)).collect();
    let m = merged_similarity(&s, 0.5).map_err(|e| e.to_string())?;
    ensure!((m.intersection_x - 50.0).abs() <= 1e-12, "x* {}", m.intersection_x);
    ensure!((m.similarity_at_target - 2.5).abs() <= 1e-12, "sim {}", m.similarity_at_target);
    let above: Vec<_> = (0..9)
        .map(|i| {
            let x = i as f64 * 2000.0;
            point(x, 0.35 + 1e-6 * x, 0.1 + 2e-5 * x)
        })
        .collect();
    let m2 = merged_similarity(&above, 0.30).map_err(|e| e.to_string())?;
    ensure!(m2.intersection_x < 0.0, "x* {}", m2.intersection_x);
    Ok(format!("x*=50 sim=2.5; start-above series x*={:.1}", m2.intersection_x))
}

fn annotation_formulas() -> Result<String, String> {
    let lines: Vec<String> = (0..10).map(|i| format!("line {i}")).collect();
    let v = verse("v", &lines.join("\n"));
    let mut labels = vec![AnnotationLabel::Strong; 10];
    labels.extend(vec![AnnotationLabel::Weak; 6]);
    labels.extend(vec![AnnotationLabel::None; 4]);
    let anns: Vec<LineAnnotation> = labels
        .iter()
        .enumerate()
        .map(|(k, l)| LineAnnotation {
            task: LineTask::Fluency,
            verse_id: "v".into(),
            line_index: k / 2,
            annotator_id: if k % 2 == 0 { "x" } else { "y" }.into(),
            label: *l,
        })
        .collect();
    let f = fluency_score(&anns, &v).map_err(|e| e.to_string())?;
    ensure!(f == 0.65, "fluency {f}");

    // 20 pages, 40 annotations, 14 on target
    let pages: Vec<StyleMatchPage> = (0..20)
        .map(|p| StyleMatchPage {
            page_id: format!("p{p}"),
            eval_verse: VerseRef {
                verse_id: format!("tupac/e{p}"),
                artist_id: "tupac".into(),
            },
            eval_provenance: Provenance::Authentic,
            choices: ["tupac", "b", "c", "d"]
                .iter()
                .map(|a| VerseRef {
                    verse_id: format!("{a}/{p}"),
                    artist_id: a.to_string(),
                })
                .collect(),
            target_choice_index: 0,
        })
        .collect();
    let mut styles = Vec::new();
    for (k, p) in pages.iter().enumerate() {
        for (j, who) in ["x", "y"].iter().enumerate() {
            let hit = 2 * k + j < 14;
            styles.push(StyleMatchAnnotation {
                page_id: p.page_id.clone(),
                annotator_id: who.to_string(),
                chosen_index: if hit { 0 } else { 1 + (k % 3) },
            });
        }
    }
    let refs: Vec<&StyleMatchPage> = pages.iter().collect();
    let t = match_stats(&refs, &styles).map_err(|e| e.to_string())?;
    let pct = t.match_pct().unwrap_or(f64::NAN);
    ensure!(t.a == 40 && t.m == 14 && pct == 35.0, "m={} a={} pct={pct}", t.m, t.a);
    ensure!((pct * t.a as f64 / 100.0).round() as usize == 14, "round trip");

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let (artists, n) = (rng.gen_range(2..10), rng.gen_range(1..60));
        let (pages, anns) = random_pages(&mut rng, artists, n, 2.min(artists));
        let m = confusion_matrix(&pages, &anns).map_err(|e| e.to_string())?;
        for i in 0..m.artists.len() {
            for j in 0..m.artists.len() {
                ensure!(m.values[i][j] == m.values[j][i], "asymmetric at {i},{j}");
            }
        }
    }
    Ok("fluency 0.65; Match% 35.0 with m=14 a=40; 100 symmetric confusion matrices".into())
}

fn page_construction() -> Result<String, String> {
    let body = vec![vec!["word"; 10].join(" "); 5].join("\n");
    let pools: BTreeMap<String, Vec<Verse>> = (0..13)
        .map(|a| {
            let id = format!("artist{a:02}");
            let vs = (0..10)
                .map(|k| Verse::from_text(&id, format!("{id}/v{k}"), &body, Provenance::Authentic).unwrap())
                .collect();
            (id, vs)
        })
        .collect();
    let eval: Vec<Verse> = pools.values().flat_map(|v| v[..5].to_vec()).collect();
    let start = Instant::now();
    let pages = build_style_pages(&eval, &pools, 13, PageLayout::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(pages.len() == 260, "{} pages", pages.len());
    ensure!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    for v in &eval {
        let mine: Vec<&StyleMatchPage> = pages.iter().filter(|p| p.eval_verse.verse_id == v.verse_id).collect();
        ensure!(mine.len() == 4, "{} pages for {}", mine.len(), v.verse_id);
        let mut others: Vec<&str> = Vec::new();
        for p in &mine {
            ensure!(p.choices.len() == 4, "page {} has {} choices", p.page_id, p.choices.len());
            let target = &p.choices[p.target_choice_index];
            ensure!(target.artist_id == v.artist_id && target.verse_id != v.verse_id, "bad target on {}", p.page_id);
            let own = p.choices.iter().filter(|c| c.artist_id == v.artist_id).count();
            ensure!(own == 1, "{own} target-artist choices on {}", p.page_id);
            others.extend(p.choices.iter().filter(|c| c.artist_id != v.artist_id).map(|c| c.artist_id.as_str()));
        }
        others.sort_unstable();
        let expected: Vec<&str> = pools.keys().map(String::as_str).filter(|a| *a != v.artist_id).collect();
        ensure!(others == expected, "distractors for {}: {others:?}", v.verse_id);
    }
    Ok(format!("260 pages in {elapsed:.2?}; all 65 verses cover the other 12 artists once"))
}

fn end_to_end_determinism() -> Result<String, String> {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/golden/pipeline.toml");
    let run = |out: &Path| -> Result<Vec<std::path::PathBuf>, String> {
        let mut c = PipelineConfig::load(&cfg).map_err(|e| e.to_string())?;
        c.output_dir = out.to_path_buf();
        Pipeline::new(c).and_then(|p| p.run_all()).map_err(|e| e.to_string())
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let files = run(a.path())?;
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    run(b.path())?;
    let mut compared = 0;
    for f in files.iter().filter(|f| f.is_file()) {
        let rel = f.strip_prefix(a.path()).map_err(|e| e.to_string())?;
        let x = fs::read(f).map_err(|e| e.to_string())?;
        let y = fs::read(b.path().join(rel)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{} differs between runs", rel.display());
        compared += 1;
    }
    Ok(format!("{compared} files byte-identical; one run {elapsed:.2?}"))
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("ngram oracle equivalence", ngram_oracle_equivalence),
        ("overfit reproduction", overfit_reproduction),
        ("similarity identities", similarity_identities),
        ("entropy weighting", entropy_weighting),
        ("rhyme golden", rhyme_golden),
        ("regression merge", regression_merge),
        ("annotation formulas", annotation_formulas),
        ("page construction", page_construction),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
