//! Manual evaluation: style-matching pages, line judgments and the
//! statistics computed from them.

mod pages;
mod scoring;
mod tasks;
mod types;

pub use pages::{assign_pairs, build_style_pages, PageLayout, MIN_CHOICE_TOKENS};
pub use scoring::{
    apply_repetition_rule, coherence_score, confusion_matrix, confusion_tally, fluency_score,
    line_tally, match_stats, match_table, raw_iaa, ConfusionMatrix, ConfusionTally, LineTally,
    MatchRow, MatchTally, ANNOTATIONS_PER_ITEM,
};
pub use tasks::{
    build_plan, AnnotationPlan, Assignment, LineLabel, ServedTask, SubmissionBody,
    SubmissionError, TaskPayload,
};
pub use types::{
    read_jsonl, split_records, write_jsonl, AnnotationLabel, AnnotationRecord, LineAnnotation,
    LineTask, StyleMatchAnnotation, StyleMatchPage, TaskKind, VerseRef,
};

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::{Provenance, Verse};
    use crate::Error;

    fn verse(artist: &str, id: &str, lines: &[&str]) -> Verse {
        Verse::from_text(artist, id, &lines.join("\n"), Provenance::Authentic).unwrap()
    }

    fn ten_lines() -> Verse {
        let lines: Vec<String> = (0..10).map(|i| format!("line number {i}")).collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        verse("a", "v", &refs)
    }

    fn labels(v: &Verse, task: LineTask, per_line: &[(AnnotationLabel, AnnotationLabel)]) -> Vec<LineAnnotation> {
        let mut out = Vec::new();
        for (i, (x, y)) in per_line.iter().enumerate() {
            for (who, l) in [("x", x), ("y", y)] {
                out.push(LineAnnotation {
                    task,
                    verse_id: v.verse_id.clone(),
                    line_index: i + task.first_line(),
                    annotator_id: who.into(),
                    label: *l,
                });
            }
        }
        out
    }

    use AnnotationLabel::{None as N, Strong as S, Weak as W};

    #[test]
    fn fluency_hand_counted() {
        let v = ten_lines();
        // 10 strong, 6 weak, 4 none over 20 labels
        let mut pl = vec![(S, S); 5];
        pl.extend([(W, W), (W, W), (W, W), (N, N), (N, N)]);
        let anns = labels(&v, LineTask::Fluency, &pl);
        assert_eq!(fluency_score(&anns, &v).unwrap(), 0.65);
        assert_eq!(fluency_score(&labels(&v, LineTask::Fluency, &[(S, S); 10]), &v).unwrap(), 1.0);
        assert_eq!(fluency_score(&labels(&v, LineTask::Fluency, &[(N, N); 10]), &v).unwrap(), 0.0);
    }

    #[test]
    fn fluency_missing_line_is_listed() {
        let v = ten_lines();
        let mut anns = labels(&v, LineTask::Fluency, &[(S, S); 10]);
        anns.retain(|a| !(a.line_index == 3 && a.annotator_id == "y"));
        match fluency_score(&anns, &v) {
            Err(Error::IncompleteAnnotation { lines, .. }) => assert_eq!(lines, vec![3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coherence_skips_first_line_and_flags_repeats() {
        let v = verse("a", "v", &["one two", "one two", "three four"]);
        let anns = labels(&v, LineTask::Coherence, &[(S, S), (S, W)]);
        // line 1 repeats line 0, so its two labels become none: (0 + 1 + 0.5) / 4
        assert_eq!(coherence_score(&anns, &v).unwrap(), Some(0.375));
        let once = apply_repetition_rule(&v, &anns);
        assert_eq!(apply_repetition_rule(&v, &once), once);
        let single = verse("a", "s", &["only line"]);
        assert_eq!(coherence_score(&[], &single).unwrap(), None);
    }

    #[test]
    fn iaa_two_of_three() {
        let v = verse("a", "v", &["a", "b", "c"]);
        let anns = labels(&v, LineTask::Fluency, &[(S, S), (W, W), (S, N)]);
        assert!((raw_iaa(&anns).unwrap().unwrap() - 2.0 / 3.0).abs() < 1e-9);
        let same = labels(&v, LineTask::Fluency, &[(S, S), (W, W), (N, N)]);
        assert_eq!(raw_iaa(&same).unwrap(), Some(1.0));
        assert_eq!(raw_iaa(&[]).unwrap(), None);
    }

    fn page(id: &str, target: &str, choices: &[&str], target_idx: usize, authentic: bool) -> StyleMatchPage {
        StyleMatchPage {
            page_id: id.into(),
            eval_verse: VerseRef {
                verse_id: format!("{target}/eval"),
                artist_id: target.into(),
            },
            eval_provenance: if authentic {
                Provenance::Authentic
            } else {
                Provenance::Generated { checkpoint: 0 }
            },
            choices: choices
                .iter()
                .enumerate()
                .map(|(i, a)| VerseRef {
                    verse_id: format!("{a}/{id}-{i}"),
                    artist_id: a.to_string(),
                })
                .collect(),
            target_choice_index: target_idx,
        }
    }

    fn pick(page: &str, x: usize, y: usize) -> Vec<StyleMatchAnnotation> {
        vec![
            StyleMatchAnnotation {
                page_id: page.into(),
                annotator_id: "x".into(),
                chosen_index: x,
            },
            StyleMatchAnnotation {
                page_id: page.into(),
                annotator_id: "y".into(),
                chosen_index: y,
            },
        ]
    }

    #[test]
    fn match_percentages() {
        let p = page("p1", "a", &["a", "b", "c", "d"], 0, true);
        let t = match_stats(&[&p], &pick("p1", 0, 0)).unwrap();
        assert_eq!(t.match_pct(), Some(100.0));
        assert_eq!(t.match_agreed_pct(), Some(100.0));
        assert_eq!(t.agreement_pct(), Some(100.0));
        let t = match_stats(&[&p], &pick("p1", 0, 1)).unwrap();
        assert_eq!(t.s_a, 0);
        assert_eq!(t.match_agreed_pct(), None);
        assert_eq!(t.match_pct(), Some(50.0));
        assert!(matches!(
            match_stats(&[&p], &pick("p1", 0, 1)[..1]),
            Err(Error::IncompletePage { got: 1, .. })
        ));
    }

    #[test]
    fn confusion_hand_count() {
        // b shown on four of a's pages and chosen twice; a never shown on b's pages
        let mut pages = Vec::new();
        let mut anns = Vec::new();
        for k in 0..4 {
            let id = format!("p{k}");
            pages.push(page(&id, "a", &["a", "b", "c", "d"], 0, true));
            // b chosen twice in total
            let (x, y) = if k < 2 { (1, 0) } else { (0, 0) };
            anns.extend(pick(&id, x, y));
        }
        let m = confusion_matrix(&pages, &anns).unwrap();
        assert_eq!(m.get("a", "b"), Some(0.5));
        assert_eq!(m.get("b", "a"), Some(0.5));
        assert_eq!(m.get("a", "c"), Some(0.0));
        assert_eq!(m.get("b", "c"), None);
        assert_eq!(m.get("a", "a"), None);
    }

    #[test]
    fn confusion_ignores_generated_pages() {
        let pages = vec![page("p0", "a", &["a", "b"], 0, false)];
        let m = confusion_matrix(&pages, &pick("p0", 1, 1)).unwrap();
        assert!(m.artists.is_empty());
    }

    fn pools(artists: usize, per_artist: usize) -> BTreeMap<String, Vec<Verse>> {
        // five lines of nine words
        let body = vec![vec!["word"; 9].join(" "); 5].join("\n");
        (0..artists)
            .map(|a| {
                let id = format!("artist{a:02}");
                let verses = (0..per_artist)
                    .map(|k| {
                        Verse::from_text(&id, format!("{id}/v{k}"), &body, Provenance::Authentic)
                            .unwrap()
                    })
                    .collect();
                (id, verses)
            })
            .collect()
    }

    #[test]
    fn thirteen_artists_five_verses() {
        let pools = pools(13, 10);
        let eval: Vec<Verse> = pools.values().flat_map(|v| v[..5].to_vec()).collect();
        let pages = build_style_pages(&eval, &pools, 7, PageLayout::default()).unwrap();
        assert_eq!(pages.len(), 260);
        for v in &eval {
            let mine: Vec<_> = pages.iter().filter(|p| p.eval_verse.verse_id == v.verse_id).collect();
            assert_eq!(mine.len(), 4);
            let mut seen = Vec::new();
            for p in &mine {
                let t = &p.choices[p.target_choice_index];
                assert_eq!(t.artist_id, v.artist_id);
                assert_ne!(t.verse_id, v.verse_id);
                seen.extend(
                    p.choices
                        .iter()
                        .filter(|c| c.artist_id != v.artist_id)
                        .map(|c| c.artist_id.clone()),
                );
            }
            seen.sort();
            let expected: Vec<String> = pools.keys().filter(|a| **a != v.artist_id).cloned().collect();
            assert_eq!(seen, expected);
        }
        assert_eq!(build_style_pages(&eval, &pools, 7, PageLayout::default()).unwrap(), pages);
    }

    #[test]
    fn layout_and_pool_errors() {
        let p = pools(4, 3);
        let eval = vec![p["artist00"][0].clone()];
        assert!(matches!(
            build_style_pages(&eval, &p, 1, PageLayout { choices_per_page: 3, min_tokens: 40 }),
            Err(Error::Layout { remainder: 1, .. })
        ));
        let small = pools(13, 3);
        let eval = vec![small["artist00"][0].clone()];
        assert!(matches!(
            build_style_pages(&eval, &small, 1, PageLayout::default()),
            Err(Error::InsufficientPool { needed: 4, available: 2, .. })
        ));
    }

    #[test]
    fn round_robin_pairs_are_distinct() {
        let roster: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let pairs = assign_pairs(9, &roster).unwrap();
        assert!(pairs.iter().all(|[x, y]| x != y));
        assert!(assign_pairs(1, &roster[..1]).is_err());
    }

    #[test]
    fn payloads_are_blind_and_submissions_checked() {
        let pools = pools(4, 4);
        let eval = vec![pools["artist00"][0].clone()];
        let layout = PageLayout { choices_per_page: 4, min_tokens: 40 };
        let pages = build_style_pages(&eval, &pools, 3, layout).unwrap();
        let known: Vec<&Verse> = pools.values().flatten().collect();
        let roster = vec!["ann1".to_string(), "ann2".to_string()];
        let plan = build_plan(pages, &[&pools["artist01"][1]], &known, &roster).unwrap();
        assert_eq!(plan.assignments.len(), 2 * 3);
        for a in &plan.assignments {
            let json = serde_json::to_string(&plan.serve(a)).unwrap();
            assert!(!json.contains("artist"), "{json}");
            assert!(!json.contains("target"), "{json}");
        }
        let style = &plan.assignments[0];
        let recs = plan
            .records_for(style, &SubmissionBody { chosen_index: Some(2), labels: None }, 5)
            .unwrap();
        assert_eq!(recs.len(), 1);
        assert!(plan
            .records_for(style, &SubmissionBody { chosen_index: Some(4), labels: None }, 5)
            .is_err());
        let flu = plan.assignments.iter().find(|a| a.kind == TaskKind::Fluency).unwrap();
        let missing = SubmissionBody {
            chosen_index: None,
            labels: Some(vec![LineLabel { line_index: 0, label: S }]),
        };
        assert!(matches!(
            plan.records_for(flu, &missing, 0),
            Err(SubmissionError::MissingLines(_))
        ));
    }

    #[test]
    fn jsonl_round_trip() {
        let rec = AnnotationRecord::style(
            &StyleMatchAnnotation {
                page_id: "p1".into(),
                annotator_id: "x".into(),
                chosen_index: 2,
            },
            9,
        );
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[rec.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "{\"task\":\"style\",\"page_id\":\"p1\",\"annotator_id\":\"x\",\"chosen_index\":2,\"timestamp\":9}\n");
        let back: AnnotationRecord = serde_json::from_str(text.trim()).unwrap();
        let (lines, styles) = split_records(&[back]).unwrap();
        assert!(lines.is_empty());
        assert_eq!(styles[0].chosen_index, 2);
    }
}
