//! Regenerates the synthetic golden corpus under data/golden: three artists
//! with 20 verses each, external checkpoint verses for every window, the
//! pipeline config and a simulated annotation export.
//!
//!     cargo run -p ghosteval --example make_golden [-- <out-dir>]

use std::fs;
use std::path::{Path, PathBuf};

use ghosteval::annotation::{
    write_jsonl, AnnotationLabel, AnnotationPlan, AnnotationRecord, LineLabel, SubmissionBody,
};
use ghosteval::pipeline::{Pipeline, PipelineConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Style {
    id: &'static str,
    subjects: &'static [&'static str],
    verbs: &'static [&'static str],
    objects: &'static [&'static str],
    rhymes: &'static [&'static [&'static str]],
    /// Probability an annotator labels a line strong, weak.
    fluency: (f64, f64),
    /// Probability an annotator picks the true verse.
    recognizable: f64,
}

const STYLES: [Style; 3] = [
    Style {
        id: "alpha",
        subjects: &["i", "we", "my crew", "the block", "my brother", "the city", "the corner"],
        verbs: &["run", "ride", "walk", "hold", "keep", "watch", "fight", "move"],
        objects: &["the street", "the cold", "the dark", "the rain", "the struggle", "the pavement", "the alley"],
        rhymes: &[
            &["night", "light", "fight", "sight", "tight", "right"],
            &["rain", "pain", "chain", "lane", "train", "vein"],
            &["cold", "hold", "told", "gold", "old", "sold"],
            &["street", "beat", "heat", "feet", "seat", "meet"],
        ],
        fluency: (0.6, 0.3),
        recognizable: 0.7,
    },
    Style {
        id: "bravo",
        subjects: &["she", "the money", "my wrist", "the diamond", "the party", "my chain", "the crowd"],
        verbs: &["shine", "spend", "flash", "buy", "pop", "drop", "roll", "stack"],
        objects: &["the cash", "the champagne", "the bottle", "the jewels", "the car", "the club", "the ice"],
        rhymes: &[
            &["cash", "flash", "stash", "dash", "splash", "crash"],
            &["day", "pay", "stay", "play", "way", "spray"],
            &["money", "honey", "sunny", "funny", "bunny", "runny"],
            &["gold", "bold", "cold", "sold", "rolled", "told"],
        ],
        fluency: (0.45, 0.35),
        recognizable: 0.55,
    },
    Style {
        id: "charlie",
        subjects: &["the mind", "a thought", "the soul", "my spirit", "the truth", "the teacher", "the reason"],
        verbs: &["seek", "learn", "question", "wonder", "build", "search", "carry", "measure"],
        objects: &["the wisdom", "the silence", "the meaning", "the knowledge", "the answer", "the vision", "the future"],
        rhymes: &[
            &["mind", "find", "kind", "blind", "behind", "designed"],
            &["time", "climb", "rhyme", "prime", "sublime", "crime"],
            &["thought", "taught", "caught", "fought", "sought", "brought"],
            &["soul", "whole", "goal", "role", "control", "toll"],
        ],
        fluency: (0.3, 0.4),
        recognizable: 0.45,
    },
];

const FILLERS: &[&str] = &["and", "with", "through", "into", "for", "like", "under", "over"];

fn line(style: &Style, end: &str, rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {} {} {}",
        style.subjects.choose(rng).unwrap(),
        style.verbs.choose(rng).unwrap(),
        style.objects.choose(rng).unwrap(),
        FILLERS.choose(rng).unwrap(),
        end
    )
}

/// Eight lines in rhyming couplets.
fn verse(style: &Style, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut out = Vec::new();
    for _ in 0..4 {
        let family = style.rhymes.choose(rng).unwrap();
        let pair: Vec<&&str> = family.choose_multiple(rng, 2).collect();
        out.push(line(style, pair[0], rng));
        out.push(line(style, pair[1], rng));
    }
    out
}

fn song(style: &Style, k: usize, rng: &mut ChaCha8Rng) -> String {
    let mut s = format!("Artist: {}\nSong: track {k}\nTyped by: golden\n\n", style.id);
    for v in 0..4 {
        s.push_str(&format!("[Verse {}]\n", v + 1));
        for l in verse(style, rng) {
            s.push_str(&l);
            s.push('\n');
        }
        if v == 1 {
            s.push_str("\n[Chorus]\n");
            let hook = style.rhymes[0][0];
            for _ in 0..2 {
                s.push_str(&format!("{hook} {hook} all {hook} (x2)\n"));
            }
        }
        s.push('\n');
    }
    s
}

/// Checkpoint verse: early iterations are word soup, later ones copy
/// corpus-like lines more and more often.
fn checkpoint_verse(style: &Style, iteration: u64, rng: &mut ChaCha8Rng) -> String {
    let p = (iteration as f64 / 16_000.0).min(1.0);
    let mut soup: Vec<&str> = Vec::new();
    for s in &STYLES {
        soup.extend(s.subjects.iter().flat_map(|w| w.split(' ')));
        soup.extend(s.objects.iter().flat_map(|w| w.split(' ')));
    }
    soup.extend(FILLERS);
    let lines = if rng.gen_bool(0.5 + 0.5 * p) { 8 } else { 6 };
    let mut out = String::new();
    let good = verse(style, rng);
    for l in good.iter().take(lines) {
        if rng.gen_bool(p) {
            out.push_str(l);
        } else {
            let words: Vec<&str> = (0..8).map(|_| *soup.choose(rng).unwrap()).collect();
            out.push_str(&words.join(" "));
        }
        out.push('\n');
    }
    out
}

fn write(path: &Path, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

const CONFIG: &str = r#"# Golden mini-corpus: three synthetic artists.
output_dir = "out"
annotations = "annotations.jsonl"
total_iterations = 16400

[[artists]]
id = "alpha"
corpus = "corpus/alpha"
checkpoints = "checkpoints/alpha"

[[artists]]
id = "bravo"
corpus = "corpus/bravo"
checkpoints = "checkpoints/bravo"

[[artists]]
id = "charlie"
corpus = "corpus/charlie"
checkpoints = "checkpoints/charlie"

[seeds]
baseline = 42
pages = 7

[baseline]
verses_per_point = 3
max_tokens = 300

[pages]
# two distractor artists per page, one page per evaluated verse
choices_per_page = 3
min_tokens = 40
eval_verses_per_artist = 5

[service]
port = 8080
admin_token = "golden-admin"
roster = [
  { annotator = "ann1", token = "tok-ann1" },
  { annotator = "ann2", token = "tok-ann2" },
  { annotator = "ann3", token = "tok-ann3" },
]
"#;

fn simulate(plan: &AnnotationPlan, rng: &mut ChaCha8Rng) -> Vec<AnnotationRecord> {
    let style_of = |artist: &str| STYLES.iter().find(|s| s.id == artist).unwrap();
    let artist_of_verse = |id: &str| id.split('/').next().unwrap().to_string();
    let mut out = Vec::new();
    for (k, a) in plan.assignments.iter().enumerate() {
        let timestamp = 1_700_000_000_000 + 1_000 * k as u64;
        let body = match a.kind.line_task() {
            None => {
                let page = plan.page(&a.item_id).unwrap();
                let s = style_of(page.target_artist());
                let chosen = if rng.gen_bool(s.recognizable) {
                    page.target_choice_index
                } else {
                    rng.gen_range(0..page.choices.len())
                };
                SubmissionBody {
                    chosen_index: Some(chosen),
                    labels: None,
                }
            }
            Some(task) => {
                let s = style_of(&artist_of_verse(&a.item_id));
                let n = plan.texts[&a.item_id].len();
                let labels = (task.first_line()..n)
                    .map(|i| {
                        let u: f64 = rng.gen();
                        let label = if u < s.fluency.0 {
                            AnnotationLabel::Strong
                        } else if u < s.fluency.0 + s.fluency.1 {
                            AnnotationLabel::Weak
                        } else {
                            AnnotationLabel::None
                        };
                        LineLabel { line_index: i, label }
                    })
                    .collect();
                SubmissionBody {
                    chosen_index: None,
                    labels: Some(labels),
                }
            }
        };
        out.extend(plan.records_for(a, &body, timestamp).unwrap());
    }
    out
}

fn main() {
    let root: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/golden"));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for style in &STYLES {
        for k in 0..5 {
            let path = root.join(format!("corpus/{}/track{k:02}.txt", style.id));
            write(&path, &song(style, k, &mut rng));
        }
        for x in (0..=16_000u64).step_by(2_000) {
            for off in [0i64, 100, -200] {
                let it = x as i64 + off;
                if it < 0 {
                    continue;
                }
                let path = root.join(format!("checkpoints/{}/iter_{it}.txt", style.id));
                write(&path, &checkpoint_verse(style, it as u64, &mut rng));
            }
        }
    }
    write(&root.join("pipeline.toml"), CONFIG);

    let mut config = PipelineConfig::load(&root.join("pipeline.toml")).unwrap();
    config.annotations = None;
    let pipeline = Pipeline::new(config).unwrap();
    let results = pipeline.analyze().unwrap();
    for r in &results {
        assert_eq!(r.corpus.verses.len(), 20, "{}", r.id());
    }
    let plan = pipeline.plan(&results).unwrap();
    let records = simulate(&plan, &mut rng);
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &records).unwrap();
    fs::write(root.join("annotations.jsonl"), buf).unwrap();
    println!(
        "wrote {} pages, {} assignments, {} records under {}",
        plan.pages.len(),
        plan.assignments.len(),
        records.len(),
        root.display()
    );
}
