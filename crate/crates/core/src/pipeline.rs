//! End-to-end orchestration driven by one TOML config: ingest, statistics,
//! baseline generation, scoring, regression merge, page construction and the
//! report tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotation::{
    build_plan, build_style_pages, coherence_score, confusion_matrix, fluency_score, match_table,
    raw_iaa, read_jsonl, split_records, AnnotationPlan, LineAnnotation, LineTask, MatchRow,
    MatchTally, PageLayout, StyleMatchAnnotation,
};
use crate::corpus::{corpus_stats, ArtistCorpus, CleaningRules, CompiledRules, CorpusStats, Verse, STATS_HEADER};
use crate::error::{Error, Result};
use crate::evalmerge::{
    covariate_correlations, merged_similarity, metric_correlations, verse_structure_report,
    ArtistMetrics, CorrelationMatrix, MergedScore, StructureRow,
};
use crate::generator::{
    baseline_checkpoint_suite, external_checkpoint_suite, load_checkpoint_verses, BaselineConfig,
    BaselineSuite, CheckpointPoint, GenerationMode, DEFAULT_MAX_TOKENS,
};
use crate::report::{opt_real, real, Table};
use crate::rhyme::{detect_rhymes, PronouncingDictionary, RhymeParams};
use crate::similarity::{SimilarityOptions, TfIdfIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistConfig {
    pub id: String,
    /// Directory of raw song files.
    pub corpus: PathBuf,
    /// Directory of `iter_<k>.txt` verses from an external generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub baseline: u64,
    pub pages: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            baseline: 42,
            pages: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineSettings {
    pub verses_per_point: usize,
    pub max_tokens: usize,
    pub mode: GenerationMode,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        BaselineSettings {
            verses_per_point: 5,
            max_tokens: DEFAULT_MAX_TOKENS,
            mode: GenerationMode::Sample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PagesConfig {
    pub choices_per_page: usize,
    pub min_tokens: usize,
    /// Authentic and generated verses evaluated per artist, each.
    pub eval_verses_per_artist: usize,
}

impl Default for PagesConfig {
    fn default() -> Self {
        let layout = PageLayout::default();
        PagesConfig {
            choices_per_page: layout.choices_per_page,
            min_tokens: layout.min_tokens,
            eval_verses_per_artist: 5,
        }
    }
}

impl PagesConfig {
    pub fn layout(&self) -> PageLayout {
        PageLayout {
            choices_per_page: self.choices_per_page,
            min_tokens: self.min_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub annotator: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub port: u16,
    pub roster: Vec<RosterEntry>,
    pub admin_token: Option<String>,
    /// Append-only submission log; defaults to `<output_dir>/submissions.jsonl`.
    pub store: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            roster: Vec::new(),
            admin_token: None,
            store: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub artists: Vec<ArtistConfig>,
    /// CMU-format pronouncing dictionary; the bundled subset when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    /// Exported annotation records feeding the manual-evaluation tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<PathBuf>,
    /// Length of the external generator's training run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_iterations: Option<u64>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub rhyme: RhymeParams,
    #[serde(default)]
    pub cleaning: CleaningRules,
    #[serde(default)]
    pub similarity: SimilarityOptions,
    #[serde(default)]
    pub baseline: BaselineSettings,
    #[serde(default)]
    pub pages: PagesConfig,
    #[serde(default)]
    pub service: ServiceConfig,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        self.output_dir = resolve(base, &self.output_dir);
        for a in &mut self.artists {
            a.corpus = resolve(base, &a.corpus);
            a.checkpoints = a.checkpoints.as_deref().map(|p| resolve(base, p));
        }
        self.dictionary = self.dictionary.as_deref().map(|p| resolve(base, p));
        self.annotations = self.annotations.as_deref().map(|p| resolve(base, p));
        self.service.store = self.service.store.as_deref().map(|p| resolve(base, p));
    }

    /// Fails on the first referenced input that does not exist.
    pub fn validate(&self) -> Result<()> {
        if self.artists.is_empty() {
            return Err(Error::Config("no artists configured".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.artists {
            if a.id.is_empty() || !seen.insert(&a.id) {
                return Err(Error::Config(format!("artist id {:?} is empty or repeated", a.id)));
            }
            if !a.corpus.is_dir() {
                return Err(Error::MissingInput(a.corpus.clone()));
            }
            if let Some(c) = &a.checkpoints {
                if !c.is_dir() {
                    return Err(Error::MissingInput(c.clone()));
                }
            }
        }
        for p in [&self.dictionary, &self.annotations].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::MissingInput(p.clone()));
            }
        }
        if self.rhyme.window_lines == 0 || self.rhyme.max_span == 0 {
            return Err(Error::Config("rhyme window and span must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the config with machine-specific locations left out, so
    /// the same experiment hashes the same wherever it runs.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.service.store = None;
        let strip = |p: &Path| PathBuf::from(p.file_name().unwrap_or_default());
        for a in &mut c.artists {
            a.corpus = strip(&a.corpus);
            a.checkpoints = a.checkpoints.as_deref().map(strip);
        }
        c.dictionary = c.dictionary.as_deref().map(strip);
        c.annotations = c.annotations.as_deref().map(strip);
        let text = toml::to_string(&c).unwrap_or_default();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> String {
        format!(
            "ghosteval config_sha256={} seeds=baseline:{},pages:{}",
            self.hash(),
            self.seeds.baseline,
            self.seeds.pages
        )
    }

    pub fn store_path(&self) -> PathBuf {
        self.service
            .store
            .clone()
            .unwrap_or_else(|| self.output_dir.join("submissions.jsonl"))
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            seed: self.seeds.baseline,
            verses_per_point: self.baseline.verses_per_point,
            max_tokens: self.baseline.max_tokens,
            mode: self.baseline.mode,
        }
    }
}

/// Everything computed for one artist.
#[derive(Debug, Clone)]
pub struct ArtistResult {
    pub corpus: ArtistCorpus,
    pub stats: CorpusStats,
    /// Mean weighted rhyme density of the authentic verses.
    pub target_rhyme_density: f64,
    pub baseline: BaselineSuite,
    pub external: Option<ExternalSuite>,
    pub merged_baseline: std::result::Result<MergedScore, String>,
    pub merged_external: Option<std::result::Result<MergedScore, String>>,
}

#[derive(Debug, Clone)]
pub struct ExternalSuite {
    pub verses: Vec<Verse>,
    pub points: Vec<CheckpointPoint>,
}

impl ArtistResult {
    pub fn id(&self) -> &str {
        &self.corpus.artist_id
    }

    /// Generated verses used for annotation: external when present.
    pub fn generated(&self) -> &[Verse] {
        match &self.external {
            Some(e) => &e.verses,
            None => &self.baseline.verses,
        }
    }

    /// Merged similarity of the external generator when present.
    pub fn headline_similarity(&self) -> Option<f64> {
        match &self.merged_external {
            Some(m) => m.as_ref().ok().map(|m| m.similarity_at_target),
            None => self.merged_baseline.as_ref().ok().map(|m| m.similarity_at_target),
        }
    }
}

/// Annotation-derived numbers for the report.
#[derive(Debug, Clone, Default)]
pub struct ManualResults {
    pub match_rows: Vec<MatchRow>,
    pub fluency: BTreeMap<String, f64>,
    pub coherence: BTreeMap<String, f64>,
    pub fluency_iaa: Option<f64>,
    pub coherence_iaa: Option<f64>,
    pub confusion: Option<crate::annotation::ConfusionMatrix>,
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub dict: PronouncingDictionary,
    rules: CompiledRules,
}

/// Runs `f` for each artist on its own thread, returning results in
/// input order.
fn per_artist<T: Send, I: Sync>(items: &[I], f: impl Fn(&I) -> Result<T> + Sync) -> Result<Vec<T>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|item| s.spawn(|| f(item))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Config("worker panicked".into()))))
            .collect()
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let dict = match &config.dictionary {
            Some(p) => PronouncingDictionary::load(p)?,
            None => PronouncingDictionary::bundled(),
        };
        let rules = config.cleaning.compile()?;
        Ok(Pipeline {
            config,
            dict,
            rules,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::new(PipelineConfig::load(path)?)
    }

    pub fn provenance(&self) -> String {
        self.config.provenance()
    }

    pub fn corpora(&self) -> Result<Vec<ArtistCorpus>> {
        per_artist(&self.config.artists, |a| {
            let corpus = ArtistCorpus::load_dir(&a.corpus, &a.id, &self.rules)?;
            if corpus.verses.is_empty() {
                return Err(Error::EmptyCorpus);
            }
            Ok(corpus)
        })
    }

    /// One configured artist's corpus.
    pub fn corpus(&self, artist: &str) -> Result<ArtistCorpus> {
        let a = self
            .config
            .artists
            .iter()
            .find(|a| a.id == artist)
            .ok_or_else(|| Error::Config(format!("artist {artist} is not configured")))?;
        let corpus = ArtistCorpus::load_dir(&a.corpus, &a.id, &self.rules)?;
        if corpus.verses.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(corpus)
    }

    pub fn stats(&self, corpora: &[ArtistCorpus]) -> Result<Vec<CorpusStats>> {
        corpora.iter().map(corpus_stats).collect()
    }

    pub fn index(&self, corpus: &ArtistCorpus) -> Result<TfIdfIndex> {
        TfIdfIndex::build_with(&corpus.verses, self.config.similarity)
    }

    pub fn baseline(&self, corpus: &ArtistCorpus) -> Result<BaselineSuite> {
        let index = self.index(corpus)?;
        baseline_checkpoint_suite(
            corpus,
            &index,
            &self.dict,
            &self.config.rhyme,
            &self.config.baseline_config(),
        )
    }

    fn target_density(&self, corpus: &ArtistCorpus) -> Result<f64> {
        let mut densities = Vec::with_capacity(corpus.verses.len());
        for v in &corpus.verses {
            match detect_rhymes(v, &self.dict, &self.config.rhyme) {
                Ok(a) => densities.push(a.weighted_density),
                Err(Error::Unpronounceable { .. }) => densities.push(0.0),
                Err(e) => return Err(e),
            }
        }
        mean(densities.into_iter()).ok_or(Error::EmptyCorpus)
    }

    fn analyze_artist(&self, cfg: &ArtistConfig, corpus: ArtistCorpus) -> Result<ArtistResult> {
        let stats = corpus_stats(&corpus)?;
        let index = self.index(&corpus)?;
        let target = self.target_density(&corpus)?;
        let baseline = baseline_checkpoint_suite(
            &corpus,
            &index,
            &self.dict,
            &self.config.rhyme,
            &self.config.baseline_config(),
        )?;
        let external = match &cfg.checkpoints {
            Some(dir) => {
                let verses = load_checkpoint_verses(dir, &cfg.id)?;
                let points = external_checkpoint_suite(&verses, &index, &self.dict, &self.config.rhyme)?;
                Some(ExternalSuite { verses, points })
            }
            None => None,
        };
        let merge = |points: &[CheckpointPoint]| merged_similarity(points, target).map_err(|e| e.to_string());
        Ok(ArtistResult {
            merged_baseline: merge(&baseline.points),
            merged_external: external.as_ref().map(|e| merge(&e.points)),
            corpus,
            stats,
            target_rhyme_density: target,
            baseline,
            external,
        })
    }

    /// Every automatic metric for every artist, artists in parallel.
    pub fn analyze(&self) -> Result<Vec<ArtistResult>> {
        let corpora = self.corpora()?;
        let jobs: Vec<(&ArtistConfig, ArtistCorpus)> =
            self.config.artists.iter().zip(corpora).collect();
        per_artist(&jobs, |(cfg, corpus)| self.analyze_artist(cfg, corpus.clone()))
    }

    /// Style pages and line-task verses, with two annotators on each.
    pub fn plan(&self, results: &[ArtistResult]) -> Result<AnnotationPlan> {
        let pc = &self.config.pages;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seeds.pages);
        let mut pick = |verses: &[Verse], what: &str, artist: &str| -> Vec<Verse> {
            let mut eligible: Vec<&Verse> =
                verses.iter().filter(|v| v.token_count >= pc.min_tokens).collect();
            eligible.sort_by(|a, b| a.verse_id.cmp(&b.verse_id));
            eligible.shuffle(&mut rng);
            if eligible.len() < pc.eval_verses_per_artist {
                log::warn!(
                    "{artist}: only {} {what} verses of at least {} tokens",
                    eligible.len(),
                    pc.min_tokens
                );
            }
            let mut chosen: Vec<Verse> = eligible
                .into_iter()
                .take(pc.eval_verses_per_artist)
                .cloned()
                .collect();
            chosen.sort_by(|a, b| a.verse_id.cmp(&b.verse_id));
            chosen
        };
        let mut authentic = Vec::new();
        let mut generated = Vec::new();
        for r in results {
            authentic.extend(pick(&r.corpus.verses, "authentic", r.id()));
            generated.extend(pick(r.generated(), "generated", r.id()));
        }
        let pools: BTreeMap<String, Vec<Verse>> = results
            .iter()
            .map(|r| (r.id().to_string(), r.corpus.verses.clone()))
            .collect();
        let eval: Vec<Verse> = authentic.iter().chain(&generated).cloned().collect();
        let pages = build_style_pages(&eval, &pools, self.config.seeds.pages, pc.layout())?;
        let known: Vec<&Verse> = results.iter().flat_map(|r| &r.corpus.verses).collect();
        let line_verses: Vec<&Verse> = generated.iter().collect();
        let annotators: Vec<String> = self
            .config
            .service
            .roster
            .iter()
            .map(|r| r.annotator.clone())
            .collect();
        build_plan(pages, &line_verses, &known, &annotators)
    }

    /// Scores from the annotation export, when one is configured.
    pub fn manual(&self, results: &[ArtistResult], plan: &AnnotationPlan) -> Result<Option<ManualResults>> {
        let Some(path) = &self.config.annotations else {
            return Ok(None);
        };
        let records = read_jsonl(path)?;
        let (lines, styles) = split_records(&records)?;
        Ok(Some(score_manual(results, plan, &lines, &styles)?))
    }
}

fn score_manual(
    results: &[ArtistResult],
    plan: &AnnotationPlan,
    lines: &[LineAnnotation],
    styles: &[StyleMatchAnnotation],
) -> Result<ManualResults> {
    let verses: BTreeMap<&str, &Verse> = results
        .iter()
        .flat_map(|r| r.generated())
        .map(|v| (v.verse_id.as_str(), v))
        .collect();
    let mut per_artist_flu: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut per_artist_coh: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for id in &plan.line_verses {
        let v = verses
            .get(id.as_str())
            .ok_or_else(|| Error::Config(format!("plan verse {id} not found")))?;
        per_artist_flu
            .entry(v.artist_id.clone())
            .or_default()
            .push(fluency_score(lines, v)?);
        if let Some(c) = coherence_score(lines, v)? {
            per_artist_coh.entry(v.artist_id.clone()).or_default().push(c);
        }
    }
    let avg = |m: BTreeMap<String, Vec<f64>>| {
        m.into_iter()
            .filter_map(|(k, v)| mean(v.into_iter()).map(|m| (k, m)))
            .collect()
    };
    let of_task = |t: LineTask| -> Vec<LineAnnotation> {
        lines.iter().filter(|a| a.task == t).cloned().collect()
    };
    Ok(ManualResults {
        match_rows: match_table(&plan.pages, styles)?,
        fluency: avg(per_artist_flu),
        coherence: avg(per_artist_coh),
        fluency_iaa: raw_iaa(&of_task(LineTask::Fluency))?,
        coherence_iaa: raw_iaa(&of_task(LineTask::Coherence))?,
        confusion: Some(confusion_matrix(&plan.pages, styles)?),
    })
}

pub fn stats_table(rows: &[(String, CorpusStats)]) -> Table {
    let mut t = Table::new(&STATS_HEADER);
    for (artist, s) in rows {
        t.push(vec![
            artist.clone(),
            s.verse_count.to_string(),
            s.unique_vocab.to_string(),
            real(s.vocab_richness),
            real(s.avg_len),
            real(s.stdev_len),
            s.max_len.to_string(),
        ]);
    }
    t
}

pub fn checkpoint_table(results: &[ArtistResult]) -> Table {
    let mut t = Table::new(&[
        "artist",
        "model",
        "x",
        "avg_rhyme_density",
        "avg_max_similarity",
        "verses",
    ]);
    for r in results {
        let mut series = vec![("baseline", &r.baseline.points)];
        if let Some(e) = &r.external {
            series.push(("external", &e.points));
        }
        for (model, points) in series {
            for p in points {
                t.push(vec![
                    r.id().to_string(),
                    model.to_string(),
                    real(p.x),
                    real(p.avg_rhyme_density),
                    real(p.avg_max_similarity),
                    p.verse_refs.len().to_string(),
                ]);
            }
        }
    }
    t
}

pub const MERGE_HEADER: [&str; 11] = [
    "artist",
    "model",
    "target_rhyme_density",
    "intersection_x",
    "similarity_at_target",
    "extrapolated",
    "rd_slope",
    "rd_intercept",
    "sim_slope",
    "sim_intercept",
    "status",
];

pub fn merge_table(results: &[ArtistResult]) -> Table {
    let mut t = Table::new(&MERGE_HEADER);
    for r in results {
        let mut rows = vec![("baseline", &r.merged_baseline)];
        if let Some(m) = &r.merged_external {
            rows.push(("external", m));
        }
        for (model, merged) in rows {
            let mut row = vec![r.id().to_string(), model.to_string(), real(r.target_rhyme_density)];
            match merged {
                Ok(m) => row.extend([
                    real(m.intersection_x),
                    real(m.similarity_at_target),
                    m.extrapolated.to_string(),
                    real(m.rhyme_line.slope),
                    real(m.rhyme_line.intercept),
                    real(m.similarity_line.slope),
                    real(m.similarity_line.intercept),
                    "ok".to_string(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n("NA".to_string(), 7));
                    row.push(e.clone());
                }
            }
            t.push(row);
        }
    }
    t
}

fn match_cells(t: &MatchTally) -> [String; 4] {
    [
        opt_real(t.match_pct()),
        opt_real(t.match_agreed_pct()),
        opt_real(t.agreement_pct()),
        t.pages.to_string(),
    ]
}

pub fn match_report(rows: &[MatchRow]) -> Table {
    let mut t = Table::new(&[
        "artist",
        "authentic_match_pct",
        "authentic_match_agreed_pct",
        "authentic_agreement_pct",
        "authentic_pages",
        "generated_match_pct",
        "generated_match_agreed_pct",
        "generated_agreement_pct",
        "generated_pages",
    ]);
    for r in rows {
        let mut row = vec![r.artist.clone()];
        row.extend(match_cells(&r.authentic));
        row.extend(match_cells(&r.generated));
        t.push(row);
    }
    t
}

pub fn correlation_table(m: &CorrelationMatrix) -> Table {
    let mut header = vec![""];
    header.extend(m.columns.iter().map(String::as_str));
    let mut t = Table::new(&header);
    for (name, row) in m.rows.iter().zip(&m.values) {
        let mut cells = vec![name.clone()];
        cells.extend(row.iter().map(|v| opt_real(*v)));
        t.push(cells);
    }
    t
}

pub fn structure_table(rows: &[(String, Option<StructureRow>)]) -> Table {
    let mut t = Table::new(&[
        "artist",
        "model",
        "max_len",
        "checkpoint",
        "percent_of_training",
        "corpus_avg_len",
    ]);
    for (model, row) in rows {
        if let Some(r) = row {
            t.push(vec![
                r.artist.clone(),
                model.clone(),
                r.max_len.to_string(),
                r.checkpoint.to_string(),
                opt_real(r.percent_of_training),
                opt_real(r.corpus_avg_len),
            ]);
        }
    }
    t
}

pub fn confusion_table(m: &crate::annotation::ConfusionMatrix) -> Table {
    let mut header = vec![""];
    header.extend(m.artists.iter().map(String::as_str));
    let mut t = Table::new(&header);
    for (a, row) in m.artists.iter().zip(&m.values) {
        let mut cells = vec![a.clone()];
        cells.extend(row.iter().map(|v| opt_real(*v)));
        t.push(cells);
    }
    t
}

/// Metric rows for the correlation tables; artists missing a metric are left out.
pub fn artist_metrics(results: &[ArtistResult], manual: &ManualResults) -> Vec<ArtistMetrics> {
    results
        .iter()
        .filter_map(|r| {
            let id = r.id();
            let matching = manual
                .match_rows
                .iter()
                .find(|m| m.artist == id)
                .and_then(|m| m.generated.match_pct())?;
            Some(ArtistMetrics {
                artist: id.to_string(),
                coherence: *manual.coherence.get(id)?,
                fluency: *manual.fluency.get(id)?,
                similarity: r.headline_similarity()?,
                matching,
                verses: Some(r.stats.verse_count as f64),
                tokens: Some(r.corpus.total_tokens() as f64),
                richness: Some(r.stats.vocab_richness),
            })
        })
        .collect()
}

fn empty_correlation(rows: &[&str], cols: &[&str]) -> CorrelationMatrix {
    CorrelationMatrix {
        rows: rows.iter().map(|s| s.to_string()).collect(),
        columns: cols.iter().map(|s| s.to_string()).collect(),
        values: vec![vec![None; cols.len()]; rows.len()],
    }
}

/// Output file names written by [`Pipeline::report`].
pub const REPORT_FILES: [&str; 9] = [
    "table1_corpus_stats.csv",
    "table2_style_matching.csv",
    "table3_merged_similarity.csv",
    "table4a_metric_correlations.csv",
    "table4b_covariate_correlations.csv",
    "table5_verse_structure.csv",
    "checkpoint_series.csv",
    "artist_confusion.csv",
    "manual_summary.csv",
];

impl Pipeline {
    fn write(&self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.config.output_dir.join(name);
        table.write(&path, &self.provenance())?;
        Ok(path)
    }

    /// Writes one manifest per artist under `corpus/`.
    pub fn run_ingest(&self) -> Result<Vec<PathBuf>> {
        let dir = self.config.output_dir.join("corpus");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut out = Vec::new();
        for c in self.corpora()? {
            let path = dir.join(format!("{}.json", c.artist_id));
            let text = serde_json::to_string_pretty(&c.manifest())?;
            fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            out.push(path);
        }
        Ok(out)
    }

    pub fn run_stats(&self) -> Result<PathBuf> {
        let corpora = self.corpora()?;
        let stats = self.stats(&corpora)?;
        let rows: Vec<(String, CorpusStats)> = corpora
            .iter()
            .map(|c| c.artist_id.clone())
            .zip(stats)
            .collect();
        self.write(REPORT_FILES[0], &stats_table(&rows))
    }

    /// Baseline verses as text files plus their checkpoint series.
    pub fn run_gen_baseline(&self) -> Result<Vec<PathBuf>> {
        let corpora = self.corpora()?;
        let suites = per_artist(&corpora, |c| self.baseline(c))?;
        let mut written = Vec::new();
        for (c, suite) in corpora.iter().zip(&suites) {
            let dir = self.config.output_dir.join("baseline").join(&c.artist_id);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for v in &suite.verses {
                let name = v.verse_id.rsplit('/').next().unwrap_or(&v.verse_id);
                let path = dir.join(format!("{name}.txt"));
                fs::write(&path, v.to_text()).map_err(|e| Error::io(&path, e))?;
            }
            written.push(dir);
        }
        Ok(written)
    }

    pub fn run_score(&self) -> Result<PathBuf> {
        let results = self.analyze()?;
        self.write(REPORT_FILES[6], &checkpoint_table(&results))
    }

    pub fn run_regress(&self) -> Result<PathBuf> {
        let results = self.analyze()?;
        self.write(REPORT_FILES[2], &merge_table(&results))
    }

    pub fn run_pages(&self) -> Result<PathBuf> {
        let results = self.analyze()?;
        let plan = self.plan(&results)?;
        let path = self.config.output_dir.join("plan.json");
        fs::create_dir_all(&self.config.output_dir).map_err(|e| Error::io(&self.config.output_dir, e))?;
        fs::write(&path, serde_json::to_string_pretty(&plan)? + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// All report tables. Manual tables carry headers only when no
    /// annotation export is configured.
    pub fn report(&self) -> Result<Vec<PathBuf>> {
        let results = self.analyze()?;
        let plan = self.plan(&results)?;
        let manual = self.manual(&results, &plan)?;
        let mut out = Vec::new();

        let stats: Vec<(String, CorpusStats)> = results
            .iter()
            .map(|r| (r.id().to_string(), r.stats.clone()))
            .collect();
        out.push(self.write(REPORT_FILES[0], &stats_table(&stats))?);

        let rows = manual.as_ref().map(|m| m.match_rows.clone()).unwrap_or_default();
        out.push(self.write(REPORT_FILES[1], &match_report(&rows))?);

        out.push(self.write(REPORT_FILES[2], &merge_table(&results))?);

        let metrics = manual
            .as_ref()
            .map(|m| artist_metrics(&results, m))
            .unwrap_or_default();
        let t4a = metric_correlations(&metrics).unwrap_or_else(|_| {
            empty_correlation(&crate::evalmerge::METRIC_NAMES, &crate::evalmerge::METRIC_NAMES)
        });
        let t4b = covariate_correlations(&metrics).unwrap_or_else(|_| {
            empty_correlation(&crate::evalmerge::COVARIATE_NAMES, &crate::evalmerge::METRIC_NAMES)
        });
        out.push(self.write(REPORT_FILES[3], &correlation_table(&t4a))?);
        out.push(self.write(REPORT_FILES[4], &correlation_table(&t4b))?);

        let structure: Vec<(String, Option<StructureRow>)> = results
            .iter()
            .map(|r| {
                let (model, total) = match r.external {
                    Some(_) => ("external", self.config.total_iterations),
                    None => ("baseline", None),
                };
                (
                    model.to_string(),
                    verse_structure_report(r.id(), r.generated(), Some(r.stats.avg_len), total),
                )
            })
            .collect();
        out.push(self.write(REPORT_FILES[5], &structure_table(&structure))?);

        out.push(self.write(REPORT_FILES[6], &checkpoint_table(&results))?);

        let confusion = manual.as_ref().and_then(|m| m.confusion.clone());
        let confusion_t = match &confusion {
            Some(c) => confusion_table(c),
            None => Table::new(&[""]),
        };
        out.push(self.write(REPORT_FILES[7], &confusion_t)?);

        let mut summary = Table::new(&["artist", "fluency", "coherence"]);
        if let Some(m) = &manual {
            for r in &results {
                summary.push(vec![
                    r.id().to_string(),
                    opt_real(m.fluency.get(r.id()).copied()),
                    opt_real(m.coherence.get(r.id()).copied()),
                ]);
            }
            summary.push(vec![
                "raw_iaa".to_string(),
                opt_real(m.fluency_iaa),
                opt_real(m.coherence_iaa),
            ]);
        }
        out.push(self.write(REPORT_FILES[8], &summary)?);
        Ok(out)
    }

    /// Every stage in order, ending with the report tables.
    pub fn run_all(&self) -> Result<Vec<PathBuf>> {
        let mut out = self.run_ingest()?;
        out.extend(self.run_gen_baseline()?);
        out.push(self.run_pages()?);
        out.extend(self.report()?);
        Ok(out)
    }
}
