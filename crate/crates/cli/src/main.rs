//! `ghosteval` command line. Every pipeline stage reads one TOML config;
//! flags override individual fields.
//!
//! Exit codes: 0 ok, 1 validation, 2 missing input, 3 internal. Failures
//! also print one JSON object on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ghosteval::annotation::AnnotationPlan;
use ghosteval::corpus::{Provenance, Verse};
use ghosteval::generator::{verse_seed, NGramModel};
use ghosteval::pipeline::{Pipeline, PipelineConfig};
use ghosteval::report::real;
use ghosteval::rhyme::{detect_rhymes, EntropyNormalization, PronouncingDictionary, RhymeParams};
use ghosteval::Error;
use ghosteval_service::{Service, ServiceError};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ghosteval", version, about = "Ghostwriting evaluation pipeline")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline config file.
    #[arg(long, short, global = true, default_value = "ghosteval.toml")]
    config: PathBuf,
    /// Override `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override `seeds.baseline`.
    #[arg(long, global = true)]
    baseline_seed: Option<u64>,
    /// Override `seeds.pages`.
    #[arg(long, global = true)]
    pages_seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean and segment every corpus; writes corpus/<artist>.json.
    Ingest,
    /// Corpus statistics table.
    Stats,
    /// Baseline n-gram verses. With --artist, prints verses of one model to stdout.
    GenBaseline(GenBaseline),
    /// Checkpoint series for both generators.
    Score,
    /// Max tf-idf similarity of each verse in a file against one artist.
    ScoreSimilarity {
        #[arg(long = "index")]
        artist: String,
        #[arg(long)]
        verse: PathBuf,
    },
    /// Rhyme density of each verse in a file.
    RhymeDensity {
        #[arg(long)]
        verse: PathBuf,
        /// Entropy-weighted density.
        #[arg(long)]
        weighted: bool,
        /// Divide entropy by the token count instead of its log (implies --weighted).
        #[arg(long)]
        literal_entropy: bool,
    },
    /// Regression merge table.
    Regress,
    /// Style-matching pages and the annotation plan; writes plan.json.
    Pages,
    /// Annotation service over the plan written by `pages`.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Override `service.store`.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Every report table.
    Report {
        /// Override `annotations`.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// ingest, gen-baseline, pages and report in one go.
    Run,
}

#[derive(Args)]
struct GenBaseline {
    #[arg(long, requires = "n")]
    artist: Option<String>,
    /// Model order.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// Defaults to `baseline.max_tokens`.
    #[arg(long)]
    max_tokens: Option<usize>,
}

fn load_config(g: &Global) -> anyhow::Result<PipelineConfig> {
    let mut c = PipelineConfig::load(&g.config)?;
    if let Some(out) = &g.out {
        c.output_dir = out.clone();
    }
    if let Some(s) = g.baseline_seed {
        c.seeds.baseline = s;
    }
    if let Some(s) = g.pages_seed {
        c.seeds.pages = s;
    }
    Ok(c)
}

/// Blank-line separated verses of a plain text file, no length filter.
fn read_verses(path: &Path) -> anyhow::Result<Vec<Verse>> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => anyhow::Error::new(Error::MissingInput(path.to_path_buf())),
        _ => anyhow::Error::new(e).context(format!("reading {}", path.display())),
    })?;
    let verses: Vec<Verse> = text
        .split("\n\n")
        .filter_map(|block| {
            Verse::from_text("query", "query", block.trim_matches('\n'), Provenance::Generated { checkpoint: 0 })
        })
        .enumerate()
        .map(|(i, v)| Verse {
            verse_id: format!("query/{i}"),
            ..v
        })
        .collect();
    if verses.is_empty() {
        return Err(Error::EmptyVerse.into());
    }
    Ok(verses)
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn rhyme_density(g: &Global, verse: &Path, weighted: bool, literal: bool) -> anyhow::Result<()> {
    // the config is optional here; use its dictionary and params when present
    let (dict, mut params) = if g.config.is_file() {
        let p = Pipeline::new(load_config(g)?)?;
        let params = p.config.rhyme.clone();
        (p.dict, params)
    } else {
        (PronouncingDictionary::bundled(), RhymeParams::default())
    };
    if literal {
        params.entropy = EntropyNormalization::Literal;
    }
    for v in read_verses(verse)? {
        let value = match detect_rhymes(&v, &dict, &params) {
            Ok(a) if weighted || literal => a.weighted_density,
            Ok(a) => a.density,
            Err(Error::Unpronounceable { .. }) => 0.0,
            Err(e) => return Err(e.into()),
        };
        println!("{}", real(value));
    }
    Ok(())
}

fn gen_baseline(p: &Pipeline, args: &GenBaseline) -> anyhow::Result<()> {
    let (Some(artist), Some(n)) = (&args.artist, args.n) else {
        print_paths(&p.run_gen_baseline()?);
        return Ok(());
    };
    let corpus = p.corpus(artist)?;
    let model = NGramModel::train(&corpus.verses, n)?;
    let max_tokens = args.max_tokens.unwrap_or(p.config.baseline.max_tokens);
    for i in 0..args.count {
        let id = format!("{artist}/n{n}_{i}");
        let v = model.generate_verse(artist, &id, n as u64, verse_seed(args.seed, n, i), max_tokens, p.config.baseline.mode)?;
        if i > 0 {
            println!();
        }
        print!("{}", v.to_text());
    }
    Ok(())
}

fn serve(p: Pipeline, port: Option<u16>, store: Option<PathBuf>) -> anyhow::Result<()> {
    let plan_path = p.config.output_dir.join("plan.json");
    let text = std::fs::read_to_string(&plan_path).map_err(|_| Error::MissingInput(plan_path.clone()))?;
    let plan: AnnotationPlan =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", plan_path.display()))?;
    let mut cfg = p.config;
    if store.is_some() {
        cfg.service.store = store;
    }
    let service = Service::open(plan, &cfg.service.roster, cfg.service.admin_token.clone(), &cfg.store_path())?;
    let port = port.unwrap_or(cfg.service.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(ghosteval_service::serve(Arc::new(service), port))?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::RhymeDensity {
            verse,
            weighted,
            literal_entropy,
        } => return rhyme_density(g, &verse, weighted, literal_entropy),
        Command::Report { annotations } => {
            let mut c = load_config(g)?;
            if annotations.is_some() {
                c.annotations = annotations;
            }
            print_paths(&Pipeline::new(c)?.report()?);
            return Ok(());
        }
        _ => {}
    }
    let p = Pipeline::new(load_config(g)?)?;
    log::info!("{}", p.provenance());
    match cli.command {
        Command::Ingest => print_paths(&p.run_ingest()?),
        Command::Stats => print_paths(&[p.run_stats()?]),
        Command::GenBaseline(args) => gen_baseline(&p, &args)?,
        Command::Score => print_paths(&[p.run_score()?]),
        Command::ScoreSimilarity { artist, verse } => {
            let index = p.index(&p.corpus(&artist)?)?;
            for v in read_verses(&verse)? {
                println!("{}", real(index.max_similarity(&v).value));
            }
        }
        Command::Regress => print_paths(&[p.run_regress()?]),
        Command::Pages => print_paths(&[p.run_pages()?]),
        Command::Serve { port, store } => serve(p, port, store)?,
        Command::Run => print_paths(&p.run_all()?),
        Command::RhymeDensity { .. } | Command::Report { .. } => unreachable!(),
    }
    Ok(())
}

/// (exit code, error kind, offending path)
fn classify(err: &anyhow::Error) -> (u8, &'static str, Option<PathBuf>) {
    if let Some(e) = err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        return match e {
            Error::MissingInput(p) => (2, "missing_input", Some(p.clone())),
            Error::MissingCheckpoint { .. } => (2, "missing_input", None),
            Error::Io { path, .. } => (3, "io", Some(path.clone())),
            Error::Json(_) | Error::Csv(_) => (3, "internal", None),
            _ => (1, "validation", None),
        };
    }
    if let Some(e) = err.chain().find_map(|e| e.downcast_ref::<ServiceError>()) {
        return match e {
            ServiceError::Setup(_) => (1, "validation", None),
            _ => (3, "internal", None),
        };
    }
    (3, "internal", None)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind, path) = classify(&err);
            let mut line = json!({ "error": kind, "exit_code": code, "message": format!("{err:#}") });
            if let Some(p) = path {
                line["path"] = json!(p.display().to_string());
            }
            eprintln!("{line}");
            ExitCode::from(code)
        }
    }
}
