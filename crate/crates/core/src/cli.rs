//! Command-line front end.
//!
//! Every command reads an [`ExperimentConfig`] JSON file (`--config`) whose
//! relative paths resolve against the config file's directory. Flags
//! override config values.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_corpus, partition, tokenize, Corpus, DisciplineMap, StopwordSet};
use crate::error::{Error, Result};
use crate::evaluation::{EvaluatedRun, Report};
use crate::expansion::{
    classify_topic, load_topics, write_plans, ExpansionParams, Experiment, Qrels, Strategy,
    DEFAULT_EXPANSION_TERMS, DEFAULT_EXPANSION_WEIGHT,
};
use crate::index::{load_run, write_run, InvertedIndex, DEFAULT_DEPTH};
use crate::recommender::{ModelSet, RecommenderModel, GLOBAL_LABEL};

fn default_n() -> usize {
    DEFAULT_EXPANSION_TERMS
}
fn default_weight() -> f64 {
    DEFAULT_EXPANSION_WEIGHT
}
fn default_depth() -> usize {
    DEFAULT_DEPTH
}
fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_tag() -> String {
    "dsqe".to_string()
}
fn default_baseline() -> Strategy {
    Strategy::General
}
fn default_min_grade() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub disciplines: PathBuf,
    /// Defaults to the built-in English list.
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub topics: Option<PathBuf>,
    #[serde(default)]
    pub qrels: Option<PathBuf>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_tag")]
    pub tag: String,
    #[serde(default = "default_baseline")]
    pub baseline: Strategy,
    /// Lowest grade counted as relevant.
    #[serde(default = "default_min_grade")]
    pub min_grade: u32,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig = serde_json::from_str(&content)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.corpus);
        resolve(&mut config.disciplines);
        resolve(&mut config.out);
        for p in [&mut config.stopwords, &mut config.topics, &mut config.qrels].into_iter().flatten() {
            resolve(p);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight must be positive, got {}", self.weight)));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidArgument("no strategies selected".into()));
        }
        if self.tag.is_empty() || self.tag.contains(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("run tag {:?} must be a non-empty word", self.tag)));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }

    pub fn params(&self) -> ExpansionParams {
        ExpansionParams {
            n: self.n,
            weight: self.weight,
            depth: self.depth,
        }
    }

    fn stopword_set(&self) -> Result<StopwordSet> {
        match &self.stopwords {
            Some(p) => StopwordSet::load(p),
            None => Ok(StopwordSet::english()),
        }
    }

    fn topics_path(&self) -> Result<&Path> {
        self.topics
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("config has no topics file".into()))
    }

    fn qrels_path(&self) -> Result<&Path> {
        self.qrels
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("config has no qrels file".into()))
    }

    fn models_dir(&self) -> PathBuf {
        self.out.join("models")
    }
}

#[derive(Debug, Parser)]
#[command(name = "dsqe", version, about = "Discipline-specific query expansion experiments")]
pub struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Strategies to run; repeat or comma-separate (none, general, topic-class, best).
    #[arg(long, global = true, value_delimiter = ',')]
    pub strategy: Vec<String>,
    /// Number of recommendations used for expansion.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Weight of expansion terms relative to original terms.
    #[arg(long, global = true)]
    pub weight: Option<f64>,
    /// Retrieval and evaluation depth.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run tag written into run files.
    #[arg(long, global = true)]
    pub tag: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the corpus and print a per-discipline summary.
    Ingest,
    /// Build the global and per-discipline recommender models.
    BuildStr,
    /// Print term suggestions for a free-text query.
    Recommend {
        query: Vec<String>,
        /// Model label (`global` or a discipline label).
        #[arg(long, default_value = GLOBAL_LABEL)]
        model: String,
    },
    /// Print the discipline a topic is classified into.
    Classify { topic_id: String },
    /// Run the configured strategies and write runs, plans and reports.
    Experiment,
    /// Evaluate a TREC run file against TREC qrels.
    Evaluate {
        run: PathBuf,
        qrels: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_grade: u32,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if let Command::Evaluate { run, qrels, min_grade } = &cli.command {
        return cmd_evaluate(run, qrels, *min_grade, out);
    }
    let config = effective_config(cli)?;
    match &cli.command {
        Command::Ingest => cmd_ingest(&config, out),
        Command::BuildStr => cmd_build(&config, out, err).map(|_| ()),
        Command::Recommend { query, model } => cmd_recommend(&config, &query.join(" "), model, out),
        Command::Classify { topic_id } => cmd_classify(&config, topic_id, out),
        Command::Experiment => cmd_experiment(&config, out, err),
        Command::Evaluate { .. } => unreachable!("handled above"),
    }
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--config is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if !cli.strategy.is_empty() {
        config.strategies = cli.strategy.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(n) = cli.n {
        config.n = n;
    }
    if let Some(w) = cli.weight {
        config.weight = w;
    }
    if let Some(d) = cli.depth {
        config.depth = d;
    }
    if let Some(o) = &cli.out {
        config.out = o.clone();
    }
    if let Some(t) = &cli.tag {
        config.tag = t.clone();
    }
    config.validate()?;
    Ok(config)
}

fn out_io(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

struct Inputs {
    corpus: Corpus,
    map: DisciplineMap,
    stopwords: StopwordSet,
}

fn load_inputs(config: &ExperimentConfig) -> Result<Inputs> {
    Ok(Inputs {
        corpus: load_corpus(&config.corpus)?,
        map: DisciplineMap::load(&config.disciplines)?,
        stopwords: config.stopword_set()?,
    })
}

pub fn cmd_ingest(config: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let inputs = load_inputs(config)?;
    let parts = partition(&inputs.corpus, &inputs.map);
    let width = parts
        .partitions
        .iter()
        .map(|p| p.label.len())
        .max()
        .unwrap_or(0)
        .max("Social sciences".len());
    let mut lines = vec![format!("{:<8}{:<width$}  {:<6}  {:>8}  {:>6}", "STR", "Class", "Prefix", "#Docs", "#CT")];
    for (i, p) in parts.partitions.iter().enumerate() {
        lines.push(format!(
            "{:<8}{:<width$}  {:<6}  {:>8}  {:>6}",
            format!("DS-{}", i + 1),
            p.label,
            p.prefix,
            p.corpus.size(),
            p.corpus.vocabulary_size()
        ));
    }
    lines.push(format!(
        "{:<8}{:<width$}  {:<6}  {:>8}  {:>6}",
        "Global",
        "Social sciences",
        "",
        inputs.corpus.size(),
        inputs.corpus.vocabulary_size()
    ));
    lines.push(format!("documents without a mapped classification: {}", parts.unmatched));
    for l in lines {
        writeln!(out, "{}", l.trim_end()).map_err(out_io)?;
    }
    Ok(())
}

fn model_file_name(map: &DisciplineMap, label: &str) -> String {
    match map.prefix_of_label(label) {
        Some(prefix) => format!("{prefix}.json"),
        None => format!("{GLOBAL_LABEL}.json"),
    }
}

/// Builds all models and writes them to `<out>/models/`.
pub fn cmd_build(config: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<ModelSet> {
    let inputs = load_inputs(config)?;
    let models = ModelSet::build(&inputs.corpus, &inputs.map, &inputs.stopwords)?;
    let dir = config.models_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for label in &models.skipped {
        writeln!(err, "warning: partition {label:?} is empty; no model written").map_err(out_io)?;
    }
    for model in models.all() {
        let path = dir.join(model_file_name(&inputs.map, model.label()));
        model.save(&path)?;
        writeln!(
            out,
            "{}\t{}\t{} docs\t{} descriptors",
            model.label(),
            path.display(),
            model.doc_count(),
            model.vocabulary_size()
        )
        .map_err(out_io)?;
    }
    Ok(models)
}

/// Loads models from `<out>/models/` when the global model file exists,
/// otherwise builds them in memory.
fn load_or_build_models(config: &ExperimentConfig, inputs: &Inputs) -> Result<ModelSet> {
    let dir = config.models_dir();
    let global_path = dir.join(model_file_name(&inputs.map, GLOBAL_LABEL));
    if !global_path.exists() {
        return ModelSet::build(&inputs.corpus, &inputs.map, &inputs.stopwords);
    }
    let global = RecommenderModel::load(&global_path)?;
    let mut disciplines = Vec::new();
    let mut skipped = Vec::new();
    for (_, label) in inputs.map.entries() {
        let path = dir.join(model_file_name(&inputs.map, label));
        if path.exists() {
            disciplines.push(RecommenderModel::load(&path)?);
        } else {
            skipped.push(label.to_string());
        }
    }
    Ok(ModelSet {
        global,
        disciplines,
        skipped,
    })
}

pub fn cmd_recommend(config: &ExperimentConfig, query: &str, label: &str, out: &mut dyn Write) -> Result<()> {
    let inputs = load_inputs(config)?;
    let models = load_or_build_models(config, &inputs)?;
    let model = models
        .get(label)
        .ok_or_else(|| Error::InvalidArgument(format!("no model labelled {label:?}")))?;
    let tokens = tokenize(query, &inputs.stopwords);
    for s in model.recommend(&tokens, config.n) {
        writeln!(out, "{}\t{:.6}", s.descriptor, s.score).map_err(out_io)?;
    }
    Ok(())
}

pub fn cmd_classify(config: &ExperimentConfig, topic_id: &str, out: &mut dyn Write) -> Result<()> {
    let inputs = load_inputs(config)?;
    let qrels = Qrels::load(config.qrels_path()?, config.min_grade)?;
    let c = classify_topic(topic_id, &qrels, &inputs.corpus, &inputs.map)?;
    writeln!(out, "{topic_id}\t{}\t{}", c.prefix, c.label).map_err(out_io)?;
    for (prefix, count) in &c.groups {
        let label = inputs.map.label(prefix).unwrap_or_default();
        writeln!(out, "  {prefix}\t{label}\t{count}").map_err(out_io)?;
    }
    Ok(())
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Everything one experiment produces, before it is written to disk.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub runs: Vec<crate::expansion::StrategyRun>,
    pub report: Report,
    pub baseline: Strategy,
}

/// Runs `strategies` in order and evaluates them against `baseline`, or
/// against the first strategy when the baseline is not among them.
pub fn run_experiment(experiment: &Experiment, strategies: &[Strategy], baseline: Strategy) -> Result<ExperimentOutput> {
    let (topics, qrels) = (experiment.topics, experiment.qrels);
    let baseline = match strategies.first() {
        Some(&first) if !strategies.contains(&baseline) => first,
        Some(_) => baseline,
        None => return Err(Error::InvalidArgument("no strategies selected".into())),
    };
    let mut runs = Vec::new();
    let mut evaluated = Vec::new();
    for &strategy in strategies {
        let run = experiment.run(strategy)?;
        let mut e = EvaluatedRun::evaluate(
            strategy.as_str(),
            strategy.title(),
            topics.iter().map(|t| t.id.as_str()),
            &run.rankings,
            qrels,
        );
        e.notes = run.notes.clone();
        evaluated.push(e);
        runs.push(run);
    }
    let report = Report::new(evaluated, baseline.as_str())?;
    Ok(ExperimentOutput { runs, report, baseline })
}

#[derive(Serialize)]
struct Manifest<'a> {
    tag: &'a str,
    config_hash: String,
    baseline: Strategy,
    files: Vec<String>,
}

pub fn cmd_experiment(config: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let inputs = load_inputs(config)?;
    let topics = load_topics(config.topics_path()?)?;
    let qrels = Qrels::load(config.qrels_path()?, config.min_grade)?;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let index = InvertedIndex::load_or_build(&config.out.join("index.bin"), &inputs.corpus, &inputs.stopwords)?;
    let models = load_or_build_models(config, &inputs)?;

    let experiment = Experiment {
        corpus: &inputs.corpus,
        map: &inputs.map,
        index: &index,
        models: &models,
        topics: &topics,
        qrels: &qrels,
        stopwords: &inputs.stopwords,
        params: config.params(),
    };
    let result = run_experiment(&experiment, &config.strategies, config.baseline)?;
    if result.baseline != config.baseline {
        writeln!(
            err,
            "warning: baseline {} was not run; using {} instead",
            config.baseline, result.baseline
        )
        .map_err(out_io)?;
    }

    let hash = config.hash();
    let runs_dir = config.out.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
    let mut files = Vec::new();
    for run in &result.runs {
        let name = format!("runs/{}.run", run.strategy);
        let tag = format!("{}-{}", config.tag, run.strategy);
        let path = config.out.join(&name);
        write_file(&path, |w| write_run(w, run.rankings.values(), &tag).map_err(|e| Error::io(&path, e)))?;
        files.push(name);
    }

    let path = config.out.join("plans.jsonl");
    write_file(&path, |w| write_plans(w, result.runs.iter().flat_map(|r| &r.plans)))?;
    files.push("plans.jsonl".into());

    let text = format!("# run tag: {}  config: {hash}\n{}", config.tag, result.report.to_text());
    let path = config.out.join("report.txt");
    fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
    files.push("report.txt".into());

    let path = config.out.join("report.json");
    fs::write(&path, result.report.to_json()? + "\n").map_err(|e| Error::io(&path, e))?;
    files.push("report.json".into());

    let manifest = Manifest {
        tag: &config.tag,
        config_hash: hash,
        baseline: result.baseline,
        files,
    };
    let path = config.out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&path, e))?;

    for run in &result.runs {
        for note in &run.notes {
            writeln!(err, "note: {}: {note}", run.strategy).map_err(out_io)?;
        }
    }
    out.write_all(text.as_bytes()).map_err(out_io)
}

pub fn cmd_evaluate(run: &Path, qrels: &Path, min_grade: u32, out: &mut dyn Write) -> Result<()> {
    let rankings = load_run(run)?;
    let qrels = Qrels::load(qrels, min_grade)?;
    let label = run
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    // judged topics missing from the run count as empty rankings
    let topics: std::collections::BTreeSet<&str> = rankings.keys().map(String::as_str).chain(qrels.topics()).collect();
    let evaluated = EvaluatedRun::evaluate(&label, &label, topics, &rankings, &qrels);
    let report = Report::new(vec![evaluated], &label)?;
    out.write_all(report.to_text().as_bytes()).map_err(out_io)
}
