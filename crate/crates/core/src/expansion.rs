//! Topic classification and the query-expansion strategies.
//!
//! A topic's query is its title with stopwords removed. The query is
//! expanded with the top suggestions of one recommender: the global model
//! (`general`), the model of the discipline the topic's relevant documents
//! mostly belong to (`topic-class`), or whichever discipline model yields
//! the highest average precision for the topic (`best`).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, DisciplineMap, StopwordSet, TokenStream};
use crate::error::{Error, Result};
use crate::evaluation::evaluate_topic;
use crate::index::{InvertedIndex, RankedList, WeightedQuery, DEFAULT_DEPTH};
use crate::recommender::{ModelSet, RecommenderModel, Suggestion, GLOBAL_LABEL};

pub const DEFAULT_EXPANSION_TERMS: usize = 4;
pub const DEFAULT_EXPANSION_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub title: String,
}

/// Parses `<topic-id>\t<title>` lines. Blank lines are skipped.
pub fn parse_topics<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<Topic>> {
    let mut topics = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, title) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source_name, i + 1, "expected <topic-id>\\t<title>"))?;
        let (id, title) = (id.trim(), title.trim());
        if id.is_empty() || title.is_empty() {
            return Err(Error::parse(source_name, i + 1, "topic id and title must be non-empty"));
        }
        if !ids.insert(id.to_string()) {
            return Err(Error::Integrity(format!("duplicate topic id {id:?}")));
        }
        topics.push(Topic {
            id: id.to_string(),
            title: title.to_string(),
        });
    }
    Ok(topics)
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<Vec<Topic>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_topics(BufReader::new(file), &path.display().to_string())
}

/// Relevance judgments, binarized at `min_grade`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
    min_grade: u32,
}

impl Qrels {
    pub fn new(min_grade: u32) -> Self {
        Qrels {
            judgments: BTreeMap::new(),
            min_grade: min_grade.max(1),
        }
    }

    pub fn insert(&mut self, topic: &str, doc: &str, grade: u32) -> Result<()> {
        let prev = self
            .judgments
            .entry(topic.to_string())
            .or_default()
            .insert(doc.to_string(), grade);
        match prev {
            Some(_) => Err(Error::Integrity(format!("duplicate judgment for ({topic}, {doc})"))),
            None => Ok(()),
        }
    }

    /// Parses TREC qrels lines: `<topic-id> <iteration> <doc-id> <grade>`.
    pub fn parse<R: BufRead>(reader: R, source_name: &str, min_grade: u32) -> Result<Self> {
        let mut qrels = Qrels::new(min_grade);
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.is_empty() {
                continue;
            }
            if cols.len() != 4 {
                return Err(Error::parse(source_name, i + 1, format!("expected 4 columns, got {}", cols.len())));
            }
            let grade: i64 = cols[3]
                .parse()
                .map_err(|_| Error::parse(source_name, i + 1, format!("bad grade {:?}", cols[3])))?;
            let grade = u32::try_from(grade)
                .map_err(|_| Error::parse(source_name, i + 1, format!("grade {grade} is negative")))?;
            qrels.insert(cols[0], cols[2], grade)?;
        }
        Ok(qrels)
    }

    pub fn load(path: impl AsRef<Path>, min_grade: u32) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), &path.display().to_string(), min_grade)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (topic, docs) in &self.judgments {
            for (doc, grade) in docs {
                writeln!(out, "{topic} 0 {doc} {grade}")?;
            }
        }
        out.flush()
    }

    pub fn min_grade(&self) -> u32 {
        self.min_grade
    }

    pub fn grade(&self, topic: &str, doc: &str) -> Option<u32> {
        self.judgments.get(topic)?.get(doc).copied()
    }

    /// Documents judged relevant for `topic`, in ascending id order.
    pub fn relevant(&self, topic: &str) -> BTreeSet<&str> {
        self.judgments.get(topic).map_or_else(BTreeSet::new, |docs| {
            docs.iter()
                .filter(|(_, &g)| g >= self.min_grade)
                .map(|(d, _)| d.as_str())
                .collect()
        })
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub prefix: String,
    pub label: String,
    /// Relevant-document count per mapped prefix.
    pub groups: BTreeMap<String, usize>,
}

/// Assigns a topic the discipline holding most of its relevant documents.
/// A document under several prefixes counts once in each group; ties go
/// to the smallest prefix.
pub fn classify_topic(topic_id: &str, qrels: &Qrels, corpus: &Corpus, map: &DisciplineMap) -> Result<Classification> {
    let unclassifiable = |reason: &str| Error::Unclassifiable {
        topic: topic_id.to_string(),
        reason: reason.to_string(),
    };
    let docs: Vec<_> = qrels
        .relevant(topic_id)
        .into_iter()
        .filter_map(|id| corpus.get(id))
        .collect();
    if docs.is_empty() {
        return Err(unclassifiable("no relevant documents in the corpus"));
    }
    let mut groups: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        for p in map.prefixes_of(doc) {
            *groups.entry(p.to_string()).or_default() += 1;
        }
    }
    // max_by_key keeps the last maximum; iterate descending so it lands on the smallest prefix
    let (prefix, _) = groups
        .iter()
        .rev()
        .max_by_key(|(_, &c)| c)
        .ok_or_else(|| unclassifiable("no relevant document carries a mapped classification"))?;
    let prefix = prefix.clone();
    Ok(Classification {
        label: map.label(&prefix).expect("prefix comes from the map").to_string(),
        prefix,
        groups,
    })
}

/// Stopword-filtered title tokens, each with weight 1. Repeated tokens are
/// kept once.
pub fn make_query(topic: &Topic, stopwords: &StopwordSet) -> Result<WeightedQuery> {
    let tokens = tokenize(&topic.title, stopwords);
    let query = WeightedQuery::new(tokens.distinct().into_iter().map(|t| (t, 1.0)))?;
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(query)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    None,
    General,
    TopicClass,
    Best,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::None, Strategy::General, Strategy::TopicClass, Strategy::Best];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::General => "general",
            Strategy::TopicClass => "topic-class",
            Strategy::Best => "best",
        }
    }

    /// Row title in reports.
    pub fn title(self) -> &'static str {
        match self {
            Strategy::None => "Unexpanded",
            Strategy::General => "gSTR",
            Strategy::TopicClass => "tSTR",
            Strategy::Best => "bSTR",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?} (none, general, topic-class, best)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPlan {
    pub topic_id: String,
    pub strategy: Strategy,
    pub model_label: Option<String>,
    pub suggestions: Vec<Suggestion>,
    pub expansion_terms: Vec<String>,
    pub final_query: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub suggestions: Vec<Suggestion>,
    /// Tokens appended to the original query, in order.
    pub terms: Vec<String>,
    pub query: WeightedQuery,
}

/// Appends the tokens of the top `n` suggested descriptors to `query` with
/// weight `weight`. Tokens already in the query are not added again and
/// original weights are left untouched.
pub fn expand(
    query: &WeightedQuery,
    model: &RecommenderModel,
    n: usize,
    weight: f64,
    stopwords: &StopwordSet,
) -> Result<Expansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("expansion size must be at least 1".into()));
    }
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::InvalidArgument(format!("expansion weight must be positive, got {weight}")));
    }
    let input = TokenStream::from(query.tokens().map(str::to_string).collect::<Vec<_>>());
    let suggestions = model.recommend(&input, n);
    let mut expanded = query.clone();
    let mut terms = Vec::new();
    for s in &suggestions {
        for token in tokenize(&s.descriptor, stopwords).into_tokens() {
            if !expanded.contains(&token) {
                expanded.push(token.clone(), weight)?;
                terms.push(token);
            }
        }
    }
    Ok(Expansion {
        suggestions,
        terms,
        query: expanded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub n: usize,
    pub weight: f64,
    pub depth: usize,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        ExpansionParams {
            n: DEFAULT_EXPANSION_TERMS,
            weight: DEFAULT_EXPANSION_WEIGHT,
            depth: DEFAULT_DEPTH,
        }
    }
}

/// Read-only inputs shared by every strategy run.
#[derive(Debug, Clone, Copy)]
pub struct Experiment<'a> {
    pub corpus: &'a Corpus,
    pub map: &'a DisciplineMap,
    pub index: &'a InvertedIndex,
    pub models: &'a ModelSet,
    pub topics: &'a [Topic],
    pub qrels: &'a Qrels,
    pub stopwords: &'a StopwordSet,
    pub params: ExpansionParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub strategy: Strategy,
    pub rankings: BTreeMap<String, RankedList>,
    pub plans: Vec<ExpansionPlan>,
    /// Per-topic soft failures and fallbacks.
    pub notes: Vec<String>,
}

struct TopicOutcome {
    ranking: Option<RankedList>,
    plan: Option<ExpansionPlan>,
    note: Option<String>,
}

impl<'a> Experiment<'a> {
    pub fn run(&self, strategy: Strategy) -> Result<StrategyRun> {
        let params = self.params;
        if params.n == 0 || params.depth == 0 || !(params.weight > 0.0 && params.weight.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid expansion parameters {params:?}")));
        }
        let outcomes: Vec<Result<TopicOutcome>> =
            self.topics.par_iter().map(|t| self.run_topic(t, strategy)).collect();

        let mut run = StrategyRun {
            strategy,
            rankings: BTreeMap::new(),
            plans: Vec::new(),
            notes: Vec::new(),
        };
        for outcome in outcomes {
            let outcome = outcome?;
            if let Some(r) = outcome.ranking {
                run.rankings.insert(r.topic_id.clone(), r);
            }
            run.plans.extend(outcome.plan);
            run.notes.extend(outcome.note);
        }
        Ok(run)
    }

    /// Expands and searches with one model; `None` means unexpanded.
    pub fn search_with(
        &self,
        topic: &Topic,
        query: &WeightedQuery,
        model: Option<&RecommenderModel>,
    ) -> Result<(RankedList, Expansion)> {
        let expansion = match model {
            Some(m) => expand(query, m, self.params.n, self.params.weight, self.stopwords)?,
            None => Expansion {
                suggestions: Vec::new(),
                terms: Vec::new(),
                query: query.clone(),
            },
        };
        let ranking = self.index.search(&topic.id, &expansion.query, self.params.depth)?;
        Ok((ranking, expansion))
    }

    fn run_topic(&self, topic: &Topic, strategy: Strategy) -> Result<TopicOutcome> {
        let query = match make_query(topic, self.stopwords) {
            Ok(q) => q,
            Err(Error::EmptyQuery) => {
                return Ok(TopicOutcome {
                    ranking: None,
                    plan: None,
                    note: Some(format!("topic {}: skipped, query is empty after stopword removal", topic.id)),
                })
            }
            Err(e) => return Err(e),
        };

        let mut note = None;
        let (ranking, expansion, label) = match strategy {
            Strategy::None => {
                let (r, e) = self.search_with(topic, &query, None)?;
                (r, e, None)
            }
            Strategy::General => {
                let (r, e) = self.search_with(topic, &query, Some(&self.models.global))?;
                (r, e, Some(GLOBAL_LABEL.to_string()))
            }
            Strategy::TopicClass => {
                let model = match classify_topic(&topic.id, self.qrels, self.corpus, self.map) {
                    Ok(c) => match self.models.get(&c.label) {
                        Some(m) => m,
                        None => {
                            note = Some(format!("topic {}: no model for class {}, fell back to global", topic.id, c.label));
                            &self.models.global
                        }
                    },
                    Err(e) => {
                        note = Some(format!("{e}; fell back to global"));
                        &self.models.global
                    }
                };
                let (r, e) = self.search_with(topic, &query, Some(model))?;
                (r, e, Some(model.label().to_string()))
            }
            Strategy::Best => {
                let (r, e, label, n) = self.best_candidate(topic, &query)?;
                note = n;
                (r, e, Some(label))
            }
        };
        let plan = ExpansionPlan {
            topic_id: topic.id.clone(),
            strategy,
            model_label: label,
            suggestions: expansion.suggestions,
            expansion_terms: expansion.terms,
            final_query: expansion.query.terms().map(|(t, w)| (t.to_string(), w)).collect(),
            note: note.clone(),
        };
        Ok(TopicOutcome {
            ranking: Some(ranking),
            plan: Some(plan),
            note,
        })
    }

    /// Tries every discipline model and keeps the one with the highest
    /// average precision; ties go to the smallest label.
    fn best_candidate(
        &self,
        topic: &Topic,
        query: &WeightedQuery,
    ) -> Result<(RankedList, Expansion, String, Option<String>)> {
        let mut candidates: Vec<&RecommenderModel> = self.models.disciplines.iter().collect();
        if candidates.is_empty() {
            let (r, e) = self.search_with(topic, query, Some(&self.models.global))?;
            let note = format!("topic {}: no discipline models, fell back to global", topic.id);
            return Ok((r, e, GLOBAL_LABEL.to_string(), Some(note)));
        }
        candidates.sort_by(|a, b| a.label().cmp(b.label()));
        let mut note = None;
        let mut best: Option<(f64, RankedList, Expansion, String)> = None;
        for model in candidates {
            let (ranking, expansion) = self.search_with(topic, query, Some(model))?;
            let ap = match evaluate_topic(&ranking, self.qrels) {
                Ok(m) => m.average_precision,
                Err(_) => {
                    note = Some(format!("topic {}: unjudged, best model chosen by label order", topic.id));
                    0.0
                }
            };
            if best.as_ref().is_none_or(|(b, ..)| ap > *b) {
                best = Some((ap, ranking, expansion, model.label().to_string()));
            }
        }
        let (_, r, e, label) = best.expect("at least one candidate");
        Ok((r, e, label, note))
    }
}

/// Writes plans as JSON Lines.
pub fn write_plans<'a, W, I>(mut out: W, plans: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ExpansionPlan>,
{
    for plan in plans {
        serde_json::to_writer(&mut out, plan)?;
        out.write_all(b"\n").map_err(|e| Error::io("<plans output>", e))?;
    }
    Ok(())
}
