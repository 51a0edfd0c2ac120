//! Search-term recommenders built from token/descriptor co-occurrence.
//!
//! For a (sub-)corpus the model counts, document-wise, how many documents
//! contain a free-text token in title or abstract, how many carry a given
//! descriptor, and how many do both. Suggestions are ranked with a
//! logarithmically damped Jaccard coefficient:
//!
//! ```text
//! score(t, c) = ln(co + 1) · co / (df_t + df_c − co)
//! ```
//!
//! where `co` is the co-occurrence count. Pairs that never co-occur score 0
//! and are never suggested.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{partition, tokenize, Corpus, DisciplineMap, StopwordSet, TokenStream};
use crate::error::{Error, Result};

pub const GLOBAL_LABEL: &str = "global";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Log-damped Jaccard similarity for one token/descriptor pair.
pub fn log_jaccard(co: u64, token_df: u64, descriptor_df: u64) -> f64 {
    if co == 0 {
        return 0.0;
    }
    let co_f = co as f64;
    (co_f + 1.0).ln() * co_f / (token_df + descriptor_df - co) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub descriptor: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct RecommenderModel {
    label: String,
    doc_count: u64,
    token_df: BTreeMap<String, u64>,
    // keyed by display spelling
    descriptor_df: BTreeMap<String, u64>,
    cooccurrence: BTreeMap<String, BTreeMap<String, u64>>,
    // lowercase -> display spelling
    lookup: HashMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    label: String,
    doc_count: u64,
    token_df: BTreeMap<String, u64>,
    descriptor_df: BTreeMap<String, u64>,
    cooccurrence: BTreeMap<String, BTreeMap<String, u64>>,
}

impl From<RecommenderModel> for ModelFile {
    fn from(m: RecommenderModel) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            label: m.label,
            doc_count: m.doc_count,
            token_df: m.token_df,
            descriptor_df: m.descriptor_df,
            cooccurrence: m.cooccurrence,
        }
    }
}

impl TryFrom<ModelFile> for RecommenderModel {
    type Error = String;

    fn try_from(f: ModelFile) -> std::result::Result<Self, String> {
        if f.format_version != MODEL_FORMAT_VERSION {
            return Err(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                f.format_version
            ));
        }
        let model = RecommenderModel::from_parts(f.label, f.doc_count, f.token_df, f.descriptor_df, f.cooccurrence);
        model.check()?;
        Ok(model)
    }
}

impl RecommenderModel {
    /// Counts token/descriptor co-occurrence over every document of
    /// `corpus`. Each document contributes at most 1 to every count.
    pub fn build(label: impl Into<String>, corpus: &Corpus, stopwords: &StopwordSet) -> Result<Self> {
        let label = label.into();
        if corpus.is_empty() {
            return Err(Error::EmptyPartition(label));
        }
        let mut token_df: BTreeMap<String, u64> = BTreeMap::new();
        let mut descriptor_df: BTreeMap<String, u64> = BTreeMap::new();
        let mut cooccurrence: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for doc in corpus.documents() {
            let tokens: BTreeSet<String> = tokenize(&doc.text(), stopwords).into_tokens().into_iter().collect();
            let descriptors: Vec<&str> = doc
                .descriptor_keys()
                .iter()
                .map(|k| corpus.display_descriptor(k).expect("descriptor is in the corpus vocabulary"))
                .collect();
            for d in &descriptors {
                *descriptor_df.entry(d.to_string()).or_default() += 1;
            }
            for t in tokens {
                if !descriptors.is_empty() {
                    let row = cooccurrence.entry(t.clone()).or_default();
                    for d in &descriptors {
                        *row.entry(d.to_string()).or_default() += 1;
                    }
                }
                *token_df.entry(t).or_default() += 1;
            }
        }
        Ok(Self::from_parts(
            label,
            corpus.size() as u64,
            token_df,
            descriptor_df,
            cooccurrence,
        ))
    }

    fn from_parts(
        label: String,
        doc_count: u64,
        token_df: BTreeMap<String, u64>,
        descriptor_df: BTreeMap<String, u64>,
        cooccurrence: BTreeMap<String, BTreeMap<String, u64>>,
    ) -> Self {
        let lookup = descriptor_df.keys().map(|d| (d.to_lowercase(), d.clone())).collect();
        RecommenderModel {
            label,
            doc_count,
            token_df,
            descriptor_df,
            cooccurrence,
            lookup,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.lookup.len() != self.descriptor_df.len() {
            return Err("descriptors differ only in case".into());
        }
        let zero = |what: &str, key: &str| format!("{what} for {key:?} is zero");
        for (t, &df) in &self.token_df {
            if df == 0 || df > self.doc_count {
                return Err(zero("token_df", t));
            }
        }
        for (d, &df) in &self.descriptor_df {
            if df == 0 || df > self.doc_count {
                return Err(zero("descriptor_df", d));
            }
        }
        for (t, row) in &self.cooccurrence {
            let tdf = *self.token_df.get(t).ok_or_else(|| format!("co-occurrence token {t:?} has no df"))?;
            for (d, &co) in row {
                let ddf = *self
                    .descriptor_df
                    .get(d)
                    .ok_or_else(|| format!("co-occurrence descriptor {d:?} has no df"))?;
                if co == 0 || co > tdf.min(ddf) {
                    return Err(format!("co-occurrence ({t:?}, {d:?}) = {co} is out of range"));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn token_df(&self, token: &str) -> u64 {
        self.token_df.get(token).copied().unwrap_or(0)
    }

    /// Case-insensitive descriptor document frequency.
    pub fn descriptor_df(&self, descriptor: &str) -> u64 {
        self.display(descriptor).map_or(0, |d| self.descriptor_df[d])
    }

    pub fn cooccurrence(&self, token: &str, descriptor: &str) -> u64 {
        let Some(d) = self.display(descriptor) else { return 0 };
        self.cooccurrence
            .get(token)
            .and_then(|row| row.get(d))
            .copied()
            .unwrap_or(0)
    }

    fn display(&self, descriptor: &str) -> Option<&str> {
        self.lookup.get(&descriptor.to_lowercase()).map(String::as_str)
    }

    pub fn tokens(&self) -> impl Iterator<Item = (&str, u64)> {
        self.token_df.iter().map(|(t, &c)| (t.as_str(), c))
    }

    pub fn descriptors(&self) -> impl Iterator<Item = (&str, u64)> {
        self.descriptor_df.iter().map(|(d, &c)| (d.as_str(), c))
    }

    /// Every stored `(token, descriptor, count)` triple.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.cooccurrence
            .iter()
            .flat_map(|(t, row)| row.iter().map(move |(d, &c)| (t.as_str(), d.as_str(), c)))
    }

    pub fn vocabulary_size(&self) -> usize {
        self.descriptor_df.len()
    }

    pub fn score(&self, token: &str, descriptor: &str) -> f64 {
        let co = self.cooccurrence(token, descriptor);
        log_jaccard(co, self.token_df(token), self.descriptor_df(descriptor))
    }

    /// Top `n` descriptors for the distinct query tokens, scored by the sum
    /// of per-token similarities. Descriptors spelled like a query token are
    /// skipped, and equal scores are ordered case-insensitively.
    pub fn recommend(&self, query: &TokenStream, n: usize) -> Vec<Suggestion> {
        let tokens = query.distinct();
        let excluded: HashSet<&str> = tokens.iter().copied().collect();
        let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
        for token in &tokens {
            let Some(row) = self.cooccurrence.get(*token) else { continue };
            let tdf = self.token_df[*token];
            for (d, &co) in row {
                *totals.entry(d.as_str()).or_insert(0.0) += log_jaccard(co, tdf, self.descriptor_df[d]);
            }
        }
        let mut ranked: Vec<(String, &str, f64)> = totals
            .into_iter()
            .filter(|&(_, s)| s > 0.0)
            .map(|(d, s)| (d.to_lowercase(), d, s))
            .filter(|(key, _, _)| !excluded.contains(key.as_str()))
            .collect();
        ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(b.1)));
        ranked
            .into_iter()
            .take(n)
            .map(|(_, d, score)| Suggestion {
                descriptor: d.to_string(),
                score,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::parse(path.display().to_string(), e.line(), e.to_string()))
    }
}

/// The global model plus one model per discipline.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub global: RecommenderModel,
    /// Discipline models in ascending prefix order.
    pub disciplines: Vec<RecommenderModel>,
    /// Labels whose partition was empty, so no model exists.
    pub skipped: Vec<String>,
}

impl ModelSet {
    /// Builds the global model and every non-empty discipline model in
    /// parallel; the result does not depend on thread scheduling.
    pub fn build(corpus: &Corpus, map: &DisciplineMap, stopwords: &StopwordSet) -> Result<Self> {
        let parts = partition(corpus, map);
        let global = RecommenderModel::build(GLOBAL_LABEL, corpus, stopwords)?;
        let built: Vec<(String, Option<RecommenderModel>)> = parts
            .partitions
            .par_iter()
            .map(|p| {
                let model = RecommenderModel::build(&p.label, &p.corpus, stopwords).ok();
                (p.label.clone(), model)
            })
            .collect();
        let mut disciplines = Vec::new();
        let mut skipped = Vec::new();
        for (label, model) in built {
            match model {
                Some(m) => disciplines.push(m),
                None => skipped.push(label),
            }
        }
        Ok(ModelSet {
            global,
            disciplines,
            skipped,
        })
    }

    pub fn get(&self, label: &str) -> Option<&RecommenderModel> {
        if label == GLOBAL_LABEL {
            Some(&self.global)
        } else {
            self.disciplines.iter().find(|m| m.label == label)
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &RecommenderModel> {
        std::iter::once(&self.global).chain(&self.disciplines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn doc(id: &str, text: &str, descriptors: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: text.into(),
            abstract_text: String::new(),
            descriptors: descriptors.iter().map(|s| s.to_string()).collect(),
            classifications: vec![],
        }
    }

    fn micro() -> RecommenderModel {
        let corpus = Corpus::new(vec![
            doc("d1", "bilingual education school", &["Multilingualism", "Child"]),
            doc("d2", "bilingual children", &["Multilingualism", "Speech"]),
        ])
        .unwrap();
        RecommenderModel::build("micro", &corpus, &StopwordSet::empty()).unwrap()
    }

    fn ts(tokens: &[&str]) -> TokenStream {
        TokenStream::from(tokens.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    #[test]
    fn micro_partition_counts() {
        let m = micro();
        assert_eq!(m.cooccurrence("bilingual", "Multilingualism"), 2);
        assert_eq!(m.token_df("bilingual"), 2);
        assert_eq!(m.descriptor_df("Multilingualism"), 2);
        assert_eq!(m.descriptor_df("multilingualism"), 2);
        assert_eq!(m.cooccurrence("school", "Speech"), 0);
        assert!(m.pairs().all(|(t, d, _)| !(t == "school" && d == "Speech")));
    }

    #[test]
    fn document_wise_counting() {
        let corpus = Corpus::new(vec![doc("d", "x x x", &["C"])]).unwrap();
        let m = RecommenderModel::build("one", &corpus, &StopwordSet::empty()).unwrap();
        assert_eq!(m.token_df("x"), 1);
        assert_eq!(m.cooccurrence("x", "C"), 1);
    }

    #[test]
    fn case_variants_of_a_descriptor_count_once() {
        let corpus = Corpus::new(vec![doc("d", "x", &["Child", "child"])]).unwrap();
        let m = RecommenderModel::build("one", &corpus, &StopwordSet::empty()).unwrap();
        assert_eq!(m.descriptor_df("CHILD"), 1);
        assert_eq!(m.vocabulary_size(), 1);
    }

    #[test]
    fn empty_partition_is_error() {
        assert!(matches!(
            RecommenderModel::build("x", &Corpus::empty(), &StopwordSet::empty()),
            Err(Error::EmptyPartition(_))
        ));
    }

    #[test]
    fn score_hand_values() {
        let m = micro();
        assert!((m.score("bilingual", "Multilingualism") - 3f64.ln()).abs() < 1e-12);
        assert!((m.score("bilingual", "Child") - 2f64.ln() / 2.0).abs() < 1e-12);
        assert_eq!(m.score("school", "Speech"), 0.0);
        assert_eq!(log_jaccard(0, 5, 5), 0.0);
        assert!((log_jaccard(1, 2, 1) - 0.346574).abs() < 1e-6);
        assert!((log_jaccard(2, 2, 2) - 1.098612).abs() < 1e-6);
    }

    #[test]
    fn recommend_with_tie_break() {
        let got = micro().recommend(&ts(&["bilingual"]), 2);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].descriptor, "Multilingualism");
        assert!((got[0].score - 1.098612).abs() < 1e-6);
        assert_eq!(got[1].descriptor, "Child");
        assert!((got[1].score - 0.346574).abs() < 1e-6);
    }

    #[test]
    fn recommend_empty_query() {
        assert!(micro().recommend(&TokenStream::default(), 4).is_empty());
    }

    #[test]
    fn recommend_returns_only_positive_scores() {
        // "school" co-occurs only with d1's descriptors
        let got = micro().recommend(&ts(&["school"]), 10);
        let names: Vec<_> = got.iter().map(|s| s.descriptor.as_str()).collect();
        assert_eq!(names, ["Child", "Multilingualism"]);
    }

    #[test]
    fn repeated_query_tokens_vote_once() {
        let m = micro();
        assert_eq!(m.recommend(&ts(&["bilingual"]), 4), m.recommend(&ts(&["bilingual", "bilingual"]), 4));
    }

    #[test]
    fn descriptor_matching_query_token_is_excluded() {
        let corpus = Corpus::new(vec![doc("d", "speech therapy", &["Speech", "Therapy Research"])]).unwrap();
        let m = RecommenderModel::build("x", &corpus, &StopwordSet::empty()).unwrap();
        let got = m.recommend(&ts(&["speech"]), 4);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].descriptor, "Therapy Research");
    }

    #[test]
    fn model_json_round_trip() {
        let m = micro();
        let json = m.to_json().unwrap();
        assert!(json.starts_with("{\"format_version\":1,"));
        let back: RecommenderModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn model_json_rejects_inconsistent_counts() {
        let json = r#"{"format_version":1,"label":"x","doc_count":1,"token_df":{"a":1},"descriptor_df":{"C":1},"cooccurrence":{"a":{"C":2}}}"#;
        assert!(serde_json::from_str::<RecommenderModel>(json).is_err());
        let json = r#"{"format_version":2,"label":"x","doc_count":1,"token_df":{},"descriptor_df":{},"cooccurrence":{}}"#;
        assert!(serde_json::from_str::<RecommenderModel>(json).is_err());
    }
}
