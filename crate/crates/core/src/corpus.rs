//! Corpus data model, file formats, tokenization and discipline partitioning.
//!
//! A corpus is a JSON Lines file with one [`Document`] per line. Documents
//! carry free text (title and abstract), the controlled-vocabulary
//! descriptors an indexer assigned, and hierarchical classification codes
//! such as `"10209"`. A [`DisciplineMap`] names fixed-length code prefixes
//! (`"102"` for sociology) and [`partition`] splits the corpus along them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// One corpus record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub descriptors: Vec<String>,
    #[serde(default)]
    pub classifications: Vec<String>,
}

impl Document {
    /// Title and abstract joined into the single text field used for
    /// indexing and co-occurrence counting.
    pub fn text(&self) -> String {
        if self.abstract_text.is_empty() {
            self.title.clone()
        } else {
            format!("{} {}", self.title, self.abstract_text)
        }
    }

    /// Descriptors folded to lowercase and deduplicated.
    pub fn descriptor_keys(&self) -> BTreeSet<String> {
        self.descriptors.iter().map(|d| d.to_lowercase()).collect()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("document id is empty".to_string());
        }
        for code in &self.classifications {
            if code.len() < 3 || !code.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!(
                    "document {}: classification code {code:?} is not a digit string of length >= 3",
                    self.id
                ));
            }
        }
        Ok(())
    }
}

/// An ordered, id-unique collection of documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    // lowercase key -> first verbatim spelling seen in document order
    vocabulary: BTreeMap<String, String>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(documents.len());
        let mut vocabulary = BTreeMap::new();
        for (pos, doc) in documents.iter().enumerate() {
            doc.validate().map_err(Error::Integrity)?;
            if by_id.insert(doc.id.clone(), pos).is_some() {
                return Err(Error::Integrity(format!("duplicate document id {:?}", doc.id)));
            }
            for d in &doc.descriptors {
                vocabulary.entry(d.to_lowercase()).or_insert_with(|| d.clone());
            }
        }
        Ok(Corpus {
            documents,
            vocabulary,
            by_id,
        })
    }

    pub fn empty() -> Self {
        Corpus {
            documents: Vec::new(),
            vocabulary: BTreeMap::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn size(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&pos| &self.documents[pos])
    }

    /// Number of distinct descriptors (case-insensitive).
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Display spelling for every distinct descriptor, ordered by lowercase key.
    pub fn descriptor_vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocabulary.values().map(String::as_str)
    }

    pub fn contains_descriptor(&self, descriptor: &str) -> bool {
        self.vocabulary.contains_key(&descriptor.to_lowercase())
    }

    pub fn display_descriptor(&self, key: &str) -> Option<&str> {
        self.vocabulary.get(key).map(String::as_str)
    }

    /// Writes the corpus in the JSON Lines format read by [`parse_corpus`].
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n").map_err(|e| Error::io("<corpus output>", e))?;
        }
        Ok(())
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file), &path.display().to_string())
}

/// Parses JSON Lines corpus data. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_corpus<R: BufRead>(reader: R, source_name: &str) -> Result<Corpus> {
    let mut documents = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        documents.push(doc);
    }
    Corpus::new(documents)
}

/// Lowercase tokens to drop during tokenization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet(HashSet<String>);

impl StopwordSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StopwordSet(words.into_iter().map(|w| w.into().to_lowercase()).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The English list shipped with the crate.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One token per line; `#` lines and blank lines are ignored.
    pub fn parse(content: &str) -> Self {
        Self::new(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&content))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorted(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.0.iter().map(String::as_str).collect();
        words.sort_unstable();
        words
    }
}

/// Ordered lowercase tokens with stopwords removed. Duplicates are kept.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct tokens in first-occurrence order.
    pub fn distinct(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.0
            .iter()
            .filter(|t| seen.insert(t.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl From<Vec<String>> for TokenStream {
    fn from(tokens: Vec<String>) -> Self {
        TokenStream(tokens)
    }
}

/// Lowercases `text`, splits it on every maximal run of non-alphanumeric
/// characters (Unicode letters and digits count as alphanumeric) and drops
/// stopwords.
pub fn tokenize(text: &str, stopwords: &StopwordSet) -> TokenStream {
    TokenStream(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|piece| !piece.is_empty())
            .map(str::to_lowercase)
            .filter(|tok| !stopwords.contains(tok))
            .collect(),
    )
}

/// Fixed-length classification prefixes mapped to discipline labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisciplineMap {
    prefix_length: usize,
    entries: BTreeMap<String, String>,
}

impl DisciplineMap {
    pub fn new<I, P, L>(prefix_length: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (P, L)>,
        P: Into<String>,
        L: Into<String>,
    {
        let map = DisciplineMap {
            prefix_length,
            entries: entries.into_iter().map(|(p, l)| (p.into(), l.into())).collect(),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: DisciplineMap = serde_json::from_str(&content)
            .map_err(|e| Error::parse(path.display().to_string(), e.line(), e.to_string()))?;
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        if self.prefix_length == 0 {
            return Err(Error::Integrity("discipline map prefix_length must be positive".into()));
        }
        let mut labels = HashSet::new();
        for (prefix, label) in &self.entries {
            if prefix.len() != self.prefix_length || !prefix.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Integrity(format!(
                    "discipline prefix {prefix:?} is not a digit string of length {}",
                    self.prefix_length
                )));
            }
            if label.is_empty() || label == crate::recommender::GLOBAL_LABEL {
                return Err(Error::Integrity(format!("invalid discipline label {label:?}")));
            }
            if !labels.insert(label.as_str()) {
                return Err(Error::Integrity(format!("duplicate discipline label {label:?}")));
            }
        }
        Ok(())
    }

    pub fn prefix_length(&self) -> usize {
        self.prefix_length
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(prefix, label)` pairs in ascending prefix order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, l)| (p.as_str(), l.as_str()))
    }

    pub fn label(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    pub fn prefix_of_label(&self, label: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, l)| l.as_str() == label)
            .map(|(p, _)| p.as_str())
    }

    /// Mapped prefixes under which `doc` carries at least one code.
    pub fn prefixes_of<'a>(&'a self, doc: &Document) -> BTreeSet<&'a str> {
        doc.classifications
            .iter()
            .filter_map(|code| code.get(..self.prefix_length))
            .filter_map(|p| self.entries.get_key_value(p).map(|(k, _)| k.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub prefix: String,
    pub label: String,
    pub corpus: Corpus,
}

#[derive(Debug, Clone)]
pub struct Partitioning {
    /// One entry per map prefix in ascending prefix order, including empty ones.
    pub partitions: Vec<Partition>,
    /// Documents whose codes fall under no mapped prefix.
    pub unmatched: usize,
}

impl Partitioning {
    pub fn get(&self, label: &str) -> Option<&Partition> {
        self.partitions.iter().find(|p| p.label == label)
    }
}

/// Splits `corpus` by discipline prefix. A document joins every partition
/// under which it has a classification code; document order is preserved.
pub fn partition(corpus: &Corpus, map: &DisciplineMap) -> Partitioning {
    let mut members: BTreeMap<&str, Vec<Document>> = map.entries().map(|(p, _)| (p, Vec::new())).collect();
    let mut unmatched = 0;
    for doc in corpus.documents() {
        let prefixes = map.prefixes_of(doc);
        if prefixes.is_empty() {
            unmatched += 1;
        }
        for p in prefixes {
            members.get_mut(p).expect("prefix comes from the map").push(doc.clone());
        }
    }
    let partitions = members
        .into_iter()
        .map(|(prefix, docs)| Partition {
            prefix: prefix.to_string(),
            label: map.label(prefix).expect("prefix comes from the map").to_string(),
            corpus: Corpus::new(docs).expect("subset of a valid corpus"),
        })
        .collect();
    Partitioning { partitions, unmatched }
}
