//! Inverted index with deterministic tf-idf ranking.
//!
//! A document's score for a weighted query is
//!
//! ```text
//! score(d) = Σ_t w(t) · (1 + ln tf(t,d)) · ln(1 + N / df(t))  /  sqrt(len(d))
//! ```
//!
//! Documents that match no query term are not returned. Equal scores are
//! ordered by ascending document id so run files are byte-reproducible.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::{tokenize, Corpus, StopwordSet};
use crate::error::{Error, Result};

pub const DEFAULT_DEPTH: usize = 1000;

const CACHE_MAGIC: &[u8; 8] = b"DSQEIDX\0";
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    /// Position in [`InvertedIndex::doc_ids`].
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    // sorted ascending; posting lists reference positions here, so they are
    // sorted by document id as well
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl InvertedIndex {
    /// Indexes title and abstract of every document as one field.
    pub fn build(corpus: &Corpus, stopwords: &StopwordSet) -> Self {
        let mut docs: Vec<(&str, Vec<String>)> = corpus
            .documents()
            .iter()
            .map(|d| (d.id.as_str(), tokenize(&d.text(), stopwords).into_tokens()))
            .collect();
        docs.sort_unstable_by(|a, b| a.0.cmp(b.0));

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_ids = Vec::with_capacity(docs.len());
        let mut doc_lengths = Vec::with_capacity(docs.len());
        for (pos, (id, tokens)) in docs.into_iter().enumerate() {
            doc_ids.push(id.to_string());
            doc_lengths.push(tokens.len() as u32);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (token, tf) in tf {
                postings.entry(token).or_default().push(Posting { doc: pos as u32, tf });
            }
        }
        InvertedIndex {
            doc_ids,
            doc_lengths,
            postings,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_length(&self, id: &str) -> Option<u32> {
        self.position(id).map(|p| self.doc_lengths[p])
    }

    pub fn doc_freq(&self, token: &str) -> usize {
        self.postings.get(token).map_or(0, Vec::len)
    }

    pub fn postings(&self, token: &str) -> &[Posting] {
        self.postings.get(token).map_or(&[], Vec::as_slice)
    }

    /// Term frequency of `token` in document `id` (0 when absent).
    pub fn tf(&self, token: &str, id: &str) -> u32 {
        let Some(pos) = self.position(id) else { return 0 };
        let list = self.postings(token);
        list.binary_search_by_key(&(pos as u32), |p| p.doc)
            .map_or(0, |i| list[i].tf)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    fn position(&self, id: &str) -> Option<usize> {
        self.doc_ids.binary_search_by(|d| d.as_str().cmp(id)).ok()
    }

    pub fn idf(&self, token: &str) -> f64 {
        let df = self.doc_freq(token);
        if df == 0 {
            0.0
        } else {
            (1.0 + self.doc_count() as f64 / df as f64).ln()
        }
    }

    pub fn search(&self, topic_id: &str, query: &WeightedQuery, depth: usize) -> Result<RankedList> {
        if depth == 0 {
            return Err(Error::InvalidArgument("search depth must be at least 1".into()));
        }
        if query.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for (token, weight) in query.terms() {
            let idf = self.idf(token);
            for p in self.postings(token) {
                *acc.entry(p.doc).or_insert(0.0) += weight * (1.0 + f64::from(p.tf).ln()) * idf;
            }
        }
        let mut scored: Vec<(u32, f64)> = acc
            .into_iter()
            .map(|(doc, s)| (doc, s / f64::from(self.doc_lengths[doc as usize]).sqrt()))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        // doc positions follow id order, so comparing positions breaks ties by id
        scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(depth);
        Ok(RankedList {
            topic_id: topic_id.to_string(),
            entries: scored
                .into_iter()
                .enumerate()
                .map(|(i, (doc, score))| RankedEntry {
                    doc_id: self.doc_ids[doc as usize].clone(),
                    score,
                    rank: i + 1,
                })
                .collect(),
        })
    }

    /// Serializes the index into the versioned binary cache format.
    pub fn write_cache<W: Write>(&self, fingerprint: &[u8; 32], mut out: W) -> std::io::Result<()> {
        fn put_u32<W: Write>(out: &mut W, v: u32) -> std::io::Result<()> {
            out.write_all(&v.to_le_bytes())
        }
        fn put_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
            put_u32(out, s.len() as u32)?;
            out.write_all(s.as_bytes())
        }
        out.write_all(CACHE_MAGIC)?;
        put_u32(&mut out, CACHE_FORMAT_VERSION)?;
        out.write_all(fingerprint)?;
        put_u32(&mut out, self.doc_ids.len() as u32)?;
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            put_str(&mut out, id)?;
            put_u32(&mut out, *len)?;
        }
        put_u32(&mut out, self.postings.len() as u32)?;
        for (token, list) in &self.postings {
            put_str(&mut out, token)?;
            put_u32(&mut out, list.len() as u32)?;
            for p in list {
                put_u32(&mut out, p.doc)?;
                put_u32(&mut out, p.tf)?;
            }
        }
        out.flush()
    }

    /// Reads a cache written by [`write_cache`](Self::write_cache), returning
    /// the stored corpus fingerprint alongside the index.
    pub fn read_cache<R: Read>(mut input: R) -> Result<([u8; 32], Self)> {
        fn bad(m: impl std::fmt::Display) -> Error {
            Error::Integrity(format!("index cache: {m}"))
        }
        fn get_u32<R: Read>(input: &mut R) -> Result<u32> {
            let mut b = [0u8; 4];
            input.read_exact(&mut b).map_err(bad)?;
            Ok(u32::from_le_bytes(b))
        }
        fn get_str<R: Read>(input: &mut R) -> Result<String> {
            let len = get_u32(input)? as usize;
            let mut buf = vec![0u8; len];
            input.read_exact(&mut buf).map_err(bad)?;
            String::from_utf8(buf).map_err(|_| bad("invalid utf-8"))
        }

        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(bad)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = get_u32(&mut input)?;
        if version != CACHE_FORMAT_VERSION {
            return Err(Error::CacheVersion {
                found: version,
                expected: CACHE_FORMAT_VERSION,
            });
        }
        let mut fingerprint = [0u8; 32];
        input.read_exact(&mut fingerprint).map_err(bad)?;
        let n = get_u32(&mut input)? as usize;
        let mut doc_ids = Vec::with_capacity(n);
        let mut doc_lengths = Vec::with_capacity(n);
        for _ in 0..n {
            doc_ids.push(get_str(&mut input)?);
            doc_lengths.push(get_u32(&mut input)?);
        }
        let terms = get_u32(&mut input)? as usize;
        let mut postings = BTreeMap::new();
        for _ in 0..terms {
            let token = get_str(&mut input)?;
            let len = get_u32(&mut input)? as usize;
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let doc = get_u32(&mut input)?;
                let tf = get_u32(&mut input)?;
                if doc as usize >= n {
                    return Err(bad("posting references unknown document"));
                }
                list.push(Posting { doc, tf });
            }
            postings.insert(token, list);
        }
        Ok((
            fingerprint,
            InvertedIndex {
                doc_ids,
                doc_lengths,
                postings,
            },
        ))
    }

    /// Loads the cache at `path` if it exists, has the current format
    /// version and matches the corpus and stopwords; otherwise builds the
    /// index and rewrites the cache.
    pub fn load_or_build(path: &Path, corpus: &Corpus, stopwords: &StopwordSet) -> Result<Self> {
        let fingerprint = fingerprint(corpus, stopwords);
        if let Ok(file) = File::open(path) {
            if let Ok((stored, index)) = Self::read_cache(BufReader::new(file)) {
                if stored == fingerprint {
                    return Ok(index);
                }
            }
        }
        let index = Self::build(corpus, stopwords);
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        index
            .write_cache(&fingerprint, BufWriter::new(file))
            .map_err(|e| Error::io(path, e))?;
        Ok(index)
    }
}

/// SHA-256 over the serialized corpus and sorted stopword list.
pub fn fingerprint(corpus: &Corpus, stopwords: &StopwordSet) -> [u8; 32] {
    let mut bytes = Vec::new();
    corpus.write_jsonl(&mut bytes).expect("writing to memory");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    for w in stopwords.sorted() {
        hasher.update(w.as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize().into()
}

/// Query terms with non-negative weights.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct WeightedQuery {
    terms: Vec<(String, f64)>,
}

impl WeightedQuery {
    pub fn new<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut q = WeightedQuery::default();
        for (token, weight) in terms {
            q.push(token.into(), weight)?;
        }
        Ok(q)
    }

    /// Appends a term. Tokens must be unique and weights positive and finite.
    pub fn push(&mut self, token: String, weight: f64) -> Result<()> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight for {token:?} must be positive, got {weight}")));
        }
        if token.is_empty() {
            return Err(Error::InvalidArgument("query token is empty".into()));
        }
        if self.contains(&token) {
            return Err(Error::InvalidArgument(format!("duplicate query token {token:?}")));
        }
        self.terms.push((token, weight));
        Ok(())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.terms.iter().any(|(t, _)| t == token)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.terms.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(t, _)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub doc_id: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub topic_id: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Writes TREC run lines: `<topic> Q0 <doc> <rank> <score> <tag>`.
pub fn write_run<'a, W, I>(mut out: W, lists: I, tag: &str) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a RankedList>,
{
    for list in lists {
        for e in &list.entries {
            writeln!(out, "{} Q0 {} {} {:.6} {}", list.topic_id, e.doc_id, e.rank, e.score, tag)?;
        }
    }
    out.flush()
}

/// Parses a TREC run. Entries of each topic are ordered by their rank column.
pub fn parse_run<R: BufRead>(reader: R, source_name: &str) -> Result<BTreeMap<String, RankedList>> {
    let mut lists: BTreeMap<String, RankedList> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() < 6 {
            return Err(Error::parse(source_name, i + 1, format!("expected 6 columns, got {}", cols.len())));
        }
        let rank: usize = cols[3]
            .parse()
            .map_err(|_| Error::parse(source_name, i + 1, format!("bad rank {:?}", cols[3])))?;
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| Error::parse(source_name, i + 1, format!("bad score {:?}", cols[4])))?;
        lists
            .entry(cols[0].to_string())
            .or_insert_with(|| RankedList {
                topic_id: cols[0].to_string(),
                entries: Vec::new(),
            })
            .entries
            .push(RankedEntry {
                doc_id: cols[2].to_string(),
                score,
                rank,
            });
    }
    for list in lists.values_mut() {
        list.entries.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.doc_id.cmp(&b.doc_id)));
    }
    Ok(lists)
}

pub fn load_run(path: impl AsRef<Path>) -> Result<BTreeMap<String, RankedList>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_run(BufReader::new(file), &path.display().to_string())
}
