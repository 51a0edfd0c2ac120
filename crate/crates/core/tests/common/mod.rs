//! Random fixtures and brute-force reference implementations shared by the
//! integration tests. The oracles here deliberately avoid the library's own
//! data structures: they rescan raw documents for every quantity.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dsqe::corpus::{Corpus, Document};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const WORDS: [&str; 24] = [
    "tax", "policy", "school", "child", "family", "labour", "market", "migration", "youth", "welfare", "health",
    "income", "gender", "media", "vote", "party", "reform", "city", "rural", "crime", "church", "language",
    "speech", "class",
];

pub const DESCRIPTORS: [&str; 10] = [
    "Multilingualism",
    "Child",
    "Speech",
    "Ethnic Group",
    "Minority",
    "School",
    "Germany",
    "Labour Market",
    "Social Policy",
    "Family",
];

pub const PREFIXES: [&str; 3] = ["102", "109", "201"];

/// Lowercase and split on non-alphanumerics, written independently of the
/// library tokenizer.
pub fn naive_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub fn random_corpus(rng: &mut ChaCha8Rng, max_docs: usize) -> Corpus {
    let n = rng.gen_range(1..=max_docs);
    let docs = (0..n)
        .map(|i| {
            let words: Vec<&str> = (0..rng.gen_range(1..=12))
                .map(|_| *WORDS.choose(rng).unwrap())
                .collect();
            let split = rng.gen_range(0..=words.len());
            let k = rng.gen_range(0..=3);
            let mut descriptors: Vec<String> = DESCRIPTORS.choose_multiple(rng, k).map(|s| s.to_string()).collect();
            if rng.gen_bool(0.1) && !descriptors.is_empty() {
                // same descriptor in another case
                descriptors.push(descriptors[0].to_uppercase());
            }
            let codes = (0..rng.gen_range(0..=2))
                .map(|_| format!("{}{:02}", PREFIXES.choose(rng).unwrap(), rng.gen_range(0..30)))
                .collect();
            Document {
                id: format!("d{:03}", i),
                title: words[..split].join(" "),
                abstract_text: words[split..].join(", "),
                descriptors,
                classifications: codes,
            }
        })
        .collect();
    Corpus::new(docs).unwrap()
}

fn doc_tokens(doc: &Document) -> Vec<String> {
    naive_tokens(&format!("{} {}", doc.title, doc.abstract_text))
}

fn has_descriptor(doc: &Document, descriptor: &str) -> bool {
    doc.descriptors.iter().any(|d| d.eq_ignore_ascii_case(descriptor))
}

/// Document frequency by scanning every document.
pub fn brute_df(corpus: &Corpus, token: &str) -> usize {
    corpus
        .documents()
        .iter()
        .filter(|d| doc_tokens(d).iter().any(|t| t == token))
        .count()
}

pub fn brute_descriptor_df(corpus: &Corpus, descriptor: &str) -> usize {
    corpus
        .documents()
        .iter()
        .filter(|d| has_descriptor(d, descriptor))
        .count()
}

pub fn brute_cooccurrence(corpus: &Corpus, token: &str, descriptor: &str) -> usize {
    corpus
        .documents()
        .iter()
        .filter(|d| doc_tokens(d).iter().any(|t| t == token) && has_descriptor(d, descriptor))
        .count()
}

pub fn all_tokens(corpus: &Corpus) -> BTreeSet<String> {
    corpus.documents().iter().flat_map(doc_tokens).collect()
}

/// Quadratic-time reference scorer for the tf-idf ranking. Returns
/// `(doc id, score)` sorted by score descending, then id.
pub fn brute_search(corpus: &Corpus, query: &[(&str, f64)]) -> Vec<(String, f64)> {
    let n = corpus.size() as f64;
    let mut out = Vec::new();
    for doc in corpus.documents() {
        let tokens = doc_tokens(doc);
        let mut score = 0.0;
        for &(term, weight) in query {
            let tf = tokens.iter().filter(|t| *t == term).count();
            if tf == 0 {
                continue;
            }
            let df = brute_df(corpus, term) as f64;
            score += weight * (1.0 + (tf as f64).ln()) * (1.0 + n / df).ln() / (tokens.len() as f64).sqrt();
        }
        if score > 0.0 {
            out.push((doc.id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

/// Reference metrics `[AP, rPrecision, P@5, P@10, P@20, P@30]` computed
/// straight from the definitions, rescanning the ranking prefix each time.
pub fn brute_metrics(ranking: &[String], relevant: &BTreeSet<String>) -> [f64; 6] {
    let r = relevant.len();
    let rel_in_top = |k: usize| ranking.iter().take(k).filter(|d| relevant.contains(*d)).count();
    let mut ap = 0.0;
    for (i, doc) in ranking.iter().enumerate() {
        if relevant.contains(doc) {
            ap += rel_in_top(i + 1) as f64 / (i + 1) as f64;
        }
    }
    [
        ap / r as f64,
        rel_in_top(r) as f64 / r as f64,
        rel_in_top(5) as f64 / 5.0,
        rel_in_top(10) as f64 / 10.0,
        rel_in_top(20) as f64 / 20.0,
        rel_in_top(30) as f64 / 30.0,
    ]
}

/// Reference classification: count relevant documents per prefix, take the
/// largest group, smallest prefix on ties.
pub fn brute_classify(relevant: &[&Document], prefixes: &[&str]) -> Option<String> {
    let mut sorted = prefixes.to_vec();
    sorted.sort();
    let mut best: Option<(&str, usize)> = None;
    for p in sorted {
        let count = relevant
            .iter()
            .filter(|d| d.classifications.iter().any(|c| c.starts_with(p)))
            .count();
        if count > 0 && best.is_none_or(|(_, c)| count > c) {
            best = Some((p, count));
        }
    }
    best.map(|(p, _)| p.to_string())
}

/// Two-tailed Student's t p-value by composite Simpson integration of the
/// density over [0, |t|]; independent of the incomplete-beta route.
pub fn simpson_t_two_tailed(t: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let log_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |x: f64| (log_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let b = t.abs();
    let steps = 200_000;
    let h = b / steps as f64;
    let mut sum = density(0.0) + density(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * density(i as f64 * h);
    }
    let central = sum * h / 3.0;
    (1.0 - 2.0 * central).max(0.0)
}

pub fn group_by_key<K: Ord, V>(items: impl IntoIterator<Item = (K, V)>) -> BTreeMap<K, Vec<V>> {
    let mut out: BTreeMap<K, Vec<V>> = BTreeMap::new();
    for (k, v) in items {
        out.entry(k).or_default().push(v);
    }
    out
}
