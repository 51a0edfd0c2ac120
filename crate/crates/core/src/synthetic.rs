//! Seeded synthetic benchmark: a classified, descriptor-indexed corpus with
//! topics and planted relevance judgments.
//!
//! Every topic has a query word that is ambiguous across disciplines. In
//! the topic's home discipline the word co-occurs with one set of
//! descriptors (and the relevant documents use their vocabulary); in the
//! other discipline it co-occurs, more often, with a disjoint set attached
//! to non-relevant documents. Some relevant documents never mention the
//! query word and are only reachable through expansion.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, DisciplineMap, Document, StopwordSet};
use crate::error::{Error, Result};
use crate::expansion::{Qrels, Topic};

const SYLLABLES: [&str; 30] = [
    "ba", "ko", "mi", "ra", "te", "lu", "sa", "no", "vi", "de", "ka", "po", "ri", "zu", "fe", "ga",
    "lo", "me", "ni", "su", "ta", "ve", "xo", "ju", "ha", "qi", "wo", "ye", "ce", "du",
];

const DISCIPLINES: [(&str, &str); 4] = [
    ("102", "Sociology"),
    ("109", "Economics"),
    ("105", "Political Science"),
    ("106", "Education"),
];

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub seed: u64,
    /// Between 2 and 4.
    pub disciplines: usize,
    pub topics_per_discipline: usize,
    pub relevant_per_topic: usize,
    /// Non-relevant documents per topic in each other discipline.
    pub confusers_per_topic: usize,
    pub background_per_discipline: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            seed: 7,
            disciplines: 2,
            topics_per_discipline: 12,
            relevant_per_topic: 10,
            confusers_per_topic: 12,
            background_per_discipline: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub corpus: Corpus,
    pub map: DisciplineMap,
    pub topics: Vec<Topic>,
    pub qrels: Qrels,
}

struct Lexicon {
    rng: ChaCha8Rng,
    used: BTreeSet<String>,
    stopwords: StopwordSet,
}

impl Lexicon {
    fn word(&mut self) -> String {
        loop {
            let n = self.rng.gen_range(2..=3);
            let w: String = (0..n).map(|_| *SYLLABLES.choose(&mut self.rng).unwrap()).collect();
            if !self.stopwords.contains(&w) && self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word()).collect()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct TopicPlan {
    home: usize,
    query_word: String,
    modifier: String,
    // per discipline: sense words, with descriptor k spelled from word k
    senses: Vec<Vec<String>>,
}

impl TopicPlan {
    fn descriptors(&self, discipline: usize) -> Vec<String> {
        let w = &self.senses[discipline];
        // the last descriptor is a two-word phrase
        vec![
            capitalize(&w[0]),
            capitalize(&w[1]),
            capitalize(&w[2]),
            format!("{} {}", capitalize(&w[3]), capitalize(&w[4])),
        ]
    }
}

impl Benchmark {
    pub fn generate(config: &BenchmarkConfig) -> Result<Self> {
        if !(2..=DISCIPLINES.len()).contains(&config.disciplines) {
            return Err(Error::InvalidArgument(format!(
                "synthetic benchmark supports 2 to {} disciplines",
                DISCIPLINES.len()
            )));
        }
        let mut lex = Lexicon {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            used: BTreeSet::new(),
            stopwords: StopwordSet::english(),
        };
        let filler = lex.words(120);
        let field_words: Vec<Vec<String>> = (0..config.disciplines).map(|_| lex.words(30)).collect();
        let field_descriptors: Vec<Vec<String>> = (0..config.disciplines)
            .map(|_| lex.words(8).iter().map(|w| capitalize(w)).collect())
            .collect();

        let mut plans = Vec::new();
        for home in 0..config.disciplines {
            for _ in 0..config.topics_per_discipline {
                plans.push(TopicPlan {
                    home,
                    query_word: lex.word(),
                    modifier: lex.word(),
                    senses: (0..config.disciplines).map(|_| lex.words(5)).collect(),
                });
            }
        }

        let mut rng = lex.rng;
        let mut documents = Vec::new();
        let mut qrels = Qrels::new(1);
        let mut topics = Vec::new();
        let mut next_id = 0usize;
        let mut new_id = || {
            next_id += 1;
            format!("s{next_id:05}")
        };
        let code = |rng: &mut ChaCha8Rng, d: usize| format!("{}{:02}", DISCIPLINES[d].0, rng.gen_range(1..=20));

        let text = |rng: &mut ChaCha8Rng, pool: &[&[String]], len: std::ops::RangeInclusive<usize>| -> String {
            let n = rng.gen_range(len);
            (0..n)
                .map(|_| {
                    let p = pool[rng.gen_range(0..pool.len())];
                    p[rng.gen_range(0..p.len())].as_str()
                })
                .collect::<Vec<_>>()
                .join(" ")
        };

        for (t, plan) in plans.iter().enumerate() {
            let topic_id = format!("{}", 101 + t);
            topics.push(Topic {
                id: topic_id.clone(),
                title: format!("The {} of {}", capitalize(&plan.query_word), plan.modifier),
            });

            // part of the relevant set may live in one other discipline and
            // use that discipline's vocabulary
            let cross_count = (config.relevant_per_topic as f64 * rng.gen_range(0.0..0.45)).round() as usize;
            let cross_to = (plan.home + rng.gen_range(1..config.disciplines)) % config.disciplines;

            for d in 0..config.disciplines {
                let home = d == plan.home;
                let mut roles = Vec::new();
                if home {
                    roles.resize(config.relevant_per_topic - cross_count, true);
                } else {
                    if d == cross_to {
                        roles.resize(cross_count, true);
                    }
                    roles.extend(std::iter::repeat_n(false, config.confusers_per_topic));
                }
                let sense = &plan.senses[d];
                let sense_descriptors = plan.descriptors(d);
                for relevant in roles {
                    let id = new_id();
                    let mut title = Vec::new();
                    // relevant documents sometimes omit the query word; the others always use it
                    if !relevant || rng.gen_bool(0.7) {
                        title.push(plan.query_word.clone());
                    }
                    if rng.gen_bool(0.4) {
                        title.push(plan.modifier.clone());
                    }
                    title.push(sense[rng.gen_range(0..sense.len())].clone());
                    title.push(text(&mut rng, &[&field_words[d]], 2..=2));
                    let abstract_text = format!(
                        "{} {} {}",
                        text(&mut rng, &[&filler], 6..=12),
                        text(&mut rng, &[sense.as_slice()], 2..=3),
                        text(&mut rng, &[&field_words[d]], 2..=2)
                    );
                    let k = rng.gen_range(2..=3);
                    let mut descriptors: Vec<String> = sense_descriptors
                        .choose_multiple(&mut rng, k)
                        .cloned()
                        .collect();
                    descriptors.push(field_descriptors[d].choose(&mut rng).unwrap().clone());
                    let mut classifications = vec![code(&mut rng, d)];
                    if rng.gen_bool(0.2) {
                        classifications.push(code(&mut rng, d));
                    }
                    if home && rng.gen_bool(0.15) {
                        let other = (d + 1) % config.disciplines;
                        classifications.push(code(&mut rng, other));
                    }
                    classifications.dedup();
                    documents.push(Document {
                        id: id.clone(),
                        title: title.join(" "),
                        abstract_text,
                        descriptors,
                        classifications,
                    });
                    if relevant {
                        qrels.insert(&topic_id, &id, rng.gen_range(1..=2))?;
                    } else if rng.gen_bool(0.5) {
                        qrels.insert(&topic_id, &id, 0)?;
                    }
                }
            }
        }

        for d in 0..config.disciplines {
            for _ in 0..config.background_per_discipline {
                documents.push(Document {
                    id: new_id(),
                    title: text(&mut rng, &[&field_words[d], &filler], 4..=4),
                    abstract_text: text(&mut rng, &[&filler, &field_words[d]], 8..=14),
                    descriptors: field_descriptors[d]
                        .choose_multiple(&mut rng, 2)
                        .cloned()
                        .collect(),
                    classifications: vec![code(&mut rng, d)],
                });
            }
        }
        documents.shuffle(&mut rng);

        let map = DisciplineMap::new(3, DISCIPLINES[..config.disciplines].iter().copied())?;
        Ok(Benchmark {
            corpus: Corpus::new(documents)?,
            map,
            topics,
            qrels,
        })
    }

    /// Writes `corpus.jsonl`, `disciplines.json`, `topics.tsv`, `qrels.txt`,
    /// `stopwords.txt` and a `config.json` wiring them together.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |p: &Path, e| Error::io(p, e);
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;

        let mut corpus = Vec::new();
        self.corpus.write_jsonl(&mut corpus)?;
        let path = dir.join("corpus.jsonl");
        fs::write(&path, corpus).map_err(|e| io(&path, e))?;

        let path = dir.join("disciplines.json");
        fs::write(&path, serde_json::to_string_pretty(&self.map)? + "\n").map_err(|e| io(&path, e))?;

        let topics: String = self.topics.iter().map(|t| format!("{}\t{}\n", t.id, t.title)).collect();
        let path = dir.join("topics.tsv");
        fs::write(&path, topics).map_err(|e| io(&path, e))?;

        let mut qrels = Vec::new();
        self.qrels.write(&mut qrels).map_err(|e| io(dir, e))?;
        let path = dir.join("qrels.txt");
        fs::write(&path, qrels).map_err(|e| io(&path, e))?;

        let path = dir.join("stopwords.txt");
        let stopwords: String = StopwordSet::english().sorted().iter().map(|w| format!("{w}\n")).collect();
        fs::write(&path, stopwords).map_err(|e| io(&path, e))?;

        let config = serde_json::json!({
            "corpus": "corpus.jsonl",
            "disciplines": "disciplines.json",
            "stopwords": "stopwords.txt",
            "topics": "topics.tsv",
            "qrels": "qrels.txt",
            "out": "out",
            "tag": "synthetic",
        });
        let path = dir.join("config.json");
        fs::write(&path, serde_json::to_string_pretty(&config)? + "\n").map_err(|e| io(&path, e))?;
        Ok(())
    }
}
