//! Retrieval metrics, paired significance testing and report rendering.
//!
//! Relevance is binary: a judged document is relevant when its grade meets
//! the qrels threshold. Per topic we compute average precision, R-precision
//! and precision at 5, 10, 20 and 30.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::Qrels;
use crate::index::RankedList;

pub const CUTOFFS: [usize; 4] = [5, 10, 20, 30];
pub const SIGNIFICANCE_LEVELS: [f64; 2] = [0.05, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMetrics {
    pub topic_id: String,
    pub average_precision: f64,
    pub r_precision: f64,
    pub precision_at: BTreeMap<usize, f64>,
    pub relevant_count: usize,
}

impl TopicMetrics {
    pub fn precision(&self, k: usize) -> f64 {
        self.precision_at.get(&k).copied().unwrap_or(0.0)
    }

    /// Values in report column order.
    pub fn values(&self) -> [f64; 6] {
        [
            self.average_precision,
            self.r_precision,
            self.precision(5),
            self.precision(10),
            self.precision(20),
            self.precision(30),
        ]
    }
}

/// Report columns: name of the aggregate and of its per-topic source.
pub const METRICS: [&str; 6] = ["MAP", "rPrecision", "p@5", "p@10", "p@20", "p@30"];

pub fn evaluate_topic(ranking: &RankedList, qrels: &Qrels) -> Result<TopicMetrics> {
    let relevant = qrels.relevant(&ranking.topic_id);
    let r = relevant.len();
    if r == 0 {
        return Err(Error::Unjudged(ranking.topic_id.clone()));
    }
    // hits[i] = relevant documents within the top i+1
    let mut seen = HashSet::new();
    let mut hits = Vec::with_capacity(ranking.len());
    let mut found = 0usize;
    let mut ap = 0.0;
    for doc in ranking.doc_ids() {
        if !seen.insert(doc) {
            continue;
        }
        if relevant.contains(doc) {
            found += 1;
            ap += found as f64 / (hits.len() + 1) as f64;
        }
        hits.push(found);
    }
    let relevant_in_top = |k: usize| -> usize {
        if k == 0 || hits.is_empty() {
            0
        } else {
            hits[k.min(hits.len()) - 1]
        }
    };
    Ok(TopicMetrics {
        topic_id: ranking.topic_id.clone(),
        average_precision: ap / r as f64,
        r_precision: relevant_in_top(r) as f64 / r as f64,
        precision_at: CUTOFFS
            .iter()
            .map(|&k| (k, relevant_in_top(k) as f64 / k as f64))
            .collect(),
        relevant_count: r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub topic_count: usize,
    pub map: f64,
    pub r_precision: f64,
    pub precision_at: BTreeMap<usize, f64>,
}

impl AggregateMetrics {
    pub fn values(&self) -> [f64; 6] {
        let p = |k| self.precision_at.get(&k).copied().unwrap_or(0.0);
        [self.map, self.r_precision, p(5), p(10), p(20), p(30)]
    }
}

pub fn aggregate(per_topic: &[TopicMetrics]) -> Result<AggregateMetrics> {
    if per_topic.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate zero topics".into()));
    }
    let n = per_topic.len() as f64;
    let mean = |f: &dyn Fn(&TopicMetrics) -> f64| per_topic.iter().map(f).sum::<f64>() / n;
    Ok(AggregateMetrics {
        topic_count: per_topic.len(),
        map: mean(&|m| m.average_precision),
        r_precision: mean(&|m| m.r_precision),
        precision_at: CUTOFFS.iter().map(|&k| (k, mean(&|m| m.precision(k)))).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub metric: String,
    pub t: f64,
    pub df: usize,
    /// Two-tailed.
    pub p: f64,
    pub significant_at: Vec<f64>,
    /// All differences equal (up to rounding) and non-zero, so the standard
    /// error vanishes.
    pub degenerate_variance: bool,
}

impl SignificanceResult {
    pub fn stars(&self) -> &'static str {
        if self.p <= 0.01 {
            "**"
        } else if self.p <= 0.05 {
            "*"
        } else {
            ""
        }
    }
}

/// Two-tailed p-value of Student's t distribution,
/// `P(|T| >= |t|) = I_{df/(df+t²)}(df/2, 1/2)`, evaluated with the
/// regularized incomplete beta function.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    statrs::function::beta::beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Paired Student's t-test on `variant − baseline`.
pub fn paired_t_test(metric: &str, baseline: &[f64], variant: &[f64]) -> Result<SignificanceResult> {
    if baseline.len() != variant.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length ({} vs {})",
            baseline.len(),
            variant.len()
        )));
    }
    let n = baseline.len();
    if n < 2 {
        return Err(Error::InvalidArgument("paired t-test needs at least two pairs".into()));
    }
    let diffs: Vec<f64> = variant.iter().zip(baseline).map(|(v, b)| v - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let df = n - 1;

    let (t, p, degenerate) = if diffs.iter().all(|&d| d == 0.0) {
        (0.0, 1.0, false)
    } else if sd <= 64.0 * f64::EPSILON * mean.abs() {
        // differences equal up to rounding
        (f64::INFINITY.copysign(mean), 0.0, true)
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        (t, student_t_two_tailed(t, df as f64), false)
    };
    Ok(SignificanceResult {
        metric: metric.to_string(),
        t,
        df,
        p,
        significant_at: SIGNIFICANCE_LEVELS.iter().copied().filter(|&a| p <= a).collect(),
        degenerate_variance: degenerate,
    })
}

/// Per-topic evaluation of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedRun {
    /// Machine label, e.g. `general`.
    pub label: String,
    /// Row title in the text table, e.g. `gSTR`.
    pub title: String,
    pub per_topic: Vec<TopicMetrics>,
    /// Topics without relevant documents.
    pub excluded_topics: Vec<String>,
    /// Soft per-topic failures and fallbacks.
    pub notes: Vec<String>,
}

impl EvaluatedRun {
    /// Evaluates every topic in `topic_ids`. A judged topic without a ranking
    /// is scored as an empty ranking; unjudged topics are excluded.
    pub fn evaluate<'a>(
        label: impl Into<String>,
        title: impl Into<String>,
        topic_ids: impl IntoIterator<Item = &'a str>,
        rankings: &BTreeMap<String, RankedList>,
        qrels: &Qrels,
    ) -> Self {
        let mut per_topic = Vec::new();
        let mut excluded_topics = Vec::new();
        for id in topic_ids {
            let empty;
            let ranking = match rankings.get(id) {
                Some(r) => r,
                None => {
                    empty = RankedList {
                        topic_id: id.to_string(),
                        entries: Vec::new(),
                    };
                    &empty
                }
            };
            match evaluate_topic(ranking, qrels) {
                Ok(m) => per_topic.push(m),
                Err(_) => excluded_topics.push(id.to_string()),
            }
        }
        EvaluatedRun {
            label: label.into(),
            title: title.into(),
            per_topic,
            excluded_topics,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub title: String,
    pub aggregates: AggregateMetrics,
    /// Against the baseline; empty for the baseline itself.
    pub significance: IndexMap<String, SignificanceResult>,
    pub per_topic: Vec<TopicMetrics>,
    pub excluded_topics: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub baseline: String,
    pub strategies: IndexMap<String, StrategyReport>,
}

impl Report {
    pub fn new(runs: Vec<EvaluatedRun>, baseline: &str) -> Result<Self> {
        let base = runs
            .iter()
            .find(|r| r.label == baseline)
            .ok_or_else(|| Error::InvalidArgument(format!("baseline run {baseline:?} is not among the runs")))?;
        let base_by_topic: BTreeMap<&str, &TopicMetrics> =
            base.per_topic.iter().map(|m| (m.topic_id.as_str(), m)).collect();

        let mut strategies = IndexMap::new();
        for run in &runs {
            let aggregates = aggregate(&run.per_topic)
                .map_err(|_| Error::InvalidArgument(format!("run {:?} has no evaluated topics", run.label)))?;
            let mut significance = IndexMap::new();
            if run.label != baseline {
                let pairs: Vec<(&TopicMetrics, &TopicMetrics)> = run
                    .per_topic
                    .iter()
                    .filter_map(|m| base_by_topic.get(m.topic_id.as_str()).map(|b| (*b, m)))
                    .collect();
                if pairs.len() >= 2 {
                    for (col, name) in METRICS.iter().enumerate() {
                        let b: Vec<f64> = pairs.iter().map(|(b, _)| b.values()[col]).collect();
                        let v: Vec<f64> = pairs.iter().map(|(_, v)| v.values()[col]).collect();
                        significance.insert(name.to_string(), paired_t_test(name, &b, &v)?);
                    }
                }
            }
            strategies.insert(
                run.label.clone(),
                StrategyReport {
                    title: run.title.clone(),
                    aggregates,
                    significance,
                    per_topic: run.per_topic.clone(),
                    excluded_topics: run.excluded_topics.clone(),
                    notes: run.notes.clone(),
                },
            );
        }
        Ok(Report {
            baseline: baseline.to_string(),
            strategies,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned plain-text rendering: one summary table with significance
    /// stars against the baseline, then one detail table per topic.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let row_title = |label: &str, s: &StrategyReport| {
            if label == self.baseline {
                format!("{} (Base)", s.title)
            } else {
                s.title.clone()
            }
        };
        let width = self
            .strategies
            .iter()
            .map(|(l, s)| row_title(l, s).len())
            .max()
            .unwrap_or(0)
            .max("Exp. Type".len());

        let topic_count = self.strategies.values().map(|s| s.aggregates.topic_count).max().unwrap_or(0);
        let _ = writeln!(out, "Evaluation results averaged over {topic_count} topics");
        let _ = writeln!(out, "Significance against {}: * p <= .05, ** p <= .01", self.baseline);
        let _ = writeln!(out);
        write_header(&mut out, "Exp. Type", width);
        for (label, s) in &self.strategies {
            let _ = write!(out, "{:<width$}", row_title(label, s));
            for (col, value) in s.aggregates.values().iter().enumerate() {
                let stars = s.significance.get(METRICS[col]).map_or("", SignificanceResult::stars);
                let _ = write!(out, "  {:<12}", format!("{value:.3}{stars}"));
            }
            let _ = writeln!(out);
        }

        let mut topics: Vec<&str> = Vec::new();
        for s in self.strategies.values() {
            for m in &s.per_topic {
                if !topics.contains(&m.topic_id.as_str()) {
                    topics.push(&m.topic_id);
                }
            }
        }
        for topic in topics {
            let _ = writeln!(out);
            let _ = writeln!(out, "Topic {topic}");
            let rel = self
                .strategies
                .values()
                .flat_map(|s| &s.per_topic)
                .find(|m| m.topic_id == topic)
                .map_or(0, |m| m.relevant_count);
            let _ = writeln!(out, "relevant documents: {rel}");
            write_header(&mut out, "Exp. Type", width);
            for s in self.strategies.values() {
                let Some(m) = s.per_topic.iter().find(|m| m.topic_id == topic) else { continue };
                let _ = write!(out, "{:<width$}", s.title);
                for v in m.values() {
                    let _ = write!(out, "  {:<12}", format!("{:.3}", v));
                }
                let _ = writeln!(out);
            }
        }

        for (label, s) in &self.strategies {
            if !s.excluded_topics.is_empty() {
                let _ = writeln!(out);
                let _ = writeln!(out, "{label}: excluded unjudged topics: {}", s.excluded_topics.join(", "));
            }
            for note in &s.notes {
                let _ = writeln!(out, "{label}: {note}");
            }
        }
        out.lines().map(|l| l.trim_end().to_string() + "\n").collect()
    }
}

fn write_header(out: &mut String, first: &str, width: usize) {
    let _ = write!(out, "{first:<width$}");
    for (i, name) in METRICS.iter().enumerate() {
        let name = if i == 0 { "MAP/AP" } else { name };
        let _ = write!(out, "  {name:<12}");
    }
    let _ = writeln!(out);
}
