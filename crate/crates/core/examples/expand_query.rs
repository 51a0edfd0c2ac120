//! Expands one benchmark topic with the general and the discipline model
//! and shows how the query and its average precision change.
//!
//! ```bash
//! cargo run -p dsqe --example expand_query
//! ```

use dsqe::corpus::StopwordSet;
use dsqe::evaluation::evaluate_topic;
use dsqe::expansion::{classify_topic, make_query, ExpansionParams, Experiment};
use dsqe::index::InvertedIndex;
use dsqe::recommender::ModelSet;
use dsqe::synthetic::{Benchmark, BenchmarkConfig};

fn main() -> dsqe::Result<()> {
    let bench = Benchmark::generate(&BenchmarkConfig::default())?;
    let stopwords = StopwordSet::english();
    let index = InvertedIndex::build(&bench.corpus, &stopwords);
    let models = ModelSet::build(&bench.corpus, &bench.map, &stopwords)?;
    let experiment = Experiment {
        corpus: &bench.corpus,
        map: &bench.map,
        index: &index,
        models: &models,
        topics: &bench.topics,
        qrels: &bench.qrels,
        stopwords: &stopwords,
        params: ExpansionParams::default(),
    };

    let topic = &bench.topics[0];
    let class = classify_topic(&topic.id, &bench.qrels, &bench.corpus, &bench.map)?;
    println!("topic {} {:?} -> {} ({})", topic.id, topic.title, class.label, class.prefix);
    let query = make_query(topic, &stopwords)?;
    let candidates = [None, Some(&models.global), models.get(&class.label)];
    for model in candidates {
        let (ranking, expansion) = experiment.search_with(topic, &query, model)?;
        let ap = evaluate_topic(&ranking, &bench.qrels)?.average_precision;
        let name = model.map_or("unexpanded", |m| m.label());
        let terms: Vec<String> = expansion.query.terms().map(|(t, w)| format!("{t}^{w}")).collect();
        println!("{name:<12} AP {ap:.3}  {}", terms.join(" "));
    }
    Ok(())
}
