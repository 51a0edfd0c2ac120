//! Trains a co-occurrence recommender on a tiny partition and prints the
//! descriptors it suggests for a free-text query.
//!
//! ```bash
//! cargo run -p dsqe --example recommend_terms -- bilingual children
//! ```

use dsqe::corpus::{tokenize, Corpus, Document, StopwordSet};
use dsqe::recommender::RecommenderModel;

fn doc(id: &str, title: &str, descriptors: &[&str]) -> Document {
    Document {
        id: id.into(),
        title: title.into(),
        abstract_text: String::new(),
        descriptors: descriptors.iter().map(|d| d.to_string()).collect(),
        classifications: vec![],
    }
}

fn main() -> dsqe::Result<()> {
    let corpus = Corpus::new(vec![
        doc("d1", "bilingual education school", &["Multilingualism", "Child"]),
        doc("d2", "bilingual children", &["Multilingualism", "Speech"]),
        doc("d3", "minority language rights", &["Minority", "Ethnic Group", "Multilingualism"]),
        doc("d4", "children at school", &["Child", "School"]),
    ])?;
    let stopwords = StopwordSet::english();
    let model = RecommenderModel::build("demo", &corpus, &stopwords)?;

    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = if args.is_empty() { "bilingual".to_string() } else { args.join(" ") };
    println!("query: {text}");
    for s in model.recommend(&tokenize(&text, &stopwords), 4) {
        println!("  {:<16} {:.6}", s.descriptor, s.score);
    }
    Ok(())
}
