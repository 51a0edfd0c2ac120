//! Builds an inverted index and ranks documents for a weighted query.
//!
//! ```bash
//! cargo run -p dsqe --example tfidf_search
//! ```

use dsqe::corpus::{Corpus, Document, StopwordSet};
use dsqe::index::{write_run, InvertedIndex, WeightedQuery};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let titles = [
        ("d1", "Bilingual education and school achievement of bilingual children"),
        ("d2", "Bilingual children"),
        ("d3", "School choice and housing markets"),
        ("d4", "Language policy in multilingual states"),
    ];
    let corpus = Corpus::new(
        titles
            .iter()
            .map(|(id, title)| Document {
                id: id.to_string(),
                title: title.to_string(),
                abstract_text: String::new(),
                descriptors: vec![],
                classifications: vec![],
            })
            .collect(),
    )?;
    let index = InvertedIndex::build(&corpus, &StopwordSet::english());
    println!("{} documents, {} terms", index.doc_count(), index.vocabulary().count());

    let query = WeightedQuery::new([("bilingual", 1.0), ("school", 1.0), ("language", 0.5)])?;
    let ranking = index.search("q1", &query, 10)?;
    write_run(std::io::stdout().lock(), [&ranking], "example")?;
    Ok(())
}
