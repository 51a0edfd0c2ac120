//! Tokenizes a few records and splits them into discipline partitions.
//!
//! ```bash
//! cargo run -p dsqe --example tokenize_and_partition
//! ```

use dsqe::corpus::{partition, tokenize, Corpus, DisciplineMap, Document, StopwordSet};

fn doc(id: &str, title: &str, codes: &[&str]) -> Document {
    Document {
        id: id.into(),
        title: title.into(),
        abstract_text: String::new(),
        descriptors: vec![],
        classifications: codes.iter().map(|c| c.to_string()).collect(),
    }
}

fn main() -> dsqe::Result<()> {
    let stopwords = StopwordSet::english();
    let tokens = tokenize("The C++-based, 2nd-gen systems of the school", &stopwords);
    println!("tokens: {:?}", tokens.tokens());

    let corpus = Corpus::new(vec![
        doc("d1", "Bilingual education in primary school", &["10601"]),
        doc("d2", "Migrant families and language use", &["10201", "10603"]),
        doc("d3", "Tax reform and labour supply", &["10904"]),
    ])?;
    let map = DisciplineMap::new(3, [("102", "Sociology"), ("106", "Education")])?;
    let parts = partition(&corpus, &map);
    for p in &parts.partitions {
        let ids: Vec<&str> = p.corpus.documents().iter().map(|d| d.id.as_str()).collect();
        println!("{} {:<10} {:?}", p.prefix, p.label, ids);
    }
    println!("unmatched: {}", parts.unmatched);
    Ok(())
}
