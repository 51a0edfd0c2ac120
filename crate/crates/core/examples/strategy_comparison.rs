//! Runs all four expansion strategies on the synthetic benchmark and prints
//! the evaluation report.
//!
//! ```bash
//! cargo run -p dsqe --example strategy_comparison
//! ```

use dsqe::corpus::StopwordSet;
use dsqe::evaluation::{EvaluatedRun, Report};
use dsqe::expansion::{ExpansionParams, Experiment, Strategy};
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

    let mut runs = Vec::new();
    for strategy in Strategy::ALL {
        let run = experiment.run(strategy)?;
        let mut evaluated = EvaluatedRun::evaluate(
            strategy.as_str(),
            strategy.title(),
            bench.topics.iter().map(|t| t.id.as_str()),
            &run.rankings,
            &bench.qrels,
        );
        evaluated.notes = run.notes;
        runs.push(evaluated);
    }
    let report = Report::new(runs, Strategy::General.as_str())?;
    print!("{}", report.to_text());
    Ok(())
}
