//! Writes the synthetic benchmark as files the `dsqe` binary can consume.
//!
//! ```bash
//! cargo run -p dsqe --example write_benchmark -- /tmp/bench
//! cargo run -p dsqe -- --config /tmp/bench/config.json experiment
//! ```

use std::path::PathBuf;

use dsqe::synthetic::{Benchmark, BenchmarkConfig};

fn main() -> dsqe::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("bench"));
    let bench = Benchmark::generate(&BenchmarkConfig::default())?;
    bench.write_to(&dir)?;
    println!(
        "wrote {} documents, {} topics to {}",
        bench.corpus.size(),
        bench.topics.len(),
        dir.display()
    );
    Ok(())
}
