//! Scores two hand-written runs against qrels and tests the difference in
//! average precision for significance.
//!
//! ```bash
//! cargo run -p dsqe --example evaluate_run
//! ```

use std::collections::BTreeMap;

use dsqe::evaluation::{evaluate_topic, paired_t_test};
use dsqe::expansion::Qrels;
use dsqe::index::parse_run;

const QRELS: &str = "\
1 0 a 1
1 0 b 1
2 0 c 2
2 0 d 1
2 0 e 0
3 0 f 1
";

const BASELINE: &str = "\
1 Q0 x 1 3.0 base
1 Q0 a 2 2.0 base
1 Q0 b 3 1.0 base
2 Q0 e 1 2.0 base
2 Q0 c 2 1.0 base
3 Q0 y 1 1.0 base
3 Q0 f 2 0.5 base
";

const VARIANT: &str = "\
1 Q0 a 1 3.0 var
1 Q0 x 2 2.0 var
1 Q0 b 3 1.0 var
2 Q0 c 1 2.0 var
2 Q0 d 2 1.0 var
3 Q0 f 1 1.0 var
";

fn average_precisions(run: &BTreeMap<String, dsqe::index::RankedList>, qrels: &Qrels) -> dsqe::Result<Vec<f64>> {
    run.values().map(|r| Ok(evaluate_topic(r, qrels)?.average_precision)).collect()
}

fn main() -> dsqe::Result<()> {
    let qrels = Qrels::parse(QRELS.as_bytes(), "qrels", 1)?;
    let base = parse_run(BASELINE.as_bytes(), "baseline")?;
    let var = parse_run(VARIANT.as_bytes(), "variant")?;
    for (topic, ranking) in &var {
        let m = evaluate_topic(ranking, &qrels)?;
        println!(
            "topic {topic}: AP {:.3} rPrec {:.3} P@5 {:.3} (R = {})",
            m.average_precision,
            m.r_precision,
            m.precision(5),
            m.relevant_count
        );
    }
    let (b, v) = (average_precisions(&base, &qrels)?, average_precisions(&var, &qrels)?);
    let t = paired_t_test("MAP", &b, &v)?;
    println!("paired t = {:.4}, df = {}, p = {:.4} {}", t.t, t.df, t.p, t.stars());
    Ok(())
}
