//! The worked EMNIST "S" example from a hand-written fixture: the
//! explainability matrix and one rationale sentence per candidate.
//!
//!     cargo run --example explain_sample -- [metric]

use std::path::Path;

use xrec::pipeline::Fixture;
use xrec::MetricId;

fn main() -> xrec::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/emnist_s_example.json");
    let fixture = Fixture::load(&path)?;
    let metrics: Vec<MetricId> = match std::env::args().nth(1) {
        Some(m) => vec![m.parse()?],
        None => vec![MetricId::Epars, MetricId::Recall],
    };
    for metric in metrics {
        let explanation = fixture.explain(metric)?;
        println!("== {}\n", metric.label());
        print!("{}", explanation.matrix());
        println!();
        for s in explanation.sentences() {
            println!("{s}");
        }
        println!();
    }
    let record = fixture.explain(MetricId::Epars)?.record();
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}
