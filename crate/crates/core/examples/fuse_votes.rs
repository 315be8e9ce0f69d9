//! Effectiveness-weighted fusion of hand-made votes, in vote and
//! probabilistic mode.

use xrec::fusion::{confidence, decide, EffectivenessTable, FlowDescriptor, VoteSet};
use xrec::transforms::PropertyId;
use xrec::MetricId;

fn main() -> xrec::Result<()> {
    // Four flows, three classes. Rows are flows, columns classes.
    let eff = EffectivenessTable::from_dense(
        MetricId::Epars,
        vec![
            vec![0.80, 0.10, 0.30],
            vec![0.20, 0.60, 0.25],
            vec![0.05, 0.40, 0.70],
            vec![0.90, 0.85, 0.88],
        ],
    )?;
    let flows = vec![
        FlowDescriptor::new(1, PropertyId::Stroke),
        FlowDescriptor::new(2, PropertyId::Corner),
        FlowDescriptor::new(3, PropertyId::Line),
        FlowDescriptor::new(4, PropertyId::Identity),
    ];

    // Stroke and identity say 0, corner says 1, line says 2.
    let votes = VoteSet::from_classes([(0, 0), (1, 1), (2, 2), (3, 0)]);
    let report = decide(&votes, &eff, &flows, false)?;
    println!("vote fusion ({} table):", report.metric_id.label());
    for r in &report.ranked {
        println!(
            "  class {}: W {:.3}  C {:.3}  Ex {:.3}  voters {:?}  properties {:?}",
            r.class,
            r.weight,
            r.confidence,
            r.explainability,
            r.voters,
            r.contributing_properties()
        );
    }
    println!("winner: class {}", report.winner().class);

    // A fully unexplainable decision still has confidence, but Ex = 0.
    let alone = VoteSet::from_classes([(3, 1)]);
    let r = decide(&alone, &eff, &flows, false)?;
    println!("\nidentity alone: class {} C {:.2} Ex {:.2}", r.winner().class, r.winner().confidence, r.winner().explainability);

    // Probabilistic mode spreads each flow's weight over its scores.
    let mut scored = VoteSet::new();
    scored.cast_scored(0, 0, vec![0.6, 0.3, 0.1]);
    scored.cast_scored(1, 1, vec![0.2, 0.7, 0.1]);
    scored.cast_scored(2, 2, vec![0.1, 0.2, 0.7]);
    scored.cast_scored(3, 0, vec![0.5, 0.4, 0.1]);
    let c = confidence(&scored, &eff, true)?;
    println!("\nprobabilistic confidence: {:?}", c.values.iter().map(|(d, v)| format!("{d}:{v:.3}")).collect::<Vec<_>>());
    let report = decide(&scored, &eff, &flows, true)?;
    println!("probabilistic winner: class {}", report.winner().class);

    // Every cell zero: weights vanish and confidence falls back to uniform.
    let zero = EffectivenessTable::from_dense(MetricId::Epars, vec![vec![0.0; 3]; 4])?;
    let c = confidence(&votes, &zero, false)?;
    println!("\nzero table: flagged {} -> {:?}", c.zero_total_weight, c.values);
    Ok(())
}
