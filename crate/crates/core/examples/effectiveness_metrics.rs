//! The fourteen effectiveness metrics on a few one-vs-rest count rows,
//! including the E_PARS closed form and the degenerate cases.

use xrec::metrics::{self, epars_expanded, ConfusionCounts, MetricId};

fn main() -> xrec::Result<()> {
    let rows = [
        ("stroke 'S'", ConfusionCounts::new(1.96, 97.7, 0.20, 0.16)),
        ("corner 'S'", ConfusionCounts::new(1.08, 96.8, 1.04, 1.05)),
        ("encl. region '1'", ConfusionCounts::new(2.13, 34.0, 63.8, 0.0)),
        ("always votes 'x'", ConfusionCounts::new(40.0, 0.0, 60.0, 0.0)),
    ];

    print!("{:<18}", "");
    for (name, _) in &rows {
        print!("{name:>18}");
    }
    println!();
    for id in MetricId::ALL {
        if id == MetricId::Auc {
            continue; // needs scores, not counts
        }
        print!("{:<18}", id.label());
        for (_, c) in &rows {
            match metrics::metric(id, c) {
                Ok(v) => print!("{:>18.4}", v),
                Err(e) => print!("{:>18}", format!("({e})").chars().take(17).collect::<String>()),
            }
        }
        println!();
    }

    // Recall rewards a flow that votes one class for nearly everything;
    // E_PARS pulls its weight toward zero through precision and specificity.
    for (name, c) in &rows[2..] {
        println!("\n{name}: recall {:.3}, E_PARS {:.4}", metrics::recall(c), metrics::epars(c)?);
    }

    for (name, c) in &rows[..3] {
        let direct = metrics::epars(c)?;
        let closed = epars_expanded(c).expect("non-degenerate");
        println!("{name}: E_PARS {direct:.6} = closed form {closed:.6}");
    }

    let scores = [(0.9, true), (0.8, false), (0.7, true), (0.2, false), (0.1, false)];
    println!("AUC of five scored samples: {:.4}", metrics::auc(&scores)?);
    println!("empty counts: {}", metrics::metric(MetricId::Accuracy, &ConfusionCounts::default()).unwrap_err());
    Ok(())
}
