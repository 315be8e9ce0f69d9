//! Plain-language rationale for a [`DecisionReport`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{DecisionReport, EffectivenessTable, FlowDescriptor, VoteSet};
use crate::transforms::PropertyId;

/// Verbal confidence category. Both 25% and 75% fall in `Medium`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceBand {
    Low,
    Medium,
    High,
}

impl fmt::Display for ConfidenceBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfidenceBand::Low => "low",
            ConfidenceBand::Medium => "medium",
            ConfidenceBand::High => "high",
        })
    }
}

pub fn band(c: f64) -> Result<ConfidenceBand> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange(c));
    }
    Ok(if c < 0.25 {
        ConfidenceBand::Low
    } else if c <= 0.75 {
        ConfidenceBand::Medium
    } else {
        ConfidenceBand::High
    })
}

const DIGIT_WORDS: [&str; 10] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];

/// Letters whose spoken name starts with a vowel sound ("an F", "an S").
const AN_LETTERS: &str = "AEFHILMNORSXaefhilmnorsx";

/// "a one", "an eight", "an S", "a b".
pub fn class_phrase(name: &str) -> String {
    if let Ok(d) = name.parse::<usize>() {
        if d < 10 {
            let word = DIGIT_WORDS[d];
            let article = if word.starts_with('e') { "an" } else { "a" };
            return format!("{article} {word}");
        }
    }
    let mut chars = name.chars();
    let article = match (chars.next(), chars.next()) {
        (Some(c), None) if AN_LETTERS.contains(c) => "an",
        (Some(c), Some(_)) if "AEIOUaeiou".contains(c) => "an",
        _ => "a",
    };
    format!("{article} {name}")
}

/// "a", "a and b", "a, b, and c".
pub fn property_list(properties: &[PropertyId]) -> String {
    let words: Vec<&str> = properties.iter().map(|p| p.phrase()).collect();
    match words.as_slice() {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

/// One rationale sentence. Identity is dropped from `properties`.
pub fn sentence(class_name: &str, confidence: f64, properties: &[PropertyId]) -> Result<String> {
    let band = band(confidence)?;
    let named: Vec<PropertyId> = properties.iter().copied().filter(|p| p.is_explainable()).collect();
    let subject = class_phrase(class_name);
    Ok(match named.len() {
        0 => format!(
            "Confidence is {band} for interpreting this character as {subject}; no explainable property supports this decision."
        ),
        1 => format!(
            "Confidence is {band} for interpreting this character as {subject} due to the {} property.",
            property_list(&named)
        ),
        _ => format!(
            "Confidence is {band} for interpreting this character as {subject} due to the {} properties.",
            property_list(&named)
        ),
    })
}

fn class_name(class_names: &[String], class: usize) -> String {
    class_names.get(class).cloned().unwrap_or_else(|| class.to_string())
}

/// One sentence per ranked class, in ranked order.
pub fn render(report: &DecisionReport, class_names: &[String]) -> Vec<String> {
    report
        .ranked
        .iter()
        .map(|r| {
            sentence(
                &class_name(class_names, r.class),
                r.confidence.clamp(0.0, 1.0),
                &r.contributing_properties(),
            )
            .expect("clamped confidence is in range")
        })
        .collect()
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRecord {
    pub class: String,
    pub confidence: f64,
    pub explainability: f64,
    pub properties: Vec<PropertyId>,
    pub sentence: String,
}

/// Structured form of one explained sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub sample_id: String,
    pub metric_id: crate::metrics::MetricId,
    pub probabilistic: bool,
    pub winner: String,
    pub ranked: Vec<RankedRecord>,
}

pub fn to_record(sample_id: impl Into<String>, report: &DecisionReport, class_names: &[String]) -> ExplanationRecord {
    let sentences = render(report, class_names);
    ExplanationRecord {
        sample_id: sample_id.into(),
        metric_id: report.metric_id,
        probabilistic: report.probabilistic,
        winner: class_name(class_names, report.winner().class),
        ranked: report
            .ranked
            .iter()
            .zip(sentences)
            .map(|(r, sentence)| RankedRecord {
                class: class_name(class_names, r.class),
                confidence: round_sig(r.confidence, 4),
                explainability: round_sig(r.explainability, 3),
                properties: r.contributing_properties(),
                sentence,
            })
            .collect(),
    }
}

/// Percentage to three significant digits: "3.39%", "64.9%", "100%".
fn percent(x: f64) -> String {
    let v = round_sig(x * 100.0, 3);
    let decimals = if v == 0.0 { 0 } else { (2 - v.abs().log10().floor() as i32).max(0) as usize };
    format!("{v:.decimals$}%")
}

/// The flow-by-class matrix behind a decision: each flow's vote and its
/// effectiveness under the voted class, an explainability marker column per
/// class, the weight row, and the confidence / explainability row.
pub fn render_matrix(
    report: &DecisionReport,
    votes: &VoteSet,
    eff: &EffectivenessTable,
    flows: &[FlowDescriptor],
    class_names: &[String],
) -> String {
    use std::fmt::Write;

    let classes: Vec<usize> = report.ranked.iter().map(|r| r.class).collect();
    let mut header = vec!["Flow".to_string(), "Property".to_string(), "Vote".to_string()];
    for &d in &classes {
        header.push(format!("E[{}]", class_name(class_names, d)));
        header.push(format!("Ex[{}]", class_name(class_names, d)));
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (j, flow) in flows.iter().enumerate() {
        let vote = votes.get(j);
        let mut row = vec![
            format!("F{}", flow.flow_id),
            flow.property.label().to_string(),
            vote.map_or("-".into(), |v| class_name(class_names, v.class)),
        ];
        for &d in &classes {
            match vote {
                Some(v) if v.class == d => {
                    row.push(eff.get(j, d).map_or("?".into(), |e| format!("{e:.4}")));
                    row.push(format!("{}", flow.x_weight));
                }
                _ => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        rows.push(row);
    }

    let mut weights = vec!["Weights".to_string(), String::new(), String::new()];
    let mut summary = vec!["Conf/Ex".to_string(), String::new(), String::new()];
    for r in &report.ranked {
        weights.push(format!("{:.4}", r.weight));
        weights.push(String::new());
        summary.push(percent(r.confidence));
        summary.push(if r.explainability_indeterminate {
            "n/a".into()
        } else {
            percent(r.explainability)
        });
    }
    rows.push(weights);
    rows.push(summary);

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().chain(std::iter::once(&header)).map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(cell, &w)| format!("{cell:<w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands() {
        assert_eq!(band(0.517).unwrap(), ConfidenceBand::Medium);
        assert_eq!(band(0.869).unwrap(), ConfidenceBand::High);
        assert_eq!(band(0.25).unwrap(), ConfidenceBand::Medium);
        assert_eq!(band(0.75).unwrap(), ConfidenceBand::Medium);
        assert_eq!(band(0.2499).unwrap(), ConfidenceBand::Low);
        assert!(band(1.01).is_err());
        assert!(band(f64::NAN).is_err());
    }

    #[test]
    fn articles() {
        assert_eq!(class_phrase("1"), "a one");
        assert_eq!(class_phrase("8"), "an eight");
        assert_eq!(class_phrase("S"), "an S");
        assert_eq!(class_phrase("E"), "an E");
        assert_eq!(class_phrase("n"), "an n");
        assert_eq!(class_phrase("b"), "a b");
        assert_eq!(class_phrase("U"), "a U");
    }

    #[test]
    fn lists() {
        use PropertyId::*;
        assert_eq!(property_list(&[ConvexHull]), "convex hull");
        assert_eq!(property_list(&[Stroke, Corner]), "stroke and corner");
        assert_eq!(
            property_list(&[EnclosedRegion, Circle, EllipseCircle, Crossing]),
            "enclosed region, circle, ellipse-circle, and crossing"
        );
    }

    #[test]
    fn singular_and_identity_only() {
        assert_eq!(
            sentence("E", 0.0339, &[PropertyId::ConvexHull]).unwrap(),
            "Confidence is low for interpreting this character as an E due to the convex hull property."
        );
        let s = sentence("7", 0.9, &[PropertyId::Identity]).unwrap();
        assert!(!s.contains("property."));
        assert!(s.contains("a seven; no explainable property"));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(round_sig(0.869812, 4), 0.8698);
        assert_eq!(round_sig(0.64934, 3), 0.649);
        assert_eq!(round_sig(0.0, 3), 0.0);
        assert_eq!(percent(0.03386), "3.39%");
        assert_eq!(percent(1.0), "100%");
        assert_eq!(percent(0.51), "51.0%");
        assert_eq!(percent(0.86981), "87.0%");
    }
}
