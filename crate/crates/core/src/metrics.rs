//! Per-class effectiveness metrics computed from one-vs-rest confusion counts.
//!
//! Any ratio whose denominator is zero evaluates to 0, so a degenerate flow
//! gets no weight in fusion. Only the total (Accuracy's denominator) is
//! guarded with an error.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-vs-rest confusion counts for one (flow, class) pair. Fields may be raw
/// counts or proportions; every metric here is invariant to the scale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: f64,
    pub tn: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl ConfusionCounts {
    pub fn new(tp: f64, tn: f64, fp: f64, fn_: f64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> f64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ConfusionCounts::new(self.tp * factor, self.tn * factor, self.fp * factor, self.fn_ * factor)
    }

    /// Rejects negative or non-finite fields and an all-zero total.
    pub fn check(&self) -> Result<()> {
        let fields = [self.tp, self.tn, self.fp, self.fn_];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!("confusion counts must be finite and >= 0: {self:?}")));
        }
        if self.total() <= 0.0 {
            return Err(Error::EmptyConfusion);
        }
        Ok(())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    Accuracy,
    Precision,
    Recall,
    Specificity,
    F1,
    CohensKappa,
    Mcc,
    BalancedAccuracy,
    Auc,
    /// Precision times Recall.
    Pr,
    /// Precision times Specificity.
    Ps,
    /// Specificity times Recall.
    Sr,
    /// Precision, Recall and Specificity multiplied.
    Prs,
    /// Precision, Accuracy, Recall and Specificity multiplied.
    Epars,
}

impl MetricId {
    pub const ALL: [MetricId; 14] = [
        MetricId::Epars,
        MetricId::Prs,
        MetricId::Pr,
        MetricId::Ps,
        MetricId::Precision,
        MetricId::CohensKappa,
        MetricId::Mcc,
        MetricId::F1,
        MetricId::Sr,
        MetricId::Specificity,
        MetricId::Accuracy,
        MetricId::Auc,
        MetricId::BalancedAccuracy,
        MetricId::Recall,
    ];

    pub fn key(self) -> &'static str {
        match self {
            MetricId::Accuracy => "accuracy",
            MetricId::Precision => "precision",
            MetricId::Recall => "recall",
            MetricId::Specificity => "specificity",
            MetricId::F1 => "f1",
            MetricId::CohensKappa => "cohens_kappa",
            MetricId::Mcc => "mcc",
            MetricId::BalancedAccuracy => "balanced_accuracy",
            MetricId::Auc => "auc",
            MetricId::Pr => "pr",
            MetricId::Ps => "ps",
            MetricId::Sr => "sr",
            MetricId::Prs => "prs",
            MetricId::Epars => "epars",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricId::Accuracy => "Accuracy (ACC)",
            MetricId::Precision => "Precision (P)",
            MetricId::Recall => "Recall (R)",
            MetricId::Specificity => "Specificity (S)",
            MetricId::F1 => "F1-Score",
            MetricId::CohensKappa => "Cohen's Kappa",
            MetricId::Mcc => "MCC",
            MetricId::BalancedAccuracy => "Balanced Accuracy",
            MetricId::Auc => "AUC",
            MetricId::Pr => "P * R",
            MetricId::Ps => "P * S",
            MetricId::Sr => "S * R",
            MetricId::Prs => "P * R * S",
            MetricId::Epars => "E_PARS",
        }
    }

    /// Kappa and MCC are correlations and can go negative.
    pub fn can_be_negative(self) -> bool {
        matches!(self, MetricId::CohensKappa | MetricId::Mcc)
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        MetricId::ALL
            .into_iter()
            .find(|m| m.key() == norm)
            .or(match norm.as_str() {
                "kappa" => Some(MetricId::CohensKappa),
                "e_pars" => Some(MetricId::Epars),
                "prs" | "p_r_s" => Some(MetricId::Prs),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    ratio(c.tp + c.tn, c.total())
}

pub fn precision(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fp)
}

pub fn recall(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fn_)
}

pub fn specificity(c: &ConfusionCounts) -> f64 {
    ratio(c.tn, c.tn + c.fp)
}

pub fn f1(c: &ConfusionCounts) -> f64 {
    let (p, r) = (precision(c), recall(c));
    ratio(2.0 * p * r, p + r)
}

pub fn cohens_kappa(c: &ConfusionCounts) -> f64 {
    let n = c.total();
    let observed = ratio(c.tp + c.tn, n);
    let expected = ratio((c.tp + c.fp) * (c.tp + c.fn_) + (c.fn_ + c.tn) * (c.fp + c.tn), n * n);
    ratio(observed - expected, 1.0 - expected)
}

pub fn mcc(c: &ConfusionCounts) -> f64 {
    let den = ((c.tp + c.fp) * (c.tp + c.fn_) * (c.tn + c.fp) * (c.tn + c.fn_)).sqrt();
    ratio(c.tp * c.tn - c.fp * c.fn_, den)
}

/// Effectiveness of one flow on one class under `id`.
///
/// `Auc` computed from counts alone uses the vote indicator as the score,
/// which reduces to balanced accuracy; score-based AUC needs [`auc`].
pub fn metric(id: MetricId, c: &ConfusionCounts) -> Result<f64> {
    c.check()?;
    let (p, a, r, s) = (precision(c), accuracy(c), recall(c), specificity(c));
    Ok(match id {
        MetricId::Accuracy => a,
        MetricId::Precision => p,
        MetricId::Recall => r,
        MetricId::Specificity => s,
        MetricId::F1 => f1(c),
        MetricId::CohensKappa => cohens_kappa(c),
        MetricId::Mcc => mcc(c),
        MetricId::BalancedAccuracy | MetricId::Auc => (r + s) / 2.0,
        MetricId::Pr => p * r,
        MetricId::Ps => p * s,
        MetricId::Sr => s * r,
        MetricId::Prs => p * r * s,
        MetricId::Epars => p * a * r * s,
    })
}

/// `E_PARS = P * ACC * R * S`.
pub fn epars(c: &ConfusionCounts) -> Result<f64> {
    metric(MetricId::Epars, c)
}

/// `E_PARS` through its closed form in raw counts,
/// `(TN*TP^3 + TN^2*TP^2) / ((TN+FP)(TP+FP)(TP+FN)(TP+TN+FP+FN))`.
/// `None` when a factor of the denominator is zero.
pub fn epars_expanded(c: &ConfusionCounts) -> Option<f64> {
    let den = (c.tn + c.fp) * (c.tp + c.fp) * (c.tp + c.fn_) * c.total();
    if den == 0.0 {
        return None;
    }
    let num = c.tn * c.tp.powi(3) + c.tn.powi(2) * c.tp.powi(2);
    Some(num / den)
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability
/// that a random positive scores above a random negative, ties counting one
/// half.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64> {
    let positives = scores.iter().filter(|s| s.1).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateClasses);
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sum of (1-based, tie-averaged) ranks of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        let tied_pos = sorted[i..=j].iter().filter(|s| s.1).count();
        rank_sum += mean_rank * tied_pos as f64;
        i = j + 1;
    }
    let (np, nn) = (positives as f64, negatives as f64);
    let u = rank_sum - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn accuracy_of_degenerate_class() {
        let c = ConfusionCounts::new(0.0, 90.1, 0.0, 9.87);
        assert!(close(metric(MetricId::Accuracy, &c).unwrap(), 0.901, 0.001));
        assert_eq!(metric(MetricId::Recall, &c).unwrap(), 0.0);
        assert_eq!(metric(MetricId::Precision, &c).unwrap(), 0.0);
        assert_eq!(metric(MetricId::Epars, &c).unwrap(), 0.0);
    }

    #[test]
    fn recall_from_proportions() {
        let c = ConfusionCounts::new(2.12, 82.1, 15.8, 0.0);
        // FN prints as 0.0 after rounding, so the exact recall is 1
        assert_eq!(metric(MetricId::Recall, &c).unwrap(), 1.0);
    }

    #[test]
    fn perfect_classifier() {
        let c = ConfusionCounts::new(50.0, 50.0, 0.0, 0.0);
        for id in MetricId::ALL {
            assert!(close(metric(id, &c).unwrap(), 1.0, 1e-12), "{id}");
        }
    }

    #[test]
    fn chance_level_mcc_and_kappa() {
        let c = ConfusionCounts::new(25.0, 25.0, 25.0, 25.0);
        assert_eq!(metric(MetricId::Mcc, &c).unwrap(), 0.0);
        assert_eq!(metric(MetricId::CohensKappa, &c).unwrap(), 0.0);
    }

    #[test]
    fn inverted_classifier_is_negative() {
        let c = ConfusionCounts::new(0.0, 0.0, 50.0, 50.0);
        assert!(close(metric(MetricId::Mcc, &c).unwrap(), -1.0, 1e-12));
        assert!(close(metric(MetricId::CohensKappa, &c).unwrap(), -1.0, 1e-12));
    }

    #[test]
    fn kappa_known_value() {
        // po = 0.7, pe = (0.5*0.6 + 0.5*0.4) = 0.5, kappa = 0.4
        let c = ConfusionCounts::new(40.0, 30.0, 10.0, 20.0);
        assert!(close(cohens_kappa(&c), 0.4, 1e-12));
    }

    #[test]
    fn epars_table_rows() {
        let unexplainable = ConfusionCounts::new(1.97, 97.7, 0.19, 0.16);
        assert!(close(epars(&unexplainable).unwrap(), 0.839, 0.002));
        let holes = ConfusionCounts::new(2.13, 34.0, 63.8, 0.0);
        assert!(close(epars(&holes).unwrap(), 0.0040, 0.0002));
        let dead = ConfusionCounts::new(0.0, 123.0, 0.0, 7.0);
        assert_eq!(epars(&dead).unwrap(), 0.0);
        assert_eq!(epars_expanded(&dead), None);
    }

    #[test]
    fn empty_confusion() {
        let c = ConfusionCounts::default();
        assert!(matches!(metric(MetricId::Accuracy, &c), Err(Error::EmptyConfusion)));
        assert!(matches!(epars(&c), Err(Error::EmptyConfusion)));
    }

    #[test]
    fn negative_counts_rejected() {
        let c = ConfusionCounts::new(-1.0, 2.0, 0.0, 0.0);
        assert!(metric(MetricId::Recall, &c).is_err());
    }

    #[test]
    fn auc_simple_cases() {
        let separated = [(0.9, true), (0.8, true), (0.3, false), (0.1, false)];
        assert_eq!(auc(&separated).unwrap(), 1.0);
        let ties = [(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        assert_eq!(auc(&ties).unwrap(), 0.5);
        assert!(matches!(auc(&[(0.1, true)]), Err(Error::DegenerateClasses)));
        assert!(matches!(auc(&[(0.1, false)]), Err(Error::DegenerateClasses)));
    }

    #[test]
    fn metric_ids_round_trip_as_strings() {
        for id in MetricId::ALL {
            assert_eq!(id.key().parse::<MetricId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.key()));
        }
        assert_eq!(MetricId::ALL.len(), 14);
        assert!("bogus".parse::<MetricId>().is_err());
    }
}
