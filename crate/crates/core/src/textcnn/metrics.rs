use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use super::CnnModel;
use crate::corpus::Document;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-class precision / recall / F1 with micro and macro averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub micro: ClassMetrics,
    pub macro_avg: ClassMetrics,
}

impl ClassificationReport {
    pub fn macro_f1(&self) -> f64 {
        self.macro_avg.f1
    }

    pub fn accuracy(&self) -> f64 {
        self.micro.f1
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Undefined ratios (no support, no predictions) count as 0.
pub fn classification_report(gold: &[usize], predicted: &[usize], classes: &[String]) -> ClassificationReport {
    assert_eq!(gold.len(), predicted.len());
    let n = classes.len();
    let mut tp = vec![0usize; n];
    let mut gold_count = vec![0usize; n];
    let mut pred_count = vec![0usize; n];
    for (&g, &p) in gold.iter().zip(predicted) {
        gold_count[g] += 1;
        pred_count[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    let per_class: Vec<ClassMetrics> = (0..n)
        .map(|c| {
            if gold_count[c] == 0 {
                warn!("class {:?} absent from evaluation labels; its F1 is reported as 0", classes[c]);
            }
            let precision = ratio(tp[c], pred_count[c]);
            let recall = ratio(tp[c], gold_count[c]);
            ClassMetrics {
                precision,
                recall,
                f1: f1(precision, recall),
                support: gold_count[c],
            }
        })
        .collect();
    let total = gold.len();
    let acc = ratio(tp.iter().sum(), total);
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / n.max(1) as f64;
    ClassificationReport {
        classes: classes.to_vec(),
        micro: ClassMetrics {
            precision: acc,
            recall: acc,
            f1: acc,
            support: total,
        },
        macro_avg: ClassMetrics {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
            support: total,
        },
        per_class,
    }
}

pub fn predict_classes(model: &CnnModel, docs: &[&Document]) -> Vec<usize> {
    docs.iter().map(|d| model.forward(&d.tokens()).predicted_class).collect()
}

pub fn evaluate(model: &CnnModel, docs: &[&Document]) -> Result<ClassificationReport> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on an empty split".into()));
    }
    let gold: Vec<usize> = docs.iter().map(|d| d.label).collect();
    Ok(classification_report(&gold, &predict_classes(model, docs), &model.classes))
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .classes
            .iter()
            .map(|c| c.len())
            .chain([9])
            .max()
            .unwrap_or(9);
        writeln!(f, "{:<width$}  {:>7}  {:>7}  {:>7}  {:>8}", "", "Prec.", "Recall", "F1", "Support")?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, m: &ClassMetrics| {
            writeln!(
                f,
                "{:<width$}  {:>7.2}  {:>7.2}  {:>7.2}  {:>8}",
                name, m.precision, m.recall, m.f1, m.support
            )
        };
        for (name, m) in self.classes.iter().zip(&self.per_class) {
            row(f, name, m)?;
        }
        writeln!(f)?;
        row(f, "micro avg", &self.micro)?;
        row(f, "macro avg", &self.macro_avg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn perfect_predictions() {
        let gold = [0, 1, 2, 1, 0];
        let r = classification_report(&gold, &gold, &names(3));
        assert_eq!(r.macro_f1(), 1.0);
        assert!(r.per_class.iter().all(|m| m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0));
    }

    #[test]
    fn all_predicted_zero_on_balanced_binary() {
        // class 0: P = 1/2, R = 1, F1 = 2/3; class 1: F1 = 0
        let r = classification_report(&[0, 0, 1, 1], &[0, 0, 0, 0], &names(2));
        assert!((r.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.per_class[1].f1, 0.0);
        assert!((r.macro_f1() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.accuracy(), 0.5);
    }

    #[test]
    fn absent_class_scores_zero() {
        let r = classification_report(&[0, 0], &[0, 0], &names(2));
        assert_eq!(r.per_class[1].f1, 0.0);
        assert_eq!(r.macro_f1(), 0.5);
    }

    #[test]
    fn table_layout() {
        let r = classification_report(&[0, 1, 1, 0], &[0, 1, 0, 0], &["Negative".into(), "Positive".into()]);
        let s = r.to_string();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].contains("Prec.") && lines[0].contains("Support"));
        assert!(lines[1].starts_with("Negative"));
        assert!(lines[2].starts_with("Positive"));
        assert!(lines[4].starts_with("micro avg"));
        assert!(lines[5].starts_with("macro avg"));
        assert!(lines[5].trim_end().ends_with('4'));
    }
}
