use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{StudyConfig, Task};
use crate::corpus::Document;
use crate::textcnn::CnnModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Correct,
    Misclassified,
}

/// A document chosen for a task with the class it was (jointly) predicted as.
#[derive(Debug, Clone, Copy)]
pub struct SelectedInput<'a> {
    pub doc: &'a Document,
    pub predicted_class: usize,
    pub probabilities_max: f64,
    pub stratum: Stratum,
}

pub fn max_probability(p: &[f64]) -> f64 {
    p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_high_confidence(p: &[f64], tau_h: f64) -> bool {
    max_probability(p) > tau_h
}

pub fn is_low_confidence(p: &[f64], tau_l: f64) -> bool {
    max_probability(p) < tau_l
}

fn stratum_of(doc: &Document, predicted: usize) -> Stratum {
    if doc.label == predicted {
        Stratum::Correct
    } else {
        Stratum::Misclassified
    }
}

/// Half correct, half misclassified, sampled uniformly within each stratum.
/// The result lists the correct stratum first, each in sampled order.
pub fn stratified_sample<'a>(
    eligible: Vec<SelectedInput<'a>>,
    n: usize,
    seed: u64,
    what: &str,
) -> Result<Vec<SelectedInput<'a>>> {
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut good, mut bad): (Vec<_>, Vec<_>) = eligible.into_iter().partition(|s| s.stratum == Stratum::Correct);
    if good.len() < half || bad.len() < n - half {
        return Err(Error::Insufficient(format!(
            "{what}: need {half} correct and {} misclassified eligible documents, found {} and {}",
            n - half,
            good.len(),
            bad.len()
        )));
    }
    good.shuffle(&mut rng);
    bad.shuffle(&mut rng);
    good.truncate(half);
    bad.truncate(n - half);
    good.extend(bad);
    Ok(good)
}

fn task_seed(config: &StudyConfig, task: Task) -> u64 {
    config.seed ^ (task as u64).wrapping_mul(0xA076_1D64_78BD_642F)
}

/// Documents both models assign to the same class.
pub fn select_task1_inputs<'a>(
    well_trained: &CnnModel,
    comparison: &CnnModel,
    docs: &[&'a Document],
    config: &StudyConfig,
) -> Result<Vec<SelectedInput<'a>>> {
    let eligible = docs
        .iter()
        .filter_map(|d| {
            let toks = d.tokens();
            let a = well_trained.forward(&toks);
            let b = comparison.forward(&toks);
            (a.predicted_class == b.predicted_class).then(|| SelectedInput {
                doc: d,
                predicted_class: a.predicted_class,
                probabilities_max: a.confidence(),
                stratum: stratum_of(d, a.predicted_class),
            })
        })
        .collect();
    stratified_sample(eligible, config.questions_per_task, task_seed(config, Task::One), "task 1")
}

fn select_by_confidence<'a>(
    model: &CnnModel,
    docs: &[&'a Document],
    config: &StudyConfig,
    task: Task,
    keep: impl Fn(&[f64]) -> bool,
) -> Result<Vec<SelectedInput<'a>>> {
    let eligible = docs
        .iter()
        .filter_map(|d| {
            let p = model.forward(&d.tokens());
            keep(&p.probs).then(|| SelectedInput {
                doc: d,
                predicted_class: p.predicted_class,
                probabilities_max: p.confidence(),
                stratum: stratum_of(d, p.predicted_class),
            })
        })
        .collect();
    stratified_sample(eligible, config.questions_per_task, task_seed(config, task), &format!("task {}", task as u8))
}

/// Predictions with `max p > tau_h`.
pub fn select_task2_inputs<'a>(model: &CnnModel, docs: &[&'a Document], config: &StudyConfig) -> Result<Vec<SelectedInput<'a>>> {
    select_by_confidence(model, docs, config, Task::Two, |p| is_high_confidence(p, config.tau_h))
}

/// Predictions with `max p < tau_l`.
pub fn select_task3_inputs<'a>(model: &CnnModel, docs: &[&'a Document], config: &StudyConfig) -> Result<Vec<SelectedInput<'a>>> {
    select_by_confidence(model, docs, config, Task::Three, |p| is_low_confidence(p, config.tau_l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_strict() {
        assert!(is_high_confidence(&[0.95, 0.05], 0.9));
        assert!(!is_high_confidence(&[0.90, 0.10], 0.9));
        assert!(!is_high_confidence(&[0.5, 0.5], 0.9));
        assert!(is_low_confidence(&[0.48, 0.45, 0.07], 0.7));
        assert!(!is_low_confidence(&[0.70, 0.30], 0.7));
        assert!(is_low_confidence(&[0.514, 0.486], 0.7));
    }

    fn docs(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("d{i}"),
                text: String::new(),
                label: i % 2,
                subtopic: None,
            })
            .collect()
    }

    #[test]
    fn sample_is_balanced_and_seeded() {
        fn eligible(ds: &[Document]) -> Vec<SelectedInput<'_>> {
            ds.iter()
                .enumerate()
                .map(|(i, d)| {
                    let pred = if i % 3 == 0 { 1 - d.label } else { d.label };
                    SelectedInput {
                        doc: d,
                        predicted_class: pred,
                        probabilities_max: 0.5,
                        stratum: stratum_of(d, pred),
                    }
                })
                .collect()
        }
        let ds = docs(40);
        let a = stratified_sample(eligible(&ds), 10, 3, "t").unwrap();
        let b = stratified_sample(eligible(&ds), 10, 3, "t").unwrap();
        assert_eq!(a.iter().filter(|s| s.stratum == Stratum::Correct).count(), 5);
        let ids = |v: &[SelectedInput]| v.iter().map(|s| s.doc.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
        let err = stratified_sample(eligible(&ds), 40, 3, "t").unwrap_err().to_string();
        assert!(err.contains("misclassified"), "{err}");
    }
}
