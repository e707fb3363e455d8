use serde::{Deserialize, Serialize};

use super::{ScoreRecord, Task};
use crate::{Error, Result};

/// How answers map to agreement categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryScheme {
    /// Each distinct score is a category (5 for tasks 1-2, 4 for task 3).
    WithConfidence,
    /// Incorrect / no preference / correct (no-preference absent on task 3).
    WithoutConfidence,
}

impl CategoryScheme {
    pub fn categories(self, task: Task) -> usize {
        match (self, task.allows_no_preference()) {
            (CategoryScheme::WithConfidence, true) => 5,
            (CategoryScheme::WithConfidence, false) => 4,
            (CategoryScheme::WithoutConfidence, true) => 3,
            (CategoryScheme::WithoutConfidence, false) => 2,
        }
    }

    pub fn category(self, task: Task, score: f64) -> Result<usize> {
        let ladder: &[f64] = match (self, task.allows_no_preference()) {
            (CategoryScheme::WithConfidence, true) => &[-1.0, -0.5, 0.0, 0.5, 1.0],
            (CategoryScheme::WithConfidence, false) => &[-1.0, -0.5, 0.5, 1.0],
            (CategoryScheme::WithoutConfidence, true) => {
                return Ok(if score < 0.0 { 0 } else if score == 0.0 { 1 } else { 2 });
            }
            (CategoryScheme::WithoutConfidence, false) if score != 0.0 => {
                return Ok(usize::from(score > 0.0));
            }
            _ => &[],
        };
        ladder
            .iter()
            .position(|&v| v == score)
            .ok_or_else(|| Error::InvalidInput(format!("score {score} is not legal on task {}", task as u8)))
    }
}

/// Fleiss' kappa over `counts[item][category]`. Every item must have the
/// same number of ratings; `None` below two raters or without items.
pub fn fleiss_kappa(counts: &[Vec<usize>]) -> Result<Option<f64>> {
    let Some(first) = counts.first() else { return Ok(None) };
    let n: usize = first.iter().sum();
    if counts.iter().any(|row| row.iter().sum::<usize>() != n) {
        return Err(Error::InvalidInput("Fleiss' kappa needs the same rater count per item".into()));
    }
    if n < 2 {
        return Ok(None);
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let k = first.len();
    let mut p_j = vec![0.0; k];
    let mut p_bar = 0.0;
    for row in counts {
        let sq: usize = row.iter().map(|&c| c * c).sum();
        p_bar += (sq - n) as f64 / (nf * (nf - 1.0));
        for (j, &c) in row.iter().enumerate() {
            p_j[j] += c as f64;
        }
    }
    p_bar /= items;
    let p_e: f64 = p_j.iter().map(|&s| (s / (items * nf)).powi(2)).sum();
    if p_e == 1.0 {
        return Ok(Some(1.0));
    }
    Ok(Some((p_bar - p_e) / (1.0 - p_e)))
}

/// Kappa of one task's scored answers under `scheme`.
pub fn kappa_for_records(records: &[ScoreRecord], task: Task, scheme: CategoryScheme) -> Result<Option<f64>> {
    let k = scheme.categories(task);
    let table = records
        .iter()
        .map(|r| {
            let mut row = vec![0; k];
            for &s in &r.scores {
                row[scheme.category(task, s)?] += 1;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    fleiss_kappa(&table)
}
