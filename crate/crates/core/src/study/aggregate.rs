use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{ScoreRecord, Stratum, TaskQuestion};
use crate::attribution::MethodId;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Two-sided Welch t-test p-value. `None` when either sample has fewer than
/// two values.
pub fn welch_p_value(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Some(if ma == mb { 1.0 } else { 0.0 });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mean: Option<f64>,
    pub n: usize,
    /// The highest mean in this column.
    pub best: bool,
    /// Significantly below the column best at [`SIGNIFICANCE_LEVEL`].
    pub below_best: bool,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: MethodId,
    pub all: Cell,
    pub correct: Cell,
    pub misclassified: Cell,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AggregateTable {
    pub rows: Vec<AggregateRow>,
    pub kappa: Option<f64>,
}

fn mean(x: &[f64]) -> Option<f64> {
    (!x.is_empty()).then(|| x.iter().sum::<f64>() / x.len() as f64)
}

/// Mean of per-question means per method, overall and by stratum, with each
/// cell tested against its column's best.
pub fn aggregate(records: &[ScoreRecord], questions: &[TaskQuestion]) -> AggregateTable {
    let by_id: HashMap<&str, &TaskQuestion> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut methods: Vec<MethodId> = Vec::new();
    for q in questions {
        if !methods.contains(&q.method) {
            methods.push(q.method);
        }
    }
    // samples[method][column]
    let mut samples: Vec<[Vec<f64>; 3]> = vec![Default::default(); methods.len()];
    for r in records {
        let Some(q) = by_id.get(r.question_id.as_str()) else { continue };
        let mi = methods.iter().position(|&m| m == q.method).expect("method listed");
        samples[mi][0].push(r.mean);
        let col = if q.stratum == Stratum::Correct { 1 } else { 2 };
        samples[mi][col].push(r.mean);
    }
    let mut cells: Vec<[Cell; 3]> = samples
        .iter()
        .map(|cols| {
            std::array::from_fn(|c| Cell {
                mean: mean(&cols[c]),
                n: cols[c].len(),
                best: false,
                below_best: false,
                p_value: None,
            })
        })
        .collect();
    for c in 0..3 {
        let best = (0..methods.len())
            .filter(|&m| cells[m][c].mean.is_some())
            .fold(None, |acc: Option<usize>, m| match acc {
                Some(b) if cells[b][c].mean >= cells[m][c].mean => Some(b),
                _ => Some(m),
            });
        let Some(b) = best else { continue };
        for m in 0..methods.len() {
            if cells[m][c].mean == cells[b][c].mean {
                cells[m][c].best = true;
            }
            if m != b {
                let p = welch_p_value(&samples[m][c], &samples[b][c]);
                cells[m][c].p_value = p;
                cells[m][c].below_best = p.is_some_and(|p| p < SIGNIFICANCE_LEVEL);
            }
        }
    }
    AggregateTable {
        rows: methods
            .into_iter()
            .zip(cells)
            .map(|(method, [all, correct, misclassified])| AggregateRow {
                method,
                all,
                correct,
                misclassified,
            })
            .collect(),
        kappa: None,
    }
}

impl fmt::Display for AggregateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .rows
            .iter()
            .map(|r| r.method.display_name().len())
            .chain([6])
            .max()
            .unwrap_or(6);
        let cell = |c: &Cell| match c.mean {
            None => "-".to_string(),
            Some(m) => format!("{:.3}{}", if m.abs() < 5e-4 { 0.0 } else { m }, if c.below_best { "*" } else if c.best { "^" } else { " " }),
        };
        writeln!(f, "{:<w$}  {:>8}  {:>8}  {:>13}", "Method", "All", "Correct", "Misclassified")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<w$}  {:>8}  {:>8}  {:>13}",
                r.method.display_name(),
                cell(&r.all),
                cell(&r.correct),
                cell(&r.misclassified)
            )?;
        }
        writeln!(f, "^ column best; * below best, two-sided Welch t-test at {SIGNIFICANCE_LEVEL}")?;
        match self.kappa {
            Some(k) => writeln!(f, "Fleiss' kappa: {k:.3}"),
            None => writeln!(f, "Fleiss' kappa: N/A"),
        }
    }
}
