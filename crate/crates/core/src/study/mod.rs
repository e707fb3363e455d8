//! The three rater tasks: input selection, question banks, scoring,
//! per-method aggregation and inter-rater agreement.

mod aggregate;
mod config;
mod kappa;
mod question;
mod score;
mod select;

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use aggregate::{aggregate, welch_p_value, AggregateRow, AggregateTable, Cell, SIGNIFICANCE_LEVEL};
pub use config::StudyConfig;
pub use kappa::{fleiss_kappa, kappa_for_records, CategoryScheme};
pub use question::{generate_questions, Choice, Highlight, ModelSide, Payload, PublicQuestion, Task, TaskModels, TaskQuestion};
pub use score::{check_choice, score_answer, score_answers, Answer, ScoreRecord};
pub use select::{
    is_high_confidence, is_low_confidence, max_probability, select_task1_inputs, select_task2_inputs,
    select_task3_inputs, stratified_sample, SelectedInput, Stratum,
};

use crate::{Error, Result};

/// Writes one JSON record per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Scores, aggregates and (with enough raters) computes kappa for one task.
pub fn study_report(
    questions: &[TaskQuestion],
    answers: &[Answer],
    scheme: CategoryScheme,
) -> Result<AggregateTable> {
    let records = score_answers(questions, answers)?;
    let mut table = aggregate(&records, questions);
    if let Some(task) = questions.first().map(|q| q.task) {
        table.kappa = kappa_for_records(&records, task, scheme).unwrap_or(None);
    }
    Ok(table)
}
