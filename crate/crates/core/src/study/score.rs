use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Choice, Task, TaskQuestion};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub question_id: String,
    pub rater_id: String,
    pub choice: Choice,
    pub confident: bool,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Checks that `choice` is a legal answer to `q`.
pub fn check_choice(q: &TaskQuestion, choice: Choice) -> Result<()> {
    match (q.task, choice) {
        (Task::Three, Choice::NoPreference) => Err(Error::Rejected(
            "task 3 has no no-preference option".into(),
        )),
        (_, Choice::NoPreference) => Ok(()),
        (Task::One, Choice::Model(_)) => Ok(()),
        (Task::Two | Task::Three, Choice::Class(c)) if c < q.classes.len() => Ok(()),
        (Task::Two | Task::Three, Choice::Class(c)) => {
            Err(Error::Rejected(format!("class {c} out of range")))
        }
        (t, c) => Err(Error::Rejected(format!("{c:?} is not an answer to task {}", t as u8))),
    }
}

/// ±1 when confident, ±0.5 when not, 0 for no preference.
pub fn score_answer(q: &TaskQuestion, a: &Answer) -> Result<f64> {
    check_choice(q, a.choice)?;
    if a.choice == Choice::NoPreference {
        return Ok(0.0);
    }
    let magnitude = if a.confident { 1.0 } else { 0.5 };
    Ok(if a.choice == q.hidden_key { magnitude } else { -magnitude })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub question_id: String,
    /// One per answer, in log order.
    pub scores: Vec<f64>,
    pub mean: f64,
}

/// Scores every answer and groups them per question (bank order). Questions
/// without answers are omitted.
pub fn score_answers(questions: &[TaskQuestion], answers: &[Answer]) -> Result<Vec<ScoreRecord>> {
    let index: HashMap<&str, usize> = questions.iter().enumerate().map(|(i, q)| (q.id.as_str(), i)).collect();
    let mut per_question: Vec<Vec<f64>> = vec![Vec::new(); questions.len()];
    for a in answers {
        let &i = index
            .get(a.question_id.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("answer to unknown question {:?}", a.question_id)))?;
        per_question[i].push(score_answer(&questions[i], a)?);
    }
    Ok(questions
        .iter()
        .zip(per_question)
        .filter(|(_, s)| !s.is_empty())
        .map(|(q, scores)| ScoreRecord {
            question_id: q.id.clone(),
            mean: scores.iter().sum::<f64>() / scores.len() as f64,
            scores,
        })
        .collect())
}
