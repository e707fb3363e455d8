use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SelectedInput, Stratum, StudyConfig};
use crate::attribution::{Explainer, Explanation, MethodId};
use crate::corpus::TokenSequence;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Task {
    One = 1,
    Two = 2,
    Three = 3,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::One, Task::Two, Task::Three];

    pub fn allows_no_preference(self) -> bool {
        self != Task::Three
    }
}

impl From<Task> for u8 {
    fn from(t: Task) -> u8 {
        t as u8
    }
}

impl TryFrom<u8> for Task {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Task::One),
            2 => Ok(Task::Two),
            3 => Ok(Task::Three),
            _ => Err(Error::InvalidInput(format!("unknown task {n}"))),
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<u8>()
            .map_err(|_| Error::InvalidInput(format!("unknown task {s:?}")))?
            .try_into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelSide {
    A,
    B,
}

/// What a rater picks. Also used as the hidden answer key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Model(ModelSide),
    Class(usize),
    NoPreference,
}

/// Evidence fragment located in the question text by character offsets
/// (`end` exclusive, counted in Unicode scalar values).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// Full text, the shared prediction and each model's top-m evidence.
    Task1 {
        text: String,
        predicted_class: usize,
        model_a: Vec<Highlight>,
        model_b: Vec<Highlight>,
    },
    /// Evidence fragment texts only.
    Task2 { evidence: Vec<String> },
    /// Prediction, probabilities and both fragment lists; no text.
    Task3 {
        predicted_class: usize,
        probabilities: Vec<f64>,
        evidence: Vec<String>,
        counter_evidence: Vec<String>,
    },
}

impl Payload {
    pub fn task(&self) -> Task {
        match self {
            Payload::Task1 { .. } => Task::One,
            Payload::Task2 { .. } => Task::Two,
            Payload::Task3 { .. } => Task::Three,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskQuestion {
    pub id: String,
    pub task: Task,
    pub doc_id: String,
    pub method: MethodId,
    pub stratum: Stratum,
    pub classes: Vec<String>,
    pub payload: Payload,
    pub hidden_key: Choice,
    /// Set when the method produced no fragment for a list shown.
    pub empty_explanation: bool,
}

/// Rater-facing view: no key, method, document id or stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicQuestion {
    pub id: String,
    pub task: Task,
    pub classes: Vec<String>,
    pub allows_no_preference: bool,
    pub payload: Payload,
}

impl TaskQuestion {
    pub fn public_view(&self) -> PublicQuestion {
        PublicQuestion {
            id: self.id.clone(),
            task: self.task,
            classes: self.classes.clone(),
            allows_no_preference: self.task.allows_no_preference(),
            payload: self.payload.clone(),
        }
    }
}

/// Classifiers available to question generation. Task 1 needs both.
pub struct TaskModels<'a> {
    pub well_trained: &'a Explainer<'a>,
    pub comparison: Option<&'a Explainer<'a>>,
}

fn highlights(text: &str, tokens: &TokenSequence, e: &Explanation) -> Vec<Highlight> {
    e.evidence
        .iter()
        .filter_map(|f| {
            let (b0, b1) = tokens.char_range(f.start, f.count)?;
            Some(Highlight {
                start: text[..b0].chars().count(),
                end: text[..b1].chars().count(),
                text: text[b0..b1].to_string(),
            })
        })
        .collect()
}

/// One question per (input, method), inputs outer, methods inner.
pub fn generate_questions(
    task: Task,
    inputs: &[SelectedInput<'_>],
    models: &TaskModels<'_>,
    config: &StudyConfig,
) -> Result<Vec<TaskQuestion>> {
    let main = models.well_trained;
    let classes = main.model.classes.clone();
    let mut swap_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5EED_AB ^ task as u64);
    let mut out = Vec::with_capacity(inputs.len() * config.methods.len());
    for (i, input) in inputs.iter().enumerate() {
        let doc = input.doc;
        let tokens = doc.tokens();
        let prediction = main.model.forward(&tokens);
        let salt = i as u64 + 1;
        for &method in &config.methods {
            let e = main.explain_prediction(method, &tokens, &prediction, salt)?;
            let id = format!("t{}-{:03}-{}", task as u8, i, method.key());
            let (payload, hidden_key, empty) = match task {
                Task::One => {
                    let other = models.comparison.ok_or_else(|| {
                        Error::InvalidInput("task 1 needs a comparison model".into())
                    })?;
                    let e_bad = other.explain(method, &tokens, salt)?;
                    let good = highlights(&doc.text, &tokens, &e);
                    let bad = highlights(&doc.text, &tokens, &e_bad);
                    let empty = good.is_empty() || bad.is_empty();
                    let swap: bool = swap_rng.random();
                    let (model_a, model_b, key) = if swap {
                        (bad, good, ModelSide::B)
                    } else {
                        (good, bad, ModelSide::A)
                    };
                    let payload = Payload::Task1 {
                        text: doc.text.clone(),
                        predicted_class: input.predicted_class,
                        model_a,
                        model_b,
                    };
                    (payload, Choice::Model(key), empty)
                }
                Task::Two => {
                    let evidence = e.evidence_texts(&tokens);
                    let empty = evidence.is_empty();
                    (Payload::Task2 { evidence }, Choice::Class(prediction.predicted_class), empty)
                }
                Task::Three => {
                    let evidence = e.evidence_texts(&tokens);
                    let counter_evidence = e.counter_texts(&tokens);
                    let empty = evidence.is_empty() || counter_evidence.is_empty();
                    let payload = Payload::Task3 {
                        predicted_class: prediction.predicted_class,
                        probabilities: prediction.probs.clone(),
                        evidence,
                        counter_evidence,
                    };
                    (payload, Choice::Class(doc.label), empty)
                }
            };
            out.push(TaskQuestion {
                id,
                task,
                doc_id: doc.id.clone(),
                method,
                stratum: input.stratum,
                classes: classes.clone(),
                payload,
                hidden_key,
                empty_explanation: empty,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_field_sets() {
        let fields = |p: &Payload| -> Vec<String> {
            let v = serde_json::to_value(p).unwrap();
            let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
            k.sort();
            k
        };
        let p1 = Payload::Task1 {
            text: "t".into(),
            predicted_class: 0,
            model_a: vec![],
            model_b: vec![],
        };
        assert_eq!(fields(&p1), ["kind", "model_a", "model_b", "predicted_class", "text"]);
        assert_eq!(fields(&Payload::Task2 { evidence: vec![] }), ["evidence", "kind"]);
        let p3 = Payload::Task3 {
            predicted_class: 1,
            probabilities: vec![0.5, 0.5],
            evidence: vec![],
            counter_evidence: vec![],
        };
        assert_eq!(fields(&p3), ["counter_evidence", "evidence", "kind", "predicted_class", "probabilities"]);
    }

    #[test]
    fn task_and_choice_encoding() {
        assert_eq!(serde_json::to_string(&Task::Two).unwrap(), "2");
        assert!(serde_json::from_str::<Task>("4").is_err());
        assert_eq!(serde_json::to_string(&Choice::Model(ModelSide::B)).unwrap(), r#"{"model":"B"}"#);
        assert_eq!(serde_json::to_string(&Choice::Class(2)).unwrap(), r#"{"class":2}"#);
        assert_eq!(serde_json::to_string(&Choice::NoPreference).unwrap(), r#""no_preference""#);
    }

    #[test]
    fn highlight_offsets_count_chars() {
        let text = "café très bon";
        let toks = crate::corpus::tokenize(text);
        let e = Explanation {
            method: MethodId::LrpWords,
            target_class: 0,
            evidence: vec![crate::attribution::Fragment {
                start: 1,
                count: 2,
                kind: crate::attribution::FragmentKind::Ngram,
                score: 1.0,
            }],
            counter_evidence: vec![],
            m: 3,
        };
        let h = highlights(text, &toks, &e);
        assert_eq!(h, [Highlight { start: 5, end: 13, text: "très bon".into() }]);
    }
}
