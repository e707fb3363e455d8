//! Assignment and answer collection for rater sessions, with an append-only
//! answer log and HTTP endpoints.

mod http;

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

pub use http::{router, serve, RATER_HEADER};

use crate::study::{
    check_choice, read_jsonl, study_report, AggregateTable, Answer, CategoryScheme, Choice, PublicQuestion, Task,
    TaskQuestion,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub raters_per_question: usize,
    /// Seconds before an unanswered assignment returns to the pool.
    pub assignment_ttl: u64,
    pub kappa_scheme: CategoryScheme,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            raters_per_question: 3,
            assignment_ttl: 30 * 60,
            kappa_scheme: CategoryScheme::WithConfidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentState {
    Issued,
    Answered,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub question_id: String,
    pub rater_id: String,
    pub issued_at: u64,
    pub state: AssignmentState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextQuestion {
    Question { question: PublicQuestion },
    Done,
}

/// Body of an answer submission; the rater comes from the session token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub question_id: String,
    pub choice: Choice,
    pub confident: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResults {
    pub task: Task,
    pub table: AggregateTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsExport {
    pub answers: Vec<Answer>,
    pub tasks: Vec<TaskResults>,
}

struct State {
    raters: HashSet<String>,
    answers: Vec<Answer>,
    /// Raters that answered, per question index.
    answered_by: Vec<HashSet<String>>,
    /// (question index, rater) → issued_at.
    open: HashMap<(usize, String), u64>,
    history: Vec<Assignment>,
    log: File,
    rater_log: File,
}

pub struct StudyService {
    questions: Arc<Vec<TaskQuestion>>,
    index: HashMap<String, usize>,
    config: ServiceConfig,
    log_path: PathBuf,
    state: Mutex<State>,
}

fn append_line(file: &mut File, path: &Path, line: &[u8]) -> Result<()> {
    file.write_all(line)
        .and_then(|_| file.write_all(b"\n"))
        .and_then(|_| file.sync_data())
        .map_err(|e| Error::io(path, e))
}

impl StudyService {
    /// Opens (or creates) the answer log and rater list in `dir` and
    /// replays them.
    pub fn open(questions: Vec<TaskQuestion>, config: ServiceConfig, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let log_path = dir.join("answers.jsonl");
        let rater_path = dir.join("raters.txt");
        let index: HashMap<String, usize> = questions.iter().enumerate().map(|(i, q)| (q.id.clone(), i)).collect();
        if index.len() != questions.len() {
            return Err(Error::InvalidInput("question ids must be unique".into()));
        }
        let mut raters: HashSet<String> = match fs::read_to_string(&rater_path) {
            Ok(s) => s.lines().filter(|l| !l.is_empty()).map(str::to_string).collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => HashSet::new(),
            Err(e) => return Err(Error::io(&rater_path, e)),
        };
        let answers: Vec<Answer> = if log_path.exists() { read_jsonl(&log_path)? } else { Vec::new() };
        let mut answered_by = vec![HashSet::new(); questions.len()];
        let mut history = Vec::new();
        for a in &answers {
            let &i = index
                .get(&a.question_id)
                .ok_or_else(|| Error::InvalidInput(format!("log refers to unknown question {:?}", a.question_id)))?;
            if !answered_by[i].insert(a.rater_id.clone()) {
                return Err(Error::InvalidInput(format!("log has a duplicate answer for {:?}", a.question_id)));
            }
            raters.insert(a.rater_id.clone());
            history.push(Assignment {
                question_id: a.question_id.clone(),
                rater_id: a.rater_id.clone(),
                issued_at: a.timestamp,
                state: AssignmentState::Answered,
            });
        }
        let open_append = |p: &Path| {
            OpenOptions::new().create(true).append(true).open(p).map_err(|e| Error::io(p, e))
        };
        let state = State {
            raters,
            answers,
            answered_by,
            open: HashMap::new(),
            history,
            log: open_append(&log_path)?,
            rater_log: open_append(&rater_path)?,
        };
        Ok(Self {
            questions: Arc::new(questions),
            index,
            config,
            log_path,
            state: Mutex::new(state),
        })
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn questions(&self) -> &[TaskQuestion] {
        &self.questions
    }

    pub fn config(&self) -> ServiceConfig {
        self.config
    }

    /// Issues a fresh opaque rater token.
    pub fn register_rater(&self) -> Result<String> {
        let token = uuid::Uuid::new_v4().to_string();
        let mut st = self.lock();
        let st = &mut *st;
        append_line(&mut st.rater_log, &self.log_path.with_file_name("raters.txt"), token.as_bytes())?;
        st.raters.insert(token.clone());
        Ok(token)
    }

    pub fn is_rater(&self, token: &str) -> bool {
        self.lock().raters.contains(token)
    }

    fn expire(&self, st: &mut State, now: u64) {
        let ttl = self.config.assignment_ttl;
        let stale: Vec<(usize, String)> = st
            .open
            .iter()
            .filter(|(_, &t)| now.saturating_sub(t) > ttl)
            .map(|(k, _)| k.clone())
            .collect();
        for key in stale {
            let issued_at = st.open.remove(&key).unwrap_or_default();
            st.history.push(Assignment {
                question_id: self.questions[key.0].id.clone(),
                rater_id: key.1,
                issued_at,
                state: AssignmentState::Expired,
            });
        }
    }

    /// Prefers the question with the fewest answered plus open assignments;
    /// a rater's own open assignment is handed back first.
    pub fn next_question(&self, rater: &str, task: Option<Task>, now: u64) -> Result<NextQuestion> {
        let mut st = self.lock();
        if !st.raters.contains(rater) {
            return Err(Error::InvalidInput("unknown rater token".into()));
        }
        self.expire(&mut st, now);
        let wanted = |q: &TaskQuestion| task.is_none_or(|t| q.task == t);
        let held = st
            .open
            .keys()
            .filter(|(i, r)| r == rater && wanted(&self.questions[*i]))
            .map(|(i, _)| *i)
            .min();
        if let Some(i) = held {
            return Ok(NextQuestion::Question {
                question: self.questions[i].public_view(),
            });
        }
        let mut open_count = vec![0usize; self.questions.len()];
        for (i, _) in st.open.keys() {
            open_count[*i] += 1;
        }
        let pick = self
            .questions
            .iter()
            .enumerate()
            .filter(|(i, q)| wanted(q) && !st.answered_by[*i].contains(rater))
            .map(|(i, _)| (st.answered_by[i].len() + open_count[i], i))
            .filter(|&(load, _)| load < self.config.raters_per_question)
            .min();
        let Some((_, i)) = pick else { return Ok(NextQuestion::Done) };
        st.open.insert((i, rater.to_string()), now);
        Ok(NextQuestion::Question {
            question: self.questions[i].public_view(),
        })
    }

    /// Validates against the open assignment, appends durably, then acknowledges.
    pub fn submit(&self, rater: &str, sub: Submission, now: u64) -> Result<Answer> {
        let mut st = self.lock();
        let st = &mut *st;
        if !st.raters.contains(rater) {
            return Err(Error::InvalidInput("unknown rater token".into()));
        }
        let &i = self
            .index
            .get(&sub.question_id)
            .ok_or_else(|| Error::Rejected(format!("unknown question {:?}", sub.question_id)))?;
        if st.answered_by[i].contains(rater) {
            return Err(Error::Rejected("this question was already answered by this rater".into()));
        }
        let key = (i, rater.to_string());
        let issued_at = *st
            .open
            .get(&key)
            .ok_or_else(|| Error::Rejected("no open assignment for this question".into()))?;
        if now.saturating_sub(issued_at) > self.config.assignment_ttl {
            self.expire(st, now);
            return Err(Error::Rejected("assignment expired".into()));
        }
        check_choice(&self.questions[i], sub.choice)?;
        if st.answered_by[i].len() >= self.config.raters_per_question {
            st.open.remove(&key);
            return Err(Error::Rejected("question already has enough answers".into()));
        }
        let answer = Answer {
            question_id: sub.question_id,
            rater_id: rater.to_string(),
            choice: sub.choice,
            confident: sub.confident && sub.choice != Choice::NoPreference,
            timestamp: now,
        };
        append_line(&mut st.log, &self.log_path, &serde_json::to_vec(&answer)?)?;
        st.open.remove(&key);
        st.answered_by[i].insert(rater.to_string());
        st.answers.push(answer.clone());
        st.history.push(Assignment {
            question_id: answer.question_id.clone(),
            rater_id: answer.rater_id.clone(),
            issued_at,
            state: AssignmentState::Answered,
        });
        Ok(answer)
    }

    pub fn answers(&self) -> Vec<Answer> {
        self.lock().answers.clone()
    }

    /// Open assignments followed by past ones.
    pub fn assignments(&self) -> Vec<Assignment> {
        let st = self.lock();
        let mut out: Vec<Assignment> = st
            .open
            .iter()
            .map(|((i, r), &t)| Assignment {
                question_id: self.questions[*i].id.clone(),
                rater_id: r.clone(),
                issued_at: t,
                state: AssignmentState::Issued,
            })
            .collect();
        out.sort_by(|a, b| (&a.question_id, &a.rater_id).cmp(&(&b.question_id, &b.rater_id)));
        out.extend(st.history.iter().cloned());
        out
    }

    pub fn answer_count(&self, question_id: &str) -> usize {
        self.index
            .get(question_id)
            .map_or(0, |&i| self.lock().answered_by[i].len())
    }

    /// Answer log plus per-task aggregates computed by the offline path.
    pub fn export(&self) -> Result<ResultsExport> {
        let answers = self.answers();
        let tasks = live_aggregate(&self.questions, &answers, self.config.kappa_scheme)?;
        Ok(ResultsExport { answers, tasks })
    }
}

/// Per-task aggregate tables over the tasks present in `questions`.
pub fn live_aggregate(questions: &[TaskQuestion], answers: &[Answer], scheme: CategoryScheme) -> Result<Vec<TaskResults>> {
    let mut out = Vec::new();
    for task in Task::ALL {
        let qs: Vec<TaskQuestion> = questions.iter().filter(|q| q.task == task).cloned().collect();
        if qs.is_empty() {
            continue;
        }
        let ids: HashSet<&str> = qs.iter().map(|q| q.id.as_str()).collect();
        let ans: Vec<Answer> = answers.iter().filter(|a| ids.contains(a.question_id.as_str())).cloned().collect();
        out.push(TaskResults {
            task,
            table: study_report(&qs, &ans, scheme)?,
        });
    }
    Ok(out)
}
