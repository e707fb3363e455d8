//! Glue shared by the command-line tool and the examples: named datasets,
//! persisted splits and per-task question banks.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attribution::Explainer;
use crate::corpus::{self, make_splits, subtopic_filter, DatasetSplit, Document};
use crate::study::{
    generate_questions, select_task1_inputs, select_task2_inputs, select_task3_inputs, StudyConfig, Task,
    TaskModels, TaskQuestion,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Amazon,
    Arxiv,
}

impl Dataset {
    pub fn classes(self) -> Vec<String> {
        let names: &[&str] = match self {
            Dataset::Amazon => &corpus::AMAZON_CLASSES,
            Dataset::Arxiv => &corpus::ARXIV_CLASSES,
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn load(self, path: impl AsRef<Path>) -> Result<Vec<Document>> {
        match self {
            Dataset::Amazon => corpus::load_amazon(path),
            Dataset::Arxiv => corpus::load_arxiv(path),
        }
    }

    /// Train / validation / test sizes for desk-scale runs.
    pub fn desk_sizes(self) -> (usize, usize, usize) {
        match self {
            Dataset::Amazon => (10_000, 2_000, 5_000),
            Dataset::Arxiv => (6_000, 1_500, 10_000),
        }
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "amazon" => Ok(Dataset::Amazon),
            "arxiv" => Ok(Dataset::Arxiv),
            _ => Err(Error::InvalidInput(format!("unknown dataset {s:?} (amazon or arxiv)"))),
        }
    }
}

pub struct Prepared {
    pub dataset: Dataset,
    pub docs: Vec<Document>,
    pub split: DatasetSplit,
}

impl Prepared {
    pub fn new(dataset: Dataset, docs: Vec<Document>, sizes: (usize, usize, usize), seed: u64) -> Result<Self> {
        let split = make_splits(&docs, sizes, seed)?;
        Ok(Self { dataset, docs, split })
    }

    pub fn with_split(dataset: Dataset, docs: Vec<Document>, split: DatasetSplit) -> Self {
        Self { dataset, docs, split }
    }

    pub fn train(&self) -> Vec<&Document> {
        DatasetSplit::select(&self.docs, &self.split.train)
    }

    pub fn validation(&self) -> Vec<&Document> {
        DatasetSplit::select(&self.docs, &self.split.validation)
    }

    pub fn test(&self) -> Vec<&Document> {
        DatasetSplit::select(&self.docs, &self.split.test)
    }

    /// Training and validation documents restricted to one subtopic per class.
    pub fn shifted(&self, allowed: &std::collections::HashMap<usize, String>) -> (Vec<Document>, Vec<Document>) {
        let own = |docs: Vec<&Document>| subtopic_filter(&docs.into_iter().cloned().collect::<Vec<_>>(), allowed);
        (own(self.train()), own(self.validation()))
    }
}

pub fn save_split(split: &DatasetSplit, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serde_json::to_vec(split)?).map_err(|e| Error::io(path, e))
}

pub fn load_split(path: impl AsRef<Path>) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Selects inputs for `task` from `docs` and generates its questions.
pub fn task_bank(
    task: Task,
    well_trained: &Explainer<'_>,
    comparison: Option<&Explainer<'_>>,
    docs: &[&Document],
    config: &StudyConfig,
) -> Result<Vec<TaskQuestion>> {
    config.validate()?;
    let inputs = match task {
        Task::One => {
            let other = comparison.ok_or_else(|| Error::InvalidInput("task 1 needs a comparison model".into()))?;
            select_task1_inputs(well_trained.model, other.model, docs, config)?
        }
        Task::Two => select_task2_inputs(well_trained.model, docs, config)?,
        Task::Three => select_task3_inputs(well_trained.model, docs, config)?,
    };
    let models = TaskModels {
        well_trained,
        comparison,
    };
    generate_questions(task, &inputs, &models, config)
}
