use serde::{Deserialize, Serialize};

use crate::attribution::MethodId;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Fragments shown per list.
    pub m: usize,
    pub tau_h: f64,
    pub tau_l: f64,
    pub questions_per_task: usize,
    pub raters_per_question: usize,
    pub methods: Vec<MethodId>,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            m: 3,
            tau_h: 0.9,
            tau_l: 0.7,
            questions_per_task: 100,
            raters_per_question: 3,
            methods: MethodId::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.tau_l && self.tau_l <= self.tau_h && self.tau_h < 1.0) {
            return Err(Error::InvalidInput(format!(
                "thresholds must satisfy 0 < tau_l <= tau_h < 1 (got {}, {})",
                self.tau_l, self.tau_h
            )));
        }
        if self.questions_per_task % 2 != 0 {
            return Err(Error::InvalidInput("questions_per_task must be even".into()));
        }
        if self.raters_per_question == 0 || self.methods.is_empty() || self.m == 0 {
            return Err(Error::InvalidInput("raters, methods and m must be non-zero".into()));
        }
        Ok(())
    }
}
