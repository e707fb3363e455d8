//! Local explanations: ordered evidence and counter-evidence fragments for a
//! predicted class.
//!
//! | method          | scores                          | fragments            |
//! |-----------------|---------------------------------|----------------------|
//! | Random (W / N)  | none                            | random words / n-grams |
//! | LIME            | perturbation surrogate          | words                |
//! | LRP (W / N)     | ε-LRP relevance                 | words / n-grams      |
//! | DeepLIFT (W / N)| Rescale vs all-zero embeddings  | words / n-grams      |
//! | Grad-CAM-Text   | clipped head gradient × v       | pooled filter spans  |
//! | DTs             | surrogate-tree path             | pooled filter spans  |
//!
//! n-gram lengths are the classifier's filter sizes.

mod deeplift;
mod gradcam;
mod lime;
mod lrp;
mod random;
mod select;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use deeplift::{deeplift_input, deeplift_words, reference_logit};
pub use gradcam::{fired_span_candidates, gradcam_text, EffectMode, FilterEffect};
pub use lime::{lime_explain, LimeConfig};
pub use lrp::{lrp_dense, lrp_input, lrp_words};
pub use random::{random_ngrams, random_words};
pub use select::{select_fragments, Candidate};

use crate::corpus::{EmbeddedMatrix, TokenSequence};
use crate::surrogate::SurrogateForest;
use crate::textcnn::{CnnModel, FilterSpan, Prediction};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    #[serde(rename = "random_w")]
    RandomWords,
    #[serde(rename = "random_n")]
    RandomNgrams,
    Lime,
    #[serde(rename = "lrp_w")]
    LrpWords,
    #[serde(rename = "lrp_n")]
    LrpNgrams,
    #[serde(rename = "deeplift_w")]
    DeepLiftWords,
    #[serde(rename = "deeplift_n")]
    DeepLiftNgrams,
    #[serde(rename = "gradcam_text")]
    GradCamText,
    #[serde(rename = "decision_trees")]
    DecisionTrees,
}

impl MethodId {
    pub const ALL: [MethodId; 9] = [
        MethodId::RandomWords,
        MethodId::RandomNgrams,
        MethodId::Lime,
        MethodId::LrpWords,
        MethodId::LrpNgrams,
        MethodId::DeepLiftWords,
        MethodId::DeepLiftNgrams,
        MethodId::GradCamText,
        MethodId::DecisionTrees,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            MethodId::RandomWords => "Random (W)",
            MethodId::RandomNgrams => "Random (N)",
            MethodId::Lime => "LIME (W)",
            MethodId::LrpWords => "LRP (W)",
            MethodId::LrpNgrams => "LRP (N)",
            MethodId::DeepLiftWords => "DeepLIFT (W)",
            MethodId::DeepLiftNgrams => "DeepLIFT (N)",
            MethodId::GradCamText => "Grad-CAM-T (N)",
            MethodId::DecisionTrees => "DTs (N)",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            MethodId::RandomWords => "random_w",
            MethodId::RandomNgrams => "random_n",
            MethodId::Lime => "lime",
            MethodId::LrpWords => "lrp_w",
            MethodId::LrpNgrams => "lrp_n",
            MethodId::DeepLiftWords => "deeplift_w",
            MethodId::DeepLiftNgrams => "deeplift_n",
            MethodId::GradCamText => "gradcam_text",
            MethodId::DecisionTrees => "decision_trees",
        }
    }

    pub fn is_word_level(self) -> bool {
        matches!(
            self,
            MethodId::RandomWords | MethodId::Lime | MethodId::LrpWords | MethodId::DeepLiftWords
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentKind {
    Word,
    Ngram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub start: usize,
    pub count: usize,
    pub kind: FragmentKind,
    pub score: f64,
}

impl Fragment {
    pub fn span(&self) -> FilterSpan {
        FilterSpan {
            start: self.start,
            len: self.count,
        }
    }

    fn from_candidate(c: &Candidate, kind: FragmentKind) -> Self {
        Self {
            start: c.start,
            count: c.len,
            kind,
            score: c.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub method: MethodId,
    pub target_class: usize,
    /// Descending score.
    pub evidence: Vec<Fragment>,
    /// Ascending score (most negative first), except for the tree method
    /// whose fragments are in path order.
    pub counter_evidence: Vec<Fragment>,
    pub m: usize,
}

/// Per-token relevance for a fixed target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordRelevance {
    pub scores: Vec<f64>,
}

impl WordRelevance {
    /// Sums each row of an input-relevance matrix, keeping `n_tokens` rows.
    pub fn from_rows(m: &EmbeddedMatrix, n_tokens: usize) -> Self {
        Self {
            scores: (0..n_tokens).map(|i| m.row(i).iter().sum()).collect(),
        }
    }

    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }
}

/// Every contiguous span of each size, scored by the sum of its word scores;
/// ordered by size, then start.
pub fn ngram_scores(word_rel: &WordRelevance, sizes: &[usize]) -> Vec<Candidate> {
    let n = word_rel.scores.len();
    let mut out = Vec::new();
    for &len in sizes {
        if len == 0 || len > n {
            continue;
        }
        for start in 0..=n - len {
            let score = word_rel.scores[start..start + len].iter().sum();
            out.push(Candidate::new(start, len, score));
        }
    }
    out
}

fn word_candidates(rel: &WordRelevance) -> Vec<Candidate> {
    rel.scores
        .iter()
        .enumerate()
        .map(|(i, &s)| Candidate::new(i, 1, s))
        .collect()
}

/// Builds an explanation from per-word scores: word-level picks, or
/// non-overlapping n-grams scored by summed word relevance.
pub fn explanation_from_words(
    method: MethodId,
    rel: &WordRelevance,
    sizes: Option<&[usize]>,
    target_class: usize,
    m: usize,
) -> Explanation {
    let (cands, kind, nonoverlap) = match sizes {
        None => (word_candidates(rel), FragmentKind::Word, false),
        Some(s) => (ngram_scores(rel, s), FragmentKind::Ngram, true),
    };
    let (ev, co) = select::evidence_and_counter(&cands, m, nonoverlap);
    Explanation {
        method,
        target_class,
        evidence: ev.iter().map(|c| Fragment::from_candidate(c, kind)).collect(),
        counter_evidence: co.iter().map(|c| Fragment::from_candidate(c, kind)).collect(),
        m,
    }
}

/// Grad-CAM-Text fragments: fired pooled spans, non-overlapping, ranked by
/// the summed evidence (or counter) effects of their words. Counter-evidence
/// scores are negated so both lists follow the usual ordering.
pub fn gradcam_explain(model: &CnnModel, prediction: &Prediction, n_tokens: usize, m: usize) -> Explanation {
    let j = prediction.predicted_class;
    let ev_effect = gradcam_text(model, prediction, j, EffectMode::Evidence);
    let co_effect = gradcam_text(model, prediction, j, EffectMode::Counter);
    let ev = select_fragments(&fired_span_candidates(prediction, &ev_effect, n_tokens), m, true, true);
    let taken: Vec<FilterSpan> = ev.iter().map(|c| c.span()).collect();
    let co = select::select_excluding(
        &fired_span_candidates(prediction, &co_effect, n_tokens),
        m,
        true,
        true,
        &taken,
    );
    Explanation {
        method: MethodId::GradCamText,
        target_class: j,
        evidence: ev.iter().map(|c| Fragment::from_candidate(c, FragmentKind::Ngram)).collect(),
        counter_evidence: co
            .iter()
            .map(|c| Fragment {
                score: -c.score,
                ..Fragment::from_candidate(c, FragmentKind::Ngram)
            })
            .collect(),
        m,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub m: usize,
    pub lime: LimeConfig,
    pub lrp_epsilon: f64,
    pub seed: u64,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            m: 3,
            lime: LimeConfig::default(),
            lrp_epsilon: 0.01,
            seed: 0,
        }
    }
}

/// Runs any of the nine methods against one classifier (and its surrogate
/// trees, for the tree method). Explanations target the predicted class.
pub struct Explainer<'a> {
    pub model: &'a CnnModel,
    pub forest: Option<&'a SurrogateForest>,
    pub config: ExplainConfig,
}

impl<'a> Explainer<'a> {
    pub fn new(model: &'a CnnModel, forest: Option<&'a SurrogateForest>, config: ExplainConfig) -> Self {
        Self { model, forest, config }
    }

    /// `salt` decorrelates random streams across documents.
    pub fn explain(&self, method: MethodId, tokens: &TokenSequence, salt: u64) -> Result<Explanation> {
        let prediction = self.model.forward(tokens);
        self.explain_prediction(method, tokens, &prediction, salt)
    }

    pub fn explain_prediction(
        &self,
        method: MethodId,
        tokens: &TokenSequence,
        prediction: &Prediction,
        salt: u64,
    ) -> Result<Explanation> {
        let m = self.config.m;
        let j = prediction.predicted_class;
        let seed = self.config.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let sizes = self.model.filters.sizes();
        let n = tokens.len();
        Ok(match method {
            MethodId::RandomWords => random_words(n, m, j, seed),
            MethodId::RandomNgrams => random_ngrams(n, m, &sizes, j, seed),
            MethodId::Lime => {
                let rel = lime_explain(self.model, tokens, j, &self.config.lime, seed)?;
                explanation_from_words(method, &rel, None, j, m)
            }
            MethodId::LrpWords | MethodId::LrpNgrams => {
                let rel = lrp_words(self.model, tokens, j, self.config.lrp_epsilon);
                let s = (method == MethodId::LrpNgrams).then_some(sizes.as_slice());
                explanation_from_words(method, &rel, s, j, m)
            }
            MethodId::DeepLiftWords | MethodId::DeepLiftNgrams => {
                let rel = deeplift_words(self.model, tokens, j);
                let s = (method == MethodId::DeepLiftNgrams).then_some(sizes.as_slice());
                explanation_from_words(method, &rel, s, j, m)
            }
            MethodId::GradCamText => gradcam_explain(self.model, prediction, n, m),
            MethodId::DecisionTrees => {
                let forest = self.forest.ok_or_else(|| {
                    Error::InvalidInput("the tree method needs extracted surrogate trees".into())
                })?;
                forest.local_explain(prediction, n, m)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentRecord {
    pub start: usize,
    pub count: usize,
    pub score: f64,
    pub text: String,
}

/// One line of the explanation export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub doc_id: String,
    pub method: MethodId,
    pub target_class: usize,
    pub evidence: Vec<FragmentRecord>,
    pub counter_evidence: Vec<FragmentRecord>,
}

impl Explanation {
    pub fn to_record(&self, doc_id: &str, tokens: &TokenSequence) -> ExplanationRecord {
        let conv = |f: &Fragment| FragmentRecord {
            start: f.start,
            count: f.count,
            score: f.score,
            text: tokens.span_text(f.start, f.count),
        };
        ExplanationRecord {
            doc_id: doc_id.to_string(),
            method: self.method,
            target_class: self.target_class,
            evidence: self.evidence.iter().map(conv).collect(),
            counter_evidence: self.counter_evidence.iter().map(conv).collect(),
        }
    }

    pub fn evidence_texts(&self, tokens: &TokenSequence) -> Vec<String> {
        self.evidence.iter().map(|f| tokens.span_text(f.start, f.count)).collect()
    }

    pub fn counter_texts(&self, tokens: &TokenSequence) -> Vec<String> {
        self.counter_evidence.iter().map(|f| tokens.span_text(f.start, f.count)).collect()
    }
}
