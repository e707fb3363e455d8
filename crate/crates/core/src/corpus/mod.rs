//! Documents, tokenization, frozen embeddings and dataset splits.

mod embedding;
mod loaders;
mod split;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use embedding::{embed, EmbeddedMatrix, EmbeddingTable, OovPolicy, DEFAULT_DIMENSION};
pub use loaders::{load_amazon, load_arxiv, AMAZON_CLASSES, ARXIV_CLASSES, ARXIV_CODES};
pub use split::{is_disjoint, make_splits, subtopic_filter, DatasetSplit};
pub use tokenize::{tokenize, TokenSequence};

/// Token cap applied before classification; longer texts lose their tail.
pub const MAX_SEQ_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtopic: Option<String>,
}

impl Document {
    /// Tokens as seen by the classifier (capped at [`MAX_SEQ_LEN`]).
    pub fn tokens(&self) -> TokenSequence {
        tokenize(&self.text).truncated(MAX_SEQ_LEN)
    }
}
