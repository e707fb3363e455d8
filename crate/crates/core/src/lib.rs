//! Small 1D convolutional text classifiers, nine local explanation methods
//! producing evidence and counter-evidence fragments, and the machinery for
//! human-grounded evaluation of those explanations: question banks for three
//! rating tasks, a rater-facing study service, scoring, and aggregation.
//!
//! The modules follow the data flow:
//!
//! - [`corpus`]: loading, tokenizing, embedding and splitting documents.
//! - [`textcnn`]: the classifier (multi-size filters, max-over-time pooling,
//!   dense head), its training loop and evaluation.
//! - [`attribution`]: random baselines, LIME, ε-LRP, DeepLIFT and
//!   Grad-CAM-Text explanations.
//! - [`surrogate`]: one-vs-rest CART trees mimicking the dense head and the
//!   path-based explanations they give.
//! - [`study`]: input selection, question generation, scoring, aggregation
//!   and Fleiss' kappa.
//! - [`service`]: assignment of questions to raters and answer collection.
//! - [`synth`]: seeded synthetic corpora and embeddings for desk-scale runs.
//! - [`workflow`]: named datasets, saved splits and per-task banks.

pub mod attribution;
pub mod corpus;
pub mod error;
pub mod service;
pub mod study;
pub mod surrogate;
pub mod synth;
pub mod textcnn;
pub mod workflow;

pub use error::{Error, Result};
