//! The classifier under explanation: embedding → multi-size 1D filters with
//! ReLU → max-over-time pooling → dense head (hidden ReLU layers, logits).

mod io;
mod metrics;
mod model;
mod train;

pub use io::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use metrics::{classification_report, evaluate, predict_classes, ClassMetrics, ClassificationReport};
pub use model::{
    argmax, relu, softmax, CnnConfig, CnnModel, Dense, DenseHead, FeatureVector, Filter, FilterBank,
    FilterSpan, HeadTrace, Prediction, RowProjection,
};
pub use train::{mean_loss, train, EpochLog, TrainConfig, TrainingLog};
