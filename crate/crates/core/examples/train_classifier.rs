//! Trains the review classifier on a synthetic 10K-review corpus, then the
//! one-epoch variant, and prints both held-out reports.
//!
//! cargo run --release --example train_classifier [-- OUT_DIR]

use std::sync::Arc;
use std::time::Instant;

use cnnexplain::corpus::{load_amazon, make_splits, DatasetSplit, EmbeddingTable, AMAZON_CLASSES, DEFAULT_DIMENSION};
use cnnexplain::synth;
use cnnexplain::textcnn::{evaluate, save_model, train, CnnConfig, CnnModel, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cnnexplain::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cnnexplain-train"));
    let paths = synth::write_corpus(&out, 17_000, 0, 7)?;
    let docs = load_amazon(&paths.reviews)?;
    let table = Arc::new(EmbeddingTable::load(&paths.embeddings, DEFAULT_DIMENSION)?);
    let split = make_splits(&docs, (10_000, 2_000, 5_000), 7)?;
    let (tr, va, te) = (
        DatasetSplit::select(&docs, &split.train),
        DatasetSplit::select(&docs, &split.validation),
        DatasetSplit::select(&docs, &split.test),
    );
    let config = CnnConfig::standard(&AMAZON_CLASSES);
    let init = CnnModel::new(table, &config, &mut ChaCha8Rng::seed_from_u64(7));

    let t = Instant::now();
    let (good, log) = train(init.clone(), &tr, &va, &TrainConfig::default())?;
    println!("well-trained: {} epochs (best {}), {:.1?}", log.epochs.len(), log.best_epoch, t.elapsed());
    println!("{}", evaluate(&good, &te)?);

    let (under, _) = train(init, &tr, &va, &TrainConfig { max_epochs: 1, ..Default::default() })?;
    println!("one epoch:");
    println!("{}", evaluate(&under, &te)?);

    save_model(&good, out.join("amazon-good.json"))?;
    save_model(&under, out.join("amazon-underfit.json"))?;
    Ok(())
}
