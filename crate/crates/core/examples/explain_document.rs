//! Trains a small review classifier and its surrogate trees, then prints
//! the evidence and counter-evidence of all nine methods for a few
//! held-out reviews.
//!
//! cargo run --release --example explain_document [-- "your own review text"]

use std::sync::Arc;

use cnnexplain::attribution::{ExplainConfig, Explainer, MethodId};
use cnnexplain::corpus::{load_amazon, make_splits, tokenize, DatasetSplit, EmbeddingTable, AMAZON_CLASSES, DEFAULT_DIMENSION};
use cnnexplain::surrogate::{ExtractConfig, SurrogateForest};
use cnnexplain::synth;
use cnnexplain::textcnn::{train, CnnConfig, CnnModel, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cnnexplain::Result<()> {
    let dir = std::env::temp_dir().join("cnnexplain-explain");
    let paths = synth::write_corpus(&dir, 6_000, 0, 21)?;
    let docs = load_amazon(&paths.reviews)?;
    let table = Arc::new(EmbeddingTable::load(&paths.embeddings, DEFAULT_DIMENSION)?);
    let split = make_splits(&docs, (4_000, 1_000, 1_000), 21)?;
    let (tr, va, te) = (
        DatasetSplit::select(&docs, &split.train),
        DatasetSplit::select(&docs, &split.validation),
        DatasetSplit::select(&docs, &split.test),
    );
    let init = CnnModel::new(table, &CnnConfig::standard(&AMAZON_CLASSES), &mut ChaCha8Rng::seed_from_u64(21));
    let (model, _) = train(init, &tr, &va, &TrainConfig { max_epochs: 4, ..Default::default() })?;
    let forest = SurrogateForest::extract(&model, &tr, &va, ExtractConfig::default())?;
    let explainer = Explainer::new(&model, Some(&forest), ExplainConfig::default());

    let texts: Vec<String> = match std::env::args().nth(1) {
        Some(t) => vec![t],
        None => te.iter().take(3).map(|d| d.text.clone()).collect(),
    };
    for text in texts {
        let tokens = tokenize(&text);
        let p = model.forward(&tokens);
        println!("\n{text}");
        println!("predicted {} (p = {:.3})", model.classes[p.predicted_class], p.confidence());
        for method in MethodId::ALL {
            let e = explainer.explain_prediction(method, &tokens, &p, 1)?;
            println!("  {:<15} + {:?}", method.display_name(), e.evidence_texts(&tokens));
            println!("  {:<15} - {:?}", "", e.counter_texts(&tokens));
        }
    }
    Ok(())
}
