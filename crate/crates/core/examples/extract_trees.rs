//! Trains the abstract classifier at desk scale (6K / 1.5K / 10K), extracts
//! one pruned CART surrogate per class and reports tree sizes and fidelity.
//! Also trains the subtopic-shifted model and extracts its trees.
//!
//! cargo run --release --example extract_trees [-- OUT_DIR]

use std::sync::Arc;
use std::time::Instant;

use cnnexplain::corpus::{EmbeddingTable, Document, DEFAULT_DIMENSION};
use cnnexplain::surrogate::{build_feature_dataset, ExtractConfig, SurrogateForest};
use cnnexplain::synth;
use cnnexplain::textcnn::{evaluate, save_model, train, CnnConfig, CnnModel, TrainConfig};
use cnnexplain::workflow::{Dataset, Prepared};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cnnexplain::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cnnexplain-trees"));
    let paths = synth::write_corpus(&out, 0, 20_000, 3)?;
    let table = Arc::new(EmbeddingTable::load(&paths.embeddings, DEFAULT_DIMENSION)?);
    let data = Prepared::new(Dataset::Arxiv, Dataset::Arxiv.load(&paths.abstracts)?, Dataset::Arxiv.desk_sizes(), 3)?;
    let config = CnnConfig { classes: Dataset::Arxiv.classes(), ..CnnConfig::standard(&[]) };

    let t = Instant::now();
    let init = CnnModel::new(table.clone(), &config, &mut ChaCha8Rng::seed_from_u64(3));
    let (model, _) = train(init, &data.train(), &data.validation(), &TrainConfig::default())?;
    println!("classifier ({:.0?}):\n{}", t.elapsed(), evaluate(&model, &data.test())?);

    let t = Instant::now();
    let forest = SurrogateForest::extract(&model, &data.train(), &data.validation(), ExtractConfig::default())?;
    let fidelity = forest.fidelity(&build_feature_dataset(&model, &data.test())?);
    print!("surrogate trees ({:.1?}):\n{}", t.elapsed(), forest.report());
    println!("fidelity (macro-F1 against the classifier): {:.3}\n", fidelity.macro_f1());

    let (tr, va) = data.shifted(&synth::shifted_subtopics());
    let (tr, va): (Vec<&Document>, Vec<&Document>) = (tr.iter().collect(), va.iter().collect());
    let init = CnnModel::new(table, &config, &mut ChaCha8Rng::seed_from_u64(4));
    let (shifted, _) = train(init, &tr, &va, &TrainConfig::default())?;
    println!("shifted classifier ({} training docs):\n{}", tr.len(), evaluate(&shifted, &data.test())?);
    let shifted_forest = SurrogateForest::extract(&shifted, &tr, &va, ExtractConfig::default())?;
    print!("shifted surrogate trees:\n{}", shifted_forest.report());

    save_model(&model, out.join("arxiv-good.json"))?;
    save_model(&shifted, out.join("arxiv-shifted.json"))?;
    forest.save(out.join("arxiv-good-trees.json"))?;
    shifted_forest.save(out.join("arxiv-shifted-trees.json"))?;
    Ok(())
}
