//! Builds the three question banks from a well-trained and a one-epoch
//! review classifier, simulates three noisy raters per question and prints
//! the per-method score tables with Fleiss' kappa.
//!
//! cargo run --release --example study_pipeline [-- OUT_DIR [QUESTIONS_PER_TASK]]

use std::sync::Arc;

use cnnexplain::attribution::{ExplainConfig, Explainer};
use cnnexplain::corpus::{load_amazon, EmbeddingTable, AMAZON_CLASSES, DEFAULT_DIMENSION};
use cnnexplain::study::{study_report, write_jsonl, Answer, CategoryScheme, Choice, ModelSide, StudyConfig, Task};
use cnnexplain::surrogate::{ExtractConfig, SurrogateForest};
use cnnexplain::synth;
use cnnexplain::textcnn::{train, CnnConfig, CnnModel, TrainConfig};
use cnnexplain::workflow::{task_bank, Dataset, Prepared};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cnnexplain::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cnnexplain-study"));
    let per_task: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);

    let paths = synth::write_corpus(&out, 17_000, 0, 7)?;
    let table = Arc::new(EmbeddingTable::load(&paths.embeddings, DEFAULT_DIMENSION)?);
    let data = Prepared::new(Dataset::Amazon, load_amazon(&paths.reviews)?, Dataset::Amazon.desk_sizes(), 7)?;
    let (tr, va, te) = (data.train(), data.validation(), data.test());
    let init = CnnModel::new(table, &CnnConfig::standard(&AMAZON_CLASSES), &mut ChaCha8Rng::seed_from_u64(7));
    let (good, _) = train(init.clone(), &tr, &va, &TrainConfig::default())?;
    let (weak, _) = train(init, &tr, &va, &TrainConfig { max_epochs: 1, ..Default::default() })?;
    let good_trees = SurrogateForest::extract(&good, &tr, &va, ExtractConfig::default())?;
    let weak_trees = SurrogateForest::extract(&weak, &tr, &va, ExtractConfig::default())?;
    let good_ex = Explainer::new(&good, Some(&good_trees), ExplainConfig::default());
    let weak_ex = Explainer::new(&weak, Some(&weak_trees), ExplainConfig::default());

    let config = StudyConfig { questions_per_task: per_task, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for task in Task::ALL {
        let bank = task_bank(task, &good_ex, Some(&weak_ex), &te, &config)?;
        // Raters pick the key 60% of the time and are confident half the time.
        let mut answers = Vec::new();
        for q in &bank {
            for r in 0..config.raters_per_question {
                let choice = if rng.random_bool(0.6) {
                    q.hidden_key
                } else {
                    match q.hidden_key {
                        Choice::Model(ModelSide::A) => Choice::Model(ModelSide::B),
                        Choice::Model(ModelSide::B) => Choice::Model(ModelSide::A),
                        Choice::Class(c) => Choice::Class(1 - c),
                        Choice::NoPreference => Choice::NoPreference,
                    }
                };
                answers.push(Answer {
                    question_id: q.id.clone(),
                    rater_id: format!("rater{r}"),
                    choice,
                    confident: rng.random_bool(0.5),
                    timestamp: 0,
                });
            }
        }
        write_jsonl(out.join(format!("task{}.jsonl", task as u8)), &bank)?;
        write_jsonl(out.join(format!("task{}-answers.jsonl", task as u8)), &answers)?;
        println!("\ntask {} ({} questions)", task as u8, bank.len());
        print!("{}", study_report(&bank, &answers, CategoryScheme::WithConfidence)?);
    }
    Ok(())
}
