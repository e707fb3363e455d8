use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use cnnexplain::attribution::{ExplainConfig, Explainer, MethodId};
use cnnexplain::corpus::{tokenize, EmbeddingTable, DEFAULT_DIMENSION, MAX_SEQ_LEN};
use cnnexplain::service::{serve, ServiceConfig, StudyService};
use cnnexplain::study::{read_jsonl, score_answers, study_report, write_jsonl, Answer, CategoryScheme, StudyConfig, Task, TaskQuestion};
use cnnexplain::surrogate::{build_feature_dataset, ExtractConfig, SurrogateForest};
use cnnexplain::textcnn::{evaluate, load_model, save_model, train, CnnConfig, CnnModel, TrainConfig};
use cnnexplain::workflow::{load_split, save_split, task_bank, Dataset, Prepared};
use cnnexplain::{synth, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "cnnexplain", version, about = "Train text CNNs, explain them and run rater studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DataArgs {
    #[arg(long, value_enum)]
    dataset: DatasetArg,
    /// Corpus file (reviews CSV or abstracts JSONL).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Saved split; created next to the model by `train`.
    #[arg(long)]
    split: PathBuf,
    /// Train,validation,test sizes for a new split (default: desk scale).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Amazon,
    Arxiv,
}

impl From<DatasetArg> for Dataset {
    fn from(d: DatasetArg) -> Self {
        match d {
            DatasetArg::Amazon => Dataset::Amazon,
            DatasetArg::Arxiv => Dataset::Arxiv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    WithConfidence,
    WithoutConfidence,
}

impl From<SchemeArg> for CategoryScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::WithConfidence => CategoryScheme::WithConfidence,
            SchemeArg::WithoutConfidence => CategoryScheme::WithoutConfidence,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus and embedding file.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 17_000)]
        reviews: usize,
        #[arg(long, default_value_t = 20_000)]
        abstracts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train a classifier and save it (and the split, if new).
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        /// Train only on one subtopic per class (abstracts only).
        #[arg(long)]
        shifted: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Explain a text or the first N test documents; JSON lines on stdout.
    Explain {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "lrp_n")]
        method: String,
        #[arg(long)]
        trees: Option<PathBuf>,
        #[arg(long)]
        text: Option<String>,
        #[arg(long, default_value_t = 5)]
        limit: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// Extract surrogate trees and report fidelity on the test split.
    ExtractDt {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        min_leaf: usize,
        #[arg(long, default_value_t = 50)]
        max_depth: usize,
    },
    /// Generate one task's question bank from the test split.
    MakeStudy {
        #[arg(long)]
        task: Task,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Worse model for task 1.
        #[arg(long)]
        comparison: Option<PathBuf>,
        #[arg(long)]
        trees: PathBuf,
        #[arg(long)]
        comparison_trees: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        questions: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an answer log against its question bank; JSON lines on stdout.
    Score {
        #[arg(long)]
        answers: PathBuf,
        #[arg(long)]
        questions: PathBuf,
    },
    /// Per-method aggregate table of an answer log.
    Report {
        #[arg(long)]
        answers: PathBuf,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long, value_enum, default_value = "with-confidence")]
        scheme: SchemeArg,
    },
    /// Serve question banks to raters over HTTP.
    Serve {
        #[arg(long, required = true, num_args = 1..)]
        questions: Vec<PathBuf>,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, default_value_t = 3)]
        raters: usize,
    },
}

fn embeddings(path: &Path) -> Result<Arc<EmbeddingTable>> {
    Ok(Arc::new(EmbeddingTable::load(path, DEFAULT_DIMENSION)?))
}

fn prepared(args: &DataArgs, seed: u64) -> Result<Prepared> {
    let dataset: Dataset = args.dataset.into();
    let docs = dataset.load(&args.data)?;
    if args.split.exists() {
        Ok(Prepared::with_split(dataset, docs, load_split(&args.split)?))
    } else {
        let sizes = match args.sizes.as_deref() {
            Some(&[a, b, c]) => (a, b, c),
            Some(_) => return Err(Error::InvalidInput("--sizes takes three comma-separated counts".into())),
            None => dataset.desk_sizes(),
        };
        let p = Prepared::new(dataset, docs, sizes, seed)?;
        save_split(&p.split, &args.split)?;
        Ok(p)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { out, reviews, abstracts, seed } => {
            let p = synth::write_corpus(&out, reviews, abstracts, seed)?;
            println!("{}\n{}\n{}", p.reviews.display(), p.abstracts.display(), p.embeddings.display());
        }
        Command::Train { data, out, epochs, shifted, seed } => {
            let table = embeddings(&data.embeddings)?;
            let p = prepared(&data, seed)?;
            let config = CnnConfig { classes: p.dataset.classes(), ..CnnConfig::standard(&[]) };
            let init = CnnModel::new(table, &config, &mut ChaCha8Rng::seed_from_u64(seed));
            let train_cfg = TrainConfig { max_epochs: epochs, seed, ..Default::default() };
            let (model, log) = if shifted {
                let (tr, va) = p.shifted(&synth::shifted_subtopics());
                train(init, &tr.iter().collect::<Vec<_>>(), &va.iter().collect::<Vec<_>>(), &train_cfg)?
            } else {
                train(init, &p.train(), &p.validation(), &train_cfg)?
            };
            println!("{} epochs, best {}", log.epochs.len(), log.best_epoch);
            println!("{}", evaluate(&model, &p.test())?);
            save_model(&model, &out)?;
        }
        Command::Explain { data, model, method, trees, text, limit, m } => {
            let method: MethodId = method.parse()?;
            let model = load_model(&model, embeddings(&data.embeddings)?)?;
            let forest = trees.as_deref().map(SurrogateForest::load).transpose()?;
            let explainer = Explainer::new(&model, forest.as_ref(), ExplainConfig { m, ..Default::default() });
            let items: Vec<(String, String)> = match text {
                Some(t) => vec![("input".into(), t)],
                None => prepared(&data, 0)?.test().iter().take(limit).map(|d| (d.id.clone(), d.text.clone())).collect(),
            };
            for (i, (id, text)) in items.iter().enumerate() {
                let toks = tokenize(text).truncated(MAX_SEQ_LEN);
                let e = explainer.explain(method, &toks, i as u64 + 1)?;
                println!("{}", serde_json::to_string(&e.to_record(id, &toks))?);
            }
        }
        Command::ExtractDt { data, model, out, min_leaf, max_depth } => {
            let model = load_model(&model, embeddings(&data.embeddings)?)?;
            let p = prepared(&data, 0)?;
            let config = ExtractConfig { cart: cnnexplain::surrogate::CartParams { min_leaf, max_depth }, prune: true };
            let forest = SurrogateForest::extract(&model, &p.train(), &p.validation(), config)?;
            print!("{}", forest.report());
            let fid = forest.fidelity(&build_feature_dataset(&model, &p.test())?);
            println!("fidelity (macro-F1 vs classifier): {:.4}", fid.macro_f1());
            forest.save(&out)?;
        }
        Command::MakeStudy { task, data, model, comparison, trees, comparison_trees, seed, questions, out } => {
            let table = embeddings(&data.embeddings)?;
            let good = load_model(&model, table.clone())?;
            let bad = comparison.as_deref().map(|p| load_model(p, table.clone())).transpose()?;
            let forest = SurrogateForest::load(&trees)?;
            let bad_forest = comparison_trees.as_deref().map(SurrogateForest::load).transpose()?;
            let p = prepared(&data, 0)?;
            let config = StudyConfig { seed, questions_per_task: questions, ..Default::default() };
            let ex_cfg = ExplainConfig { m: config.m, seed, ..Default::default() };
            let good_ex = Explainer::new(&good, Some(&forest), ex_cfg.clone());
            let bad_ex = bad.as_ref().map(|b| Explainer::new(b, bad_forest.as_ref(), ex_cfg.clone()));
            let bank = task_bank(task, &good_ex, bad_ex.as_ref(), &p.test(), &config)?;
            write_jsonl(&out, &bank)?;
            println!("{} questions written to {}", bank.len(), out.display());
        }
        Command::Score { answers, questions } => {
            let qs: Vec<TaskQuestion> = read_jsonl(&questions)?;
            let ans: Vec<Answer> = read_jsonl(&answers)?;
            for r in score_answers(&qs, &ans)? {
                println!("{}", serde_json::to_string(&r)?);
            }
        }
        Command::Report { answers, questions, scheme } => {
            let qs: Vec<TaskQuestion> = read_jsonl(&questions)?;
            let ans: Vec<Answer> = read_jsonl(&answers)?;
            print!("{}", study_report(&qs, &ans, scheme.into())?);
        }
        Command::Serve { questions, dir, addr, raters } => {
            let mut bank = Vec::new();
            for q in &questions {
                bank.extend(read_jsonl::<TaskQuestion>(q)?);
            }
            let config = ServiceConfig { raters_per_question: raters, ..Default::default() };
            let service = Arc::new(StudyService::open(bank, config, &dir)?);
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io(&dir, e))?;
            rt.block_on(serve(service, addr)).map_err(|e| Error::io(&dir, e))?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
