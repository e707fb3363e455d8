//! Seeded synthetic stand-ins for the review-polarity corpus, the abstract
//! corpus and a 200-dimensional word embedding, written in the same file
//! formats the loaders read.
//!
//! Reviews mix polarity cue words, negated cues (`isn't great`), neutral
//! product talk and a few out-of-vocabulary brand names; a fraction are
//! deliberately mixed and a few carry flipped labels. Abstracts draw from
//! twelve subtopic lexicons (four per main class) with cross-class
//! confuser terms, and some records are cross-listed under two main
//! categories.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingTable, ARXIV_CODES, DEFAULT_DIMENSION};
use crate::{Error, Result};

const POSITIVE: &[&str] = &[
    "great", "excellent", "love", "loved", "wonderful", "perfect", "amazing", "comfortably",
    "helps", "recommend", "best", "happy", "enjoyed", "fantastic", "sturdy", "beautiful",
    "reliable", "easy", "awesome", "pleased", "favorite", "impressed", "solid", "worth", "nice",
    "glad", "superb", "delightful", "durable", "brilliant", "outstanding", "lovely", "charming",
    "elegant", "flawless", "handy", "terrific", "smooth", "satisfied", "gorgeous", "fabulous",
    "exceptional", "incredible", "marvelous", "stellar", "comfortable", "convenient", "accurate",
    "adorable", "affordable", "gripping", "hilarious", "inspiring", "masterpiece", "polished",
    "powerful", "refreshing", "remarkable", "responsive", "seamless", "sleek", "splendid",
    "stunning", "thoughtful", "versatile", "vivid", "warm", "witty", "exquisite", "fun",
    "heartwarming", "compelling", "engaging", "crisp", "cozy", "dependable", "effortless",
    "fascinating", "gentle", "impressive", "intuitive", "joyful", "lightweight", "magnificent",
    "neat",
];
const NEGATIVE: &[&str] = &[
    "terrible", "broke", "waste", "awful", "disappointed", "poor", "worst", "refund", "useless",
    "cheap", "returned", "flimsy", "boring", "horrible", "junk", "broken", "annoying", "defective",
    "mediocre", "unhappy", "wrong", "failed", "stopped", "regret", "rubbish", "lousy", "fake",
    "leaked", "ripped", "overpriced", "dull", "bland", "clunky", "crappy", "cracked", "dreadful",
    "faulty", "frustrating", "garbage", "inferior", "lame", "mess", "misleading", "noisy",
    "pathetic", "pointless", "shoddy", "sloppy", "smelly", "stale", "tedious", "tacky", "ugly",
    "unreliable", "unusable", "weak", "worthless", "awkward", "bulky", "buggy", "confusing",
    "disgusting", "dismal", "fragile", "hideous", "inaccurate", "incompetent", "lackluster",
    "lifeless", "malfunctioned", "miserable", "nasty", "obnoxious", "painful", "predictable",
    "rattled", "scratched", "sluggish", "sticky", "tasteless", "tiresome", "uncomfortable",
];
const NOUNS: &[&str] = &[
    "product", "book", "phone", "battery", "case", "story", "charger", "headphones", "movie", "album",
    "quality", "price", "size", "sound", "screen", "cable", "shoes", "bag", "lamp", "blender", "kettle",
    "keyboard", "mouse", "jacket", "novel", "author", "plot", "camera", "lens", "speaker", "watch",
    "strap", "toy", "game", "printer", "ink", "pan", "knife", "chair", "desk",
];
const VERBS: &[&str] = &["bought", "ordered", "received", "used", "tried", "read", "watched", "got", "gave", "tested"];
const TIMES: &[&str] = &["last week", "a month ago", "for my son", "as a gift", "yesterday", "for work", "twice"];
const INTENSIFIERS: &[&str] = &["very", "really", "so", "quite", "extremely", "pretty"];
const FILLERS: &[&str] = &[
    "and", "it", "the", "was", "is", "my", "for", "with", "of", "to", "but", "they", "this", "that", "on",
    "in", "after", "about", "again", "also", "just", "still", "all", "one", "two", "days", "time",
];
const BRANDS: &[&str] = &["Zentrix", "Kovalo", "Brightume", "Quellor", "Austrap"];

/// Main class index, subtopic name, topic words.
const SUBTOPICS: &[(usize, &str, &[&str])] = &[
    (0, "Computation and Language", &["language", "parsing", "translation", "corpus", "sentence", "lexical", "syntax", "dialogue", "tokens", "summarization", "annotation", "multilingual", "speech", "semantic", "lemma"]),
    (0, "Computer Vision", &["image", "pixel", "segmentation", "detection", "camera", "video", "convolutional", "visual", "scene", "recognition", "depth", "pose", "tracking", "rendering", "illumination"]),
    (0, "Databases", &["query", "database", "index", "transaction", "schema", "relational", "storage", "join", "sql", "indexing", "consistency", "replication", "tuples", "caching", "workload"]),
    (0, "Machine Learning", &["learning", "neural", "training", "classifier", "gradient", "supervised", "features", "dataset", "regularization", "overfitting", "reinforcement", "embedding", "benchmark", "generalization", "ensemble"]),
    (1, "Dynamical Systems", &["attractor", "bifurcation", "flow", "orbit", "ergodic", "periodic", "stability", "chaotic", "invariant", "manifold", "diffeomorphism", "lyapunov", "trajectories", "hyperbolic", "iteration"]),
    (1, "Number Theory", &["prime", "integer", "modular", "arithmetic", "congruence", "diophantine", "zeta", "divisor", "quadratic", "residue", "galois", "primes", "elliptic", "rational", "conjecture"]),
    (1, "Probability", &["random", "stochastic", "martingale", "brownian", "variance", "distribution", "measure", "limit", "markov", "expectation", "sampling", "convergence", "walk", "almost", "independent"]),
    (1, "Combinatorics", &["graph", "vertex", "vertices", "coloring", "partition", "permutation", "bipartite", "subgraph", "enumeration", "hypergraph", "extremal", "matroid", "tree", "edges", "bound"]),
    (2, "Quantum Physics", &["quantum", "qubit", "entanglement", "photon", "decoherence", "superposition", "hamiltonian", "spin", "measurement", "coherent", "teleportation", "qubits", "fidelity", "interferometer", "oscillator"]),
    (2, "Condensed Matter", &["lattice", "superconducting", "phonon", "magnetic", "crystal", "electron", "fermi", "topological", "insulator", "conductivity", "graphene", "doping", "phase", "thermal", "band"]),
    (2, "Astrophysics", &["galaxy", "stellar", "cosmic", "dark", "telescope", "redshift", "supernova", "halo", "accretion", "luminosity", "cosmological", "star", "galaxies", "neutron", "planetary"]),
    (2, "Optics", &["laser", "optical", "wavelength", "beam", "fiber", "photonic", "refractive", "lens", "diffraction", "polarization", "pulse", "waveguide", "spectral", "nonlinear", "cavity"]),
];
/// Terms shared by a pair of subtopics from different classes.
const CONFUSERS: &[(usize, usize, &[&str])] = &[
    (3, 6, &["estimation", "probabilistic", "bayesian", "likelihood", "inference"]),
    (4, 9, &["dynamics", "equation", "energy", "evolution", "nonlinearity"]),
    (7, 2, &["algorithm", "complexity", "efficient", "combinatorial", "search"]),
    (1, 11, &["imaging", "resolution", "lenses", "light", "spectrum"]),
    (5, 8, &["operator", "algebraic", "symmetry", "group", "representation"]),
];
const ACADEMIC: &[&str] = &[
    "we", "propose", "method", "results", "show", "paper", "study", "model", "analysis", "novel", "approach",
    "framework", "present", "obtain", "new", "problem", "general", "case", "based", "using", "significant",
    "provide", "introduce", "prior", "work", "these", "our", "two", "three", "first", "results", "also",
];
const FUNCTION: &[&str] = &["the", "a", "of", "in", "for", "and", "to", "on", "with", "that", "is", "are", "this", "by", "as"];

/// One review as stored on disk: label 1 = negative, 2 = positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewRecord {
    pub label: u8,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractRecord {
    pub id: String,
    pub categories: Vec<String>,
    pub subtopic: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

fn pick<'a>(rng: &mut impl Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap_or("")
}

/// Zipf-like draw: early entries are much more frequent.
fn pick_zipf<'a>(rng: &mut impl Rng, xs: &[&'a str]) -> &'a str {
    let u: f64 = rng.random();
    let i = ((xs.len() as f64 + 1.0).powf(u) - 1.0) as usize;
    xs[i.min(xs.len() - 1)]
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn cue_sentence(rng: &mut impl Rng, positive: bool) -> String {
    let (direct, opposite) = if positive { (POSITIVE, NEGATIVE) } else { (NEGATIVE, POSITIVE) };
    let noun = pick_zipf(rng, NOUNS);
    match rng.random_range(0..10) {
        0..=2 => format!("the {noun} isn't {}", pick_zipf(rng, opposite)),
        3 => format!("it was not {} at all", pick_zipf(rng, opposite)),
        4..=5 => format!("the {noun} is {} {}", pick(rng, INTENSIFIERS), pick_zipf(rng, direct)),
        6..=7 => format!("{} {noun} , {}", pick_zipf(rng, direct), pick(rng, FILLERS)),
        _ => format!("i think it is {} {} {}", pick_zipf(rng, direct), pick(rng, FILLERS), pick_zipf(rng, NOUNS)),
    }
}

fn neutral_sentence(rng: &mut impl Rng) -> String {
    let noun = pick_zipf(rng, NOUNS);
    match rng.random_range(0..4) {
        0 => format!("I {} this {noun} {}", pick(rng, VERBS), pick(rng, TIMES)),
        1 => format!("the {noun} came from {} {} {}", pick(rng, BRANDS), pick(rng, FILLERS), pick(rng, FILLERS)),
        2 => format!("{} {} the {noun} {} {}", pick(rng, FILLERS), pick(rng, FILLERS), pick(rng, FILLERS), pick_zipf(rng, NOUNS)),
        _ => format!("my {} {} it {}", pick(rng, ["wife", "friend", "brother", "kid"].as_slice()), pick(rng, VERBS), pick(rng, TIMES)),
    }
}

/// `n` reviews, half positive in expectation.
pub fn reviews(n: usize, seed: u64) -> Vec<ReviewRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let positive = rng.random_bool(0.5);
            let on_rate = if rng.random_bool(0.08) { 0.5 } else { 0.96 };
            let polar = |rng: &mut ChaCha8Rng| if rng.random_bool(on_rate) { positive } else { !positive };
            let title = match rng.random_range(0..3) {
                0 => {
                    let p = polar(&mut rng);
                    capitalize(pick(&mut rng, if p { POSITIVE } else { NEGATIVE }))
                }
                1 => {
                    let p = polar(&mut rng);
                    format!("{} {}", capitalize(pick(&mut rng, if p { POSITIVE } else { NEGATIVE })), pick_zipf(&mut rng, NOUNS))
                }
                _ => format!("{} review", capitalize(pick_zipf(&mut rng, NOUNS))),
            };
            let sentences = rng.random_range(3..=6);
            let mut parts = Vec::with_capacity(sentences);
            let mut cues = 0;
            for s in 0..sentences {
                if rng.random_bool(0.45) || (s + 1 == sentences && cues == 0) {
                    let p = polar(&mut rng);
                    parts.push(cue_sentence(&mut rng, p));
                    cues += 1;
                } else {
                    parts.push(neutral_sentence(&mut rng));
                }
            }
            let end = if rng.random_bool(0.2) { " !" } else { " ." };
            let body = parts.iter().map(|s| capitalize(s)).collect::<Vec<_>>().join(" . ") + end;
            let label_positive = if rng.random_bool(0.03) { !positive } else { positive };
            ReviewRecord {
                label: if label_positive { 2 } else { 1 },
                title,
                body,
            }
        })
        .collect()
}

fn confusers_for(subtopic: usize) -> Vec<&'static str> {
    CONFUSERS
        .iter()
        .filter(|(a, b, _)| *a == subtopic || *b == subtopic)
        .flat_map(|(_, _, w)| w.iter().copied())
        .collect()
}

fn class_words(class: usize) -> Vec<&'static str> {
    SUBTOPICS
        .iter()
        .filter(|(c, _, _)| *c == class)
        .flat_map(|(_, _, w)| w.iter().copied())
        .collect()
}

/// `n` abstracts spread evenly over the twelve subtopics.
pub fn abstracts(n: usize, seed: u64) -> Vec<AbstractRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let s = rng.random_range(0..SUBTOPICS.len());
            let (class, name, own) = SUBTOPICS[s];
            let siblings = class_words(class);
            let confusers = confusers_for(s);
            let topic = |rng: &mut ChaCha8Rng| -> &'static str {
                let u: f64 = rng.random();
                if u < 0.55 {
                    pick_zipf(rng, own)
                } else if u < 0.75 {
                    pick(rng, &siblings)
                } else if u < 0.9 && !confusers.is_empty() {
                    pick(rng, &confusers)
                } else {
                    let other = rng.random_range(0..SUBTOPICS.len());
                    pick(rng, SUBTOPICS[other].2)
                }
            };
            let sentences = rng.random_range(2..=4);
            let mut text = Vec::new();
            for _ in 0..sentences {
                let mut words = vec![capitalize(pick(&mut rng, ACADEMIC))];
                for _ in 0..rng.random_range(6..12) {
                    let w = match rng.random_range(0..10) {
                        0..=3 => topic(&mut rng),
                        4..=6 => pick(&mut rng, FUNCTION),
                        _ => pick(&mut rng, ACADEMIC),
                    };
                    words.push(w.to_string());
                }
                text.push(words.join(" ") + " .");
            }
            let label = if rng.random_bool(0.03) { (class + rng.random_range(1..3)) % 3 } else { class };
            let mut categories = vec![ARXIV_CODES[label].to_string()];
            if rng.random_bool(0.04) {
                categories.push(ARXIV_CODES[(label + 1) % 3].to_string());
            } else if rng.random_bool(0.1) {
                categories.push("STAT".into());
            }
            AbstractRecord {
                id: format!("synth-{i:06}"),
                categories,
                subtopic: name.to_string(),
                abstract_text: text.join(" "),
            }
        })
        .collect()
}

/// The subtopic kept per class for the distribution-shifted subset.
pub fn shifted_subtopics() -> std::collections::HashMap<usize, String> {
    [(0, "Computation and Language"), (1, "Dynamical Systems"), (2, "Quantum Physics")]
        .into_iter()
        .map(|(c, s)| (c, s.to_string()))
        .collect()
}

/// Every word the generators emit, except the brand names.
pub fn lexicon() -> BTreeSet<String> {
    let mut words: BTreeSet<String> = BTreeSet::new();
    let mut add = |xs: &[&str]| {
        for x in xs {
            for w in crate::corpus::tokenize(x).tokens {
                words.insert(w.clone());
                words.insert(capitalize(&w));
            }
        }
    };
    for xs in [POSITIVE, NEGATIVE, NOUNS, VERBS, TIMES, INTENSIFIERS, FILLERS, ACADEMIC, FUNCTION] {
        add(xs);
    }
    add(&["review", "isn't", "not", "at", "all", "i", "think", "came", "from", "wife", "friend", "brother", "kid", ".", ",", "!", ":"]);
    for (_, _, w) in SUBTOPICS {
        add(w);
    }
    for (_, _, w) in CONFUSERS {
        add(w);
    }
    words
}

/// Embedding table over [`lexicon`]. Polarity words share a direction, topic
/// words share subtopic and class directions, negators have their own.
pub fn embeddings(dimension: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).expect("finite sigma");
    let direction = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..dimension).map(|_| noise.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        v.into_iter().map(|x| x / norm).collect()
    };
    let polarity = direction(&mut rng);
    let negation = direction(&mut rng);
    let classes: Vec<Vec<f64>> = (0..3).map(|_| direction(&mut rng)).collect();
    let subtopics: Vec<Vec<f64>> = (0..SUBTOPICS.len()).map(|_| direction(&mut rng)).collect();
    let mut table = EmbeddingTable::new(dimension);
    for word in lexicon() {
        let lower = word.to_lowercase();
        let mut signal = vec![0.0; dimension];
        let mut add = |dir: &[f64], w: f64| {
            for (s, d) in signal.iter_mut().zip(dir) {
                *s += w * d;
            }
        };
        let own = direction(&mut rng);
        if POSITIVE.contains(&lower.as_str()) {
            add(&polarity, 0.4);
            add(&own, 2.0);
        } else if NEGATIVE.contains(&lower.as_str()) {
            add(&polarity, -0.4);
            add(&own, 2.0);
        } else if ["not", "n't", "never", "no"].contains(&lower.as_str()) {
            add(&negation, 3.0);
        }
        for (s, (c, _, ws)) in SUBTOPICS.iter().enumerate() {
            if ws.contains(&lower.as_str()) {
                add(&subtopics[s], 2.5);
                add(&classes[*c], 1.5);
            }
        }
        for (a, b, ws) in CONFUSERS {
            if ws.contains(&lower.as_str()) {
                add(&subtopics[*a], 1.2);
                add(&subtopics[*b], 1.2);
            }
        }
        let v: Vec<f64> = signal.iter().map(|s| s + noise.sample(&mut rng)).collect();
        table.insert(word, &v).expect("dimension matches");
    }
    table
}

pub fn write_reviews_csv(path: impl AsRef<Path>, records: &[ReviewRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    for r in records {
        w.write_record([r.label.to_string().as_str(), &r.title, &r.body])
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_abstracts_jsonl(path: impl AsRef<Path>, records: &[AbstractRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthPaths {
    pub reviews: PathBuf,
    pub abstracts: PathBuf,
    pub embeddings: PathBuf,
}

/// Writes `reviews.csv`, `abstracts.jsonl` and `embeddings.txt` into `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, n_reviews: usize, n_abstracts: usize, seed: u64) -> Result<SynthPaths> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = SynthPaths {
        reviews: dir.join("reviews.csv"),
        abstracts: dir.join("abstracts.jsonl"),
        embeddings: dir.join("embeddings.txt"),
    };
    write_reviews_csv(&paths.reviews, &reviews(n_reviews, seed))?;
    write_abstracts_jsonl(&paths.abstracts, &abstracts(n_abstracts, seed.wrapping_add(1)))?;
    embeddings(DEFAULT_DIMENSION, seed.wrapping_add(2)).save(&paths.embeddings)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_amazon, load_arxiv, tokenize};

    #[test]
    fn seeded_and_loadable() {
        assert_eq!(reviews(20, 4), reviews(20, 4));
        assert_ne!(reviews(20, 4), reviews(20, 5));
        let dir = tempfile::tempdir().unwrap();
        let p = write_corpus(dir.path(), 200, 300, 9).unwrap();
        let r = load_amazon(&p.reviews).unwrap();
        assert_eq!(r.len(), 200);
        let a = load_arxiv(&p.abstracts).unwrap();
        assert!(a.len() < 300 && a.len() > 250, "{}", a.len());
        let t = EmbeddingTable::load(&p.embeddings, DEFAULT_DIMENSION).unwrap();
        assert_eq!(t.fingerprint(), embeddings(DEFAULT_DIMENSION, 11).fingerprint());
    }

    #[test]
    fn vocabulary_coverage() {
        let table = embeddings(16, 0);
        let mut oov = BTreeSet::new();
        let mut total = 0;
        for r in reviews(300, 1) {
            for t in tokenize(&format!("{}: {}", r.title, r.body)).tokens {
                total += 1;
                if table.get(&t).is_none() {
                    oov.insert(t);
                }
            }
        }
        for a in abstracts(300, 2) {
            for t in tokenize(&a.abstract_text).tokens {
                total += 1;
                if table.get(&t).is_none() {
                    oov.insert(t);
                }
            }
        }
        assert!(total > 1000);
        let expected: BTreeSet<String> = BRANDS.iter().map(|b| b.to_string()).collect();
        assert!(oov.is_subset(&expected), "{oov:?}");
    }
}
