use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Document;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl DatasetSplit {
    /// Documents of `ids`, in the order of `ids`.
    pub fn select<'a>(docs: &'a [Document], ids: &[String]) -> Vec<&'a Document> {
        let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
        ids.iter().filter_map(|id| by_id.get(id.as_str()).copied()).collect()
    }
}

/// Seeded shuffle of the documents, cut into train / validation / test of
/// exactly the requested sizes.
pub fn make_splits(
    docs: &[Document],
    sizes: (usize, usize, usize),
    seed: u64,
) -> Result<DatasetSplit> {
    let (a, b, c) = sizes;
    if a + b + c > docs.len() {
        return Err(Error::Insufficient(format!(
            "split sizes {a}+{b}+{c} exceed {} documents",
            docs.len()
        )));
    }
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let ids = |range: std::ops::Range<usize>| -> Vec<String> {
        order[range].iter().map(|&i| docs[i].id.clone()).collect()
    };
    Ok(DatasetSplit {
        train: ids(0..a),
        validation: ids(a..a + b),
        test: ids(a + b..a + b + c),
        seed,
    })
}

/// Keeps documents whose subtopic is the one allowed for their class.
/// Classes absent from `allowed` keep nothing.
pub fn subtopic_filter(docs: &[Document], allowed: &HashMap<usize, String>) -> Vec<Document> {
    docs.iter()
        .filter(|d| {
            allowed
                .get(&d.label)
                .is_some_and(|s| d.subtopic.as_deref() == Some(s.as_str()))
        })
        .cloned()
        .collect()
}

/// True when the three id lists are pairwise disjoint and free of repeats.
pub fn is_disjoint(split: &DatasetSplit) -> bool {
    let mut seen = HashSet::new();
    split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
        .all(|id| seen.insert(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("d{i}"),
                text: String::new(),
                label: i % 3,
                subtopic: Some(if i % 2 == 0 { "A" } else { "B" }.to_string()),
            })
            .collect()
    }

    #[test]
    fn desk_scale_sizes_cover_disjointly() {
        let d = docs(17_500);
        let s = make_splits(&d, (6000, 1500, 10_000), 3).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (6000, 1500, 10_000));
        assert!(is_disjoint(&s));
    }

    #[test]
    fn too_large_is_error() {
        assert!(make_splits(&docs(10), (5, 5, 1), 0).is_err());
    }

    #[test]
    fn filter_keeps_only_allowed_subtopic() {
        let mut d = docs(2);
        d[0].subtopic = Some("Databases".into());
        d[0].label = 0;
        d[1].subtopic = Some("Computation and Language".into());
        d[1].label = 0;
        let allowed = HashMap::from([(0, "Computation and Language".to_string())]);
        let kept = subtopic_filter(&d, &allowed);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "d1");
    }

    proptest! {
        #[test]
        fn splits_are_deterministic_and_sized(n in 0usize..200, a in 0usize..80, b in 0usize..60, c in 0usize..60, seed: u64) {
            let d = docs(n);
            let r1 = make_splits(&d, (a, b, c), seed);
            if a + b + c > n {
                prop_assert!(r1.is_err());
            } else {
                let r1 = r1.unwrap();
                let r2 = make_splits(&d, (a, b, c), seed).unwrap();
                prop_assert_eq!(&r1, &r2);
                prop_assert_eq!((r1.train.len(), r1.validation.len(), r1.test.len()), (a, b, c));
                prop_assert!(is_disjoint(&r1));
            }
        }

        #[test]
        fn filter_is_subset(n in 0usize..100, allow_a: bool) {
            let d = docs(n);
            let sub = if allow_a { "A" } else { "B" };
            let allowed: HashMap<usize, String> = (0..3).map(|c| (c, sub.to_string())).collect();
            let kept = subtopic_filter(&d, &allowed);
            prop_assert!(kept.len() <= d.len());
            for k in &kept {
                prop_assert!(d.iter().any(|x| x.id == k.id));
                prop_assert_eq!(k.subtopic.as_deref(), Some(sub));
            }
        }
    }
}
