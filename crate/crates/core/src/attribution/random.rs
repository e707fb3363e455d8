use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Explanation, Fragment, FragmentKind, MethodId};
use crate::textcnn::FilterSpan;

/// Random words: up to `m` evidence and `m` counter-evidence positions drawn
/// without replacement, the two lists disjoint.
pub fn random_words(n_tokens: usize, m: usize, target_class: usize, seed: u64) -> Explanation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = (0..n_tokens).collect();
    positions.shuffle(&mut rng);
    let frag = |&start: &usize| Fragment {
        start,
        count: 1,
        kind: FragmentKind::Word,
        score: 0.0,
    };
    let evidence: Vec<Fragment> = positions.iter().take(m).map(frag).collect();
    let counter: Vec<Fragment> = positions.iter().skip(m).take(m).map(frag).collect();
    Explanation {
        method: MethodId::RandomWords,
        target_class,
        evidence,
        counter_evidence: counter,
        m,
    }
}

/// Random non-overlapping n-grams. For each pick the length is drawn
/// uniformly from the sizes that still fit somewhere, then the start
/// uniformly among free positions.
pub fn random_ngrams(
    n_tokens: usize,
    m: usize,
    sizes: &[usize],
    target_class: usize,
    seed: u64,
) -> Explanation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: Vec<FilterSpan> = Vec::new();
    let mut picks = Vec::new();
    while picks.len() < 2 * m {
        let free = |len: usize, taken: &[FilterSpan]| -> Vec<FilterSpan> {
            if len > n_tokens {
                return Vec::new();
            }
            (0..=n_tokens - len)
                .map(|start| FilterSpan { start, len })
                .filter(|s| !taken.iter().any(|t| t.overlaps(s)))
                .collect()
        };
        let usable: Vec<usize> = sizes
            .iter()
            .copied()
            .filter(|&n| n > 0 && !free(n, &taken).is_empty())
            .collect();
        let Some(&len) = usable.choose(&mut rng) else {
            break;
        };
        let span = *free(len, &taken).choose(&mut rng).expect("non-empty");
        taken.push(span);
        picks.push(Fragment {
            start: span.start,
            count: span.len,
            kind: FragmentKind::Ngram,
            score: 0.0,
        });
    }
    let counter = picks.split_off(picks.len().min(m));
    Explanation {
        method: MethodId::RandomNgrams,
        target_class,
        evidence: picks,
        counter_evidence: counter,
        m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhausts_short_text() {
        let e = random_words(1, 3, 0, 7);
        assert_eq!(e.evidence.len(), 1);
        assert!(e.counter_evidence.is_empty());
    }

    #[test]
    fn seeded() {
        assert_eq!(random_words(20, 3, 0, 42), random_words(20, 3, 0, 42));
        assert_eq!(random_ngrams(20, 3, &[2, 3, 4], 0, 42), random_ngrams(20, 3, &[2, 3, 4], 0, 42));
    }

    #[test]
    fn ngram_picks_disjoint_over_many_seeds() {
        for seed in 0..1000 {
            let e = random_ngrams(10, 3, &[2, 3, 4], 1, seed);
            let all: Vec<&Fragment> = e.evidence.iter().chain(&e.counter_evidence).collect();
            assert!(e.evidence.len() <= 3 && e.counter_evidence.len() <= 3);
            for (i, a) in all.iter().enumerate() {
                assert!([2, 3, 4].contains(&a.count));
                assert!(a.start + a.count <= 10);
                for b in &all[i + 1..] {
                    assert!(!a.span().overlaps(&b.span()), "seed {seed}: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn too_short_for_any_ngram() {
        let e = random_ngrams(1, 3, &[2, 3, 4], 0, 0);
        assert!(e.evidence.is_empty() && e.counter_evidence.is_empty());
    }
}
