use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::textcnn::FilterSpan;

/// A scored span considered for an explanation list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub start: usize,
    pub len: usize,
    pub score: f64,
    /// Whether some filter's pooled span is exactly this n-gram.
    pub fired: bool,
}

impl Candidate {
    pub fn new(start: usize, len: usize, score: f64) -> Self {
        Self {
            start,
            len,
            score,
            fired: false,
        }
    }

    pub fn span(&self) -> FilterSpan {
        FilterSpan {
            start: self.start,
            len: self.len,
        }
    }
}

fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.start.cmp(&b.start))
        .then(a.len.cmp(&b.len))
}

/// Greedy descending-score pick of up to `m` candidates. Ties go to the
/// smaller start, then the shorter span. With `require_nonoverlap`, a
/// candidate overlapping an already picked span is skipped; with
/// `fired_only`, candidates no filter pooled are ignored.
pub fn select_fragments(
    candidates: &[Candidate],
    m: usize,
    require_nonoverlap: bool,
    fired_only: bool,
) -> Vec<Candidate> {
    select_excluding(candidates, m, require_nonoverlap, fired_only, &[])
}

pub(crate) fn select_excluding(
    candidates: &[Candidate],
    m: usize,
    require_nonoverlap: bool,
    fired_only: bool,
    excluded: &[FilterSpan],
) -> Vec<Candidate> {
    let mut pool: Vec<Candidate> = candidates
        .iter()
        .filter(|c| !fired_only || c.fired)
        .filter(|c| !excluded.contains(&c.span()))
        .copied()
        .collect();
    pool.sort_by(rank);
    let mut picked: Vec<Candidate> = Vec::with_capacity(m);
    for c in pool {
        if picked.len() == m {
            break;
        }
        if picked.iter().any(|p| p.span() == c.span()) {
            continue;
        }
        if require_nonoverlap && picked.iter().any(|p| p.span().overlaps(&c.span())) {
            continue;
        }
        picked.push(c);
    }
    picked
}

/// Evidence is the top of the ranking; counter-evidence the bottom (most
/// negative first), never repeating an evidence span.
pub(crate) fn evidence_and_counter(
    candidates: &[Candidate],
    m: usize,
    require_nonoverlap: bool,
) -> (Vec<Candidate>, Vec<Candidate>) {
    let evidence = select_excluding(candidates, m, require_nonoverlap, false, &[]);
    let negated: Vec<Candidate> = candidates
        .iter()
        .map(|c| Candidate {
            score: -c.score,
            ..*c
        })
        .collect();
    let taken: Vec<FilterSpan> = evidence.iter().map(|c| c.span()).collect();
    let counter = select_excluding(&negated, m, require_nonoverlap, false, &taken)
        .into_iter()
        .map(|c| Candidate {
            score: -c.score,
            ..c
        })
        .collect();
    (evidence, counter)
}
