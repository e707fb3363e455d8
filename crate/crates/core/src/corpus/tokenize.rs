//! Penn-style word tokenizer with byte offsets back into the source text.

use serde::{Deserialize, Serialize};

/// Tokens of a text together with the byte span each one occupies.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub offsets: Vec<(usize, usize)>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Keeps the first `max_len` tokens.
    pub fn truncated(mut self, max_len: usize) -> Self {
        self.tokens.truncate(max_len);
        self.offsets.truncate(max_len);
        self
    }

    /// Subsequence made of the given positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> TokenSequence {
        TokenSequence {
            tokens: positions.iter().map(|&i| self.tokens[i].clone()).collect(),
            offsets: positions.iter().map(|&i| self.offsets[i]).collect(),
        }
    }

    /// Space-joined tokens of `[start, start + count)`.
    pub fn span_text(&self, start: usize, count: usize) -> String {
        let end = (start + count).min(self.tokens.len());
        self.tokens[start.min(end)..end].join(" ")
    }

    /// Byte range in the source text covered by a token span.
    pub fn char_range(&self, start: usize, count: usize) -> Option<(usize, usize)> {
        if count == 0 || start + count > self.offsets.len() {
            return None;
        }
        Some((self.offsets[start].0, self.offsets[start + count - 1].1))
    }
}

const CLITICS: [&str; 6] = ["'s", "'d", "'m", "'ll", "'re", "'ve"];

/// Splits `text` into word and punctuation tokens. Case is preserved,
/// punctuation becomes separate tokens and English contractions are split
/// (`didn't` → `did`, `n't`; `I'd` → `I`, `'d`). Two consecutive apostrophes
/// form the single token `''`.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut out = TokenSequence::default();
    let mut chunk_start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), chunk_start) {
            (true, Some(s)) => {
                tokenize_chunk(text, s, i, &mut out);
                chunk_start = None;
            }
            (false, None) => chunk_start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = chunk_start {
        tokenize_chunk(text, s, text.len(), &mut out);
    }
    out
}

fn push(text: &str, start: usize, end: usize, out: &mut TokenSequence) {
    if start < end {
        out.tokens.push(text[start..end].to_string());
        out.offsets.push((start, end));
    }
}

fn tokenize_chunk(text: &str, start: usize, end: usize, out: &mut TokenSequence) {
    let chars: Vec<(usize, char)> = text[start..end]
        .char_indices()
        .map(|(i, c)| (start + i, c))
        .collect();
    let byte_at = |idx: usize| chars.get(idx).map_or(end, |&(b, _)| b);
    let is_word = |c: char| c.is_alphanumeric();

    let mut i = 0;
    // Start of the current alphanumeric run, as a char index.
    let mut word_start: Option<usize> = None;
    while i < chars.len() {
        let c = chars[i].1;
        if is_word(c) {
            word_start.get_or_insert(i);
            i += 1;
            continue;
        }
        // Decimal separators between digits stay inside the word.
        if (c == '.' || c == ',')
            && i > 0
            && chars[i - 1].1.is_ascii_digit()
            && word_start.is_some()
            && chars.get(i + 1).is_some_and(|&(_, n)| n.is_ascii_digit())
        {
            i += 1;
            continue;
        }
        if c == '\'' {
            if chars.get(i + 1).is_some_and(|&(_, n)| n == '\'') {
                flush_word(text, &mut word_start, byte_at(i), &byte_at, out);
                push(text, byte_at(i), byte_at(i + 2), out);
                i += 2;
                continue;
            }
            if let Some(ws) = word_start {
                let rest: String = chars[i..].iter().map(|&(_, c)| c).collect();
                let lower = rest.to_lowercase();
                let boundary_after = |len: usize| {
                    chars
                        .get(i + len)
                        .is_none_or(|&(_, n)| !n.is_alphanumeric())
                };
                // n't: the n belongs to the clitic.
                if lower.starts_with("'t")
                    && boundary_after(2)
                    && i - ws >= 2
                    && chars[i - 1].1.eq_ignore_ascii_case(&'n')
                {
                    push(text, byte_at(ws), byte_at(i - 1), out);
                    push(text, byte_at(i - 1), byte_at(i + 2), out);
                    word_start = None;
                    i += 2;
                    continue;
                }
                if let Some(cl) = CLITICS
                    .iter()
                    .find(|cl| lower.starts_with(**cl) && boundary_after(cl.len()))
                {
                    flush_word(text, &mut word_start, byte_at(i), &byte_at, out);
                    push(text, byte_at(i), byte_at(i + cl.len()), out);
                    i += cl.len();
                    continue;
                }
            }
        }
        flush_word(text, &mut word_start, byte_at(i), &byte_at, out);
        // Runs of periods ("...") stay together; everything else is one char.
        let mut j = i + 1;
        if c == '.' {
            while chars.get(j).is_some_and(|&(_, n)| n == '.') {
                j += 1;
            }
        }
        push(text, byte_at(i), byte_at(j), out);
        i = j;
    }
    flush_word(text, &mut word_start, end, &byte_at, out);
}

fn flush_word(
    text: &str,
    word_start: &mut Option<usize>,
    end_byte: usize,
    byte_at: &dyn Fn(usize) -> usize,
    out: &mut TokenSequence,
) {
    if let Some(ws) = word_start.take() {
        push(text, byte_at(ws), end_byte, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text).tokens
    }

    #[test]
    fn splits_negation_contraction() {
        assert_eq!(toks("we didn't notice"), ["we", "did", "n't", "notice"]);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \n\t").is_empty());
    }

    #[test]
    fn double_apostrophe_inch_mark() {
        assert_eq!(toks("8'' tall."), ["8", "''", "tall", "."]);
        assert_eq!(
            toks("roughly 3'' across it."),
            ["roughly", "3", "''", "across", "it", "."]
        );
    }

    #[test]
    fn clitics_and_punctuation() {
        assert_eq!(
            toks("as I'd expected. The lid"),
            ["as", "I", "'d", "expected", ".", "The", "lid"]
        );
        assert_eq!(
            toks("HOnestly the cables aren't even in the BOX!"),
            ["HOnestly", "the", "cables", "are", "n't", "even", "in", "the", "BOX", "!"]
        );
        assert_eq!(
            toks("Finite-state Transducers (FST) compose"),
            ["Finite", "-", "state", "Transducers", "(", "FST", ")", "compose"]
        );
        assert_eq!(toks("know ..."), ["know", "..."]);
        assert_eq!(toks("it's 0.25"), ["it", "'s", "0.25"]);
    }

    #[test]
    fn amazon_title_join() {
        assert_eq!(
            toks("OK but not what I wanted: These would be ok"),
            ["OK", "but", "not", "what", "I", "wanted", ":", "These", "would", "be", "ok"]
        );
    }

    #[test]
    fn offsets_round_trip_on_review_text() {
        let text = "Fine for the price: The strap wasn't as sturdy as I'd hoped. \
                    It's a solid 10'' wide and the zipper doesn't catch, which I'll take.Would buy \
                    again if they'd fix the clasp.";
        let seq = tokenize(text);
        for (tok, &(s, e)) in seq.tokens.iter().zip(&seq.offsets) {
            assert_eq!(&text[s..e], tok);
        }
        let joined = seq.span_text(0, seq.len());
        assert!(joined.contains("strap was n't as sturdy as I 'd hoped ."));
        assert!(joined.contains("10 '' wide"));
        assert!(joined.contains("I 'll take ."));
    }

    #[test]
    fn non_ascii_boundaries() {
        let text = "Schrödinger's café…naïve";
        let seq = tokenize(text);
        for (tok, &(s, e)) in seq.tokens.iter().zip(&seq.offsets) {
            assert_eq!(&text[s..e], tok);
        }
        assert_eq!(seq.tokens, ["Schrödinger", "'s", "café", "…", "naïve"]);
    }
}
