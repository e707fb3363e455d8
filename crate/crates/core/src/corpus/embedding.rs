use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TokenSequence;
use crate::{Error, Result};

pub const DEFAULT_DIMENSION: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    ZeroVector,
}

/// Frozen word vectors. Vectors are stored contiguously, one row per word.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    words: Vec<String>,
    pub oov_policy: OovPolicy,
}

/// Row-major `rows × dim` matrix of embedded tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedMatrix {
    pub rows: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl EmbeddedMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Contiguous slice covering rows `[start, start + count)`.
    pub fn window(&self, start: usize, count: usize) -> &[f64] {
        &self.data[start * self.dim..(start + count) * self.dim]
    }

    /// Appends zero rows until there are at least `rows` of them.
    pub fn pad_to(&mut self, rows: usize) {
        if self.rows < rows {
            self.data.resize(rows * self.dim, 0.0);
            self.rows = rows;
        }
    }
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            index: HashMap::new(),
            data: Vec::new(),
            words: Vec::new(),
            oov_policy: OovPolicy::ZeroVector,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Inserts or replaces a word vector.
    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "vector has {} entries, table dimension is {}",
                vector.len(),
                self.dimension
            )));
        }
        let word = word.into();
        match self.index.get(&word) {
            Some(&row) => {
                self.data[row * self.dimension..(row + 1) * self.dimension].copy_from_slice(vector)
            }
            None => {
                self.index.insert(word.clone(), self.words.len());
                self.words.push(word);
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    /// Exact match first, then the lowercased token.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.row_of(token).map(|row| self.row_vector(row))
    }

    pub fn row_of(&self, token: &str) -> Option<usize> {
        match self.index.get(token) {
            Some(&r) => Some(r),
            None => self.index.get(&token.to_lowercase()).copied(),
        }
    }

    pub fn row_vector(&self, row: usize) -> &[f64] {
        &self.data[row * self.dimension..(row + 1) * self.dimension]
    }

    /// Embeds pre-resolved table rows (`None` = out of vocabulary).
    pub fn embed_rows(&self, rows: &[Option<usize>]) -> EmbeddedMatrix {
        let dim = self.dimension;
        let mut m = EmbeddedMatrix::zeros(rows.len(), dim);
        for (i, r) in rows.iter().enumerate() {
            if let Some(r) = *r {
                m.data[i * dim..(i + 1) * dim].copy_from_slice(self.row_vector(r));
            }
        }
        m
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Reads the whitespace-separated text format: a token followed by
    /// `dimension` decimals per line.
    pub fn load(path: impl AsRef<Path>, dimension: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = Self::new(dimension);
        let mut values = Vec::with_capacity(dimension);
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: n as u64 + 1,
                message,
            };
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line");
            values.clear();
            for p in parts {
                values.push(
                    p.parse::<f64>()
                        .map_err(|e| parse_err(format!("bad value {p:?}: {e}")))?,
                );
            }
            if values.len() != dimension {
                return Err(parse_err(format!(
                    "expected {dimension} values, found {}",
                    values.len()
                )));
            }
            table.insert(word, &values)?;
        }
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (row, word) in self.words.iter().enumerate() {
            let mut line = word.clone();
            for v in &self.data[row * self.dimension..(row + 1) * self.dimension] {
                line.push(' ');
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Hex digest over dimension, words and vectors. Model files record it so
    /// a model cannot be loaded against different embeddings.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dimension as u64).to_le_bytes());
        for (row, word) in self.words.iter().enumerate() {
            h.update(word.as_bytes());
            h.update([0u8]);
            for v in &self.data[row * self.dimension..(row + 1) * self.dimension] {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One row per token; tokens missing from the table get a zero row.
pub fn embed(seq: &TokenSequence, table: &EmbeddingTable) -> EmbeddedMatrix {
    let dim = table.dimension();
    let mut m = EmbeddedMatrix::zeros(seq.len(), dim);
    for (i, tok) in seq.tokens.iter().enumerate() {
        if let Some(v) = table.get(tok) {
            m.data[i * dim..(i + 1) * dim].copy_from_slice(v);
        }
    }
    m
}
