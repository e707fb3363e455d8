use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::Document;
use crate::{Error, Result};

pub const AMAZON_CLASSES: [&str; 2] = ["Negative", "Positive"];
pub const ARXIV_CLASSES: [&str; 3] = ["Computer Science", "Mathematics", "Physics"];
pub const ARXIV_CODES: [&str; 3] = ["CS", "MA", "PH"];

/// Reads comma-separated `label,title,body` records (label 1 = negative,
/// 2 = positive). The document text is `title + ": " + body`.
pub fn load_amazon(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut docs = Vec::new();
    for record in reader.records() {
        let parse_err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 fields (label, title, body), found {}", record.len()),
            ));
        }
        let label = match record[0].trim() {
            "1" => 0,
            "2" => 1,
            other => return Err(parse_err(line, format!("unknown polarity label {other:?}"))),
        };
        docs.push(Document {
            id: format!("amazon-{}", docs.len()),
            text: format!("{}: {}", &record[1], &record[2]),
            label,
            subtopic: None,
        });
    }
    Ok(docs)
}

#[derive(Deserialize)]
struct ArxivRecord {
    id: Option<String>,
    categories: Option<Vec<String>>,
    subtopic: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: String,
}

/// Reads line-delimited JSON records `{id?, categories, subtopic, abstract}`.
/// Records listed under more than one of CS / MA / PH are dropped.
pub fn load_arxiv(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut ids = BTreeSet::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = n as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let rec: ArxivRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let categories = rec
            .categories
            .ok_or_else(|| parse_err("missing categories field".into()))?;
        let mains: BTreeSet<usize> = categories
            .iter()
            .filter_map(|c| ARXIV_CODES.iter().position(|code| code == c))
            .collect();
        if mains.is_empty() {
            return Err(parse_err(format!(
                "no main category among {categories:?}"
            )));
        }
        if mains.len() > 1 {
            continue;
        }
        let id = rec.id.unwrap_or_else(|| format!("arxiv-{lineno}"));
        if !ids.insert(id.clone()) {
            return Err(parse_err(format!("duplicate id {id:?}")));
        }
        docs.push(Document {
            id,
            text: rec.abstract_text,
            label: *mains.iter().next().unwrap(),
            subtopic: rec.subtopic,
        });
    }
    Ok(docs)
}
