//! Dataset ingestion: numeric CSV, bag-of-words text, and label files.
//!
//! Bag-of-words files hold one document per line as whitespace-separated
//! `token:count` pairs with positive integer counts. Repeated tokens on a
//! line are summed. The vocabulary is the sorted set of distinct tokens.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::cluster::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BowData {
    pub vocab: Vec<String>,
    pub docs: Vec<Document>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<CsvData> {
    parse_csv(&read_text(path.as_ref())?)
}

/// Parses rectangular numeric CSV. A first row with any non-numeric cell is
/// taken as a header.
pub fn parse_csv(text: &str) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(idx + 1, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> = rec.iter().map(|c| c.parse::<f64>()).collect();
        if header.is_none() && rows.is_empty() && parsed.iter().any(|p| p.is_err()) {
            header = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(parse_err(line, format!("expected {w} columns, found {}", rec.len())))
            }
            _ => width = Some(rec.len()),
        }
        let mut row = Vec::with_capacity(rec.len());
        for (col, (cell, p)) in rec.iter().zip(parsed).enumerate() {
            match p {
                Ok(v) if v.is_finite() => row.push(v),
                _ => return Err(parse_err(line, format!("column {}: {cell:?} is not a finite number", col + 1))),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    Ok(CsvData { header, rows })
}

pub fn ingest_bow(path: impl AsRef<Path>) -> Result<BowData> {
    parse_bow(&read_text(path.as_ref())?)
}

pub fn parse_bow(text: &str) -> Result<BowData> {
    let mut raw: Vec<BTreeMap<&str, u32>> = Vec::new();
    let mut vocab: BTreeSet<&str> = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut doc: BTreeMap<&str, u32> = BTreeMap::new();
        for pair in line.split_whitespace() {
            let (tok, count) = pair
                .rsplit_once(':')
                .ok_or_else(|| parse_err(lineno, format!("{pair:?} is not token:count")))?;
            if tok.is_empty() {
                return Err(parse_err(lineno, format!("{pair:?} has an empty token")));
            }
            let count: u32 = count
                .parse()
                .map_err(|_| parse_err(lineno, format!("{pair:?} has a non-integer count")))?;
            if count == 0 {
                return Err(parse_err(lineno, format!("{pair:?} has a nonpositive count")));
            }
            let slot = doc.entry(tok).or_insert(0);
            *slot = slot
                .checked_add(count)
                .ok_or_else(|| parse_err(lineno, "count overflow"))?;
            vocab.insert(tok);
        }
        raw.push(doc);
    }
    if raw.is_empty() {
        return Err(parse_err(1, "no documents"));
    }
    let vocab: Vec<&str> = vocab.into_iter().collect();
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let docs = raw
        .into_iter()
        .map(|d| Document::from_counts(d.into_iter().map(|(t, c)| (index[t], c))))
        .collect();
    Ok(BowData {
        vocab: vocab.into_iter().map(str::to_string).collect(),
        docs,
    })
}

/// One label per line, aligned with data rows. Blank lines are rejected.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    parse_labels(&read_text(path.as_ref())?)
}

pub fn parse_labels(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |p| p + 1);
    for (i, l) in lines[..last].iter().enumerate() {
        let l = l.trim();
        if l.is_empty() {
            return Err(parse_err(i + 1, "empty label"));
        }
        out.push(l.to_string());
    }
    if out.is_empty() {
        return Err(parse_err(1, "no labels"));
    }
    Ok(out)
}
