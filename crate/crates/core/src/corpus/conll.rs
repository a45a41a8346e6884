//! CoNLL-U style dependency input. Only ID (column 1), HEAD (column 7) and
//! DEPREL (column 8) are read; multiword ranges (`1-2`) and empty nodes
//! (`1.1`) are skipped. Sentences are concatenated in order.

use std::path::Path;

use super::document::{DepEdge, Document};
use crate::error::{read_to_string, Error, Result};

/// One parsed token row: 0-based head within the document, `None` for roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseRow {
    pub head: Option<usize>,
    pub label: String,
}

pub fn read_conll(path: &Path) -> Result<Vec<ParseRow>> {
    parse_conll_str(&read_to_string(path)?, path)
}

pub fn parse_conll_str(input: &str, path: &Path) -> Result<Vec<ParseRow>> {
    let mut rows = Vec::new();
    let mut sentence_base = 0;
    let mut in_sentence = 0;
    for (n, line) in input.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            sentence_base += in_sentence;
            in_sentence = 0;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(path, n + 1, format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| Error::parse(path, n + 1, format!("bad token id `{}`", cols[0])))?;
        if id != in_sentence + 1 {
            return Err(Error::parse(path, n + 1, format!("token id {id} out of sequence")));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::parse(path, n + 1, format!("bad head `{}`", cols[6])))?;
        rows.push(ParseRow {
            head: (head > 0).then(|| sentence_base + head - 1),
            label: cols[7].to_string(),
        });
        in_sentence += 1;
    }
    Ok(rows)
}

/// Replaces the document's edges with undirected (child, head) pairs from
/// `parse`, or with the linear chain when `parse` is `None`.
pub fn attach_dependencies(mut doc: Document, parse: Option<&[ParseRow]>) -> Result<Document> {
    let Some(rows) = parse else {
        doc.linear_chain();
        return Ok(doc);
    };
    if rows.len() != doc.real_len() {
        return Err(Error::Alignment {
            parse_tokens: rows.len(),
            doc_tokens: doc.real_len(),
        });
    }
    let mut edges = Vec::new();
    for (child, row) in rows.iter().enumerate() {
        if let Some(head) = row.head {
            if head >= rows.len() {
                return Err(Error::invalid(format!("head {head} outside {} tokens", rows.len())));
            }
            if head != child {
                edges.push(DepEdge {
                    child,
                    head,
                    label: row.label.clone(),
                });
            }
        }
    }
    doc.dep_edges = edges;
    Ok(doc)
}
