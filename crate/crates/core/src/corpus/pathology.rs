//! Canonical pathology record file: UTF-8, one JSON object per line with
//! fields `id`, `source`, `text`, `mentions`, `relations`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::candidates::{generate_candidates, Task};
use super::document::{Document, EntityKind, GoldRelation, ParsedCorpus, RelationInstance, Source, PATHOLOGY_KINDS};
use crate::error::{io_err, read_to_string, Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    source: Source,
    text: String,
    mentions: Vec<MentionRecord>,
    relations: Vec<RelationRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MentionRecord {
    kind: String,
    char_start: usize,
    char_end: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationRecord {
    head: usize,
    tail: usize,
    kind: String,
}

pub fn parse_pathology_records(path: &Path) -> Result<ParsedCorpus> {
    parse_pathology_str(&read_to_string(path)?, path)
}

pub fn parse_pathology_str(input: &str, path: &Path) -> Result<ParsedCorpus> {
    let mut corpus = ParsedCorpus::default();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc = parse_record(line).map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
        corpus.documents.push(doc);
    }
    corpus.instances = all_subtask_instances(&corpus.documents);
    Ok(corpus)
}

/// Parses one record line into a document (with the linear-chain fallback graph).
pub fn parse_record(line: &str) -> Result<Document> {
    let rec: Record = serde_json::from_str(line).map_err(|e| Error::invalid(e.to_string()))?;
    let mut doc = Document::from_text(rec.id, rec.source, rec.text);
    for (i, m) in rec.mentions.iter().enumerate() {
        let kind = EntityKind::parse_pathology(&m.kind)?;
        doc.add_mention(format!("M{i}"), kind, m.char_start, m.char_end, None)?;
    }
    for r in rec.relations {
        EntityKind::parse_pathology(&r.kind)?;
        if r.head >= doc.mentions.len() || r.tail >= doc.mentions.len() || r.head == r.tail {
            return Err(Error::invalid(format!(
                "relation {}->{} does not reference two distinct mentions",
                r.head, r.tail
            )));
        }
        doc.relations.push(GoldRelation {
            head: format!("M{}", r.head),
            tail: format!("M{}", r.tail),
            kind: r.kind,
        });
    }
    doc.linear_chain();
    Ok(doc)
}

/// Serializes a document as one canonical record line (no trailing newline).
pub fn to_record(doc: &Document) -> Result<String> {
    let index = |id: &str| {
        doc.mention_index(id)
            .ok_or_else(|| Error::UnknownEntity(id.to_string()))
    };
    let rec = Record {
        id: doc.id.clone(),
        source: doc.source,
        text: doc.text.clone(),
        mentions: doc
            .mentions
            .iter()
            .map(|m| MentionRecord {
                kind: m.kind.as_str().to_string(),
                char_start: m.char_start,
                char_end: m.char_end,
            })
            .collect(),
        relations: doc
            .relations
            .iter()
            .map(|r| {
                Ok(RelationRecord {
                    head: index(&r.head)?,
                    tail: index(&r.tail)?,
                    kind: r.kind.clone(),
                })
            })
            .collect::<Result<_>>()?,
    };
    serde_json::to_string(&rec).map_err(|e| Error::invalid(e.to_string()))
}

pub fn write_records(path: &Path, docs: &[Document]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    for d in docs {
        writeln!(f, "{}", to_record(d)?).map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))
}

/// Candidate instances of one pathology variable across documents.
pub fn subtask_instances(docs: &[Document], kind: EntityKind) -> Vec<RelationInstance> {
    docs.iter()
        .flat_map(|d| generate_candidates(d, Task::Pathology(kind)))
        .collect()
}

fn all_subtask_instances(docs: &[Document]) -> Vec<RelationInstance> {
    PATHOLOGY_KINDS
        .iter()
        .flat_map(|&k| subtask_instances(docs, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIZE_RECORD: &str = r#"{"id":"r1","source":"TCGA","text":"Kidney tumor. The maximum diameter of the neoplasm is 11 cm.","mentions":[{"kind":"Type","char_start":0,"char_end":6},{"kind":"Size","char_start":18,"char_end":59}],"relations":[{"head":0,"tail":1,"kind":"Size"}]}"#;

    #[test]
    fn size_record_yields_one_size_instance() {
        let c = parse_pathology_str(SIZE_RECORD, Path::new("r")).unwrap();
        let sizes = subtask_instances(&c.documents, EntityKind::Size);
        assert_eq!(sizes.len(), 1);
        assert_eq!(sizes[0].label, 1);
        let m = &c.documents[0].mentions[1];
        let covered: Vec<&str> = (m.token_span.0..=m.token_span.1).map(|i| c.documents[0].surface(i)).collect();
        assert_eq!(covered.join(" "), "maximum diameter of the neoplasm is 11 cm");
    }

    #[test]
    fn zero_relations_keeps_document() {
        let rec = r#"{"id":"r2","source":"TFAH","text":"Benign tissue.","mentions":[],"relations":[]}"#;
        let c = parse_pathology_str(rec, Path::new("r")).unwrap();
        assert_eq!(c.documents.len(), 1);
        assert!(c.instances.is_empty());
    }

    #[test]
    fn unknown_kind_lists_legal_kinds() {
        let rec = r#"{"id":"r3","source":"TFAH","text":"x y","mentions":[{"kind":"Stage","char_start":0,"char_end":1}],"relations":[]}"#;
        let err = parse_pathology_str(rec, Path::new("r")).unwrap_err().to_string();
        assert!(err.contains("Metas") && err.contains("Stage"), "{err}");
    }

    #[test]
    fn record_round_trip() {
        let c = parse_pathology_str(SIZE_RECORD, Path::new("r")).unwrap();
        let line = to_record(&c.documents[0]).unwrap();
        assert_eq!(parse_record(&line).unwrap(), c.documents[0]);
    }
}
