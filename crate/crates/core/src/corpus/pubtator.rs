//! PubTator layout: `id|t|title`, `id|a|abstract`, tab-separated mention
//! lines `id start end text type concept`, relation lines `id CID chem dis`,
//! and a blank line between documents.

use std::path::Path;

use super::candidates::{generate_candidates, Task};
use super::document::{Document, EntityKind, GoldRelation, ParsedCorpus, Source};
use crate::error::{read_to_string, Error, Result};

#[derive(Default)]
struct Pending {
    id: Option<String>,
    title: Option<String>,
    abstract_text: Option<String>,
    mentions: Vec<(usize, usize, usize, EntityKind, Option<String>)>,
    relations: Vec<GoldRelation>,
}

pub fn parse_pubtator(path: &Path) -> Result<ParsedCorpus> {
    let text = read_to_string(path)?;
    parse_pubtator_str(&text, path)
}

pub fn parse_pubtator_str(input: &str, path: &Path) -> Result<ParsedCorpus> {
    let mut corpus = ParsedCorpus::default();
    let mut cur = Pending::default();
    for (n, line) in input.lines().enumerate() {
        let lineno = n + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut cur, &mut corpus, path)?;
            continue;
        }
        if let Some((id, rest)) = split_pipe(line) {
            let (field, content) = rest;
            check_id(&mut cur, id, path, lineno)?;
            match field {
                "t" => cur.title = Some(content.to_string()),
                "a" => cur.abstract_text = Some(content.to_string()),
                other => return Err(Error::parse(path, lineno, format!("unknown section `{other}`"))),
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        check_id(&mut cur, cols[0], path, lineno)?;
        match cols.len() {
            4 if cols[1] == "CID" => cur.relations.push(GoldRelation {
                head: cols[2].to_string(),
                tail: cols[3].to_string(),
                kind: "CID".into(),
            }),
            n if n >= 5 => {
                let start: usize = cols[1]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad start offset `{}`", cols[1])))?;
                let end: usize = cols[2]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad end offset `{}`", cols[2])))?;
                let kind = match cols[4] {
                    "Chemical" => EntityKind::Chemical,
                    "Disease" => EntityKind::Disease,
                    other => return Err(Error::parse(path, lineno, format!("unknown mention type `{other}`"))),
                };
                let concept = cols.get(5).map(|s| s.to_string()).filter(|s| !s.is_empty());
                cur.mentions.push((lineno, start, end, kind, concept));
            }
            _ => return Err(Error::parse(path, lineno, "malformed line")),
        }
    }
    flush(&mut cur, &mut corpus, path)?;
    Ok(corpus)
}

fn split_pipe(line: &str) -> Option<(&str, (&str, &str))> {
    let mut it = line.splitn(3, '|');
    let id = it.next()?;
    let field = it.next()?;
    let content = it.next()?;
    if id.contains('\t') || field.len() != 1 {
        return None;
    }
    Some((id, (field, content)))
}

fn check_id(cur: &mut Pending, id: &str, path: &Path, line: usize) -> Result<()> {
    match &cur.id {
        Some(existing) if existing != id => Err(Error::parse(
            path,
            line,
            format!("document id `{id}` inside block of `{existing}` (missing blank line?)"),
        )),
        Some(_) => Ok(()),
        None => {
            cur.id = Some(id.to_string());
            Ok(())
        }
    }
}

fn flush(cur: &mut Pending, corpus: &mut ParsedCorpus, path: &Path) -> Result<()> {
    let p = std::mem::take(cur);
    let Some(id) = p.id else { return Ok(()) };
    let title = p.title.unwrap_or_default();
    let text = match p.abstract_text {
        Some(a) => format!("{title} {a}"),
        None => title,
    };
    let mut doc = Document::from_text(id, Source::Cdr, text);
    for (i, (lineno, start, end, kind, concept)) in p.mentions.into_iter().enumerate() {
        doc.add_mention(format!("T{i}"), kind, start, end, concept)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    }
    doc.relations = p.relations;
    doc.linear_chain();
    corpus.instances.extend(generate_candidates(&doc, Task::Cdr));
    corpus.documents.push(doc);
    Ok(())
}
