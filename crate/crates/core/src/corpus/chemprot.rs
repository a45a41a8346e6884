//! ChemProt three-file layout (abstracts, entities, relations), all
//! tab-separated and keyed by PMID.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::candidates::{generate_candidates, Task};
use super::document::{Document, EntityKind, GoldRelation, ParsedCorpus, Source};
use crate::error::{read_to_string, Error, Result};

pub fn parse_chemprot(abstracts: &Path, entities: &Path, relations: &Path) -> Result<ParsedCorpus> {
    parse_chemprot_str(
        (&read_to_string(abstracts)?, abstracts),
        (&read_to_string(entities)?, entities),
        (&read_to_string(relations)?, relations),
    )
}

fn data_lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_chemprot_str(
    (abstracts, apath): (&str, &Path),
    (entities, epath): (&str, &Path),
    (relations, rpath): (&str, &Path),
) -> Result<ParsedCorpus> {
    let mut docs: BTreeMap<String, Document> = BTreeMap::new();
    let mut order = Vec::new();
    for (line, l) in data_lines(abstracts) {
        let cols: Vec<&str> = l.splitn(3, '\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(apath, line, "expected `pmid<TAB>title<TAB>abstract`"));
        }
        // Entity offsets count the title, one separator character, then the abstract.
        let text = format!("{}\t{}", cols[1], cols[2]);
        order.push(cols[0].to_string());
        docs.insert(cols[0].to_string(), Document::from_text(cols[0], Source::ChemProt, text));
    }

    for (line, l) in data_lines(entities) {
        let cols: Vec<&str> = l.split('\t').collect();
        if cols.len() < 5 {
            return Err(Error::parse(epath, line, "expected `pmid id type start end text`"));
        }
        let kind = match cols[2] {
            "CHEMICAL" => EntityKind::Chemical,
            t if t.starts_with("GENE") => EntityKind::GeneProtein,
            other => return Err(Error::parse(epath, line, format!("unknown entity type `{other}`"))),
        };
        let parse_off = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(epath, line, format!("bad offset `{s}`")))
        };
        let (start, end) = (parse_off(cols[3])?, parse_off(cols[4])?);
        let doc = docs
            .get_mut(cols[0])
            .ok_or_else(|| Error::parse(epath, line, format!("unknown document `{}`", cols[0])))?;
        doc.add_mention(cols[1], kind, start, end, None)
            .map_err(|e| Error::parse(epath, line, e.to_string()))?;
    }

    for (line, l) in data_lines(relations) {
        let cols: Vec<&str> = l.split('\t').collect();
        let group = cols.iter().find(|c| c.starts_with("CPR:"));
        let arg = |p: &str| cols.iter().find_map(|c| c.strip_prefix(p));
        let (Some(group), Some(a1), Some(a2)) = (group, arg("Arg1:"), arg("Arg2:")) else {
            return Err(Error::parse(rpath, line, "expected a CPR group and Arg1:/Arg2: fields"));
        };
        let doc = docs
            .get_mut(cols[0])
            .ok_or_else(|| Error::parse(rpath, line, format!("unknown document `{}`", cols[0])))?;
        for id in [a1, a2] {
            if doc.mention_index(id).is_none() {
                return Err(Error::UnknownEntity(format!("{}:{id}", cols[0])));
            }
        }
        doc.relations.push(GoldRelation {
            head: a1.to_string(),
            tail: a2.to_string(),
            kind: group.to_string(),
        });
    }

    let mut corpus = ParsedCorpus::default();
    for id in order {
        let mut doc = docs.remove(&id).expect("inserted above");
        doc.linear_chain();
        let instances = generate_candidates(&doc, Task::ChemProt);
        let emitted: HashSet<(&str, &str)> = instances
            .iter()
            .map(|i| (doc.mentions[i.head].id.as_str(), doc.mentions[i.tail].id.as_str()))
            .collect();
        corpus.skipped_relations += doc
            .relations
            .iter()
            .filter(|r| {
                !emitted.contains(&(r.head.as_str(), r.tail.as_str()))
                    && !emitted.contains(&(r.tail.as_str(), r.head.as_str()))
            })
            .count();
        corpus.instances.extend(instances);
        corpus.documents.push(doc);
    }
    Ok(corpus)
}
