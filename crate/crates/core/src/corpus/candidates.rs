use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::document::{Document, EntityKind, LabelSet, RelationInstance};

/// Which candidate-pair regime applies to a corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    /// Document-level chemical-induced-disease pairs.
    Cdr,
    /// Sentence-level chemical–protein pairs.
    ChemProt,
    /// One pathology variable as its own sub-task.
    Pathology(EntityKind),
}

impl Task {
    pub fn label_set(self) -> Arc<LabelSet> {
        match self {
            Task::Cdr => LabelSet::cdr(),
            Task::ChemProt => LabelSet::chemprot(),
            Task::Pathology(k) => LabelSet::pathology(k),
        }
    }
}

/// Mention kinds a pathology sub-task pairs: (anchor, value). The cancer
/// Type mention anchors every variable except Type itself, which is anchored
/// on the histology Subtype.
pub fn pathology_signature(kind: EntityKind) -> (EntityKind, EntityKind) {
    match kind {
        EntityKind::Type => (EntityKind::Subtype, EntityKind::Type),
        k => (EntityKind::Type, k),
    }
}

/// All typed candidate pairs of `doc` in canonical (head index, tail index) order.
pub fn generate_candidates(doc: &Document, task: Task) -> Vec<RelationInstance> {
    let labels = task.label_set();
    let negative = labels.negative.unwrap_or(0);
    let (head_kind, tail_kind) = match task {
        Task::Cdr => (EntityKind::Chemical, EntityKind::Disease),
        Task::ChemProt => (EntityKind::Chemical, EntityKind::GeneProtein),
        Task::Pathology(k) => pathology_signature(k),
    };
    let cid: HashSet<(&str, &str)> = doc
        .relations
        .iter()
        .filter(|r| r.kind == "CID")
        .map(|r| (r.head.as_str(), r.tail.as_str()))
        .collect();

    let mut out = Vec::new();
    for (hi, h) in doc.mentions.iter().enumerate() {
        if h.kind != head_kind {
            continue;
        }
        for (ti, t) in doc.mentions.iter().enumerate() {
            if t.kind != tail_kind || hi == ti {
                continue;
            }
            let label = match task {
                Task::Cdr => {
                    let positive = h
                        .normalized_ids()
                        .any(|c| t.normalized_ids().any(|d| cid.contains(&(c, d))));
                    usize::from(positive)
                }
                Task::ChemProt => {
                    let (sh, st) = (doc.sentence_of(h.start()), doc.sentence_of(t.start()));
                    if sh.is_none() || sh != st {
                        continue;
                    }
                    doc.relations
                        .iter()
                        .find(|r| (r.head == h.id && r.tail == t.id) || (r.head == t.id && r.tail == h.id))
                        .and_then(|r| labels.index_of(&r.kind))
                        .unwrap_or(negative)
                }
                Task::Pathology(k) => {
                    let related = doc
                        .relations
                        .iter()
                        .any(|r| r.kind == k.as_str() && r.head == h.id && r.tail == t.id);
                    usize::from(related)
                }
            };
            out.push(RelationInstance {
                doc_id: doc.id.clone(),
                head: hi,
                tail: ti,
                label,
                label_set: labels.clone(),
            });
        }
    }
    out
}

/// Keeps every positive and each negative with probability `ratio`.
pub fn subsample_negatives(instances: Vec<RelationInstance>, ratio: f64, seed: u64) -> Vec<RelationInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    instances
        .into_iter()
        .filter(|i| Some(i.label) != i.label_set.negative || rng.gen::<f64>() < ratio)
        .collect()
}
