use std::collections::HashMap;
use std::sync::Arc;

use crate::autodiff::Tensor;
use crate::corpus::{Document, RelationInstance, Vocabulary};
use crate::error::{Error, Result};
use crate::textgraph::{project_adjacency, CorpusGraphs, GraphKind};

type SharedAdjacency = Arc<[Tensor; 3]>;

/// A candidate pair ready for the model: token ids of the document, mention
/// anchors, normalized adjacency of the document, and the gold label.
#[derive(Clone, Debug)]
pub struct Example {
    pub doc_id: String,
    pub head_id: String,
    pub tail_id: String,
    pub ids: Arc<Vec<usize>>,
    pub head_start: usize,
    pub tail_start: usize,
    /// `D⁻¹A` per graph, indexed like [`GraphKind::ALL`]. Absent when no
    /// graphs were supplied.
    pub adjacency: Option<Arc<[Tensor; 3]>>,
    pub label: usize,
}

/// Maps instances onto their documents. Adjacency matrices are computed
/// once per document and shared by its instances.
pub fn prepare_examples(
    docs: &[Document],
    instances: &[RelationInstance],
    vocab: &Vocabulary,
    graphs: Option<&CorpusGraphs>,
) -> Result<Vec<Example>> {
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut cache: HashMap<&str, (Arc<Vec<usize>>, Option<SharedAdjacency>)> = HashMap::new();
    let mut out = Vec::with_capacity(instances.len());
    for inst in instances {
        let doc = *by_id
            .get(inst.doc_id.as_str())
            .ok_or_else(|| Error::invalid(format!("instance refers to unknown document {}", inst.doc_id)))?;
        if doc.tokens.is_empty() {
            return Err(Error::invalid(format!("document {} has no tokens", doc.id)));
        }
        let (ids, adjacency) = cache
            .entry(doc.id.as_str())
            .or_insert_with(|| {
                let ids = Arc::new(doc.tokens.iter().map(|t| vocab.id(&t.surface)).collect());
                let adj = graphs.map(|g| {
                    let a = project_adjacency(doc, vocab, g);
                    Arc::new(GraphKind::ALL.map(|k| a.normalized(k)))
                });
                (ids, adj)
            })
            .clone();
        let (head, tail) = (&doc.mentions[inst.head], &doc.mentions[inst.tail]);
        out.push(Example {
            doc_id: doc.id.clone(),
            head_id: head.id.clone(),
            tail_id: tail.id.clone(),
            ids,
            head_start: head.start(),
            tail_start: tail.start(),
            adjacency,
            label: inst.label,
        });
    }
    Ok(out)
}
