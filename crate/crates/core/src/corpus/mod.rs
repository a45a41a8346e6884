//! Corpus ingestion: the PubTator (CDR), ChemProt and pathology record
//! formats, dependency parses, vocabularies, pretrained vectors, candidate
//! generation, length normalization, folds and the synthetic report generator.

mod candidates;
mod chemprot;
mod conll;
mod document;
mod embeddings;
mod folds;
mod length;
mod pathology;
mod pubtator;
mod synth;
mod tokenize;
mod vocab;

pub use candidates::{generate_candidates, pathology_signature, subsample_negatives, Task};
pub use chemprot::{parse_chemprot, parse_chemprot_str};
pub use conll::{attach_dependencies, parse_conll_str, read_conll, ParseRow};
pub use document::{
    DepEdge, Document, EntityKind, EntityMention, GoldRelation, LabelSet, ParsedCorpus, RelationInstance, Source, Token,
    PATHOLOGY_KINDS,
};
pub use embeddings::{load_pretrained_vectors, load_vectors_str, EmbeddingTable};
pub use folds::{make_folds, FoldPlan, FoldSplit, DEV_FRACTION};
pub use length::{normalize_length, LengthLimits};
pub use pathology::{parse_pathology_records, parse_pathology_str, parse_record, subtask_instances, to_record, write_records};
pub use pubtator::{parse_pubtator, parse_pubtator_str};
pub use synth::{synth_corpus, SynthReport, SynthSpec};
pub use tokenize::{sentence_spans, tokenize};
pub use vocab::{Vocabulary, PAD, PAD_ID, UNK, UNK_ID};
