//! Document-level biomedical relation extraction.
//!
//! The model embeds each token with word and entity-relative position
//! vectors, encodes the sequence with a Bi-LSTM, and feeds the states to two
//! branches: multi-head self-attention, and a GCN that propagates over three
//! corpus-level word graphs (semantic, syntactic, sequence/PMI) projected onto
//! the document. Max-pooled branch outputs are concatenated and classified.
//!
//! Everything runs on a small reverse-mode autodiff engine ([`autodiff`]) in
//! `f64`. The guide under `book/` walks through each part; its code blocks are
//! compiled as doc-tests of this crate.

pub mod autodiff;
pub mod corpus;
mod error;
pub mod eval;
pub mod layers;
pub mod pipeline;
pub mod textgraph;
pub mod training;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/autodiff.md")]
    mod autodiff {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/text-graphs.md")]
    mod text_graphs {}
    #[doc = include_str!("../../../book/src/layers.md")]
    mod layers {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
