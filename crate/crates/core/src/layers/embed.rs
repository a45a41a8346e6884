use rand::Rng;

use super::config::ModelConfig;
use super::params::{glorot, Binder, ParamStore};
use crate::autodiff::{Tape, Tensor, Var};
use crate::corpus::EmbeddingTable;
use crate::error::{Error, Result};

pub const WORD_TABLE: &str = "embed.word";
pub const POS_HEAD: &str = "embed.pos_head";
pub const POS_TAIL: &str = "embed.pos_tail";

/// Row of the position table for token `i` relative to `anchor`.
pub fn position_row(i: usize, anchor: usize, max_dist: usize) -> usize {
    let rel = (i as i64 - anchor as i64).clamp(-(max_dist as i64), max_dist as i64);
    (rel + max_dist as i64) as usize
}

/// Registers the embedding parameters: position tables when positions are
/// used, and a trainable word table when pretrained vectors are not.
pub fn init_embeddings<R: Rng + ?Sized>(
    store: &mut ParamStore,
    config: &ModelConfig,
    vocab_size: usize,
    rng: &mut R,
) -> Result<()> {
    if !config.use_pretrained {
        let mut t = Tensor::zeros(vec![vocab_size, config.d_w]);
        t.values_mut()
            .iter_mut()
            .skip(config.d_w)
            .for_each(|v| *v = rng.gen_range(-0.25..=0.25));
        store.insert(WORD_TABLE, t)?;
    }
    if config.use_position {
        store.insert(POS_HEAD, glorot(config.position_rows(), config.d_p, rng))?;
        store.insert(POS_TAIL, glorot(config.position_rows(), config.d_p, rng))?;
    }
    Ok(())
}

/// Builds `n×(d_w + 2·d_p)` token inputs: word vector, then positions
/// relative to the head and tail mention starts.
pub fn embed_sequence(
    tape: &mut Tape,
    binder: &mut Binder<'_>,
    config: &ModelConfig,
    static_words: Option<&EmbeddingTable>,
    ids: &[usize],
    head_start: usize,
    tail_start: usize,
) -> Result<Var> {
    if ids.is_empty() {
        return Err(Error::invalid("cannot embed an empty sequence"));
    }
    let words = if config.use_pretrained {
        let table = static_words.ok_or_else(|| Error::invalid("pretrained variant without a word table"))?;
        if table.dim() != config.d_w {
            return Err(Error::dim("word table", table.table.shape(), &[table.rows(), config.d_w]));
        }
        tape.constant(table.table.gather_rows(ids)?)
    } else {
        binder.rows(tape, WORD_TABLE, ids)?
    };
    if !config.use_position {
        return Ok(words);
    }
    let rows = |anchor| -> Vec<usize> { (0..ids.len()).map(|i| position_row(i, anchor, config.max_dist)).collect() };
    let head = binder.var(tape, POS_HEAD)?;
    let tail = binder.var(tape, POS_TAIL)?;
    let ph = tape.gather_rows(head, &rows(head_start))?;
    let pt = tape.gather_rows(tail, &rows(tail_start))?;
    tape.concat(&[words, ph, pt], 1)
}
