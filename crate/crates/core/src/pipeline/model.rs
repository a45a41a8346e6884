use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::example::Example;
use crate::autodiff::{compare_with_central_differences, DropoutMode, Tape, Tensor, Var};
use crate::corpus::{EmbeddingTable, Vocabulary};
use crate::error::{Error, Result};
use crate::layers::{
    bilstm, embed_sequence, gcn_branch, glorot, init_attention, init_embeddings, init_gcn, init_lstm,
    multi_head_attention, AttentionMode, Binder, ModelConfig, ParamGrads, ParamStore,
};
use crate::textgraph::GraphKind;

pub const CLS_W: &str = "cls.w";
pub const CLS_B: &str = "cls.b";

/// Configuration, parameters, and the vocabulary and static word vectors
/// the parameters were built against.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub params: ParamStore,
    pub vocab: Arc<Vocabulary>,
    /// Frozen word vectors, used when `config.use_pretrained` is set.
    pub words: Option<Arc<EmbeddingTable>>,
    pub seed: u64,
}

pub fn init_classifier(store: &mut ParamStore, config: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    store.insert(CLS_W, glorot(config.classifier_width(), config.label_count, rng))?;
    store.insert(CLS_B, Tensor::zeros(vec![config.label_count]))
}

pub fn init_model(
    config: &ModelConfig,
    vocab: Arc<Vocabulary>,
    words: Option<Arc<EmbeddingTable>>,
    seed: u64,
) -> Result<ModelState> {
    config.validate()?;
    if config.use_pretrained {
        let w = words
            .as_ref()
            .ok_or_else(|| Error::invalid("the pretrained variant needs a word-vector table"))?;
        if w.dim() != config.d_w || w.rows() != vocab.len() {
            return Err(Error::dim("word table", w.table.shape(), &[vocab.len(), config.d_w]));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParamStore::new();
    init_embeddings(&mut params, config, vocab.len(), &mut rng)?;
    init_lstm(&mut params, config.input_width(), config.hidden, &mut rng)?;
    let heads = config.effective_heads();
    if heads > 0 {
        init_attention(&mut params, config.d_model(), heads, &mut rng)?;
    }
    if config.use_gcn {
        init_gcn(&mut params, config.gcn_layers, config.d_model(), &mut rng)?;
    }
    init_classifier(&mut params, config, &mut rng)?;
    Ok(ModelState {
        config: config.clone(),
        params,
        vocab,
        words: if config.use_pretrained { words } else { None },
        seed,
    })
}

/// Total parameter count and the count per group.
pub fn count_parameters(model: &ModelState) -> (usize, BTreeMap<String, usize>) {
    (model.params.count(), model.params.group_counts())
}

/// Dropout stream for one instance of one batch.
pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Records one instance's forward pass and returns its `1×C` logits.
pub fn forward_instance(
    model: &ModelState,
    tape: &mut Tape,
    binder: &mut Binder<'_>,
    ex: &Example,
    mode: DropoutMode,
    rng: &mut ChaCha8Rng,
) -> Result<Var> {
    let c = &model.config;
    if let Some(&bad) = ex.ids.iter().find(|&&i| i >= model.vocab.len()) {
        return Err(Error::invalid(format!("token id {bad} outside a vocabulary of {}", model.vocab.len())));
    }
    let x = embed_sequence(tape, binder, c, model.words.as_deref(), &ex.ids, ex.head_start, ex.tail_start)?;
    let x = tape.dropout(x, c.embed_dropout, mode, rng)?;
    let h = bilstm(tape, binder, x)?;
    let h = tape.dropout(h, c.dropout, mode, rng)?;
    let attended = match c.attention {
        AttentionMode::None => h,
        _ => multi_head_attention(tape, binder, h, c.effective_heads())?,
    };
    let mut pooled = vec![tape.max_pool_over_time(attended)?];
    if c.use_gcn {
        let adj = ex
            .adjacency
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("example from {} has no adjacency", ex.doc_id)))?;
        let pairs: Vec<(GraphKind, Var)> = GraphKind::ALL
            .iter()
            .zip(adj.iter())
            .map(|(&k, a)| (k, tape.constant(a.clone())))
            .collect();
        let g = gcn_branch(tape, binder, h, &pairs, c.gcn_layers, c.gcn_activation)?;
        pooled.push(tape.max_pool_over_time(g)?);
    }
    let feat = tape.concat(&pooled, 1)?;
    let feat = tape.dropout(feat, c.feature_dropout, mode, rng)?;
    let w = binder.var(tape, CLS_W)?;
    let b = binder.var(tape, CLS_B)?;
    let z = tape.matmul(feat, w)?;
    tape.add_bias(z, b)
}

/// Eval-mode logits, one row per example.
pub fn forward(model: &ModelState, examples: &[Example]) -> Result<Tensor> {
    if examples.is_empty() {
        return Err(Error::invalid("forward over an empty batch"));
    }
    let rows = examples
        .par_iter()
        .map(|ex| {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&model.params);
            let mut rng = instance_rng(0, 0);
            let v = forward_instance(model, &mut tape, &mut binder, ex, DropoutMode::Eval, &mut rng)?;
            Ok(tape.value(v).to_vec())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Tensor::from_rows(&rows)
}

/// Row-wise softmax of `forward`.
pub fn predict_proba(model: &ModelState, examples: &[Example]) -> Result<Vec<Vec<f64>>> {
    let logits = forward(model, examples)?;
    Ok((0..logits.rows()).map(|r| softmax_row(logits.row(r))).collect())
}

/// Index of the first maximum.
pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Eval-mode argmax labels.
pub fn predict(model: &ModelState, examples: &[Example]) -> Result<Vec<usize>> {
    let logits = forward(model, examples)?;
    Ok((0..logits.rows()).map(|r| argmax(logits.row(r))).collect())
}

pub fn softmax_row(row: &[f64]) -> Vec<f64> {
    let lse = crate::autodiff::log_sum_exp(row);
    row.iter().map(|v| (v - lse).exp()).collect()
}

/// Mean eval-mode cross-entropy.
pub fn loss(model: &ModelState, examples: &[Example]) -> Result<f64> {
    let logits = forward(model, examples)?;
    let total: f64 = examples
        .iter()
        .enumerate()
        .map(|(r, ex)| crate::autodiff::log_sum_exp(logits.row(r)) - logits.row(r)[ex.label])
        .sum();
    Ok(total / examples.len() as f64)
}

/// Loss and per-instance parameter gradients of a mini-batch. Each
/// instance's loss is scaled by `1/b`, so the gradients sum to the
/// gradient of the batch-mean loss.
#[derive(Debug)]
pub struct BatchGradients {
    pub loss: f64,
    pub per_instance: Vec<ParamGrads>,
    /// Argmax of each instance's logits under the same mode.
    pub predictions: Vec<usize>,
}

impl BatchGradients {
    /// Adds the gradients into `store` in instance order.
    pub fn apply_to(&self, store: &mut ParamStore) -> Result<()> {
        self.per_instance.iter().try_for_each(|g| g.apply_to(store))
    }
}

pub fn batch_gradients(model: &ModelState, batch: &[&Example], mode: DropoutMode, seed: u64) -> Result<BatchGradients> {
    if batch.is_empty() {
        return Err(Error::invalid("empty mini-batch"));
    }
    let scale = 1.0 / batch.len() as f64;
    let results = batch
        .par_iter()
        .enumerate()
        .map(|(k, ex)| {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&model.params);
            let mut rng = instance_rng(seed, k as u64);
            let logits = forward_instance(model, &mut tape, &mut binder, ex, mode, &mut rng)?;
            let pred = argmax(tape.value(logits));
            let l = tape.cross_entropy(logits, &[ex.label])?;
            let l = tape.scale(l, scale);
            let grads = tape.backward(l)?;
            Ok((tape.scalar_value(l), binder.collect(&grads), pred))
        })
        .collect::<Result<Vec<(f64, ParamGrads, usize)>>>()?;
    let loss = results.iter().map(|(l, _, _)| l).sum();
    let predictions = results.iter().map(|(_, _, p)| *p).collect();
    Ok(BatchGradients {
        loss,
        per_instance: results.into_iter().map(|(_, g, _)| g).collect(),
        predictions,
    })
}

/// Which parameter coordinates a gradient check visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordSampling {
    /// Up to `n` coordinates of every parameter tensor.
    PerParameter(usize),
    /// `n` coordinates of the flattened parameter vector.
    Global(usize),
}

/// Compares the eval-mode gradient of the mean loss over `examples` with
/// central differences at the sampled coordinates. Returns the maximum
/// relative error.
pub fn check_model_gradients(
    model: &ModelState,
    examples: &[Example],
    sampling: CoordSampling,
    epsilon: f64,
    seed: u64,
) -> Result<f64> {
    let refs: Vec<&Example> = examples.iter().collect();
    let mut analytic_store = model.params.clone();
    analytic_store.zero_grads();
    batch_gradients(model, &refs, DropoutMode::Eval, 0)?.apply_to(&mut analytic_store)?;
    let mut names = Vec::new();
    let mut offsets = Vec::new();
    let mut analytic = Vec::new();
    for (name, t) in analytic_store.iter() {
        names.push(name.to_string());
        offsets.push(analytic.len());
        analytic.extend(t.grad.clone().unwrap_or_else(|| vec![0.0; t.len()]));
    }
    let opts = |k: usize, s: u64| crate::autodiff::GradCheckOptions {
        epsilon,
        max_coords: Some(k),
        seed: s,
    };
    let coords: Vec<usize> = match sampling {
        CoordSampling::Global(k) => crate::autodiff::sample_coords(analytic.len(), &opts(k, seed)),
        CoordSampling::PerParameter(k) => (0..names.len())
            .flat_map(|p| {
                let len = analytic_store.get(&names[p]).map_or(0, |t| t.len());
                let base = offsets[p];
                crate::autodiff::sample_coords(len, &opts(k, seed.wrapping_add(p as u64)))
                    .into_iter()
                    .map(move |c| c + base)
                    .collect::<Vec<_>>()
            })
            .collect(),
    };
    let locate = |c: usize| {
        let p = offsets.partition_point(|&o| o <= c) - 1;
        (p, c - offsets[p])
    };
    let mut probe = model.clone();
    compare_with_central_differences(&analytic, &coords, epsilon, |c, delta| {
        let (p, i) = locate(c);
        let original = probe.params.get(&names[p])?.values()[i];
        probe.params.get_mut(&names[p])?.values_mut()[i] = original + delta;
        let l = loss(&probe, examples);
        probe.params.get_mut(&names[p])?.values_mut()[i] = original;
        l
    })
}
