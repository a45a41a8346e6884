use rand::Rng;

use super::params::{glorot, Binder, ParamStore};
use crate::autodiff::{Activation, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::textgraph::GraphKind;

pub fn gcn_name(layer: usize, kind: GraphKind, part: &str) -> String {
    format!("gcn.l{layer}.{}.{part}", kind.key())
}

/// Separate `W`, `b` per layer and per graph.
pub fn init_gcn<R: Rng + ?Sized>(store: &mut ParamStore, layers: usize, d_model: usize, rng: &mut R) -> Result<()> {
    for l in 0..layers {
        for kind in GraphKind::ALL {
            store.insert(gcn_name(l, kind, "w"), glorot(d_model, d_model, rng))?;
            store.insert(gcn_name(l, kind, "b"), Tensor::zeros(vec![d_model]))?;
        }
    }
    Ok(())
}

/// `f(D⁻¹A·H·W + b)`, where `norm_adj` already holds `D⁻¹A`.
pub fn gcn_propagate(tape: &mut Tape, h: Var, norm_adj: Var, w: Var, b: Var, f: Activation) -> Result<Var> {
    let (sh, sa) = (tape.shape(h), tape.shape(norm_adj));
    if sa.len() != 2 || sa[0] != sa[1] || sa[1] != sh[0] {
        return Err(Error::dim("gcn adjacency", sa, sh));
    }
    let hw = tape.matmul(h, w)?;
    let agg = tape.matmul(norm_adj, hw)?;
    let z = tape.add_bias(agg, b)?;
    Ok(tape.activation(f, z))
}

/// Replaces each node's per-graph states by their mean.
pub fn inter_graph_mix(tape: &mut Tape, states: &[Var]) -> Result<Vec<Var>> {
    let Some(&first) = states.first() else {
        return Err(Error::invalid("inter-graph mixing of no graphs"));
    };
    if states.len() == 1 {
        return Ok(states.to_vec());
    }
    let mut sum = first;
    for &s in &states[1..] {
        sum = tape.add(sum, s)?;
    }
    let mean = tape.scale(sum, 1.0 / states.len() as f64);
    Ok(vec![mean; states.len()])
}

/// `layers` rounds of per-graph propagation followed by mixing; returns the
/// mean of the final per-graph states.
pub fn gcn_branch(
    tape: &mut Tape,
    binder: &mut Binder<'_>,
    h0: Var,
    adjacency: &[(GraphKind, Var)],
    layers: usize,
    f: Activation,
) -> Result<Var> {
    let mut states = vec![h0; adjacency.len()];
    for l in 0..layers {
        let mut next = Vec::with_capacity(adjacency.len());
        for (&(kind, adj), &h) in adjacency.iter().zip(&states) {
            let w = binder.var(tape, &gcn_name(l, kind, "w"))?;
            let b = binder.var(tape, &gcn_name(l, kind, "b"))?;
            next.push(gcn_propagate(tape, h, adj, w, b, f)?);
        }
        states = inter_graph_mix(tape, &next)?;
    }
    // After mixing every state is the same mean.
    Ok(states[0])
}
