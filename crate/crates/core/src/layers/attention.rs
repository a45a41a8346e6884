use rand::Rng;

use super::params::{glorot, Binder, ParamStore};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// `softmax(Q·Kᵀ/√d)·V` with `d` the width of `Q`.
pub fn scaled_dot_attention(tape: &mut Tape, q: Var, k: Var, v: Var) -> Result<Var> {
    let (sq, sk, sv) = (tape.shape(q), tape.shape(k), tape.shape(v));
    if sq.len() != 2 || sk.len() != 2 || sq[1] != sk[1] {
        return Err(Error::dim("attention Q/K", sq, sk));
    }
    if sv.len() != 2 || sk[0] != sv[0] {
        return Err(Error::dim("attention K/V", sk, sv));
    }
    let d = sq[1] as f64;
    let kt = tape.transpose(k)?;
    let scores = tape.matmul(q, kt)?;
    let scores = tape.scale(scores, 1.0 / d.sqrt());
    let weights = tape.softmax(scores, 1)?;
    tape.matmul(weights, v)
}

fn head_name(h: usize, part: &str) -> String {
    format!("attn.h{h}.{part}")
}

/// Per-head `d_model×(d_model/h)` projections for Q, K and V, plus the
/// output matrix when there is more than one head to mix.
pub fn init_attention<R: Rng + ?Sized>(store: &mut ParamStore, d_model: usize, heads: usize, rng: &mut R) -> Result<()> {
    if heads == 0 || !d_model.is_multiple_of(heads) {
        return Err(Error::invalid(format!("{heads} heads do not divide width {d_model}")));
    }
    let dk = d_model / heads;
    for h in 0..heads {
        for m in ["q", "k", "v"] {
            store.insert(head_name(h, &format!("w_{m}")), glorot(d_model, dk, rng))?;
            store.insert(head_name(h, &format!("b_{m}")), Tensor::zeros(vec![dk]))?;
        }
    }
    if heads > 1 {
        store.insert("attn.w_o", glorot(d_model, d_model, rng))?;
        store.insert("attn.b_o", Tensor::zeros(vec![d_model]))?;
    }
    Ok(())
}

fn project(tape: &mut Tape, binder: &mut Binder<'_>, x: Var, h: usize, m: &str) -> Result<Var> {
    let w = binder.var(tape, &head_name(h, &format!("w_{m}")))?;
    let b = binder.var(tape, &head_name(h, &format!("b_{m}")))?;
    let y = tape.matmul(x, w)?;
    tape.add_bias(y, b)
}

/// Self-attention with `heads` heads over `n×d_model` states.
pub fn multi_head_attention(tape: &mut Tape, binder: &mut Binder<'_>, x: Var, heads: usize) -> Result<Var> {
    let d_model = tape.shape(x)[1];
    if heads == 0 || !d_model.is_multiple_of(heads) {
        return Err(Error::invalid(format!("{heads} heads do not divide width {d_model}")));
    }
    let mut outs = Vec::with_capacity(heads);
    for h in 0..heads {
        let q = project(tape, binder, x, h, "q")?;
        let k = project(tape, binder, x, h, "k")?;
        let v = project(tape, binder, x, h, "v")?;
        outs.push(scaled_dot_attention(tape, q, k, v)?);
    }
    if heads == 1 {
        return Ok(outs[0]);
    }
    let cat = tape.concat(&outs, 1)?;
    let w = binder.var(tape, "attn.w_o")?;
    let b = binder.var(tape, "attn.b_o")?;
    let y = tape.matmul(cat, w)?;
    tape.add_bias(y, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{grad_check, GradCheckOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Tensor {
        glorot(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn single_key_returns_its_value() {
        let mut t = Tape::new();
        let q = t.constant(random(2, 3, 1));
        let k = t.constant(random(1, 3, 2));
        let v = t.constant(Tensor::from_rows(&[vec![4.0, -1.0]]).unwrap());
        let out = scaled_dot_attention(&mut t, q, k, v).unwrap();
        assert_eq!(t.value(out), &[4.0, -1.0, 4.0, -1.0]);
    }

    #[test]
    fn zero_queries_average_values() {
        let mut t = Tape::new();
        let q = t.constant(Tensor::zeros(vec![1, 2]));
        let k = t.constant(random(3, 2, 3));
        let v = t.constant(Tensor::from_rows(&[vec![1.0], vec![2.0], vec![6.0]]).unwrap());
        let out = scaled_dot_attention(&mut t, q, k, v).unwrap();
        assert!((t.value(out)[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn scores_are_scaled_by_root_width() {
        // q·k = 2 with d = 4 gives a scaled score of 1 against a zero score.
        let mut t = Tape::new();
        let q = t.constant(Tensor::from_rows(&[vec![1.0, 1.0, 0.0, 0.0]]).unwrap());
        let k = t.constant(Tensor::from_rows(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0; 4]]).unwrap());
        let v = t.constant(Tensor::from_rows(&[vec![1.0], vec![0.0]]).unwrap());
        let out = scaled_dot_attention(&mut t, q, k, v).unwrap();
        let e = 1.0f64.exp();
        assert!((t.value(out)[0] - e / (e + 1.0)).abs() < 1e-15);
        let bad = t.constant(Tensor::zeros(vec![2, 3]));
        assert!(scaled_dot_attention(&mut t, q, bad, v).is_err());
    }

    #[test]
    fn eight_heads_keep_model_width() {
        let mut s = ParamStore::new();
        init_attention(&mut s, 256, 8, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(s.get("attn.h0.w_q").unwrap().shape(), &[256, 32]);
        assert_eq!(s.get("attn.w_o").unwrap().shape(), &[256, 256]);
        let mut t = Tape::new();
        let x = t.constant(random(5, 256, 1));
        let y = multi_head_attention(&mut t, &mut Binder::new(&s), x, 8).unwrap();
        assert_eq!(t.shape(y), &[5, 256]);
        assert!(multi_head_attention(&mut t, &mut Binder::new(&s), x, 3).is_err());
    }

    #[test]
    fn one_head_is_plain_attention() {
        let mut s = ParamStore::new();
        init_attention(&mut s, 6, 1, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let x = random(4, 6, 5);
        let mut t = Tape::new();
        let xv = t.constant(x.clone());
        let mh = multi_head_attention(&mut t, &mut Binder::new(&s), xv, 1).unwrap();
        let mut t2 = Tape::new();
        let mut b = Binder::new(&s);
        let xv2 = t2.constant(x);
        let q = project(&mut t2, &mut b, xv2, 0, "q").unwrap();
        let k = project(&mut t2, &mut b, xv2, 0, "k").unwrap();
        let v = project(&mut t2, &mut b, xv2, 0, "v").unwrap();
        let single = scaled_dot_attention(&mut t2, q, k, v).unwrap();
        assert_eq!(t.value(mh), t2.value(single));
    }

    #[test]
    fn query_row_ignores_key_order() {
        let mut s = ParamStore::new();
        init_attention(&mut s, 4, 2, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let x = random(5, 4, 9);
        let perm = [0, 3, 1, 4, 2];
        let xp = Tensor::from_rows(&perm.iter().map(|&r| x.row(r).to_vec()).collect::<Vec<_>>()).unwrap();
        let run = |input: &Tensor| {
            let mut t = Tape::new();
            let xv = t.constant(input.clone());
            let y = multi_head_attention(&mut t, &mut Binder::new(&s), xv, 2).unwrap();
            t.tensor(y)
        };
        let (a, b) = (run(&x), run(&xp));
        for (x, y) in a.row(0).iter().zip(b.row(0)) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn attention_passes_grad_check() {
        let mut s = ParamStore::new();
        init_attention(&mut s, 4, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let err = grad_check(
            |t, x| {
                let y = multi_head_attention(t, &mut Binder::new(&s), x, 2)?;
                let y = t.tanh(y);
                Ok(t.sum(y))
            },
            &random(3, 4, 6),
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(err <= 1e-4, "{err}");
    }
}
