use rand::Rng;

use super::params::{glorot, Binder, ParamStore};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn prefix(self) -> &'static str {
        match self {
            Direction::Forward => "lstm.fwd",
            Direction::Backward => "lstm.bwd",
        }
    }
}

/// Gate weights of one direction. Gates are packed as `[i | f | g | o]`.
#[derive(Clone, Copy, Debug)]
pub struct LstmVars {
    pub w_x: Var,
    pub w_h: Var,
    pub b: Var,
    pub hidden: usize,
}

impl LstmVars {
    pub fn bind(tape: &mut Tape, binder: &mut Binder<'_>, dir: Direction) -> Result<Self> {
        let p = dir.prefix();
        let w_h = binder.var(tape, &format!("{p}.w_h"))?;
        let hidden = tape.shape(w_h)[0];
        Ok(LstmVars {
            w_x: binder.var(tape, &format!("{p}.w_x"))?,
            w_h,
            b: binder.var(tape, &format!("{p}.b"))?,
            hidden,
        })
    }
}

pub fn init_lstm<R: Rng + ?Sized>(store: &mut ParamStore, input: usize, hidden: usize, rng: &mut R) -> Result<()> {
    for dir in [Direction::Forward, Direction::Backward] {
        let p = dir.prefix();
        store.insert(format!("{p}.w_x"), glorot(input, 4 * hidden, rng))?;
        store.insert(format!("{p}.w_h"), glorot(hidden, 4 * hidden, rng))?;
        let mut b = vec![0.0; 4 * hidden];
        b[hidden..2 * hidden].iter_mut().for_each(|v| *v = 1.0);
        store.insert(format!("{p}.b"), Tensor::vector(b))?;
    }
    Ok(())
}

/// Cell update from pre-activations `z = x·W_x + h·W_h + b` (`1×4h`).
fn cell(tape: &mut Tape, z: Var, c_prev: Var, hidden: usize) -> Result<(Var, Var)> {
    let parts = tape.split(z, 1, &[hidden; 4])?;
    let i = tape.sigmoid(parts[0]);
    let f = tape.sigmoid(parts[1]);
    let g = tape.tanh(parts[2]);
    let o = tape.sigmoid(parts[3]);
    let keep = tape.hadamard(f, c_prev)?;
    let write = tape.hadamard(i, g)?;
    let c = tape.add(keep, write)?;
    let tc = tape.tanh(c);
    let h = tape.hadamard(o, tc)?;
    Ok((h, c))
}

/// One LSTM step on a `1×input` row.
pub fn lstm_step(tape: &mut Tape, p: &LstmVars, x_t: Var, h_prev: Var, c_prev: Var) -> Result<(Var, Var)> {
    let zx = tape.matmul(x_t, p.w_x)?;
    let zh = tape.matmul(h_prev, p.w_h)?;
    let z = tape.add(zx, zh)?;
    let z = tape.add_bias(z, p.b)?;
    cell(tape, z, c_prev, p.hidden)
}

/// Runs one direction over an `n×input` sequence and returns `n×hidden`
/// states in input order.
pub fn lstm_direction(tape: &mut Tape, p: &LstmVars, x: Var, dir: Direction) -> Result<Var> {
    let n = tape.shape(x)[0];
    let zx = tape.matmul(x, p.w_x)?;
    let zx = tape.add_bias(zx, p.b)?;
    let mut h = tape.constant(Tensor::zeros(vec![1, p.hidden]));
    let mut c = tape.constant(Tensor::zeros(vec![1, p.hidden]));
    let mut states = vec![h; n];
    let order: Box<dyn Iterator<Item = usize>> = match dir {
        Direction::Forward => Box::new(0..n),
        Direction::Backward => Box::new((0..n).rev()),
    };
    for t in order {
        let zt = tape.row(zx, t)?;
        let zh = tape.matmul(h, p.w_h)?;
        let z = tape.add(zt, zh)?;
        (h, c) = cell(tape, z, c, p.hidden)?;
        states[t] = h;
    }
    tape.concat(&states, 0)
}

/// Bi-LSTM over `n×input`: per-position `[forward ⊕ backward]`, `n×2h`.
pub fn bilstm(tape: &mut Tape, binder: &mut Binder<'_>, x: Var) -> Result<Var> {
    if tape.shape(x).first().copied().unwrap_or(0) == 0 {
        return Err(Error::invalid("Bi-LSTM over an empty sequence"));
    }
    let fwd = LstmVars::bind(tape, binder, Direction::Forward)?;
    let bwd = LstmVars::bind(tape, binder, Direction::Backward)?;
    let hf = lstm_direction(tape, &fwd, x, Direction::Forward)?;
    let hb = lstm_direction(tape, &bwd, x, Direction::Backward)?;
    tape.concat(&[hf, hb], 1)
}
