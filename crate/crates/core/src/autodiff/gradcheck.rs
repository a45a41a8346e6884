//! Central finite-difference verification of tape gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Check at most this many coordinates, sampled with `seed`. `None` checks all.
    pub max_coords: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            epsilon: 1e-5,
            max_coords: None,
            seed: 0,
        }
    }
}

/// `|a - c| / max(|a|, |c|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Picks the coordinates to check out of `n`.
pub fn sample_coords(n: usize, opts: &GradCheckOptions) -> Vec<usize> {
    match opts.max_coords {
        Some(k) if k < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut idx = sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..n).collect(),
    }
}

/// Compares `analytic[c]` against central differences of `eval` for each
/// coordinate `c`. `eval(c, delta)` must return the scalar function value
/// with coordinate `c` shifted by `delta` (and `delta = 0` the base value).
pub fn compare_with_central_differences<F>(analytic: &[f64], coords: &[usize], epsilon: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let Some(&probe) = coords.first() else {
        return Ok(0.0);
    };
    let a = eval(probe, 0.0)?;
    let b = eval(probe, 0.0)?;
    if a.to_bits() != b.to_bits() {
        return Err(Error::NonDeterministic);
    }
    let mut worst = 0.0f64;
    for &c in coords {
        let plus = eval(c, epsilon)?;
        let minus = eval(c, -epsilon)?;
        let numeric = (plus - minus) / (2.0 * epsilon);
        worst = worst.max(relative_error(analytic[c], numeric));
    }
    Ok(worst)
}

/// Maximum relative error between the tape gradient of scalar `f` at `x`
/// and central finite differences.
pub fn grad_check<F>(f: F, x: &Tensor, opts: &GradCheckOptions) -> Result<f64>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    let mut tape = Tape::new();
    let xv = tape.param(x);
    let out = f(&mut tape, xv)?;
    let grads = tape.backward(out)?;
    let analytic = grads.get(xv).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; x.len()]);
    let coords = sample_coords(x.len(), opts);
    compare_with_central_differences(&analytic, &coords, opts.epsilon, |c, delta| {
        let mut shifted = x.clone();
        shifted.values_mut()[c] += delta;
        let mut t = Tape::new();
        let v = t.constant(shifted);
        let out = f(&mut t, v)?;
        Ok(t.scalar_value(out))
    })
}
