use std::collections::BTreeMap;

use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

/// Adam with bias correction. Moments are keyed by parameter name so a
/// subset of parameters (e.g. with frozen layers) can be stepped.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub t: u64,
    pub moments: BTreeMap<String, Moments>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        AdamState {
            config,
            t: 0,
            moments: BTreeMap::new(),
        }
    }

    /// One update over `params`, then zeroes their gradients.
    pub fn step<'a, I>(&mut self, params: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, &'a mut Tensor)>,
    {
        let params: Vec<(&str, &mut Tensor)> = params.into_iter().collect();
        for (name, p) in &params {
            match &p.grad {
                None => return Err(Error::MissingGrad(name.to_string())),
                Some(g) if g.len() != p.len() => return Err(Error::MissingGrad(name.to_string())),
                _ => {}
            }
            if let Some(m) = self.moments.get(*name) {
                if m.m.len() != p.len() {
                    return Err(Error::invalid(format!(
                        "optimizer state for `{name}` has {} entries, parameter has {}",
                        m.m.len(),
                        p.len()
                    )));
                }
            }
        }
        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for (name, p) in params {
            let st = self.moments.entry(name.to_string()).or_insert_with(|| Moments {
                m: vec![0.0; p.len()],
                v: vec![0.0; p.len()],
            });
            let grad = p.grad.take().expect("checked above");
            for (i, (w, g)) in p.values_mut().iter_mut().zip(&grad).enumerate() {
                st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
                st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * g * g;
                let m_hat = st.m[i] / c1;
                let v_hat = st.v[i] / c2;
                *w -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
            p.grad = Some(vec![0.0; grad.len()]);
        }
        Ok(())
    }
}
