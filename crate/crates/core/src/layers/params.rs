use std::collections::BTreeMap;

use rand::Rng;

use crate::autodiff::{Gradients, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Named parameter registry. Names are dotted paths; the first segment is
/// the parameter group used for accounting.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: BTreeMap<String, Tensor>,
}

/// Registries are equal when names, shapes and values agree bitwise;
/// gradient slots are scratch space and are ignored.
impl PartialEq for ParamStore {
    fn eq(&self, other: &Self) -> bool {
        self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|((na, a), (nb, b))| {
                na == nb
                    && a.shape() == b.shape()
                    && a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, t: Tensor) -> Result<()> {
        let name = name.into();
        if self.params.contains_key(&name) {
            return Err(Error::invalid(format!("parameter {name} registered twice")));
        }
        self.params.insert(name, t.with_grad());
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.params
            .get(name)
            .ok_or_else(|| Error::invalid(format!("no parameter named {name}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.params
            .get_mut(name)
            .ok_or_else(|| Error::invalid(format!("no parameter named {name}")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Tensor> {
        self.params.remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.params.values().map(Tensor::len).sum()
    }

    /// Parameter counts per group (first dotted segment).
    pub fn group_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for (name, t) in &self.params {
            let group = name.split('.').next().unwrap_or(name);
            *out.entry(group.to_string()).or_default() += t.len();
        }
        out
    }

    pub fn zero_grads(&mut self) {
        self.params.values_mut().for_each(Tensor::zero_grad);
    }
}

/// Glorot-uniform `rows×cols` matrix.
pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let values = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
    Tensor::new(vec![rows, cols], values).expect("positive dims")
}

/// Gradient of one parameter from one tape: dense, or only some rows.
#[derive(Clone, Debug, PartialEq)]
pub enum GradPiece {
    Dense(Vec<f64>),
    Rows { ids: Vec<usize>, values: Vec<f64> },
}

/// Per-parameter gradients collected from a tape, keyed by name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamGrads {
    pub pieces: BTreeMap<String, GradPiece>,
}

impl ParamGrads {
    /// Adds these gradients into the `grad` buffers of `store`.
    pub fn apply_to(&self, store: &mut ParamStore) -> Result<()> {
        for (name, piece) in &self.pieces {
            let t = store.get_mut(name)?;
            match piece {
                GradPiece::Dense(g) => t.accumulate_grad(g),
                GradPiece::Rows { ids, values } => {
                    let d = t.cols();
                    if t.grad.is_none() {
                        t.zero_grad();
                    }
                    let grad = t.grad.as_mut().expect("just zeroed");
                    for (k, &i) in ids.iter().enumerate() {
                        for j in 0..d {
                            grad[i * d + j] += values[k * d + j];
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

enum Binding {
    Full(Var),
    Rows(Var, Vec<usize>),
}

/// Lazily records parameters from a [`ParamStore`] onto a tape, so each
/// forward pass only copies what it touches.
pub struct Binder<'a> {
    store: &'a ParamStore,
    bound: BTreeMap<String, Binding>,
}

impl<'a> Binder<'a> {
    pub fn new(store: &'a ParamStore) -> Self {
        Binder {
            store,
            bound: BTreeMap::new(),
        }
    }

    pub fn store(&self) -> &'a ParamStore {
        self.store
    }

    pub fn var(&mut self, tape: &mut Tape, name: &str) -> Result<Var> {
        match self.bound.get(name) {
            Some(Binding::Full(v)) => Ok(*v),
            Some(Binding::Rows(..)) => Err(Error::invalid(format!("{name} is already bound by rows"))),
            None => {
                let v = tape.param(self.store.get(name)?);
                self.bound.insert(name.to_string(), Binding::Full(v));
                Ok(v)
            }
        }
    }

    /// Binds only the selected rows of a table parameter and returns the
    /// rows `ids` as an `ids.len()×d` matrix.
    pub fn rows(&mut self, tape: &mut Tape, name: &str, ids: &[usize]) -> Result<Var> {
        if self.bound.contains_key(name) {
            return Err(Error::invalid(format!("{name} bound twice")));
        }
        let table = self.store.get(name)?;
        let mut unique: Vec<usize> = ids.to_vec();
        unique.sort_unstable();
        unique.dedup();
        let sub = table.gather_rows(&unique)?;
        let v = tape.param(&sub);
        let local: Vec<usize> = ids
            .iter()
            .map(|i| unique.binary_search(i).expect("id collected above"))
            .collect();
        self.bound.insert(name.to_string(), Binding::Rows(v, unique));
        tape.gather_rows(v, &local)
    }

    pub fn bound_names(&self) -> impl Iterator<Item = &str> {
        self.bound.keys().map(String::as_str)
    }

    pub fn collect(&self, grads: &Gradients) -> ParamGrads {
        let mut pieces = BTreeMap::new();
        for (name, b) in &self.bound {
            let piece = match b {
                Binding::Full(v) => {
                    let n = self.store.get(name).map(Tensor::len).unwrap_or(0);
                    GradPiece::Dense(grads.get(*v).map_or_else(|| vec![0.0; n], <[f64]>::to_vec))
                }
                Binding::Rows(v, ids) => {
                    let d = self.store.get(name).map(Tensor::cols).unwrap_or(0);
                    GradPiece::Rows {
                        ids: ids.clone(),
                        values: grads.get(*v).map_or_else(|| vec![0.0; ids.len() * d], <[f64]>::to_vec),
                    }
                }
            };
            pieces.insert(name.clone(), piece);
        }
        ParamGrads { pieces }
    }
}
